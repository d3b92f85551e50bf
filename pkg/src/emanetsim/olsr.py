"""Proactive link-state engine: periodic HELLO and TC emission, MPR selection,
topology database, and hop-count shortest routes.

Simplified relative to the full RFC: single interface, no link hysteresis, no
willingness. Entries expire after three emission intervals without refresh.
"""

import heapq

from . import packets as pk


def select_mprs(one_hop, two_hop_map):
    """Greedy multipoint-relay cover.

    one_hop: iterable of neighbor ids. two_hop_map: neighbor -> set of its
    neighbors. First picks neighbors that are the sole path to some strict
    two-hop node, then repeatedly the neighbor covering the most uncovered
    two-hop nodes; ties go to the lowest node id.
    """
    one = sorted(one_hop)
    one_set = set(one)
    reach = {n: set(two_hop_map.get(n, ())) - one_set for n in one}
    targets = set()
    for n in one:
        targets |= reach[n]
    mprs = set()
    covered = set()
    for t in sorted(targets):
        providers = [n for n in one if t in reach[n]]
        if len(providers) == 1:
            mprs.add(providers[0])
    for m in mprs:
        covered |= reach[m]
    while covered < targets:
        best = None
        best_gain = -1
        for n in one:
            if n in mprs:
                continue
            gain = len(reach[n] - covered)
            if gain > best_gain:
                best = n
                best_gain = gain
        if best is None or best_gain <= 0:
            break
        mprs.add(best)
        covered |= reach[best]
    return mprs


def shortest_routes(self_id, one_hop, edges):
    """Hop-count shortest paths over the known graph.

    edges: dict node -> iterable of adjacent nodes (need not be symmetric;
    symmetrized here). Returns dest -> (next_hop, hops). Among equal-length
    paths the lowest next-hop id wins.
    """
    adj = {}

    def add(a, b):
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    for n in one_hop:
        add(self_id, n)
    for a, nbrs in edges.items():
        for b in nbrs:
            add(a, b)

    routes = {}
    settled = {self_id}
    frontier = []
    for n in sorted(one_hop):
        heapq.heappush(frontier, (1, n, n))
    while frontier:
        hops, next_hop, node = heapq.heappop(frontier)
        if node in settled:
            continue
        settled.add(node)
        routes[node] = (next_hop, hops)
        for nb in sorted(adj.get(node, ())):
            if nb not in settled:
                heapq.heappush(frontier, (hops + 1, next_hop, nb))
    return routes


class OlsrNode:
    """One node's OLSR engine; drives emissions through the world's channel."""

    def __init__(self, world, node):
        self.world = world
        self.node = node
        self.cfg = world.cfg
        self.enabled = True
        # neighbor -> expiry
        self.one_hop = {}
        # neighbor -> (set of its neighbors, expiry)
        self.two_hop = {}
        self.mpr_set = set()
        # selector -> expiry
        self.mpr_selectors = {}
        # origin -> (advertised tuple, seq, expiry)
        self.topology = {}
        self.msg_seq = 0
        self._tc_seen = {}
        self._routes = {}
        self._dirty = True
        self._next_expiry = float("inf")
        self.on_tc_processed = None  # hook for the adaptive layer

    # -- lifecycle ---------------------------------------------------------

    def boot(self):
        stream = self.node.streams["proto"]
        hello_at = stream.uniform(0.0, self.cfg.hello_interval)
        tc_at = stream.uniform(0.0, self.cfg.tc_interval)
        self.world.kernel.schedule(hello_at, self._hello_timer,
                                   kind="timer", node=self.node.id, detail="hello")
        self.world.kernel.schedule(tc_at, self._tc_timer,
                                   kind="timer", node=self.node.id, detail="tc")

    def reset(self):
        """Cold start: forget everything learned."""
        self.one_hop.clear()
        self.two_hop.clear()
        self.mpr_set.clear()
        self.mpr_selectors.clear()
        self.topology.clear()
        self._tc_seen.clear()
        self._routes = {}
        self._dirty = True

    # -- emissions ----------------------------------------------------------

    def _hello_timer(self):
        if self.enabled and self.node.active:
            self.emit_hello()
        stream = self.node.streams["proto"]
        nxt = self.cfg.hello_interval - stream.uniform(0.0, 0.1 * self.cfg.hello_interval)
        self.world.kernel.schedule_in(nxt, self._hello_timer,
                                      kind="timer", node=self.node.id, detail="hello")

    def _tc_timer(self):
        if self.enabled and self.node.active:
            self.emit_tc()
        stream = self.node.streams["proto"]
        nxt = self.cfg.tc_interval - stream.uniform(0.0, 0.1 * self.cfg.tc_interval)
        self.world.kernel.schedule_in(nxt, self._tc_timer,
                                      kind="timer", node=self.node.id, detail="tc")

    def emit_hello(self):
        self._purge()
        msg = pk.HelloMsg(origin=self.node.id,
                          neighbor_list=tuple(sorted(self.one_hop)),
                          mpr_flags=frozenset(self.mpr_set))
        self.world.broadcast(self.node, pk.HELLO, msg)

    def emit_tc(self):
        self._purge()
        if not self.mpr_selectors:
            return
        self.msg_seq += 1
        msg = pk.TcMsg(origin=self.node.id,
                       advertised=tuple(sorted(self.mpr_selectors)),
                       sequence=self.msg_seq)
        self._tc_seen[self.node.id] = self.msg_seq
        self.world.broadcast(self.node, pk.TC, msg)

    # -- reception ----------------------------------------------------------

    def on_frame(self, frame, prev_hop):
        if not self.enabled:
            return
        if frame.kind == pk.HELLO:
            self.process_hello(frame.msg, prev_hop)
        elif frame.kind == pk.TC:
            self.process_tc(frame, prev_hop)
        elif frame.kind == pk.DATA:
            self.handle_data(frame.msg)

    def process_hello(self, msg, sender):
        now = self.world.kernel.now
        expiry = now + 3.0 * self.cfg.hello_interval
        self.one_hop[sender] = expiry
        others = set(msg.neighbor_list)
        others.discard(self.node.id)
        self.two_hop[sender] = (others, expiry)
        if self.node.id in msg.mpr_flags:
            self.mpr_selectors[sender] = expiry
        else:
            self.mpr_selectors.pop(sender, None)
        self._purge()
        self.mpr_set = select_mprs(self.one_hop,
                                   {n: s for n, (s, _) in self.two_hop.items()})
        self._dirty = True

    def process_tc(self, frame, sender):
        msg = frame.msg
        now = self.world.kernel.now
        if msg.origin == self.node.id:
            return
        last = self._tc_seen.get(msg.origin, -1)
        if msg.sequence <= last:
            return
        self._tc_seen[msg.origin] = msg.sequence
        self.topology[msg.origin] = (msg.advertised, msg.sequence,
                                     now + 3.0 * self.cfg.tc_interval)
        self._dirty = True
        # MPR flooding: relay only if the previous hop selected us
        if sender in self.mpr_selectors:
            relay = frame.clone_for_relay(self.node.id)
            jitter = self.node.streams["proto"].uniform(0.0, self.cfg.broadcast_jitter)
            self.world.kernel.schedule_in(
                jitter, lambda: self.world.relay(self.node, relay),
                kind="relay", node=self.node.id, detail="tc")
        if self.on_tc_processed is not None:
            self.on_tc_processed()

    # -- tables ---------------------------------------------------------------

    def _purge(self):
        now = self.world.kernel.now
        if now < self._next_expiry:
            return
        nxt = float("inf")
        for table in (self.one_hop, self.mpr_selectors):
            dead = [n for n, exp in table.items() if exp <= now]
            for n in dead:
                del table[n]
                self._dirty = True
            for exp in table.values():
                nxt = min(nxt, exp)
        dead = [n for n, (_, exp) in self.two_hop.items() if exp <= now]
        for n in dead:
            del self.two_hop[n]
            self._dirty = True
        for _, exp in self.two_hop.values():
            nxt = min(nxt, exp)
        dead = [o for o, (_, _, exp) in self.topology.items() if exp <= now]
        for o in dead:
            del self.topology[o]
            self._dirty = True
        for _, _, exp in self.topology.values():
            nxt = min(nxt, exp)
        self._next_expiry = nxt

    def _force_purge(self):
        self._next_expiry = 0.0
        self._purge()

    def compute_routes(self):
        self._force_purge()
        if not self._dirty:
            return self._routes
        edges = {}
        for nbr, (their, _) in self.two_hop.items():
            edges.setdefault(nbr, set()).update(their)
        for origin, (advertised, _, _) in self.topology.items():
            edges.setdefault(origin, set()).update(advertised)
        self._routes = shortest_routes(self.node.id, self.one_hop, edges)
        self._dirty = False
        return self._routes

    def reachable_count(self):
        """Total accessible nodes per the routing table, including self."""
        return len(self.compute_routes()) + 1

    def next_hop(self, dest):
        route = self.compute_routes().get(dest)
        return route[0] if route else None

    # -- data plane -------------------------------------------------------------

    def send_data(self, msg):
        self._forward(msg)

    def handle_data(self, msg):
        msg.hops += 1
        if msg.dst == self.node.id:
            self.world.data_delivered(msg)
        else:
            self._forward(msg)

    def _forward(self, msg):
        nh = self.next_hop(msg.dst)
        if nh is None:
            self.world.data_dropped(msg, "no-route")
            return
        self.world.unicast(self.node, nh, pk.DATA, msg)
