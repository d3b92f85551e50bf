"""Minimal source-routing engine: flooding discovery that accumulates the
path, a small per-destination route cache, source-routed data forwarding,
and route-error notifications that purge broken links from caches.

No promiscuous listening or packet salvaging; every source-route header byte
on a data packet is charged to routing load.
"""

from . import packets as pk


class DsrNode:
    """One node's DSR engine."""

    def __init__(self, world, node):
        self.world = world
        self.node = node
        self.cfg = world.cfg
        self.enabled = True
        # dest -> list of (path tuple self..dest, expiry)
        self.cache = {}
        self.rreq_counter = 0
        self.seen = {}
        self.pending = {}  # dest -> Discovery-like dict

    def boot(self):
        pass

    def reset(self):
        self.cache.clear()
        self.seen.clear()
        for disc in self.pending.values():
            self.world.kernel.cancel(disc["timer"])
            for msg in disc["packets"]:
                self.world.data_dropped(msg, "engine-reset")
        self.pending.clear()

    # -- cache ----------------------------------------------------------------

    def cached_path(self, dest):
        now = self.world.kernel.now
        paths = self.cache.get(dest)
        if not paths:
            return None
        live = [(p, e) for (p, e) in paths if e > now]
        self.cache[dest] = live
        if not live:
            return None
        return min(live, key=lambda pe: (len(pe[0]), pe[0]))[0]

    def add_path(self, path):
        """Cache a full path self..dest, shortest preferred, bounded size."""
        dest = path[-1]
        now = self.world.kernel.now
        paths = [(p, e) for (p, e) in self.cache.get(dest, []) if e > now and p != path]
        paths.append((path, now + self.cfg.cache_lifetime))
        paths.sort(key=lambda pe: (len(pe[0]), pe[0]))
        self.cache[dest] = paths[:self.cfg.cache_paths]

    def purge_link(self, a, b):
        for dest in list(self.cache):
            kept = []
            for path, exp in self.cache[dest]:
                broken = False
                for u, v in zip(path, path[1:]):
                    if (u, v) == (a, b) or (u, v) == (b, a):
                        broken = True
                        break
                if not broken:
                    kept.append((path, exp))
            if kept:
                self.cache[dest] = kept
            else:
                self.cache.pop(dest)

    # -- discovery ---------------------------------------------------------------

    def send_data(self, msg):
        path = self.cached_path(msg.dst)
        if path is not None:
            msg.source_route = path
            msg.cursor = 0
            self._forward_data(msg)
            return
        disc = self.pending.get(msg.dst)
        if disc is None:
            disc = self._discover(msg.dst)
        if len(disc["packets"]) < self.cfg.buffer_cap:
            disc["packets"].append(msg)
        else:
            self.world.data_dropped(msg, "buffer-full")

    def _discover(self, dest):
        self.rreq_counter += 1
        disc = {"retries": self.cfg.rreq_retries, "packets": [], "timer": None,
                "rreq_id": self.rreq_counter}
        self.pending[dest] = disc
        self._flood(dest, disc)
        return disc

    def _flood(self, dest, disc):
        msg = pk.DsrRreqMsg(origin=self.node.id, destination=dest,
                            rreq_id=disc["rreq_id"],
                            route_record=(self.node.id,))
        self.seen[(self.node.id, disc["rreq_id"])] = \
            self.world.kernel.now + self.cfg.seen_lifetime
        self.world.broadcast(self.node, pk.DSR_RREQ, msg)
        timeout = 2.0 * self.cfg.node_traversal_time * self.cfg.net_diameter
        disc["timer"] = self.world.kernel.schedule_in(
            timeout, lambda: self._timeout(dest),
            kind="timer", node=self.node.id, detail="dsr-timeout")

    def _timeout(self, dest):
        disc = self.pending.get(dest)
        if disc is None:
            return
        if disc["retries"] > 0:
            disc["retries"] -= 1
            self.rreq_counter += 1
            disc["rreq_id"] = self.rreq_counter
            self._flood(dest, disc)
            return
        del self.pending[dest]
        for msg in disc["packets"]:
            self.world.data_dropped(msg, "discovery-failed")

    # -- reception ------------------------------------------------------------------

    def on_frame(self, frame, prev_hop):
        if not self.enabled:
            return
        if frame.kind == pk.DSR_RREQ:
            self.process_rreq(frame, prev_hop)
        elif frame.kind == pk.DSR_RREP:
            self.process_rrep(frame.msg)
        elif frame.kind == pk.DSR_RERR:
            self.process_rerr(frame.msg)
        elif frame.kind == pk.DATA:
            self.handle_data(frame.msg)

    def process_rreq(self, frame, prev_hop):
        msg = frame.msg
        now = self.world.kernel.now
        if self.node.id in msg.route_record:
            return
        key = (msg.origin, msg.rreq_id)
        seen_until = self.seen.get(key)
        if seen_until is not None and seen_until > now:
            return
        self.seen[key] = now + self.cfg.seen_lifetime
        if msg.destination == self.node.id:
            route = msg.route_record + (self.node.id,)
            reply = pk.DsrRrepMsg(origin=self.node.id, destination=msg.origin,
                                  route=route, cursor=len(route) - 2)
            self.world.unicast(self.node, route[-2], pk.DSR_RREP, reply)
            return
        relay = frame.clone_for_relay(
            self.node.id,
            msg=pk.DsrRreqMsg(msg.origin, msg.destination, msg.rreq_id,
                              msg.route_record + (self.node.id,)))
        jitter = self.node.streams["proto"].uniform(0.0, self.cfg.broadcast_jitter)
        self.world.kernel.schedule_in(
            jitter, lambda: self.world.relay(self.node, relay),
            kind="relay", node=self.node.id, detail="dsr-rreq")

    def process_rrep(self, msg):
        route = msg.route
        if msg.destination == self.node.id:
            self.add_path(route)
            disc = self.pending.pop(route[-1], None)
            if disc is not None:
                self.world.kernel.cancel(disc["timer"])
                for buffered in disc["packets"]:
                    buffered.source_route = route
                    buffered.cursor = 0
                    self._forward_data(buffered)
            return
        if msg.cursor <= 0 or route[msg.cursor] != self.node.id:
            return
        msg.cursor -= 1
        self.world.unicast(self.node, route[msg.cursor], pk.DSR_RREP, msg)

    def process_rerr(self, msg):
        self.purge_link(msg.broken_from, msg.broken_to)
        path = msg.path_back
        if msg.cursor <= 0 or path[msg.cursor] != self.node.id:
            return
        msg.cursor -= 1
        self.world.unicast(self.node, path[msg.cursor], pk.DSR_RERR, msg)

    def on_link_failure(self, next_hop):
        """Link-layer feedback: a hop stopped acknowledging, purge its paths."""
        self.purge_link(self.node.id, next_hop)

    # -- data plane ---------------------------------------------------------------------

    def handle_data(self, msg):
        msg.hops += 1
        if msg.dst == self.node.id:
            self.world.data_delivered(msg)
            return
        route = msg.source_route
        if route is None or msg.cursor >= len(route) or route[msg.cursor] != self.node.id:
            self.world.data_dropped(msg, "bad-source-route")
            return
        self._forward_data(msg)

    def _forward_data(self, msg):
        route = msg.source_route
        cursor = msg.cursor
        if cursor + 1 >= len(route):
            self.world.data_dropped(msg, "bad-source-route")
            return
        nxt = route[cursor + 1]
        if nxt not in self.world.neighbors(self.node.id):
            self.world.data_dropped(msg, "broken-source-route")
            self.purge_link(self.node.id, nxt)
            if cursor > 0:
                err = pk.DsrRerrMsg(origin=self.node.id, broken_from=self.node.id,
                                    broken_to=nxt, path_back=route[:cursor + 1],
                                    cursor=cursor - 1)
                self.world.unicast(self.node, route[cursor - 1], pk.DSR_RERR, err)
            return
        msg.cursor = cursor + 1
        self.world.unicast(self.node, nxt, pk.DATA, msg)
