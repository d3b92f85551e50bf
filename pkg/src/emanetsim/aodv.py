"""Reactive engine: on-demand route discovery by RREQ flooding with unicast
RREP from the destination only, expiring routes, and the hop-count-based
network-size estimate the adaptive layer consumes.

No RERR or local repair: broken next hops simply age out and losses surface
in the metrics.
"""

import math

from . import packets as pk


def estimate_size_from_hops(max_hop_count, k):
    """Node-count estimate for a uniformly distributed network: round(k * h^2)."""
    if max_hop_count < 0:
        raise ValueError("hop count must be nonnegative")
    if k <= 0:
        raise ValueError("proportionality constant must be positive")
    return round(k * max_hop_count * max_hop_count)


class Route:
    __slots__ = ("next_hop", "hops", "dest_seq", "expiry")

    def __init__(self, next_hop, hops, dest_seq, expiry):
        self.next_hop = next_hop
        self.hops = hops
        self.dest_seq = dest_seq
        self.expiry = expiry


class Discovery:
    __slots__ = ("retries_left", "packets", "timer", "rreq_id")

    def __init__(self, retries_left, rreq_id):
        self.retries_left = retries_left
        self.packets = []
        self.timer = None
        self.rreq_id = rreq_id


class AodvNode:
    """One node's AODV engine."""

    def __init__(self, world, node):
        self.world = world
        self.node = node
        self.cfg = world.cfg
        self.enabled = True
        self.routes = {}
        self.own_seq = 0
        self.rreq_counter = 0
        self.seen_rreqs = {}
        self.pending = {}
        self.on_rrep_at_source = None  # hook(total_hops) for the adaptive layer

    def boot(self):
        pass

    def reset(self):
        for disc in self.pending.values():
            self.world.kernel.cancel(disc.timer)
            for msg in disc.packets:
                self.world.data_dropped(msg, "engine-reset")
        self.routes.clear()
        self.seen_rreqs.clear()
        self.pending.clear()

    def net_traversal_time(self):
        """Per the AODV convention: 2 * node_traversal_time * net_diameter."""
        return 2.0 * self.cfg.node_traversal_time * self.cfg.net_diameter

    # -- routing table ------------------------------------------------------

    def valid_route(self, dest):
        route = self.routes.get(dest)
        if route is not None and route.expiry > self.world.kernel.now:
            return route
        return None

    def _install(self, dest, next_hop, hops, dest_seq):
        now = self.world.kernel.now
        cur = self.routes.get(dest)
        if cur is not None and cur.expiry > now and \
                (cur.dest_seq, -cur.hops) > (dest_seq, -hops):
            return cur
        route = Route(next_hop, hops, dest_seq, now + self.cfg.route_lifetime)
        self.routes[dest] = route
        return route

    def max_known_hops(self):
        """Largest hop count among currently valid routes (0 if none)."""
        now = self.world.kernel.now
        best = 0
        for route in self.routes.values():
            if route.expiry > now and route.hops > best:
                best = route.hops
        return best

    # -- discovery ------------------------------------------------------------

    def send_data(self, msg):
        route = self.valid_route(msg.dst)
        if route is not None:
            self._forward(msg, route)
            return
        disc = self.pending.get(msg.dst)
        if disc is None:
            disc = self._originate_rreq(msg.dst)
        if len(disc.packets) < self.cfg.buffer_cap:
            disc.packets.append(msg)
        else:
            self.world.data_dropped(msg, "buffer-full")

    def _originate_rreq(self, dest):
        self.rreq_counter += 1
        self.own_seq += 1
        disc = Discovery(self.cfg.rreq_retries, self.rreq_counter)
        self.pending[dest] = disc
        self._flood_rreq(dest, disc)
        return disc

    def _flood_rreq(self, dest, disc):
        msg = pk.RreqMsg(origin=self.node.id, destination=dest,
                         rreq_id=disc.rreq_id, origin_sequence=self.own_seq,
                         hop_count=0)
        self.seen_rreqs[(self.node.id, disc.rreq_id)] = \
            self.world.kernel.now + self.cfg.seen_lifetime
        self.world.broadcast(self.node, pk.RREQ, msg)
        disc.timer = self.world.kernel.schedule_in(
            self.net_traversal_time(), lambda: self._discovery_timeout(dest),
            kind="timer", node=self.node.id, detail="rreq-timeout")

    def _discovery_timeout(self, dest):
        disc = self.pending.get(dest)
        if disc is None:
            return
        if disc.retries_left > 0:
            disc.retries_left -= 1
            self.rreq_counter += 1
            disc.rreq_id = self.rreq_counter
            self._flood_rreq(dest, disc)
            return
        del self.pending[dest]
        for msg in disc.packets:
            self.world.data_dropped(msg, "discovery-failed")

    # -- reception --------------------------------------------------------------

    def on_frame(self, frame, prev_hop):
        if not self.enabled:
            return
        if frame.kind == pk.RREQ:
            self.process_rreq(frame, prev_hop)
        elif frame.kind == pk.RREP:
            self.process_rrep(frame, prev_hop)
        elif frame.kind == pk.DATA:
            self.handle_data(frame.msg)

    def process_rreq(self, frame, prev_hop):
        msg = frame.msg
        now = self.world.kernel.now
        key = (msg.origin, msg.rreq_id)
        seen_until = self.seen_rreqs.get(key)
        if seen_until is not None and seen_until > now:
            return
        self.seen_rreqs[key] = now + self.cfg.seen_lifetime
        if msg.origin == self.node.id:
            return
        self._install(msg.origin, prev_hop, msg.hop_count + 1, msg.origin_sequence)
        if msg.destination == self.node.id:
            self.own_seq += 1
            reply = pk.RrepMsg(origin=msg.origin, destination=self.node.id,
                               dest_sequence=self.own_seq, hop_count=0)
            self.world.unicast(self.node, prev_hop, pk.RREP, reply)
            return
        relay = frame.clone_for_relay(
            self.node.id,
            msg=pk.RreqMsg(msg.origin, msg.destination, msg.rreq_id,
                           msg.origin_sequence, msg.hop_count + 1))
        jitter = self.node.streams["proto"].uniform(0.0, self.cfg.broadcast_jitter)
        self.world.kernel.schedule_in(
            jitter, lambda: self.world.relay(self.node, relay),
            kind="relay", node=self.node.id, detail="rreq")

    def process_rrep(self, frame, prev_hop):
        msg = frame.msg
        total_hops = msg.hop_count + 1
        self._install(msg.destination, prev_hop, total_hops, msg.dest_sequence)
        if msg.origin == self.node.id:
            disc = self.pending.pop(msg.destination, None)
            if disc is not None:
                self.world.kernel.cancel(disc.timer)
                route = self.valid_route(msg.destination)
                horizon = self.world.kernel.now - self.cfg.buffer_hold
                for buffered in disc.packets:
                    if route is None or buffered.send_time < horizon:
                        self.world.data_dropped(buffered, "no-route")
                    else:
                        self._forward(buffered, route)
            if self.on_rrep_at_source is not None:
                self.on_rrep_at_source(total_hops)
            return
        back = self.valid_route(msg.origin)
        if back is None:
            return  # reverse route expired; reply dies here
        msg.hop_count = total_hops
        # forwarding the reply refreshes the reverse route it rides on
        back.expiry = self.world.kernel.now + self.cfg.route_lifetime
        self.world.unicast(self.node, back.next_hop, pk.RREP, msg)

    # -- data plane ----------------------------------------------------------------

    def on_link_failure(self, next_hop):
        """Link-layer feedback: drop routes through a next hop that stopped
        acknowledging, so the next packet triggers a fresh discovery."""
        now = self.world.kernel.now
        for dest, route in self.routes.items():
            if route.next_hop == next_hop and route.expiry > now:
                route.expiry = now

    def handle_data(self, msg):
        msg.hops += 1
        if msg.dst == self.node.id:
            self.world.data_delivered(msg)
            return
        route = self.valid_route(msg.dst)
        if route is None:
            self.world.data_dropped(msg, "no-route")
            return
        self._forward(msg, route)

    def _forward(self, msg, route):
        route.expiry = self.world.kernel.now + self.cfg.route_lifetime
        self.world.unicast(self.node, route.next_hop, pk.DATA, msg)
