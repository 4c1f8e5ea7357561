"""AODVjr: RREQ flooding, destination-only RREP, inactivity timeout for routes.

No HELLO, RERR or sequence numbers. A broken downstream link is only noticed
by the node whose MAC transmission failed; it drops its entry, and upstream
nodes keep their routes until they time out.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from adhopsim.ants import DedupeCache
from adhopsim.frames import BROADCAST, Frame


class MsgKind(Enum):
    RREQ = "rreq"
    RREP = "rrep"
    DATA = "data"


@dataclass(frozen=True, slots=True)
class AodvMessage:
    kind: MsgKind
    origin: int
    destination: int
    ident: int = 0
    hop_count: int = 0


@dataclass(slots=True)
class AodvRouteEntry:
    destination: int
    next_hop: int
    last_used: float


@dataclass
class AodvjrConfig:
    route_timeout: float = 10.0
    rreq_retries: int = 3
    rreq_wait: float = 2.0
    buffer_size: int = 8
    ttl: int = 32
    dedupe_capacity: int = 256
    dedupe_age: float = 30.0


class AodvjrProtocol:
    def __init__(self, address: int, net, config: AodvjrConfig | None = None):
        self.address = address
        self.net = net
        self.config = config or AodvjrConfig()
        self.routes: dict[int, AodvRouteEntry] = {}
        self.seen = DedupeCache(self.config.dedupe_capacity, self.config.dedupe_age)
        self.delivered = DedupeCache(self.config.dedupe_capacity, self.config.dedupe_age)
        self.buffer: deque[tuple[int, int, tuple[int, int]]] = deque()
        self.discovering: dict[int, int] = {}  # destination -> floods so far
        self.rreq_id = 0
        self.seq = 0

    def route(self, dst: int) -> AodvRouteEntry | None:
        entry = self.routes.get(dst)
        if entry is None:
            return None
        if self.net.now - entry.last_used > self.config.route_timeout:
            del self.routes[dst]
            self.net.count("route_expired")
            return None
        return entry

    def _learn(self, dst: int, next_hop: int) -> None:
        entry = self.routes.get(dst)
        if entry is None:
            self.routes[dst] = AodvRouteEntry(dst, next_hop, self.net.now)
        else:
            entry.next_hop = next_hop
            entry.last_used = self.net.now

    # origination

    def send_data(self, dst: int, payload: int) -> tuple[int, int]:
        self.seq = (self.seq + 1) & 0xFFFFFFFF
        msg = (self.address, self.seq)
        self._send_or_buffer(dst, payload, msg)
        return msg

    def _send_or_buffer(self, dst: int, payload: int, msg: tuple[int, int]) -> None:
        entry = self.route(dst)
        if entry is not None:
            self._unicast_data(entry, dst, payload, msg, 0, 0)
            return
        if len(self.buffer) >= self.config.buffer_size:
            self.buffer.popleft()
            self.net.count("buffer_overflow")
        self.buffer.append((dst, payload, msg))
        if dst not in self.discovering:
            self.discovering[dst] = 0
            self._flood_rreq(dst)

    def _unicast_data(self, entry: AodvRouteEntry, dst: int, payload: int, msg, path_bytes, path_payload):
        entry.last_used = self.net.now
        size = self.net.stack.aodv_data(payload)
        body = AodvMessage(MsgKind.DATA, msg[0], dst, msg[1])
        frame = Frame(body, size, entry.next_hop, payload, msg, path_bytes + size, path_payload + payload)
        self.net.unicast(self.address, entry.next_hop, frame)

    def _flood_rreq(self, dst: int) -> None:
        self.rreq_id = (self.rreq_id + 1) & 0xFFFFFFFF
        self.discovering[dst] += 1
        self.seen.add((self.address, self.rreq_id), self.net.now)
        body = AodvMessage(MsgKind.RREQ, self.address, dst, self.rreq_id, 0)
        self.net.count("rreq_originated")
        self.net.broadcast(self.address, Frame(body, self.net.stack.aodv_ctrl()))
        self.net.schedule(self.config.rreq_wait, self.address, "rreq-timer", self._rreq_timeout, dst)

    def _rreq_timeout(self, dst: int) -> None:
        if dst not in self.discovering:
            return
        if self.route(dst) is not None:
            del self.discovering[dst]
            self._flush(dst)
            return
        if self.discovering[dst] <= self.config.rreq_retries:
            self._flood_rreq(dst)
            return
        del self.discovering[dst]
        dropped = [item for item in self.buffer if item[0] == dst]
        self.buffer = deque(item for item in self.buffer if item[0] != dst)
        self.net.count("discovery_failed", len(dropped))

    def _flush(self, dst: int) -> None:
        ready = [item for item in self.buffer if item[0] == dst]
        self.buffer = deque(item for item in self.buffer if item[0] != dst)
        for dst_, payload, msg in ready:
            entry = self.route(dst_)
            if entry is None:
                self.buffer.append((dst_, payload, msg))
                continue
            self._unicast_data(entry, dst_, payload, msg, 0, 0)

    # reception

    def receive(self, frame: Frame) -> None:
        body: AodvMessage = frame.body
        sender = self.net.sender
        if body.kind is MsgKind.RREQ:
            self._on_rreq(frame, body, sender)
        elif body.kind is MsgKind.RREP:
            self._on_rrep(frame, body, sender)
        else:
            self._on_data(frame, body, sender)

    def _on_rreq(self, frame: Frame, body: AodvMessage, sender: int) -> None:
        key = (body.origin, body.ident)
        if body.origin == self.address or key in self.seen:
            self.net.count("rreq_duplicate")
            return
        self.seen.add(key, self.net.now)
        self._learn(body.origin, sender)
        if body.destination == self.address:
            reply = AodvMessage(MsgKind.RREP, body.origin, self.address, body.ident)
            self.net.count("rrep_originated")
            self.net.unicast(self.address, sender, Frame(reply, self.net.stack.aodv_ctrl(), sender))
            return
        if body.hop_count + 1 >= self.config.ttl:
            self.net.count("ttl_drop")
            return
        fwd = AodvMessage(MsgKind.RREQ, body.origin, body.destination, body.ident, body.hop_count + 1)
        self.net.broadcast(self.address, Frame(fwd, frame.size))

    def _on_rrep(self, frame: Frame, body: AodvMessage, sender: int) -> None:
        self._learn(body.destination, sender)
        if body.origin == self.address:
            self.discovering.pop(body.destination, None)
            self._flush(body.destination)
            return
        entry = self.route(body.origin)
        if entry is None:
            self.net.count("rrep_no_route")
            return
        entry.last_used = self.net.now
        self.net.unicast(self.address, entry.next_hop, Frame(body, frame.size, entry.next_hop))

    def _on_data(self, frame: Frame, body: AodvMessage, sender: int) -> None:
        if body.destination == self.address:
            if frame.msg in self.delivered:
                self.net.count("duplicate_delivery")
                return
            self.delivered.add(frame.msg, self.net.now)
            self.net.deliver(self.address, frame)
            return
        entry = self.route(body.destination)
        if entry is None or entry.next_hop == sender:
            self.net.count("no_route_drop")
            return
        self._unicast_data(entry, body.destination, frame.payload, frame.msg,
                           frame.path_bytes, frame.path_payload)

    # link-layer feedback and timers

    def unicast_failed(self, frame: Frame, next_hop: int) -> None:
        body: AodvMessage = frame.body
        self.net.count("link_failure")
        if body.kind is MsgKind.RREP:
            dead = body.origin
        else:
            dead = body.destination
        entry = self.routes.get(dead)
        if entry is not None and entry.next_hop == next_hop:
            del self.routes[dead]
        if body.kind is MsgKind.DATA and body.origin == self.address:
            self._send_or_buffer(body.destination, frame.payload, frame.msg)

    def tick(self, now: float) -> None:
        self.seen.expire(now)
        self.delivered.expire(now)
