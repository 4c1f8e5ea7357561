"""ADHOP ants: the 20-byte wire record and the per-node routing state machine.

Wire layout (big-endian)::

    offset  size  field
    0       1     type (0 = FTA, 1 = ETA, 2 = BACKWARD)
    1       1     hops
    2       4     source
    6       4     destination
    10      4     previous
    14      4     sequence number
    18      2     heuristic (raw / 65535, raw >= 1)

Data-bearing ants (FTA and ETA) are followed by the application payload.
"""
from __future__ import annotations

import struct
from collections import OrderedDict
from dataclasses import dataclass, replace
from enum import IntEnum

from adhopsim.frames import BROADCAST, Frame, Stack
from adhopsim.heuristics import H_RAW_MAX, dequantize, quantize
from adhopsim.pheromone import PheromoneParams, RoutingTable

ANT_FORMAT = struct.Struct(">BBIIIIH")
ANT_SIZE = ANT_FORMAT.size


class AntType(IntEnum):
    FTA = 0
    ETA = 1
    BACKWARD = 2


class DecodeError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Ant:
    ant_type: AntType
    hops: int
    source: int
    destination: int
    previous: int
    sequence_no: int
    heuristic_raw: int = H_RAW_MAX

    @property
    def heuristic(self) -> float:
        return self.heuristic_raw / H_RAW_MAX

    @property
    def key(self) -> tuple[int, int]:
        return (self.source, self.sequence_no)


def encode_ant(ant: Ant, payload: bytes = b"", max_payload: int = Stack().max_payload()) -> bytes:
    if len(payload) > max_payload:
        raise ValueError(f"payload of {len(payload)} bytes exceeds {max_payload}")
    if not 1 <= ant.heuristic_raw <= H_RAW_MAX:
        raise ValueError("heuristic raw value must be in [1, 65535]")
    return ANT_FORMAT.pack(int(ant.ant_type), ant.hops, ant.source, ant.destination,
                           ant.previous, ant.sequence_no, ant.heuristic_raw) + payload


def decode_ant(data: bytes, max_payload: int = Stack().max_payload()) -> tuple[Ant, bytes]:
    if len(data) < ANT_SIZE:
        raise DecodeError(f"truncated ant: {len(data)} < {ANT_SIZE} bytes")
    if len(data) - ANT_SIZE > max_payload:
        raise DecodeError(f"oversized ant: payload {len(data) - ANT_SIZE} > {max_payload} bytes")
    kind, hops, src, dst, prev, seq, raw = ANT_FORMAT.unpack_from(data)
    if raw == 0:
        raise DecodeError("heuristic field is zero")
    try:
        ant_type = AntType(kind)
    except ValueError:
        raise DecodeError(f"unknown ant type {kind}") from None
    return Ant(ant_type, hops, src, dst, prev, seq, raw), bytes(data[ANT_SIZE:])


class DedupeCache:
    """Bounded set of (source, sequence) pairs, evicting the oldest by age or capacity."""

    def __init__(self, capacity: int = 256, max_age: float = 30.0):
        self.capacity = capacity
        self.max_age = max_age
        self._seen: OrderedDict[tuple[int, int], float] = OrderedDict()

    def __contains__(self, key) -> bool:
        return key in self._seen

    def __len__(self) -> int:
        return len(self._seen)

    def add(self, key: tuple[int, int], now: float) -> None:
        self._seen[key] = now
        self._seen.move_to_end(key)
        while len(self._seen) > self.capacity:
            self._seen.popitem(last=False)

    def expire(self, now: float) -> None:
        while self._seen:
            key, stamp = next(iter(self._seen.items()))
            if now - stamp <= self.max_age:
                break
            del self._seen[key]


class PendingReturn:
    """Where each forward ant came from, so its backward ant can retrace the path."""

    def __init__(self, expiry: float = 10.0):
        self.expiry = expiry
        self._records: dict[tuple[int, int], tuple[int, float]] = {}

    def __len__(self) -> int:
        return len(self._records)

    def store(self, key: tuple[int, int], neighbor: int, now: float) -> None:
        self._records[key] = (neighbor, now + self.expiry)

    def pop(self, key: tuple[int, int], now: float) -> int | None:
        record = self._records.pop(key, None)
        if record is None or record[1] < now:
            return None
        return record[0]

    def expire(self, now: float) -> None:
        stale = [k for k, (_, t) in self._records.items() if t < now]
        for k in stale:
            del self._records[k]


@dataclass
class AdhopConfig:
    pheromone: PheromoneParams
    ttl: int = 32
    dedupe_capacity: int = 256
    dedupe_age: float = 30.0
    pending_expiry: float = 10.0


class AdhopProtocol:
    """ADHOP routing for one node.

    ``net`` is the simulator facade: ``now``, ``unicast``, ``broadcast``,
    ``deliver``, ``count``, ``heuristic`` and ``stack``.
    """

    def __init__(self, address: int, net, config: AdhopConfig):
        self.address = address
        self.net = net
        self.config = config
        self.table = RoutingTable(config.pheromone, owner=address)
        self.dedupe = DedupeCache(config.dedupe_capacity, config.dedupe_age)
        self.delivered = DedupeCache(config.dedupe_capacity, config.dedupe_age)
        self.flooded = DedupeCache(config.dedupe_capacity, config.dedupe_age)
        self.pending = PendingReturn(config.pending_expiry)
        self.seq = 0

    def _own_h(self) -> int:
        return quantize(self.net.heuristic(self.address))

    # data transmission

    def send_data(self, dst: int, payload: int) -> tuple[int, int]:
        self.seq = (self.seq + 1) & 0xFFFFFFFF
        ant = Ant(AntType.FTA, 0, self.address, dst, self.address, self.seq, self._own_h())
        self._dispatch(ant, payload, path_bytes=0, path_payload=0, came_from=None)
        return ant.key

    def explore(self, dst: int, payload: int = 0) -> tuple[int, int]:
        """Flood an ETA toward ``dst`` even when a trail is already known."""
        self.seq = (self.seq + 1) & 0xFFFFFFFF
        ant = Ant(AntType.ETA, 0, self.address, dst, self.address, self.seq, self._own_h())
        size = self.net.stack.adhop_data(payload)
        self.flooded.add(ant.key, self.net.now)
        self.dedupe.add(ant.key, self.net.now)
        self.net.count("eta_originated")
        self.net.broadcast(self.address, Frame(ant, size, BROADCAST, payload, ant.key, size, payload))
        return ant.key

    def _dispatch(self, ant: Ant, payload: int, path_bytes: int, path_payload: int,
                  came_from: int | None) -> None:
        """Unicast along the best trail, or flood an ETA when no trail is known."""
        size = self.net.stack.adhop_data(payload)
        entry = self.table.lookup(ant.destination, exclude=came_from)
        if entry is not None:
            fta = replace(ant, ant_type=AntType.FTA)
            frame = Frame(fta, size, entry.neighbor, payload, fta.key,
                          path_bytes + size, path_payload + payload, came_from)
            self.net.unicast(self.address, entry.neighbor, frame)
            return
        if ant.key in self.flooded:
            self.net.count("eta_suppressed")
            return
        self.flooded.add(ant.key, self.net.now)
        self.dedupe.add(ant.key, self.net.now)
        eta = replace(ant, ant_type=AntType.ETA)
        frame = Frame(eta, size, BROADCAST, payload, eta.key,
                      path_bytes + size, path_payload + payload, came_from)
        self.net.count("eta_originated" if ant.source == self.address else "eta_relayed")
        self.net.broadcast(self.address, frame)

    # reception

    def receive(self, frame: Frame) -> None:
        ant = frame.body
        if ant.ant_type == AntType.BACKWARD:
            self._on_backward(frame, ant)
        elif ant.ant_type == AntType.ETA:
            self._on_eta(frame, ant)
        else:
            self._on_fta(frame, ant)

    def _record_reverse(self, ant: Ant) -> None:
        now = self.net.now
        self.table.reinforce(ant.source, ant.previous, dequantize(ant.heuristic_raw), now)
        self.pending.store(ant.key, ant.previous, now)

    def _on_fta(self, frame: Frame, ant: Ant) -> None:
        if ant.source == self.address:
            self.net.count("loop_drop")
            return
        self._record_reverse(ant)
        if ant.destination == self.address:
            self._arrive(frame, ant)
        else:
            self._forward(frame, ant)

    def _on_eta(self, frame: Frame, ant: Ant) -> None:
        if ant.source == self.address or ant.key in self.dedupe:
            self.net.count("eta_duplicate")
            return
        self.dedupe.add(ant.key, self.net.now)
        self._record_reverse(ant)
        if ant.destination == self.address:
            self._arrive(frame, ant)
        else:
            self._forward(frame, ant)

    def _forward(self, frame: Frame, ant: Ant) -> None:
        if ant.hops + 1 > self.config.ttl:
            self.net.count("ttl_drop")
            return
        nxt = replace(ant, hops=ant.hops + 1, previous=self.address, heuristic_raw=self._own_h())
        self._dispatch(nxt, frame.payload, frame.path_bytes, frame.path_payload, ant.previous)

    def _arrive(self, frame: Frame, ant: Ant) -> None:
        if ant.key in self.delivered:
            self.net.count("duplicate_delivery")
            return
        self.delivered.add(ant.key, self.net.now)
        self.net.deliver(self.address, frame)
        back_to = self.pending.pop(ant.key, self.net.now)
        if back_to is None:
            return
        back = Ant(AntType.BACKWARD, 0, self.address, ant.source, self.address,
                   ant.sequence_no, self._own_h())
        self.net.count("backward_emitted")
        self.net.unicast(self.address, back_to, Frame(back, self.net.stack.adhop_control(), back_to))

    def _on_backward(self, frame: Frame, ant: Ant) -> None:
        now = self.net.now
        # forward trail: toward the original destination through the hop the ant came from
        self.table.reinforce(ant.source, ant.previous, dequantize(ant.heuristic_raw), now)
        if ant.destination == self.address:
            self.net.count("backward_completed")
            return
        nxt = self.pending.pop((ant.destination, ant.sequence_no), now)
        if nxt is None:
            self.net.count("backward_no_pending")
            return
        if ant.hops + 1 > self.config.ttl:
            self.net.count("ttl_drop")
            return
        back = replace(ant, hops=ant.hops + 1, previous=self.address, heuristic_raw=self._own_h())
        self.net.unicast(self.address, nxt, Frame(back, frame.size, nxt))

    # link-layer feedback and timers

    def unicast_failed(self, frame: Frame, next_hop: int) -> None:
        ant = frame.body
        if ant.ant_type == AntType.BACKWARD:
            self.net.count("backward_lost")
            return
        self.net.count("link_failure")
        self.table.remove(ant.destination, next_hop)
        self._dispatch(ant, frame.payload, frame.path_bytes - frame.size,
                       frame.path_payload - frame.payload, frame.came_from)

    def tick(self, now: float) -> None:
        purged = self.table.evaporate_all(now)
        if purged:
            self.net.count("purged", purged)
        self.dedupe.expire(now)
        self.delivered.expire(now)
        self.flooded.expire(now)
        self.pending.expire(now)
