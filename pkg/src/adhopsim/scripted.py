"""A tiny in-memory network for driving protocol handlers on fixed topologies.

No timing, no energy, no loss: frames are queued and handed over in FIFO
order. Broadcast copies reach the neighbours in an order drawn from ``rng``
(or adjacency order without one), which is how tests explore races between
equally long paths.
"""
from __future__ import annotations

import random
from collections import Counter, deque

from adhopsim.frames import BROADCAST, Frame, Stack


class ScriptedNet:
    def __init__(self, adjacency: dict[int, list[int]], rng: random.Random | None = None,
                 heuristics: dict[int, float] | None = None, stack: Stack | None = None):
        self.adjacency = {k: list(v) for k, v in adjacency.items()}
        self.rng = rng
        self.heuristics = heuristics or {}
        self.stack = stack or Stack()
        self.now = 0.0
        self.sender: int | None = None
        self.nodes: dict[int, object] = {}
        self.counters: Counter = Counter()
        self.delivered: list[tuple[int, tuple[int, int]]] = []
        self.sent: list[tuple[int, int, Frame]] = []
        self.timers: list = []
        self._queue: deque = deque()

    def attach(self, address: int, protocol) -> None:
        self.nodes[address] = protocol

    # facade

    def heuristic(self, addr: int) -> float:
        return self.heuristics.get(addr, 1.0)

    def count(self, name: str, n: int = 1) -> None:
        self.counters[name] += n

    def unicast(self, src: int, dst: int, frame: Frame) -> None:
        self.sent.append((src, dst, frame))
        self._queue.append((src, dst, frame))

    def broadcast(self, src: int, frame: Frame) -> None:
        self.sent.append((src, BROADCAST, frame))
        self._queue.append((src, BROADCAST, frame))

    def deliver(self, addr: int, frame: Frame) -> None:
        self.delivered.append((addr, frame.msg))

    def schedule(self, delay: float, node: int, kind: str, fn, *args) -> None:
        self.timers.append((self.now + delay, node, kind, fn, args))

    # driving

    def run(self, limit: int = 100_000) -> int:
        """Hand over queued frames until the network is quiet; returns frames handled."""
        handled = 0
        while self._queue:
            if handled >= limit:
                raise RuntimeError("scripted network did not go quiet")
            self.step()
            handled += 1
        return handled

    def peek(self) -> tuple[int, int, Frame] | None:
        return self._queue[0] if self._queue else None

    def step(self) -> None:
        """Hand over the oldest queued frame."""
        src, dst, frame = self._queue.popleft()
        neighbours = self.adjacency.get(src, [])
        if dst == BROADCAST:
            order = list(neighbours)
            if self.rng is not None:
                self.rng.shuffle(order)
            for n in order:
                self._hand(n, frame, src)
        elif dst in neighbours:
            self._hand(dst, frame, src)
        else:
            self.count("unreachable")
            self.nodes[src].unicast_failed(frame, dst)

    def _hand(self, addr: int, frame: Frame, src: int) -> None:
        self.sender = src
        self.nodes[addr].receive(frame)

    def tick(self, dt: float = 1.0) -> None:
        self.now += dt
        for proto in self.nodes.values():
            proto.tick(self.now)

    def fire_timers(self) -> int:
        """Run every timer due at or before ``now``; returns how many fired."""
        due = sorted((t for t in self.timers if t[0] <= self.now), key=lambda t: t[0])
        self.timers = [t for t in self.timers if t[0] > self.now]
        for _, _, _, fn, args in due:
            fn(*args)
        return len(due)

    def frames_of(self, kind) -> list[tuple[int, int, Frame]]:
        return [s for s in self.sent if getattr(s[2].body, "ant_type", None) == kind]
