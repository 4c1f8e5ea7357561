"""Discrete-event scheduler. Equal timestamps pop in insertion order."""
from __future__ import annotations

import heapq
from typing import Callable, TextIO


class Scheduler:
    def __init__(self, trace: TextIO | None = None):
        self._heap: list = []
        self._seq = 0
        self.now = 0.0
        self.trace = trace
        self.processed = 0

    def __len__(self) -> int:
        return len(self._heap)

    def at(self, time: float, node: int, kind: str, fn: Callable, *args) -> None:
        if time < self.now:
            raise ValueError(f"cannot schedule {kind} at {time} before now={self.now}")
        heapq.heappush(self._heap, (time, self._seq, node, kind, fn, args))
        self._seq += 1

    def run(self, until: float) -> None:
        heap = self._heap
        trace = self.trace
        while heap and heap[0][0] <= until:
            time, _, node, kind, fn, args = heapq.heappop(heap)
            self.now = time
            self.processed += 1
            if trace is not None:
                trace.write(f"{time:.9f} {node} {kind}\n")
            fn(*args)
        self.now = max(self.now, until)
