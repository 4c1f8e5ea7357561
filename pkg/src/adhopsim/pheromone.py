"""Pheromone arithmetic and the destination-hashed routing table.

Each node keeps a hash table keyed by destination address. A bucket holds
``RouteEntry`` objects ordered by decreasing pheromone; the first entry that
matches a destination is the next hop. Equal pheromone keeps insertion order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from adhopsim.heuristics import phi_eff, rho_eff


@dataclass
class PheromoneParams:
    tau_init: float = 50.0
    tau_0: float = 100.0
    tau_min: float = 1.0
    tau_max: float = 200.0
    phi_base: float = 0.5
    rho_base: float = 0.1
    kappa: float = 0.0
    buckets: int = 16

    def __post_init__(self):
        if not 0.0 <= self.phi_base <= 1.0:
            raise ValueError("phi_base must lie in [0, 1]")
        if not 0.0 <= self.rho_base <= 1.0:
            raise ValueError("rho_base must lie in [0, 1]")
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError("kappa must lie in [0, 1)")
        if not 0.0 <= self.tau_min < self.tau_max or self.tau_0 <= 0:
            raise ValueError("need 0 <= tau_min < tau_max and tau_0 > 0")
        if self.buckets < 1:
            raise ValueError("bucket count must be positive")


def deposit(tau: float, phi: float, tau_0: float, tau_max: float = float("inf")) -> float:
    """Pull ``tau`` toward ``tau_0`` by the fraction ``phi``."""
    return min(max((1.0 - phi) * tau + phi * tau_0, 0.0), tau_max)


def evaporate(tau: float, rho: float) -> float:
    return (1.0 - rho) * tau


@dataclass(slots=True)
class RouteEntry:
    destination: int
    neighbor: int
    pheromone: float
    last_heuristic: float = 1.0
    last_update: float = 0.0
    order: int = field(default=0, repr=False)


def _rank(entry: RouteEntry):
    return (-entry.pheromone, entry.order)


class RoutingTable:
    def __init__(self, params: PheromoneParams | None = None, owner: int | None = None):
        self.params = params or PheromoneParams()
        self.owner = owner
        self.buckets: list[list[RouteEntry]] = [[] for _ in range(self.params.buckets)]
        self._inserted = 0

    def key(self, dst: int) -> int:
        return dst % len(self.buckets)

    def __len__(self) -> int:
        return sum(len(b) for b in self.buckets)

    def __iter__(self) -> Iterator[RouteEntry]:
        for bucket in self.buckets:
            yield from bucket

    def entries_for(self, dst: int) -> list[RouteEntry]:
        return [e for e in self.buckets[self.key(dst)] if e.destination == dst]

    def lookup(self, dst: int, exclude: int | None = None) -> RouteEntry | None:
        """Best entry for ``dst``, optionally skipping one neighbor (split horizon)."""
        for entry in self.buckets[self.key(dst)]:
            if entry.destination == dst and entry.neighbor != exclude:
                return entry
        return None

    def reinforce(self, dst: int, neighbor: int, heuristic: float, now: float = 0.0) -> RouteEntry:
        if not 0.0 < heuristic <= 1.0:
            raise ValueError(f"heuristic {heuristic} outside (0, 1]")
        if neighbor == self.owner:
            raise ValueError("a node cannot route through itself")
        p = self.params
        phi = phi_eff(heuristic, p.phi_base)
        bucket = self.buckets[self.key(dst)]
        for entry in bucket:
            if entry.destination == dst and entry.neighbor == neighbor:
                entry.pheromone = deposit(entry.pheromone, phi, p.tau_0, p.tau_max)
                break
        else:
            entry = RouteEntry(dst, neighbor, deposit(p.tau_init, phi, p.tau_0, p.tau_max),
                               order=self._inserted)
            self._inserted += 1
            bucket.append(entry)
        entry.last_heuristic = heuristic
        entry.last_update = now
        bucket.sort(key=_rank)
        return entry

    def remove(self, dst: int, neighbor: int) -> bool:
        bucket = self.buckets[self.key(dst)]
        for i, entry in enumerate(bucket):
            if entry.destination == dst and entry.neighbor == neighbor:
                del bucket[i]
                return True
        return False

    def evaporate_all(self, now: float = 0.0) -> int:
        """Apply one evaporation step to every entry; returns how many were purged."""
        p = self.params
        purged = 0
        for bucket in self.buckets:
            if not bucket:
                continue
            kept = []
            for entry in bucket:
                entry.pheromone = evaporate(entry.pheromone,
                                            rho_eff(entry.last_heuristic, p.rho_base, p.kappa))
                if entry.pheromone < p.tau_min:
                    purged += 1
                else:
                    kept.append(entry)
            if p.kappa:
                kept.sort(key=_rank)
            bucket[:] = kept
        return purged
