"""Run-level metrics: energy spread, delivery ratio and routing overhead.

Byte attribution, applied identically to every protocol:

* ``useful_bytes``: application payload carried on the hops of the path that
  delivered each message (one successful transmission per hop).
* ``data_header_bytes``: non-payload bytes of data-bearing frames on delivery
  paths, and all header bytes of messages that were never delivered.
* ``undelivered_payload_bytes``: payload bytes of messages never delivered.
* ``control_bytes``: everything else. That covers backward ants, RREQ/RREP,
  MAC acknowledgements, redundant flood copies and failed retransmissions of
  messages that were eventually delivered.

The four categories sum to the total bytes put on the air. Routing overhead
is the share of transmitted bytes that were not useful payload.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass
class MetricsReport:
    protocol: str
    node_count: int
    seed: int
    duration_s: float
    node_energy_j: list[float] = field(default_factory=list)
    death_times: list[float | None] = field(default_factory=list)
    generated: int = 0
    delivered: int = 0
    control_bytes: int = 0
    data_header_bytes: int = 0
    useful_bytes: int = 0
    undelivered_payload_bytes: int = 0
    total_bytes: int = 0
    frames_sent: int = 0
    tx_airtime_s: float = 0.0
    avg_neighbors: float = 0.0
    energy_demanded_j: float = 0.0
    energy_ticks_j: float = 0.0
    counters: dict[str, int] = field(default_factory=dict)

    @property
    def dead_nodes(self) -> int:
        return sum(t is not None for t in self.death_times)

    @property
    def first_death(self) -> float | None:
        times = [t for t in self.death_times if t is not None]
        return min(times) if times else None

    def to_row(self) -> dict:
        mean, std = energy_stats(self.node_energy_j) if self.node_energy_j else (0.0, 0.0)
        first = self.first_death
        return {
            "protocol": self.protocol,
            "node_count": self.node_count,
            "seed": self.seed,
            "duration_s": self.duration_s,
            "generated": self.generated,
            "delivered": self.delivered,
            "delivery_ratio": round(delivery_ratio(self), 9),
            "control_bytes": self.control_bytes,
            "data_header_bytes": self.data_header_bytes,
            "useful_bytes": self.useful_bytes,
            "undelivered_payload_bytes": self.undelivered_payload_bytes,
            "total_bytes": self.total_bytes,
            "routing_overhead": round(routing_overhead(self), 9),
            "energy_mean_j": round(mean, 9),
            "energy_std_j": round(std, 9),
            "dead_nodes": self.dead_nodes,
            "first_death_s": "" if first is None else round(first, 6),
            "avg_neighbors": round(self.avg_neighbors, 6),
            "frames_sent": self.frames_sent,
        }

    def to_dict(self) -> dict:
        return asdict(self)


def delivery_ratio(report: MetricsReport) -> float:
    if report.generated <= 0:
        return 0.0
    return report.delivered / report.generated


def routing_overhead(report: MetricsReport) -> float:
    overhead = report.control_bytes + report.data_header_bytes + report.undelivered_payload_bytes
    total = overhead + report.useful_bytes
    if total <= 0:
        return 0.0
    return overhead / total


def energy_stats(consumed: list[float]) -> tuple[float, float]:
    """Population mean and standard deviation of per-node consumption."""
    if not consumed:
        raise ValueError("need at least one node")
    n = len(consumed)
    mean = math.fsum(consumed) / n
    var = math.fsum((c - mean) ** 2 for c in consumed) / n
    return mean, math.sqrt(var)


ROW_FIELDS = list(MetricsReport("", 0, 0, 0.0).to_row())
