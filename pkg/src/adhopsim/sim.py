"""The simulation run: nodes, MAC, channel, traffic and periodic ticks.

MAC model: each node serialises its frames. A transmission attempt starts
after a uniform random backoff and is deferred while the node's own radio is
busy (receiving, transmitting or acknowledging). Every alive node within
range at the start of an attempt hears it and is charged receive time: the
whole frame for broadcasts and for the addressee, only the first
``overhear_bytes`` for bystanders of a unicast. Unicast
frames are acknowledged; an attempt fails when the addressee is out of range,
dead, transmitting at the time, or the frame is lost, and is retried up to
``mac_retries`` times before the routing layer is told. There is no collision
model.
"""
from __future__ import annotations

import math
import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from adhopsim import kernels
from adhopsim.ants import AdhopProtocol
from adhopsim.aodvjr import AodvjrProtocol
from adhopsim.config import Scenario
from adhopsim.energy import (
    MODE_PRIORITY,
    Battery,
    EnergyAccount,
    ModeTimeline,
    PowerProfile,
    battery_energy_joules,
    load_power_profile,
)
from adhopsim.frames import BROADCAST, Frame
from adhopsim.heuristics import LifetimeEstimator, node_heuristic
from adhopsim.metrics import MetricsReport
from adhopsim.mobility import Mobility, MobilityParams
from adhopsim.radio import airtime, communication_range


def derive_seeds(seed: int, n: int) -> list[int]:
    state = np.random.SeedSequence(seed).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


@dataclass(eq=False)
class Node:
    address: int
    role: str
    battery: Battery
    account: EnergyAccount
    radio: ModeTimeline
    cpu: ModeTimeline
    protocol: object = None
    estimator: LifetimeEstimator | None = None
    peer: int | None = None
    h: float = 1.0
    alive: bool = True
    death_time: float | None = None
    mac_queue: deque = field(default_factory=deque)
    mac_busy: bool = False
    attempt: int = 0
    tx_windows: deque = field(default_factory=lambda: deque(maxlen=4))

    def transmitting_during(self, start: float, end: float) -> bool:
        return any(s < end and e > start for s, e in self.tx_windows)

    @property
    def tx_busy_until(self) -> float:
        return self.tx_windows[-1][1] if self.tx_windows else -math.inf


class Simulation:
    """One scenario run. Also serves as the network facade handed to protocols."""

    def __init__(self, scenario: Scenario, positions=None, flows=None, roles=None,
                 trace: TextIO | None = None, heuristic_override: dict[int, float] | None = None):
        from adhopsim.engine import Scheduler

        self.cfg = cfg = scenario.validate()
        self.sched = Scheduler(trace)
        self.stack = cfg.stack()
        self.sender: int | None = None
        placement, motion, traffic, mac = derive_seeds(cfg.seed, 4)
        self.mac_rng = random.Random(mac)
        self.traffic_rng = random.Random(traffic)

        self.range_m = communication_range(cfg.tx_power_mw, cfg.sensitivity_dbm, cfg.frequency_hz)
        self.r2 = self.range_m * self.range_m
        self.ack_air = airtime(cfg.ack_bytes, cfg.bitrate_bps)

        n = cfg.total_nodes if positions is None else len(positions)
        if positions is None:
            prng = random.Random(placement)
            positions = [(prng.uniform(0, cfg.area_m), prng.uniform(0, cfg.area_m)) for _ in range(n)]
        xy = np.asarray(positions, dtype=np.float64).reshape(n, 2)
        self.alive = np.ones(n, dtype=np.uint8)
        self.mobility = Mobility(
            MobilityParams(cfg.area_m, cfg.area_m, cfg.v_max, cfg.turn_interval_s,
                           math.radians(cfg.turn_stddev_deg)),
            xy[:, 0], xy[:, 1], random.Random(motion))

        if roles is None:
            roles = (["source"] * cfg.source_count + ["sink"] * cfg.sink_count
                     + ["router"] * (n - cfg.source_count - cfg.sink_count))
        if flows is None:
            flows = [(i, cfg.source_count + i) for i in range(min(cfg.source_count, n))]
        self.flows = list(flows)

        if cfg.power_profile:
            self.profile = load_power_profile(cfg.power_profile)
        else:
            self.profile = PowerProfile.eposmote(cfg.voltage, cfg.tx_event_mj)
        self.profile.accounting_period = cfg.accounting_period_s
        capacity = battery_energy_joules(cfg.battery_mah, self.profile.voltage)

        self.heuristic_override = heuristic_override or {}
        self.nodes: list[Node] = []
        for addr in range(n):
            account = EnergyAccount(self.profile, {"cpu": cfg.cpu_idle_mode, "radio": cfg.radio_idle_mode})
            node = Node(addr, roles[addr], Battery(capacity, voltage=self.profile.voltage), account,
                        ModeTimeline("radio", cfg.radio_idle_mode, MODE_PRIORITY["radio"]),
                        ModeTimeline("cpu", cfg.cpu_idle_mode, MODE_PRIORITY["cpu"]))
            if cfg.heuristic == "lifetime":
                node.estimator = LifetimeEstimator(capacity, cfg.effective_target_lifetime)
            node.h = self.heuristic_override.get(addr, 1.0)
            if cfg.protocol == "aodvjr":
                node.protocol = AodvjrProtocol(addr, self, cfg.aodvjr_config())
            else:
                node.protocol = AdhopProtocol(addr, self, cfg.adhop_config())
            self.nodes.append(node)
        for src, dst in self.flows:
            self.nodes[src].peer = dst

        self.counters: dict[str, int] = defaultdict(int)
        self.generated = 0
        self.delivered = 0
        self.total_bytes = 0
        self.control_bytes = 0
        self.frames_sent = 0
        self.tx_airtime = 0.0
        self.msg_bytes: dict[tuple[int, int], list[int]] = {}
        self.delivery_paths: dict[tuple[int, int], tuple[int, int]] = {}
        self.degree_samples: list[float] = []
        self.deliveries: list[tuple[float, int, tuple[int, int]]] = []
        self._last_tick = 0.0
        self._finished = False

    # facade used by the protocols

    @property
    def now(self) -> float:
        return self.sched.now

    def heuristic(self, addr: int) -> float:
        return self.nodes[addr].h

    def count(self, name: str, n: int = 1) -> None:
        self.counters[name] += n

    def schedule(self, delay: float, node: int, kind: str, fn, *args) -> None:
        self.sched.at(self.now + delay, node, kind, self._guarded, node, fn, args)

    def _guarded(self, node: int, fn, args) -> None:
        if self.nodes[node].alive:
            fn(*args)

    def unicast(self, src: int, dst: int, frame: Frame) -> None:
        self._enqueue(self.nodes[src], frame, dst)

    def broadcast(self, src: int, frame: Frame) -> None:
        self._enqueue(self.nodes[src], frame, BROADCAST)

    def deliver(self, addr: int, frame: Frame) -> None:
        self.delivered += 1
        self.delivery_paths[frame.msg] = (frame.path_bytes, frame.path_payload)
        self.deliveries.append((self.now, addr, frame.msg))

    # MAC

    def _cpu_burst(self, node: Node) -> None:
        now = self.now
        node.cpu.add(now, now + self.cfg.cpu_burst_s, "active")

    def _enqueue(self, node: Node, frame: Frame, dst: int) -> None:
        if not node.alive:
            return
        self._cpu_burst(node)
        node.mac_queue.append((frame, dst))
        if not node.mac_busy:
            node.mac_busy = True
            node.attempt = 0
            self._schedule_attempt(node, self.now)

    def _schedule_attempt(self, node: Node, earliest: float) -> None:
        t = earliest + self.mac_rng.random() * self.cfg.backoff_max_s
        self.sched.at(t, node.address, "tx-start", self._tx_start, node)

    def _mac_next(self, node: Node, earliest: float) -> None:
        node.attempt = 0
        if node.mac_queue and node.alive:
            self._schedule_attempt(node, earliest)
        else:
            node.mac_busy = False

    def _tx_start(self, node: Node) -> None:
        if not node.alive:
            node.mac_queue.clear()
            node.mac_busy = False
            return
        now = self.now
        busy = max(node.radio.busy_until["rx"], node.tx_busy_until)
        if busy > now:
            self._schedule_attempt(node, busy)
            return
        frame, dst = node.mac_queue[0]
        end = now + airtime(frame.size, self.cfg.bitrate_bps)
        node.radio.add(now, end, "tx")
        node.tx_windows.append((now, end))
        node.account.record_event("radio", "tx_frame")
        self.frames_sent += 1
        self.tx_airtime += end - now
        self.total_bytes += frame.size
        if frame.msg is not None:
            tally = self.msg_bytes.get(frame.msg)
            if tally is None:
                self.msg_bytes[frame.msg] = [frame.size, frame.payload]
            else:
                tally[0] += frame.size
                tally[1] += frame.payload
        else:
            self.control_bytes += frame.size
        receivers = kernels.in_range(self.mobility.x, self.mobility.y, self.alive, node.address, self.r2)
        nodes = self.nodes
        if dst == BROADCAST or self.cfg.overhear_bytes is None:
            for r in receivers:
                nodes[r].radio.add(now, end, "rx")
        else:
            # other nodes drop the frame once the MAC header shows it is not theirs
            cut = min(end, now + airtime(self.cfg.overhear_bytes, self.cfg.bitrate_bps))
            for r in receivers:
                nodes[r].radio.add(now, end if r == dst else cut, "rx")
        self.sched.at(end, node.address, "tx-end", self._tx_end, node, frame, dst, receivers, now)

    def _heard(self, rn: Node, start: float, end: float) -> bool:
        if not rn.alive or rn.transmitting_during(start, end):
            return False
        p = self.cfg.loss_prob
        return not (p > 0 and self.mac_rng.random() < p)

    def _tx_end(self, node: Node, frame: Frame, dst: int, receivers: list[int], start: float) -> None:
        now = self.now
        nodes = self.nodes
        if not node.alive:
            # battery ran out mid-frame; the queue was already dropped
            node.mac_busy = False
            return
        if dst == BROADCAST:
            node.mac_queue.popleft()
            self._mac_next(node, now)
            for r in receivers:
                rn = nodes[r]
                if self._heard(rn, start, now):
                    self._receive(rn, frame, node.address)
            return
        dn = nodes[dst] if 0 <= dst < len(nodes) else None
        if dn is not None and dst in receivers and self._heard(dn, start, now):
            ack_start = now + self.cfg.turnaround_s
            ack_end = ack_start + self.ack_air
            dn.radio.add(ack_start, ack_end, "tx")
            dn.tx_windows.append((ack_start, ack_end))
            dn.account.record_event("radio", "tx_frame")
            node.radio.add(ack_start, ack_end, "rx")
            self.frames_sent += 1
            self.tx_airtime += ack_end - ack_start
            self.total_bytes += self.cfg.ack_bytes
            self.control_bytes += self.cfg.ack_bytes
            node.mac_queue.popleft()
            self._mac_next(node, ack_end)
            self._receive(dn, frame, node.address)
            return
        node.attempt += 1
        if node.attempt <= self.cfg.mac_retries:
            self._schedule_attempt(node, now + self.cfg.ack_wait_s)
            return
        node.mac_queue.popleft()
        self._mac_next(node, now + self.cfg.ack_wait_s)
        self.counters["mac_failure"] += 1
        if node.alive:
            node.protocol.unicast_failed(frame, dst)

    def _receive(self, node: Node, frame: Frame, sender: int) -> None:
        self._cpu_burst(node)
        self.sender = sender
        node.protocol.receive(frame)

    # periodic events

    def _app_send(self, src: int) -> None:
        node = self.nodes[src]
        self.generated += 1
        if node.alive:
            node.protocol.send_data(node.peer, self.cfg.message_bytes)
        else:
            self.counters["generation_failure"] += 1
        nxt = self.now + self.cfg.message_interval_s
        if nxt < self.cfg.duration_s:
            self.sched.at(nxt, src, "app-send", self._app_send, src)

    def _mobility_tick(self) -> None:
        cfg = self.cfg
        self.mobility.step(self.now, cfg.mobility_step_s, self.alive)
        nxt = self.now + cfg.mobility_step_s
        if nxt <= cfg.duration_s:
            self.sched.at(nxt, -1, "mobility", self._mobility_tick)

    def _evaporation_tick(self) -> None:
        now = self.now
        for node in self.nodes:
            if node.alive:
                node.protocol.tick(now)
        nxt = now + self.cfg.evaporation_period_s
        if nxt <= self.cfg.duration_s:
            self.sched.at(nxt, -1, "evaporation", self._evaporation_tick)

    def _accounting_tick(self) -> None:
        now = self.now
        self._account(now)
        self.degree_samples.append(kernels.mean_degree(self.mobility.x, self.mobility.y, self.alive, self.r2))
        nxt = now + self.cfg.accounting_period_s
        if nxt <= self.cfg.duration_s:
            self.sched.at(nxt, -1, "accounting", self._accounting_tick)

    def _account(self, now: float) -> None:
        kind = self.cfg.heuristic
        for node in self.nodes:
            if not node.alive:
                continue
            node.radio.settle(node.account, now)
            node.cpu.settle(node.account, now)
            node.account.accounting_tick(node.battery, now)
            if node.battery.depleted:
                self._die(node, now)
                continue
            if node.address in self.heuristic_override:
                continue
            node.h = node_heuristic(kind, node.battery.remaining, node.battery.capacity, now,
                                    node.estimator)
        self._last_tick = now

    def _die(self, node: Node, now: float) -> None:
        node.alive = False
        node.death_time = now
        self.alive[node.address] = 0
        node.account.switch_off(now)
        node.radio.clear()
        node.cpu.clear()
        node.mac_queue.clear()
        self.counters["deaths"] += 1

    # run

    def _schedule_initial(self) -> None:
        cfg = self.cfg
        sched = self.sched
        if cfg.duration_s <= 0:
            return
        if cfg.v_max > 0:
            sched.at(cfg.mobility_step_s, -1, "mobility", self._mobility_tick)
        sched.at(cfg.evaporation_period_s, -1, "evaporation", self._evaporation_tick)
        sched.at(cfg.accounting_period_s, -1, "accounting", self._accounting_tick)
        for src, _ in self.flows:
            phase = self.traffic_rng.random() * cfg.message_interval_s
            if phase < cfg.duration_s:
                sched.at(phase, src, "app-send", self._app_send, src)

    def run(self) -> MetricsReport:
        if self._finished:
            raise RuntimeError("a Simulation can only run once")
        self._schedule_initial()
        self.sched.run(self.cfg.duration_s)
        if self.cfg.duration_s > self._last_tick:
            self._account(self.cfg.duration_s)
        self._finished = True
        return self.report()

    def report(self) -> MetricsReport:
        cfg = self.cfg
        rep = MetricsReport(cfg.protocol, cfg.node_count, cfg.seed, cfg.duration_s)
        rep.node_energy_j = [node.account.drawn for node in self.nodes]
        rep.death_times = [node.death_time for node in self.nodes]
        rep.energy_demanded_j = math.fsum(node.account.demanded for node in self.nodes)
        rep.energy_ticks_j = math.fsum(rep.node_energy_j)
        rep.generated = self.generated
        rep.delivered = self.delivered
        rep.total_bytes = self.total_bytes
        control = self.control_bytes
        header = useful = wasted = 0
        for msg, (sent, payload) in self.msg_bytes.items():
            path = self.delivery_paths.get(msg)
            if path is None:
                header += sent - payload
                wasted += payload
            else:
                path_bytes, path_payload = path
                useful += path_payload
                header += path_bytes - path_payload
                control += sent - path_bytes
        rep.control_bytes = control
        rep.data_header_bytes = header
        rep.useful_bytes = useful
        rep.undelivered_payload_bytes = wasted
        rep.frames_sent = self.frames_sent
        rep.tx_airtime_s = self.tx_airtime
        rep.avg_neighbors = float(np.mean(self.degree_samples)) if self.degree_samples else 0.0
        rep.counters = dict(sorted(self.counters.items()))
        return rep


def run(scenario: Scenario, trace: TextIO | None = None) -> MetricsReport:
    return Simulation(scenario, trace=trace).run()
