"""Per-node energy accounting: time in operating mode plus counted events.

Energy for one accounting iteration is the sum over devices of the
time-in-mode energy (duration x current x supply voltage) and the event energy
(count x worst-case cost per event). The battery is debited by that total at
every accounting tick.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

OFF = "off"

# EPOSMote current drain, amperes
EPOSMOTE_CURRENTS = {
    "cpu": {"active": 3.3e-3, "sleep": 60e-6, "hibernate": 0.9e-6},
    "radio": {"tx": 28.3e-3, "rx": 21.3e-3, "sleep": 0.1e-6},
}


def battery_energy_joules(capacity_mah: float, voltage: float) -> float:
    """Convert a charge rating to energy: 1 mAh at 1 V is 3.6 J."""
    if capacity_mah < 0 or voltage <= 0:
        raise ValueError("capacity must be >= 0 and voltage > 0")
    return capacity_mah * 3.6 * voltage


@dataclass
class DeviceProfile:
    name: str
    currents: dict[str, float]
    event_costs: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.currents = {**self.currents, OFF: 0.0}
        if any(v < 0 for v in self.currents.values()) or any(v < 0 for v in self.event_costs.values()):
            raise ValueError(f"negative current or event cost in profile {self.name!r}")


@dataclass
class PowerProfile:
    voltage: float = 3.0
    devices: dict[str, DeviceProfile] = field(default_factory=dict)
    accounting_period: float = 1.0

    @classmethod
    def eposmote(cls, voltage: float = 3.0, tx_frame_mj: float = 0.0) -> PowerProfile:
        devices = {name: DeviceProfile(name, dict(modes)) for name, modes in EPOSMOTE_CURRENTS.items()}
        devices["radio"].event_costs["tx_frame"] = tx_frame_mj * 1e-3
        return cls(voltage=voltage, devices=devices)


def load_power_profile(path: str | Path) -> PowerProfile:
    """Read a key = value profile file.

    Keys are ``voltage_v``, ``accounting_period_s``, ``<device>.<mode>_ma`` for
    currents in mA and ``event.<device>.<event>_mj`` for event costs in mJ.
    Devices and modes missing from the file keep the EPOSMote defaults.
    """
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[profile]\n" + text)
    values = parser["profile"]

    profile = PowerProfile.eposmote()
    for key, raw in values.items():
        value = float(raw)
        if key == "voltage_v":
            profile.voltage = value
        elif key == "accounting_period_s":
            profile.accounting_period = value
        elif key.startswith("event.") and key.endswith("_mj"):
            _, device, event = key[: -len("_mj")].split(".", 2)
            _device(profile, device).event_costs[event] = value * 1e-3
        elif key.endswith("_ma") and "." in key:
            device, mode = key[: -len("_ma")].split(".", 1)
            _device(profile, device).currents[mode] = value * 1e-3
        else:
            raise ValueError(f"unknown power profile key {key!r}")
    if profile.voltage <= 0 or profile.accounting_period <= 0:
        raise ValueError("voltage and accounting period must be positive")
    return profile


def _device(profile: PowerProfile, name: str) -> DeviceProfile:
    if name not in profile.devices:
        profile.devices[name] = DeviceProfile(name, {})
    return profile.devices[name]


@dataclass
class Battery:
    capacity: float
    remaining: float | None = None
    voltage: float = 3.0

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")
        if self.remaining is None:
            self.remaining = self.capacity

    @property
    def depleted(self) -> bool:
        return self.remaining <= 0.0

    def draw(self, energy: float) -> float:
        """Remove ``energy`` joules, never below zero; returns what was actually drawn."""
        drawn = min(energy, self.remaining)
        self.remaining -= drawn
        return drawn


@dataclass
class _DeviceState:
    mode: str
    since: float
    e_tm: float = 0.0
    counts: dict[str, int] = field(default_factory=dict)
    total_tm: float = 0.0
    total_ev: float = 0.0
    durations: dict[str, float] = field(default_factory=dict)


class EnergyAccount:
    def __init__(self, profile: PowerProfile, modes: dict[str, str], now: float = 0.0):
        self.profile = profile
        self.devices: dict[str, _DeviceState] = {}
        for name, mode in modes.items():
            if mode not in profile.devices[name].currents:
                raise ValueError(f"device {name!r} has no mode {mode!r}")
            self.devices[name] = _DeviceState(mode, now)
        for name, dev in profile.devices.items():
            if name in self.devices:
                for event in dev.event_costs:
                    self.devices[name].counts[event] = 0
        self.iteration = 0
        self.demanded = 0.0
        self.drawn = 0.0

    def mode(self, device: str) -> str:
        return self.devices[device].mode

    def mode_change(self, device: str, new_mode: str, now: float) -> float:
        """Close the current mode interval at ``now`` and enter ``new_mode``."""
        state = self.devices[device]
        currents = self.profile.devices[device].currents
        if new_mode not in currents:
            raise ValueError(f"device {device!r} has no mode {new_mode!r}")
        dt = now - state.since
        if dt < 0:
            raise ValueError(f"mode change at {now} precedes {state.since}")
        delta = dt * currents[state.mode] * self.profile.voltage
        state.e_tm += delta
        state.durations[state.mode] = state.durations.get(state.mode, 0.0) + dt
        state.mode = new_mode
        state.since = now
        return delta

    def accumulate(self, device: str, durations: dict[str, float], mode: str, now: float) -> None:
        """Bulk form of a run of mode changes ending in ``mode`` at ``now``.

        ``durations`` must cover ``[since, now]`` exactly, keyed by mode.
        """
        state = self.devices[device]
        currents = self.profile.devices[device].currents
        volts = self.profile.voltage
        for m, dt in durations.items():
            if dt < 0:
                raise ValueError(f"negative duration in mode {m!r}")
            state.e_tm += dt * currents[m] * volts
            state.durations[m] = state.durations.get(m, 0.0) + dt
        if mode not in currents:
            raise ValueError(f"device {device!r} has no mode {mode!r}")
        state.mode = mode
        state.since = now

    def record_event(self, device: str, event: str) -> None:
        counts = self.devices[device].counts
        if event not in counts:
            raise KeyError(f"event {event!r} has no profiled cost on {device!r}")
        counts[event] += 1

    def accounting_tick(self, battery: Battery, now: float) -> float:
        """Close iteration i: total energy of all devices, debited from ``battery``."""
        total = 0.0
        for name, state in self.devices.items():
            self.mode_change(name, state.mode, now)
            costs = self.profile.devices[name].event_costs
            e_ev = sum(costs[e] * n for e, n in state.counts.items())
            total += state.e_tm + e_ev
            state.total_tm += state.e_tm
            state.total_ev += e_ev
            state.e_tm = 0.0
            for e in state.counts:
                state.counts[e] = 0
        self.iteration += 1
        self.demanded += total
        self.drawn += battery.draw(total)
        return total

    def switch_off(self, now: float) -> None:
        for name in self.devices:
            self.mode_change(name, OFF, now)


# priority order per device: earlier wins when intervals overlap
MODE_PRIORITY = {"radio": ("tx", "rx"), "cpu": ("active",)}


class ModeTimeline:
    """Activity intervals of one device, replayed in time order as mode changes.

    Intervals may overlap (a node can hear two frames at once); the device is
    in the highest-priority mode active at each instant and in ``idle``
    otherwise.
    """

    __slots__ = ("device", "idle", "priority", "intervals", "busy_until")

    def __init__(self, device: str, idle: str, priority: tuple[str, ...]):
        self.device = device
        self.idle = idle
        self.priority = priority
        self.intervals: list[tuple[float, float, str]] = []
        self.busy_until: dict[str, float] = {m: -math.inf for m in priority}

    def add(self, start: float, end: float, mode: str) -> None:
        intervals = self.intervals
        if intervals:
            s0, e0, m0 = intervals[-1]
            # overlapping same-mode intervals have the same union either way
            if m0 == mode and s0 <= start <= e0:
                if end > e0:
                    intervals[-1] = (s0, end, mode)
                    self.busy_until[mode] = max(self.busy_until[mode], end)
                return
        intervals.append((start, end, mode))
        if end > self.busy_until[mode]:
            self.busy_until[mode] = end

    def settle(self, account: EnergyAccount, until: float) -> None:
        """Charge ``account`` for everything up to ``until``; later parts are kept."""
        state = account.devices[self.device]
        points = []
        kept = []
        for start, end, mode in self.intervals:
            if start >= until:
                kept.append((start, end, mode))
                continue
            if end > until:
                kept.append((until, end, mode))
                end = until
            points.append((start, 1, mode))
            points.append((end, -1, mode))
        self.intervals = kept
        if not points:
            if state.mode != self.idle or until > state.since:
                account.accumulate(self.device, {state.mode: until - state.since}, self.idle, until)
            return
        points.sort(key=lambda p: (p[0], p[1]))
        priority = self.priority
        active = dict.fromkeys(priority, 0)
        durations: dict[str, float] = {}
        current = state.mode
        t_prev = state.since
        for t, step, mode in points:
            active[mode] += step
            for m in priority:
                if active[m] > 0:
                    target = m
                    break
            else:
                target = self.idle
            if target != current:
                if t < t_prev:
                    raise ValueError(f"mode change at {t} precedes {t_prev}")
                durations[current] = durations.get(current, 0.0) + (t - t_prev)
                current = target
                t_prev = t
        durations[current] = durations.get(current, 0.0) + (until - t_prev)
        account.accumulate(self.device, durations, self.idle, until)

    def clear(self) -> None:
        self.intervals = []
