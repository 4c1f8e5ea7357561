"""Scenario configuration: one flat set of keys, readable from ``key = value`` files."""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from adhopsim.ants import AdhopConfig
from adhopsim.aodvjr import AodvjrConfig
from adhopsim.frames import Stack
from adhopsim.pheromone import PheromoneParams

PROTOCOLS = ("adhop", "ea-adhop-b", "ea-adhop-l", "aodvjr")
HEURISTIC_OF = {"adhop": "none", "ea-adhop-b": "battery", "ea-adhop-l": "lifetime", "aodvjr": "none"}


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    protocol: str = "adhop"
    seed: int = 1
    duration_s: float = 300.0
    area_m: float = 1200.0
    node_count: int = 100
    source_count: int = 20
    sink_count: int = 20

    # mobility
    v_max: float = 5.0
    turn_interval_s: float = 3.0
    turn_stddev_deg: float = 30.0
    mobility_step_s: float = 0.5

    # channel and MAC
    tx_power_mw: float = 1.0
    sensitivity_dbm: float = -85.0
    frequency_hz: float = 2.4e9
    bitrate_bps: float = 250_000.0
    loss_prob: float = 0.0
    mac_retries: int = 3
    backoff_max_s: float = 8 * 320e-6
    turnaround_s: float = 192e-6
    ack_wait_s: float = 864e-6
    overhear_bytes: int | None = 22

    # traffic and frame layout
    message_bytes: int = 32
    message_interval_s: float = 4.0
    udp_header: int = 8
    ip_header: int = 20
    adhop_header: int = 20
    mac_header: int = 22
    max_frame: int = 102
    ack_bytes: int = 5
    aodv_control_bytes: int = 24

    # ADHOP
    tau_init: float = 50.0
    tau_0: float = 100.0
    tau_min: float = 1.0
    tau_max: float = 200.0
    phi_base: float = 0.5
    rho_base: float = 0.1
    kappa: float | None = None
    evaporation_period_s: float = 1.0
    buckets: int = 16
    ttl: int = 32
    dedupe_capacity: int = 256
    dedupe_age_s: float = 30.0
    pending_expiry_s: float = 10.0
    target_lifetime_s: float | None = None

    # energy
    battery_mah: float = 3.0
    voltage: float = 3.0
    accounting_period_s: float = 1.0
    power_profile: str | None = None
    radio_idle_mode: str = "sleep"
    cpu_idle_mode: str = "sleep"
    cpu_burst_s: float = 1e-3
    tx_event_mj: float = 0.0

    # AODVjr
    route_timeout_s: float = 10.0
    rreq_retries: int = 3
    rreq_wait_s: float = 2.0
    buffer_size: int = 8

    extra: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def heuristic(self) -> str:
        return HEURISTIC_OF[self.protocol]

    @property
    def total_nodes(self) -> int:
        return self.node_count + self.source_count + self.sink_count

    @property
    def effective_kappa(self) -> float:
        if self.kappa is not None:
            return self.kappa
        return 0.0 if self.heuristic == "none" else 0.5

    @property
    def effective_target_lifetime(self) -> float:
        return self.target_lifetime_s if self.target_lifetime_s is not None else self.duration_s

    def stack(self) -> Stack:
        return Stack(self.message_bytes, self.udp_header, self.ip_header, self.adhop_header,
                     self.mac_header, self.max_frame, self.ack_bytes, self.aodv_control_bytes)

    def adhop_config(self) -> AdhopConfig:
        params = PheromoneParams(self.tau_init, self.tau_0, self.tau_min, self.tau_max,
                                 self.phi_base, self.rho_base, self.effective_kappa, self.buckets)
        return AdhopConfig(params, self.ttl, self.dedupe_capacity, self.dedupe_age_s,
                           self.pending_expiry_s)

    def aodvjr_config(self) -> AodvjrConfig:
        return AodvjrConfig(self.route_timeout_s, self.rreq_retries, self.rreq_wait_s,
                            self.buffer_size, self.ttl, self.dedupe_capacity, self.dedupe_age_s)

    def validate(self) -> Scenario:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; expected one of {PROTOCOLS}")
        if self.duration_s < 0 or self.area_m <= 0:
            raise ConfigError("duration must be >= 0 and area > 0")
        if min(self.node_count, self.source_count, self.sink_count) < 0:
            raise ConfigError("node counts must be nonnegative")
        if self.source_count > self.sink_count:
            raise ConfigError("every source needs its own sink")
        if self.v_max < 0 or self.mobility_step_s <= 0 or self.turn_interval_s <= 0:
            raise ConfigError("invalid mobility parameters")
        if self.tx_power_mw <= 0 or self.frequency_hz <= 0 or self.bitrate_bps <= 0:
            raise ConfigError("tx power, frequency and bitrate must be positive")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ConfigError("loss_prob must lie in [0, 1]")
        if self.stack().adhop_data(self.message_bytes) > self.max_frame:
            raise ConfigError("application message does not fit in the maximum frame")
        if self.radio_idle_mode not in ("sleep", "rx") or self.cpu_idle_mode not in ("sleep", "hibernate"):
            raise ConfigError("radio idle mode must be sleep|rx, cpu idle mode sleep|hibernate")
        if self.battery_mah < 0 or self.voltage <= 0 or self.accounting_period_s <= 0:
            raise ConfigError("invalid battery or accounting parameters")
        if self.evaporation_period_s <= 0 or self.ttl < 1 or self.ttl > 255:
            raise ConfigError("evaporation period must be positive and ttl in [1, 255]")
        try:
            self.adhop_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def replace(self, **changes) -> Scenario:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "extra"}


_FIELDS = {f.name: f for f in fields(Scenario) if f.name != "extra"}


def coerce(name: str, raw: str):
    """Parse a string value into the type of the named scenario field."""
    if name not in _FIELDS:
        raise ConfigError(f"unknown scenario key {name!r}")
    default = _FIELDS[name].default
    kind = _FIELDS[name].type
    text = raw.strip()
    if text.lower() in ("none", "") and "None" in str(kind):
        return None
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int) and not isinstance(default, bool):
            return int(text)
        if isinstance(default, float) or "float" in str(kind):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return text


def parse_pairs(text: str) -> dict[str, str]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    body = text if text.lstrip().startswith("[") else "[scenario]\n" + text
    parser.read_string(body)
    pairs: dict[str, str] = {}
    for section in parser.sections():
        pairs.update(parser[section])
    return pairs


def load_scenario(path: str | Path | None = None, base: Scenario | None = None, **overrides) -> Scenario:
    scenario = base or Scenario()
    changes = {}
    if path is not None:
        for key, raw in parse_pairs(Path(path).read_text()).items():
            changes[key] = coerce(key, raw)
    changes.update({k: v for k, v in overrides.items() if v is not None})
    return scenario.replace(**changes).validate()


def dump_scenario(scenario: Scenario) -> str:
    lines = []
    for key, value in scenario.to_dict().items():
        lines.append(f"{key} = {'none' if value is None else value}")
    return "\n".join(lines) + "\n"
