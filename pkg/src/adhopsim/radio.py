"""Free-space propagation and frame airtime."""
from __future__ import annotations

import math

SPEED_OF_LIGHT = 299_792_458.0


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def communication_range(tx_mw: float, sensitivity_dbm: float, freq_hz: float) -> float:
    """Distance at which free-space received power falls to the sensitivity threshold."""
    if tx_mw <= 0 or freq_hz <= 0:
        raise ValueError("tx power and frequency must be positive")
    wavelength = SPEED_OF_LIGHT / freq_hz
    budget_db = mw_to_dbm(tx_mw) - sensitivity_dbm
    return wavelength / (4.0 * math.pi) * 10.0 ** (budget_db / 20.0)


def airtime(frame_bytes: int, bitrate_bps: float = 250_000.0) -> float:
    return frame_bytes * 8 / bitrate_bps
