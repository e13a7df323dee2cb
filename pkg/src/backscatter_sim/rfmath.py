"""RF quantities and link-budget primitives.

Powers are dBm, gains dB(i), frequencies Hz and distances metres throughout.
Values cross module boundaries in dB but every sum or product of powers is
done in linear units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
THERMAL_NOISE_DBM_HZ = -174.0  # kT at 290 K

__all__ = [
    "SPEED_OF_LIGHT",
    "THERMAL_NOISE_DBM_HZ",
    "RejectionCurve",
    "CC2500_REJECTION",
    "CC1310_REJECTION",
    "dbm_to_mw",
    "mw_to_dbm",
    "db_to_linear",
    "linear_to_db",
    "wavelength",
    "free_space_path_loss",
    "path_loss",
    "bistatic_received_power",
    "carrier_rejection",
    "noise_floor",
    "sum_dbm",
]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def dbm_to_mw(p_dbm: float) -> float:
    """Convert dBm to milliwatts."""
    p_dbm = _require_finite("power", p_dbm)
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    """Convert milliwatts to dBm. Zero power maps to ``-inf``."""
    if p_mw < 0 or math.isnan(p_mw):
        raise ValueError(f"power must be non-negative, got {p_mw!r}")
    if p_mw == 0:
        return -math.inf
    return 10.0 * math.log10(p_mw)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


def sum_dbm(powers_dbm: Iterable[float]) -> float:
    """Incoherent sum of powers given in dBm; an empty sum is ``-inf``."""
    total = sum(10.0 ** (p / 10.0) for p in powers_dbm if p != -math.inf)
    return mw_to_dbm(total)


def wavelength(f_hz: float) -> float:
    if not f_hz > 0:
        raise ValueError(f"frequency must be positive, got {f_hz!r}")
    return SPEED_OF_LIGHT / f_hz


def free_space_path_loss(d_m: float, f_hz: float) -> float:
    """Friis free-space path loss ``20 log10(4 pi d f / c)`` in dB."""
    if not d_m > 0:
        raise ValueError(f"distance must be positive, got {d_m!r}")
    if not f_hz > 0:
        raise ValueError(f"frequency must be positive, got {f_hz!r}")
    return 20.0 * math.log10(4.0 * math.pi * d_m * f_hz / SPEED_OF_LIGHT)


def path_loss(d_m: float, f_hz: float, exponent: float = 2.0) -> float:
    """One-way log-distance path loss anchored to free space at 1 m.

    With ``exponent == 2`` this is exactly :func:`free_space_path_loss`.
    The linear form is ``(4 pi / lambda)^2 * d^n``, the same substitution the
    bistatic equation uses for its ``d^2`` terms.
    """
    if exponent < 2:
        raise ValueError(f"path-loss exponent must be >= 2, got {exponent!r}")
    if not d_m > 0:
        raise ValueError(f"distance must be positive, got {d_m!r}")
    lam = wavelength(f_hz)
    return 20.0 * math.log10(4.0 * math.pi / lam) + 10.0 * exponent * math.log10(d_m)


def bistatic_received_power(
    p_t: float,
    g_t: float,
    g_r: float,
    k: float,
    f: float,
    d1: float,
    d2: float,
    exponent: float = 2.0,
) -> float:
    """Backscattered power at the receiver in dBm.

    ``P_r = (P_t G_t / (4 pi d1^n)) * K * (lambda^2 G_r / (4 pi d2^n * 4 pi))``

    ``d1`` is carrier generator to tag, ``d2`` tag to receiver. ``k`` lumps
    the tag's radar cross section, antenna gain and return loss.
    """
    if not (d1 > 0 and d2 > 0):
        raise ValueError(f"distances must be positive, got d1={d1!r}, d2={d2!r}")
    if exponent < 2:
        raise ValueError(f"path-loss exponent must be >= 2, got {exponent!r}")
    lam = wavelength(f)
    p_t_mw = dbm_to_mw(p_t)
    incident = p_t_mw * db_to_linear(g_t) / (4.0 * math.pi * d1**exponent)
    reradiated = db_to_linear(k) * lam**2 * db_to_linear(g_r) / (
        4.0 * math.pi * d2**exponent * 4.0 * math.pi
    )
    return mw_to_dbm(incident * reradiated)


@dataclass(frozen=True)
class RejectionCurve:
    """Receiver attenuation versus frequency offset from the tuned channel.

    Piecewise linear in (offset Hz, dB); clamped to the last value beyond the
    final point. The first point must be ``(0, 0)``.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(o), float(r)) for o, r in self.points)
        if not pts:
            raise ValueError("rejection curve needs at least one point")
        if pts[0] != (0.0, 0.0):
            raise ValueError("rejection curve must start at (0 Hz, 0 dB)")
        for (o0, _), (o1, _) in zip(pts, pts[1:]):
            if o1 < o0:
                raise ValueError("rejection curve offsets must be non-decreasing")
        if any(o < 0 or r < 0 for o, r in pts):
            raise ValueError("rejection curve offsets and values must be >= 0")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "RejectionCurve":
        return cls(tuple((p[0], p[1]) for p in pairs))

    @property
    def offsets(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def __call__(self, offset_hz):
        """Vectorised rejection lookup; accepts scalars or arrays."""
        out = np.interp(np.abs(offset_hz), self.offsets, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def to_list(self) -> list[list[float]]:
        return [[o, r] for o, r in self.points]


# Digitised shape of the two measured curves. Both reach 50 dB at the chosen
# intermediate frequency and flatten out past it.
CC2500_REJECTION = RejectionCurve(
    (
        (0.0, 0.0),
        (250e3, 3.0),
        (500e3, 15.0),
        (1e6, 35.0),
        (2e6, 52.0),
        (4e6, 58.0),
        (10e6, 62.0),
    )
)

CC1310_REJECTION = RejectionCurve(
    (
        (0.0, 0.0),
        (15e3, 3.0),
        (30e3, 15.0),
        (60e3, 38.0),
        (100e3, 52.0),
        (300e3, 55.0),
        (1e6, 56.0),
    )
)


def carrier_rejection(curve: RejectionCurve, offset: float) -> float:
    """Rejection in dB of a tone ``offset`` Hz away from the tuned frequency."""
    if offset < 0:
        raise ValueError(f"offset must be >= 0, got {offset!r}")
    return curve(offset)


def noise_floor(bandwidth: float, noise_figure: float) -> float:
    """Thermal noise power in dBm over ``bandwidth`` Hz."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth) + noise_figure
