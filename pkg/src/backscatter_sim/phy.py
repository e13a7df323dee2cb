"""Modulation-level models: mixing products, spectral occupancy, FSK error rates
and receiver profiles."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

from scipy.special import erfc

from .rfmath import (
    CC1310_REJECTION,
    CC2500_REJECTION,
    RejectionCurve,
    db_to_linear,
    linear_to_db,
    noise_floor,
)

DEFAULT_PER_PRODUCT_LOSS_DB = 3.0
DEFAULT_BER_THRESHOLD = 1e-2


class Origin(str, enum.Enum):
    CARRIER = "carrier"
    BACKSCATTER_UPPER = "backscatter_upper"
    BACKSCATTER_LOWER_MIRROR = "backscatter_lower_mirror"
    INTERFERENCE = "interference"
    SHIFTED_AMBIENT = "shifted_ambient"


@dataclass(frozen=True)
class SpectralComponent:
    """A flat power spectral block ``[center - bw/2, center + bw/2]``.

    ``bandwidth == 0`` is a tone. ``source`` is the emitting node and ``via``
    the tag that produced it by reflection, if any.
    """

    center: float
    bandwidth: float
    power: float
    origin: Origin
    source: str | None = None
    via: str | None = None

    def __post_init__(self) -> None:
        if self.bandwidth < 0:
            raise ValueError(f"bandwidth must be >= 0, got {self.bandwidth!r}")
        if not self.center > 0:
            raise ValueError(f"center frequency must be positive, got {self.center!r}")

    @property
    def low(self) -> float:
        return self.center - self.bandwidth / 2

    @property
    def high(self) -> float:
        return self.center + self.bandwidth / 2


@dataclass(frozen=True)
class Band:
    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise ValueError(f"band needs low < high, got [{self.low}, {self.high}]")

    def contains(self, f: float) -> bool:
        return self.low <= f <= self.high


ISM_24 = Band(2400e6, 2483.5e6)
SRD_868 = Band(863e6, 870e6)
BANDS = {"ISM-2.4": ISM_24, "SRD-868": SRD_868}


# -- error models -----------------------------------------------------------


def fsk_ber(snr_per_bit: float) -> float:
    """Noncoherent binary FSK bit error rate, ``0.5 * exp(-gamma / 2)``.

    ``snr_per_bit`` is linear Eb/N0.
    """
    if snr_per_bit < 0 or math.isnan(snr_per_bit):
        raise ValueError(f"SNR per bit must be >= 0, got {snr_per_bit!r}")
    return 0.5 * math.exp(-snr_per_bit / 2.0)


def coherent_fsk_ber(snr_per_bit: float) -> float:
    """Coherent orthogonal BFSK, ``Q(sqrt(gamma))``."""
    if snr_per_bit < 0 or math.isnan(snr_per_bit):
        raise ValueError(f"SNR per bit must be >= 0, got {snr_per_bit!r}")
    return 0.5 * float(erfc(math.sqrt(snr_per_bit / 2.0)))


BER_MODELS: dict[str, Callable[[float], float]] = {
    "noncoherent": fsk_ber,
    "coherent": coherent_fsk_ber,
}


def _invert_ber(model: Callable[[float], float], ber: float) -> float:
    """Linear Eb/N0 at which ``model`` reaches ``ber`` (bisection in dB)."""
    if not 0 < ber < 0.5:
        raise ValueError(f"target BER must be in (0, 0.5), got {ber!r}")
    lo, hi = -30.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if model(db_to_linear(mid)) > ber:
            lo = mid
        else:
            hi = mid
    return db_to_linear(hi)


def packet_error_rate(ber: float, payload_bits: int) -> float:
    """Probability that at least one of ``payload_bits`` independent bits fails."""
    if not 0 <= ber <= 1:
        raise ValueError(f"BER must be in [0, 1], got {ber!r}")
    if payload_bits < 1:
        raise ValueError(f"payload must have at least one bit, got {payload_bits!r}")
    # log1p keeps tiny BERs from rounding to PER 0
    if ber == 1:
        return 1.0
    return -math.expm1(payload_bits * math.log1p(-ber))


# -- receiver profiles ------------------------------------------------------


def carson_bandwidth(fsk_deviation: float, bitrate: float) -> float:
    return 2.0 * (fsk_deviation + bitrate)


def calibrated_demod_loss(
    sensitivity: float,
    rx_bandwidth: float,
    noise_figure: float,
    bitrate: float,
    ber_threshold: float = DEFAULT_BER_THRESHOLD,
    ber_model: str = "noncoherent",
) -> float:
    """Demodulator loss (dB) that puts ``ber_threshold`` exactly at ``sensitivity``.

    Datasheet sensitivities already include whatever the real demodulator
    loses against the ideal detector; this recovers that loss so the BER
    model and the quoted sensitivity describe the same receiver.
    """
    snr = sensitivity - noise_floor(rx_bandwidth, noise_figure)
    ideal_gamma_db = snr + linear_to_db(rx_bandwidth / bitrate)
    needed_db = linear_to_db(_invert_ber(BER_MODELS[ber_model], ber_threshold))
    return ideal_gamma_db - needed_db


@dataclass(frozen=True)
class RadioProfile:
    """Receiver and band parameters for one operating mode."""

    name: str
    band_center: float
    sensitivity: float
    rejection: RejectionCurve
    bitrate: float
    fsk_deviation: float
    rx_bandwidth: float
    noise_figure: float
    intermediate_freq: float
    demod_loss: float | None = None
    ber_model: str = "noncoherent"

    def __post_init__(self) -> None:
        if not self.fsk_deviation < self.rx_bandwidth:
            raise ValueError(
                f"profile {self.name!r}: fsk_deviation must be below rx_bandwidth"
            )
        if not self.intermediate_freq > 0:
            raise ValueError(f"profile {self.name!r}: intermediate_freq must be > 0")
        if not (self.bitrate > 0 and self.rx_bandwidth > 0):
            raise ValueError(f"profile {self.name!r}: bitrate and bandwidth must be > 0")
        if self.ber_model not in BER_MODELS:
            raise ValueError(f"profile {self.name!r}: unknown BER model {self.ber_model!r}")
        if self.demod_loss is None:
            loss = calibrated_demod_loss(
                self.sensitivity,
                self.rx_bandwidth,
                self.noise_figure,
                self.bitrate,
                ber_model=self.ber_model,
            )
            object.__setattr__(self, "demod_loss", loss)

    @property
    def noise_floor(self) -> float:
        return noise_floor(self.rx_bandwidth, self.noise_figure)

    def ber(self, snr_per_bit: float) -> float:
        return BER_MODELS[self.ber_model](snr_per_bit)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "band_center_hz": self.band_center,
            "sensitivity_dbm": self.sensitivity,
            "rejection": self.rejection.to_list(),
            "bitrate_bps": self.bitrate,
            "fsk_deviation_hz": self.fsk_deviation,
            "rx_bandwidth_hz": self.rx_bandwidth,
            "noise_figure_db": self.noise_figure,
            "intermediate_freq_hz": self.intermediate_freq,
            "demod_loss_db": self.demod_loss,
            "ber_model": self.ber_model,
        }


def _fast_24_sensitivity(slow: RadioProfile, bitrate: float, rx_bandwidth: float) -> float:
    # Same demodulator, wider filter and shorter bits.
    needed = linear_to_db(_invert_ber(fsk_ber, DEFAULT_BER_THRESHOLD))
    return (
        needed
        + slow.demod_loss
        - linear_to_db(rx_bandwidth / bitrate)
        + noise_floor(rx_bandwidth, slow.noise_figure)
    )


LOREA_868 = RadioProfile(
    name="LoRea-868",
    band_center=868e6,
    sensitivity=-124.0,
    rejection=CC1310_REJECTION,
    bitrate=2.9e3,
    fsk_deviation=13e3,
    rx_bandwidth=58e3,
    noise_figure=6.0,
    intermediate_freq=100e3,
)

LOREA_24 = RadioProfile(
    name="LoRea-2.4",
    band_center=2440e6,
    sensitivity=-104.0,
    rejection=CC2500_REJECTION,
    bitrate=2.9e3,
    fsk_deviation=190e3,
    rx_bandwidth=812e3,
    noise_figure=10.0,
    intermediate_freq=2e6,
)

LOREA_24_FAST = RadioProfile(
    name="LoRea-2.4-fast",
    band_center=2440e6,
    sensitivity=_fast_24_sensitivity(LOREA_24, 197e3, 1.2e6),
    rejection=CC2500_REJECTION,
    bitrate=197e3,
    fsk_deviation=190e3,
    rx_bandwidth=1.2e6,
    noise_figure=10.0,
    intermediate_freq=2e6,
)

# Commercial monostatic UHF reader used as the comparison baseline.
RFID_R420 = RadioProfile(
    name="RFID-R420",
    band_center=866.5e6,
    sensitivity=-84.0,
    rejection=RejectionCurve(((0.0, 0.0), (250e3, 20.0), (1e6, 40.0))),
    bitrate=640e3,
    fsk_deviation=320e3,
    rx_bandwidth=1.5e6,
    noise_figure=10.0,
    intermediate_freq=640e3,
)

PROFILES: dict[str, RadioProfile] = {
    p.name: p for p in (LOREA_868, LOREA_24, LOREA_24_FAST, RFID_R420)
}


def per_bit_snr(sinr_linear: float, profile: RadioProfile) -> float:
    """Eb/(N0+I0) seen by the demodulator, after processing gain and demod loss."""
    return sinr_linear * (profile.rx_bandwidth / profile.bitrate) / db_to_linear(
        profile.demod_loss
    )


def snr_to_sensitivity_check(p_r: float, profile: RadioProfile) -> bool:
    """True iff ``p_r`` reaches the profile's sensitivity (closed boundary)."""
    return p_r >= profile.sensitivity


# -- mixing and occupancy ---------------------------------------------------


def mixing_products(
    carrier: SpectralComponent,
    delta_f: float,
    per_product_loss: float = DEFAULT_PER_PRODUCT_LOSS_DB,
    modulation_bandwidth: float = 0.0,
) -> tuple[SpectralComponent, SpectralComponent]:
    """Upper product at ``f_c + delta_f`` and its mirror at ``f_c - delta_f``.

    Each product carries ``carrier.power - per_product_loss``; the tag factor
    and path losses are the caller's job. ``modulation_bandwidth`` widens both
    products by the occupied bandwidth of the tag's FSK signal.
    """
    if not delta_f > 0:
        raise ValueError(f"delta_f must be positive, got {delta_f!r}")
    bw = carrier.bandwidth + modulation_bandwidth
    power = carrier.power - per_product_loss
    upper = SpectralComponent(
        carrier.center + delta_f,
        bw,
        power,
        Origin.BACKSCATTER_UPPER,
        carrier.source,
        carrier.via,
    )
    lower = replace(
        upper, center=carrier.center - delta_f, origin=Origin.BACKSCATTER_LOWER_MIRROR
    )
    return upper, lower


def shifted_ambient(
    ambient: SpectralComponent,
    delta_f: float,
    per_product_loss: float = DEFAULT_PER_PRODUCT_LOSS_DB,
) -> tuple[SpectralComponent, SpectralComponent]:
    """Copies of a third-party transmission shifted by ``+-delta_f`` at a tag."""
    if not delta_f > 0:
        raise ValueError(f"delta_f must be positive, got {delta_f!r}")
    upper, lower = mixing_products(ambient, delta_f, per_product_loss)
    return (
        replace(upper, origin=Origin.SHIFTED_AMBIENT),
        replace(lower, origin=Origin.SHIFTED_AMBIENT),
    )


def out_of_band_fraction(c: SpectralComponent, band: Band) -> float:
    """Share of the component's power outside ``band`` (uniform density).

    Tones count as point masses, so the result is 0 or 1.
    """
    if c.bandwidth == 0:
        return 0.0 if band.contains(c.center) else 1.0
    inside = max(0.0, min(c.high, band.high) - max(c.low, band.low))
    return 1.0 - inside / c.bandwidth


def _integrate_response(curve: RejectionCurve, a: float, b: float) -> float:
    """Integral of ``10^(-rejection(x)/10)`` over offsets ``[a, b]``, ``0 <= a <= b``."""
    knots = [a] + [x for x in curve.offsets if a < x < b] + [b]
    total = 0.0
    for p, q in zip(knots, knots[1:]):
        width = q - p
        if width <= 0:
            continue
        rp, rq = curve(p), curve(q)
        slope = (rq - rp) / width  # dB per Hz, exact between knots
        base = 10.0 ** (-rp / 10.0)
        if abs(slope * width) < 1e-12:
            total += base * width
        else:
            k = slope * math.log(10.0) / 10.0
            total += base * (-math.expm1(-k * width)) / k
    return total


def receiver_weight(c: SpectralComponent, tuned: float, curve: RejectionCurve) -> float:
    """Linear fraction of a component's power that survives the receiver's selectivity.

    A tone is attenuated by the rejection at its offset. A wideband block is
    spread uniformly and weighted offset by offset, so a component only
    partly overlapping the passband contributes the overlapped share.
    """
    if c.bandwidth == 0:
        return 10.0 ** (-curve(abs(c.center - tuned)) / 10.0)
    u0, u1 = c.low - tuned, c.high - tuned
    if u1 <= 0:
        integral = _integrate_response(curve, -u1, -u0)
    elif u0 >= 0:
        integral = _integrate_response(curve, u0, u1)
    else:
        integral = _integrate_response(curve, 0.0, -u0) + _integrate_response(
            curve, 0.0, u1
        )
    return integral / c.bandwidth


__all__ = [
    "Origin",
    "SpectralComponent",
    "Band",
    "ISM_24",
    "SRD_868",
    "BANDS",
    "RadioProfile",
    "PROFILES",
    "LOREA_868",
    "LOREA_24",
    "LOREA_24_FAST",
    "RFID_R420",
    "BER_MODELS",
    "fsk_ber",
    "coherent_fsk_ber",
    "packet_error_rate",
    "carson_bandwidth",
    "calibrated_demod_loss",
    "per_bit_snr",
    "snr_to_sensitivity_check",
    "mixing_products",
    "shifted_ambient",
    "out_of_band_fraction",
    "receiver_weight",
    "DEFAULT_PER_PRODUCT_LOSS_DB",
    "DEFAULT_BER_THRESHOLD",
]
