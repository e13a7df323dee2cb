"""Discrete-time simulation of backscatter links.

Every packet slot the engine rebuilds the spectrum each receiver sees (direct
carriers, backscatter products, interferers and their tag-shifted copies),
turns it into a :class:`LinkState` per tag/receiver pair and draws the packet
outcome from a seeded PCG64 stream. Carrier-hopping avoidance and the
any-receiver (Unison) aggregate are evaluated per window of packets.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .phy import (
    Origin,
    SpectralComponent,
    carson_bandwidth,
    mixing_products,
    packet_error_rate,
    per_bit_snr,
    receiver_weight,
    shifted_ambient,
    snr_to_sensitivity_check,
)
from .rfmath import (
    bistatic_received_power,
    dbm_to_mw,
    linear_to_db,
    mw_to_dbm,
    path_loss,
)
from .scenario import Receiver, Scenario, crossings, distance, obstacle_loss

AGGREGATE_ID = "aggregate"
_COLOCATED_M = 1e-9


# -- spectrum ---------------------------------------------------------------


def _path_obstacles(scenario: Scenario, a, b) -> float:
    if not scenario.obstacles or tuple(a) == tuple(b):
        return 0.0
    return obstacle_loss(crossings(a, b, scenario.obstacles))


def spectral_environment(
    scenario: Scenario,
    t: float,
    carrier_freqs: Mapping[str, float] | None = None,
) -> dict[str, list[SpectralComponent]]:
    """Spectral components present at each receiver at time ``t``.

    ``carrier_freqs`` overrides carrier centres (used after avoidance hops).
    A carrier sharing its position with a receiver is a monostatic reader:
    its own leakage is assumed cancelled and is left out.
    """
    freqs = {c.id: c.frequency for c in scenario.carriers}
    if carrier_freqs:
        freqs.update(carrier_freqs)
    n = scenario.path_loss_exponent
    loss = scenario.per_product_loss
    carriers = [c for c in scenario.carriers if c.active(t)]
    interferers = [i for i in scenario.interferers if i.active(t)]
    tags = scenario.tags

    out: dict[str, list[SpectralComponent]] = {}
    for rx in scenario.receivers:
        comps: list[SpectralComponent] = []
        for c in carriers:
            fc = freqs[c.id]
            d = distance(c.position, rx.position)
            if d > _COLOCATED_M:
                p = (
                    c.tx_power
                    + c.antenna_gain
                    + rx.antenna_gain
                    - path_loss(d, fc, n)
                    - _path_obstacles(scenario, c.position, rx.position)
                )
                comps.append(SpectralComponent(fc, 0.0, p, Origin.CARRIER, c.id))
            for tag in tags:
                p = _reflected_power(scenario, c.tx_power, c.antenna_gain, c.position, tag, rx, fc)
                tone = SpectralComponent(fc, 0.0, p, Origin.CARRIER, c.id, tag.id)
                comps.extend(
                    mixing_products(
                        tone,
                        tag.delta_f,
                        loss,
                        modulation_bandwidth=carson_bandwidth(tag.fsk_deviation, tag.bitrate),
                    )
                )
        for intf in interferers:
            fi = intf.frequency_at(t)
            d = distance(intf.position, rx.position)
            p = (
                intf.tx_power
                + intf.antenna_gain
                + rx.antenna_gain
                - path_loss(d, fi, n)
                - _path_obstacles(scenario, intf.position, rx.position)
            )
            comps.append(SpectralComponent(fi, intf.bandwidth, p, Origin.INTERFERENCE, intf.id))
            for tag in tags:
                p = _reflected_power(
                    scenario, intf.tx_power, intf.antenna_gain, intf.position, tag, rx, fi
                )
                block = SpectralComponent(fi, intf.bandwidth, p, Origin.INTERFERENCE, intf.id, tag.id)
                comps.extend(shifted_ambient(block, tag.delta_f, loss))
        out[rx.id] = comps
    return out


def _reflected_power(scenario, p_t, g_t, src_pos, tag, rx: Receiver, f) -> float:
    d1 = distance(src_pos, tag.position)
    d2 = distance(tag.position, rx.position)
    return (
        bistatic_received_power(
            p_t, g_t, rx.antenna_gain, tag.k_factor, f, d1, d2, scenario.path_loss_exponent
        )
        - _path_obstacles(scenario, src_pos, tag.position)
        - _path_obstacles(scenario, tag.position, rx.position)
    )


# -- link quality -----------------------------------------------------------


@dataclass(frozen=True)
class LinkState:
    tag: str | None
    receiver: str
    carrier: str | None
    tuned: float
    signal: float
    residual_carrier: float
    interference: float
    noise: float
    sinr_db: float
    ber: float
    decodable: bool

    @property
    def effective_ber(self) -> float:
        """BER seen by the application: a coin flip below sensitivity."""
        return self.ber if self.decodable else 0.5

    def packet_success_probability(self, payload_bits: int) -> float:
        if not self.decodable:
            return 0.0
        return 1.0 - packet_error_rate(self.ber, payload_bits)


def sinr(
    components: Sequence[SpectralComponent],
    receiver: Receiver,
    tuned: float | None = None,
    tag: str | None = None,
) -> LinkState:
    """Link state of ``tag`` (or the strongest tag) at ``receiver``.

    The signal is the strongest upper backscatter product whose centre lies
    inside the receive filter. Everything else is weighted by the receiver's
    selectivity; other tags' products are ignored since tags take turns.
    """
    profile = receiver.profile
    tuned = receiver.tuned if tuned is None else tuned
    half_bw = profile.rx_bandwidth / 2
    candidates = [
        c
        for c in components
        if c.origin is Origin.BACKSCATTER_UPPER
        and (tag is None or c.via == tag)
        and abs(c.center - tuned) <= half_bw
    ]
    wanted = max(candidates, key=lambda c: c.power, default=None)
    link_tag = tag if wanted is None else wanted.via

    residual_mw = 0.0
    interference_mw = 0.0
    for c in components:
        if c is wanted:
            continue
        if (
            c.origin in (Origin.BACKSCATTER_UPPER, Origin.BACKSCATTER_LOWER_MIRROR)
            and link_tag is not None
            and c.via != link_tag
        ):
            continue
        p = dbm_to_mw(c.power) * receiver_weight(c, tuned, profile.rejection)
        if c.origin is Origin.CARRIER:
            residual_mw += p
        else:
            interference_mw += p

    noise = profile.noise_floor
    if wanted is None:
        signal = -math.inf
        sinr_db = -math.inf
        ber = 0.5
        decodable = False
    else:
        signal = wanted.power
        ratio = dbm_to_mw(signal) / (dbm_to_mw(noise) + residual_mw + interference_mw)
        sinr_db = linear_to_db(ratio)
        ber = profile.ber(per_bit_snr(ratio, profile))
        decodable = snr_to_sensitivity_check(signal, profile)
    return LinkState(
        tag=link_tag,
        receiver=receiver.id,
        carrier=None if wanted is None else wanted.source,
        tuned=tuned,
        signal=signal,
        residual_carrier=mw_to_dbm(residual_mw),
        interference=mw_to_dbm(interference_mw),
        noise=noise,
        sinr_db=sinr_db,
        ber=ber,
        decodable=decodable,
    )


def analytic_links(
    scenario: Scenario, t: float = 0.0, carrier_freqs: Mapping[str, float] | None = None
) -> dict[tuple[str, str], LinkState]:
    """Expected link state of every (tag, receiver) pair at time ``t``."""
    env = spectral_environment(scenario, t, carrier_freqs)
    return {
        (tag.id, rx.id): sinr(env[rx.id], rx, tag=tag.id)
        for tag in scenario.tags
        for rx in scenario.receivers
    }


def unison_aggregate(per_receiver_outcomes: Iterable[bool]) -> bool:
    """A packet counts as received if any receiver decoded it."""
    outcomes = list(per_receiver_outcomes)
    if not outcomes:
        raise ValueError("need at least one receiver outcome")
    return any(outcomes)


# -- carrier-hopping avoidance ----------------------------------------------


@dataclass(frozen=True)
class HopCommand:
    target_index: int
    frequency: float


@dataclass(frozen=True)
class AvoidanceState:
    window_size: int
    prr_threshold: float
    channel_list: tuple[float, ...]
    current_index: int = 0
    pending_hop: bool = False
    hop_latency: int = 1
    countdown: int = 0
    target_index: int | None = None

    def __post_init__(self) -> None:
        if not self.channel_list:
            raise ValueError("channel_list must not be empty")
        if not 0 < self.prr_threshold < 1:
            raise ValueError("prr_threshold must be in (0, 1)")

    @property
    def frequency(self) -> float:
        return self.channel_list[self.current_index]


def avoidance_step(
    state: AvoidanceState, window_prr: float
) -> tuple[AvoidanceState, HopCommand | None]:
    """Advance the receiver-side hop controller by one window.

    A window below the PRR threshold sends one command to move the carrier to
    the next channel (round robin). The carrier and receiver retune
    ``hop_latency`` windows later; windows measured in between still belong
    to the old channel and cannot trigger another command.
    """
    if state.pending_hop:
        left = state.countdown - 1
        if left <= 0:
            return (
                replace(
                    state,
                    current_index=state.target_index,
                    pending_hop=False,
                    countdown=0,
                    target_index=None,
                ),
                None,
            )
        return replace(state, countdown=left), None
    if window_prr >= state.prr_threshold:
        return state, None
    target = (state.current_index + 1) % len(state.channel_list)
    cmd = HopCommand(target, state.channel_list[target])
    if state.hop_latency == 0:
        return replace(state, current_index=target), cmd
    return (
        replace(state, pending_hop=True, countdown=state.hop_latency, target_index=target),
        cmd,
    )


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class WindowRecord:
    time: float
    end: float
    receiver_id: str
    channel: float | None
    snr_db: float | None
    ber: float | None
    prr: float
    packets: int
    event: str = ""


@dataclass
class SimReport:
    scenario: str
    seed: int
    windows: list[WindowRecord] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)

    def series(self, receiver_id: str) -> list[WindowRecord]:
        return [w for w in self.windows if w.receiver_id == receiver_id]

    def prr_series(self, receiver_id: str) -> list[float]:
        return [w.prr for w in self.series(receiver_id)]

    @property
    def aggregate(self) -> list[WindowRecord]:
        return self.series(AGGREGATE_ID)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "windows": [asdict(w) for w in self.windows],
            "events": self.events,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time", "receiver_id", "channel", "snr_db", "ber", "prr", "event"])
        for w in self.windows:
            writer.writerow(
                [
                    repr(w.time),
                    w.receiver_id,
                    "" if w.channel is None else repr(w.channel),
                    "" if w.snr_db is None else repr(w.snr_db),
                    "" if w.ber is None else repr(w.ber),
                    repr(w.prr),
                    w.event,
                ]
            )
        return buf.getvalue()


@dataclass
class _Window:
    packets: int = 0
    ok: int = 0
    sinr_mw: float = 0.0
    links: int = 0
    ber_sum: float = 0.0
    bits: int = 0
    bit_errors: int = 0


def _snr_summary(acc: _Window) -> float | None:
    if acc.links == 0:
        return None
    mean = acc.sinr_mw / acc.links
    return None if mean <= 0 else linear_to_db(mean)


def simulate(scenario: Scenario, seed: int | None = None) -> SimReport:
    """Run the scenario packet slot by packet slot.

    The same scenario and seed always give an identical report. Per slot,
    each (tag, receiver) pair consumes exactly one draw (two with collisions
    enabled), whatever the outcome, so streams stay aligned across runs.
    """
    seed = scenario.seed if seed is None else int(seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    gap = scenario.packet.inter_packet_gap
    n_slots = max(1, int(math.floor(scenario.duration / gap + 1e-9)))
    window = scenario.packet.window_packets
    bits = scenario.packet.payload_bits
    bit_mode = scenario.packet.mode == "bit"
    tags = scenario.tags
    receivers = scenario.receivers

    carrier_freqs = {c.id: c.frequency for c in scenario.carriers}
    tuned = {r.id: r.tuned for r in receivers}
    av_cfg = scenario.avoidance
    av_state = None
    if av_cfg is not None:
        av_state = AvoidanceState(
            window_size=window,
            prr_threshold=av_cfg.prr_threshold,
            channel_list=av_cfg.channels,
            current_index=av_cfg.channels.index(carrier_freqs[av_cfg.carrier]),
            hop_latency=av_cfg.hop_latency,
        )

    report = SimReport(scenario=scenario.name, seed=seed)
    accs = {r.id: _Window() for r in receivers}
    agg = _Window()
    window_start = 0.0
    link_cache: dict[tuple, dict[tuple[str, str], LinkState]] = {}

    for k in range(n_slots):
        t = k * gap
        t_env = math.floor(t / scenario.time_step + 1e-9) * scenario.time_step
        key = (
            tuple(c.active(t_env) for c in scenario.carriers),
            tuple((i.active(t_env), i.frequency_at(t_env)) for i in scenario.interferers),
            tuple(sorted(carrier_freqs.items())),
            tuple(sorted(tuned.items())),
        )
        links = link_cache.get(key)
        if links is None:
            env = spectral_environment(scenario, t_env, carrier_freqs)
            links = {
                (tag.id, rx.id): sinr(env[rx.id], rx, tuned=tuned[rx.id], tag=tag.id)
                for tag in tags
                for rx in receivers
            }
            link_cache[key] = links

        if scenario.collisions.enabled:
            sending = rng.random(len(tags)) < scenario.collisions.transmit_probability
            collided = int(sending.sum()) > 1
        else:
            sending = np.ones(len(tags), dtype=bool)
            collided = False

        for ti, tag in enumerate(tags):
            if not sending[ti]:
                continue
            outcomes = []
            for rx in receivers:
                link = links[(tag.id, rx.id)]
                acc = accs[rx.id]
                if bit_mode:
                    errors = int(rng.binomial(bits, link.effective_ber))
                    ok = errors == 0 and link.decodable and not collided
                    acc.bits += bits
                    acc.bit_errors += errors
                else:
                    u = rng.random()
                    ok = (not collided) and u < link.packet_success_probability(bits)
                acc.packets += 1
                acc.ok += ok
                acc.ber_sum += link.effective_ber
                if link.signal != -math.inf:
                    acc.sinr_mw += 10.0 ** (link.sinr_db / 10.0)
                    acc.links += 1
                outcomes.append(ok)
            if outcomes:
                agg.packets += 1
                agg.ok += unison_aggregate(outcomes)

        last = k == n_slots - 1
        if (k + 1) % window and not last:
            continue

        t_end = (k + 1) * gap
        event = ""
        if av_state is not None:
            prr = accs[av_cfg.receiver].ok / max(accs[av_cfg.receiver].packets, 1)
            before = av_state.current_index
            av_state, cmd = avoidance_step(av_state, prr)
            if cmd is not None:
                event = "hop_command"
                report.events.append(
                    {
                        "time": t_end,
                        "kind": "hop_command",
                        "carrier": av_cfg.carrier,
                        "from_hz": carrier_freqs[av_cfg.carrier],
                        "to_hz": cmd.frequency,
                    }
                )
        for rx in receivers:
            acc = accs[rx.id]
            ber = (acc.bit_errors / acc.bits if acc.bits else None) if bit_mode else (
                acc.ber_sum / acc.packets if acc.packets else None
            )
            report.windows.append(
                WindowRecord(
                    time=window_start,
                    end=t_end,
                    receiver_id=rx.id,
                    channel=tuned[rx.id],
                    snr_db=_snr_summary(acc),
                    ber=ber,
                    prr=acc.ok / acc.packets if acc.packets else 0.0,
                    packets=acc.packets,
                    event=event if av_cfg is not None and rx.id == av_cfg.receiver else "",
                )
            )
        report.windows.append(
            WindowRecord(
                time=window_start,
                end=t_end,
                receiver_id=AGGREGATE_ID,
                channel=None,
                snr_db=None,
                ber=None,
                prr=agg.ok / agg.packets if agg.packets else 0.0,
                packets=agg.packets,
            )
        )
        if av_state is not None and av_state.current_index != before:
            new_fc = av_state.frequency
            shift = new_fc - carrier_freqs[av_cfg.carrier]
            report.events.append(
                {
                    "time": t_end,
                    "kind": "retune",
                    "carrier": av_cfg.carrier,
                    "from_hz": carrier_freqs[av_cfg.carrier],
                    "to_hz": new_fc,
                }
            )
            carrier_freqs[av_cfg.carrier] = new_fc
            # keep delta_f: the receiver follows the carrier
            tuned[av_cfg.receiver] += shift
        accs = {r.id: _Window() for r in receivers}
        agg = _Window()
        window_start = t_end
    return report


__all__ = [
    "AGGREGATE_ID",
    "LinkState",
    "HopCommand",
    "AvoidanceState",
    "WindowRecord",
    "SimReport",
    "spectral_environment",
    "sinr",
    "analytic_links",
    "unison_aggregate",
    "avoidance_step",
    "simulate",
]
