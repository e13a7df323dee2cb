"""Parameter sweeps, maximum-range search and the experiment presets' drivers.

Curve-shaped results (BER against distance, signal strength along a line)
are evaluated on the analytic expected link, which has no sampling noise.
Packet-level behaviour comes from :func:`engine.simulate`.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .engine import AGGREGATE_ID, LinkState, analytic_links, simulate
from .phy import DEFAULT_BER_THRESHOLD
from .scenario import (
    Node,
    ObstacleKind,
    Receiver,
    Scenario,
    Tag,
    apply_overrides,
    load_scenario,
    read_document,
)

MONTE_CARLO_PACKETS = 100
SWEEP_MODES = ("analytic", "monte_carlo")
RANGE_MODES = ("fixed", "equidistant", "monostatic")


# -- helpers ----------------------------------------------------------------


def _pick(nodes: Sequence[Node], node_id: str | None, kind: str) -> Node:
    if not nodes:
        raise ValueError(f"scenario has no {kind}")
    if node_id is None:
        return nodes[0]
    for n in nodes:
        if n.id == node_id:
            return n
    raise ValueError(f"no {kind} with id {node_id!r}")


def _link(scenario: Scenario, tag: str | None = None, receiver: str | None = None) -> LinkState:
    t = _pick(scenario.tags, tag, "tag")
    rx = _pick(scenario.receivers, receiver, "receiver")
    return analytic_links(scenario)[(t.id, rx.id)]


def link_closes(link: LinkState, ber_threshold: float = DEFAULT_BER_THRESHOLD) -> bool:
    """Success criterion: above sensitivity and expected BER at or below threshold."""
    return link.decodable and link.ber <= ber_threshold


def _move(scenario: Scenario, positions: Mapping[str, Sequence[float]]) -> Scenario:
    nodes = tuple(
        replace(n, position=tuple(float(x) for x in positions[n.id])) if n.id in positions else n
        for n in scenario.nodes
    )
    return replace(scenario, nodes=nodes)


def _unit(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    v = np.asarray(b, float) - np.asarray(a, float)
    norm = float(np.linalg.norm(v))
    return np.array([1.0, 0.0, 0.0]) if norm == 0 else v / norm


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over a grid, evaluated per replication seed.

    ``scenario`` is a preset name, a file path or an already-parsed document.
    ``parameter`` is a dotted path into the document, for example
    ``nodes.rx.position.0``.
    """

    scenario: str | Mapping[str, Any]
    parameter: str
    values: Sequence[float]
    replications: int = 3
    base_seed: int | None = None
    ber_threshold: float = DEFAULT_BER_THRESHOLD
    overrides: Mapping[str, Any] = field(default_factory=dict)
    mode: str = "analytic"
    tag: str | None = None
    receiver: str | None = None
    packets: int = MONTE_CARLO_PACKETS
    workers: int = 1

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError("sweep grid must not be empty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.mode not in SWEEP_MODES:
            raise ValueError(f"mode must be one of {SWEEP_MODES}, got {self.mode!r}")
        if not 0 < self.ber_threshold < 0.5:
            raise ValueError("ber_threshold must be in (0, 0.5)")
        if self.packets < 1:
            raise ValueError("packets must be >= 1")

    def document(self) -> tuple[dict, str]:
        if isinstance(self.scenario, Mapping):
            doc, label = dict(self.scenario), str(self.scenario.get("name", "scenario"))
        else:
            doc, label = read_document(self.scenario)
        return apply_overrides(doc, self.overrides), label


@dataclass(frozen=True)
class RangeResult:
    parameter: str
    values: tuple[float, ...]
    mean_ber: tuple[float, ...]
    std_ber: tuple[float, ...]
    prr: tuple[float, ...]
    expected_ber: tuple[float, ...]
    seeds: tuple[int, ...]
    ber_threshold: float
    max_range: float | None

    def to_csv(self, extra: Mapping[str, Any] | None = None) -> str:
        buf = io.StringIO()
        write_range_rows(csv.writer(buf, lineterminator="\n"), [(extra or {}, self)])
        return buf.getvalue()


def write_range_rows(writer, results: Sequence[tuple[Mapping[str, Any], RangeResult]]) -> None:
    extra_keys = list(results[0][0]) if results else []
    writer.writerow(extra_keys + ["value", "mean_ber", "std_ber", "prr", "expected_ber"])
    for extra, r in results:
        for i, v in enumerate(r.values):
            writer.writerow(
                [extra[k] for k in extra_keys]
                + [repr(v), repr(r.mean_ber[i]), repr(r.std_ber[i]), repr(r.prr[i]), repr(r.expected_ber[i])]
            )


def _grid_point(args: tuple) -> tuple[float, float, list[tuple[float, float]]]:
    doc, label, parameter, value, seeds, mode, tag, receiver, packets = args
    doc = apply_overrides(doc, {parameter: value})
    scenario = load_scenario(doc, source=label)
    t = _pick(scenario.tags, tag, "tag")
    rx = _pick(scenario.receivers, receiver, "receiver")
    link = analytic_links(scenario)[(t.id, rx.id)]
    expected = link.effective_ber
    prr_expected = link.packet_success_probability(scenario.packet.payload_bits)
    if mode == "analytic":
        return expected, prr_expected, [(expected, prr_expected)] * len(seeds)

    gap = scenario.packet.inter_packet_gap
    mc = replace(
        scenario,
        nodes=tuple(n for n in scenario.nodes if not isinstance(n, (Tag, Receiver)) or n.id in (t.id, rx.id)),
        duration=packets * gap,
        time_step=gap,
        packet=replace(scenario.packet, mode="bit", window_packets=packets),
        avoidance=None,
    )
    runs = []
    for seed in seeds:
        rows = simulate(mc, seed).series(rx.id)
        n = sum(w.packets for w in rows)
        ber = sum((w.ber or 0.0) * w.packets for w in rows) / n
        prr = sum(w.prr * w.packets for w in rows) / n
        runs.append((ber, prr))
    return expected, prr_expected, runs


def run_sweep(spec: SweepSpec) -> RangeResult:
    """Evaluate every grid value for every replication seed.

    ``max_range`` is the largest grid value whose mean BER meets the threshold;
    it never extrapolates past the grid.
    """
    doc, label = spec.document()
    base = spec.base_seed if spec.base_seed is not None else int(doc.get("seed", 0))
    seeds = tuple(base + i for i in range(spec.replications))
    jobs = [
        (doc, label, spec.parameter, v, seeds, spec.mode, spec.tag, spec.receiver, spec.packets)
        for v in spec.values
    ]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            points = list(pool.map(_grid_point, jobs))
    else:
        points = [_grid_point(j) for j in jobs]

    mean_ber, std_ber, prr, expected = [], [], [], []
    for exp_ber, _exp_prr, runs in points:
        bers = np.array([b for b, _ in runs])
        mean_ber.append(float(bers.mean()))
        std_ber.append(float(bers.std()))
        prr.append(float(np.mean([p for _, p in runs])))
        expected.append(float(exp_ber))
    passing = [v for v, m in zip(spec.values, mean_ber) if m <= spec.ber_threshold]
    return RangeResult(
        parameter=spec.parameter,
        values=tuple(float(v) for v in spec.values),
        mean_ber=tuple(mean_ber),
        std_ber=tuple(std_ber),
        prr=tuple(prr),
        expected_ber=tuple(expected),
        seeds=seeds,
        ber_threshold=spec.ber_threshold,
        max_range=float(max(passing)) if passing else None,
    )


# -- range search -----------------------------------------------------------


def _placed(scenario: Scenario, mode: str, r: float, carrier, tag, rx) -> Scenario:
    if mode == "fixed":
        u = _unit(carrier.position, tag.position)
        return _move(scenario, {rx.id: np.asarray(tag.position) + r * u})
    u = _unit(tag.position, rx.position)
    if mode == "equidistant":
        return _move(
            scenario,
            {carrier.id: np.asarray(tag.position) - r * u, rx.id: np.asarray(tag.position) + r * u},
        )
    p = np.asarray(tag.position) + r * u
    return _move(scenario, {carrier.id: p, rx.id: p})


def max_range_search(
    scenario: Scenario,
    tag: str | None = None,
    receiver: str | None = None,
    carrier: str | None = None,
    mode: str = "fixed",
    ber_threshold: float = DEFAULT_BER_THRESHOLD,
    resolution: float = 1.0,
    max_distance: float = 1e7,
) -> float | None:
    """Largest distance at which the analytic link still closes.

    ``fixed`` keeps the carrier and tag in place and moves the receiver
    along the carrier-to-tag direction; the result is the tag-receiver
    distance. ``equidistant`` puts carrier and receiver on opposite sides of
    the tag at the same distance; ``monostatic`` co-locates them. Both return
    that common tag distance. Bracketing by doubling, then bisection down to
    ``resolution``. Returns ``None`` when the link fails even at
    ``resolution`` metres, and ``max_distance`` if it never fails.
    """
    if mode not in RANGE_MODES:
        raise ValueError(f"mode must be one of {RANGE_MODES}, got {mode!r}")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    t = _pick(scenario.tags, tag, "tag")
    rx = _pick(scenario.receivers, receiver, "receiver")
    cg = _pick(scenario.carriers, carrier, "carrier")

    def ok(r: float) -> bool:
        moved = _placed(scenario, mode, r, cg, t, rx)
        return link_closes(_link(moved, t.id, rx.id), ber_threshold)

    lo = resolution
    if not ok(lo):
        return None
    hi = 2 * lo
    while ok(hi):
        lo = hi
        if lo >= max_distance:
            return float(max_distance)
        hi = min(2 * hi, max_distance * 2)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)


# -- signal strength along a line ------------------------------------------


@dataclass(frozen=True)
class ProfileResult:
    mode: str
    offsets: tuple[float, ...]
    power_dbm: tuple[float, ...]

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.power_dbm))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["offset_m", "power_dbm"])
        for d, p in zip(self.offsets, self.power_dbm):
            w.writerow([repr(d), repr(p)])
        return buf.getvalue()


def monostatic_bistatic_profile(
    scenario: Scenario,
    positions: int = 101,
    mode: str = "bistatic",
    tag: str | None = None,
    receiver: str | None = None,
    carrier: str | None = None,
) -> ProfileResult:
    """Backscatter power as the tag moves along the carrier-receiver segment.

    The tag visits ``positions`` evenly spaced interior points (the endpoints
    themselves are excluded). In ``monostatic`` mode the receiver is moved
    onto the carrier, so both legs grow together.
    """
    if positions < 3:
        raise ValueError("need at least 3 positions")
    if mode not in ("bistatic", "monostatic"):
        raise ValueError("mode must be 'bistatic' or 'monostatic'")
    t = _pick(scenario.tags, tag, "tag")
    rx = _pick(scenario.receivers, receiver, "receiver")
    cg = _pick(scenario.carriers, carrier, "carrier")
    a = np.asarray(cg.position, float)
    b = np.asarray(rx.position, float)
    length = float(np.linalg.norm(b - a))
    if length == 0:
        raise ValueError("carrier and receiver must be apart to define the line")
    fractions = np.linspace(0.0, 1.0, positions + 2)[1:-1]
    base = _move(scenario, {rx.id: a}) if mode == "monostatic" else scenario
    powers = []
    for s in fractions:
        moved = _move(base, {t.id: a + s * (b - a)})
        powers.append(_link(moved, t.id, rx.id).signal)
    return ProfileResult(mode, tuple(float(x) for x in fractions * length), tuple(powers))


# -- obstacle calibration ---------------------------------------------------


def calibrate_obstacle_defaults(
    scenario: Scenario,
    kind: str = "wall",
    tag: str | None = None,
    receiver: str | None = None,
    ber_threshold: float = DEFAULT_BER_THRESHOLD,
    upper_db: float = 100.0,
    resolution_db: float = 0.01,
) -> float | None:
    """Largest per-obstacle attenuation of ``kind`` that still closes the link.

    Every obstacle of that kind gets the same attenuation. ``None`` if the
    link fails even with transparent obstacles.
    """
    k = ObstacleKind(kind)

    def ok(att: float) -> bool:
        obs = tuple(replace(o, attenuation=att) if o.kind is k else o for o in scenario.obstacles)
        return link_closes(_link(replace(scenario, obstacles=obs), tag, receiver), ber_threshold)

    if not ok(0.0):
        return None
    if ok(upper_db):
        return upper_db
    lo, hi = 0.0, upper_db
    while hi - lo > resolution_db:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


# -- experiment presets -----------------------------------------------------


@dataclass
class ExperimentOutput:
    name: str
    kind: str
    seed: int
    csv: str
    summary: dict
    report_json: str | None = None


def _grid_values(cfg: Mapping[str, Any]) -> list[float]:
    if "values" in cfg:
        return [float(v) for v in cfg["values"]]
    g = cfg["grid"]
    n = int(math.floor((g["stop"] - g["start"]) / g["step"] + 1e-9)) + 1
    return [g["start"] + i * g["step"] for i in range(n)]


def _simulate_summary(scenario: Scenario, report) -> dict:
    rx_ids = [r.id for r in scenario.receivers]
    agg = report.prr_series(AGGREGATE_ID)
    per_rx = {rid: report.prr_series(rid) for rid in rx_ids}
    dominates = all(a >= max(per_rx[r][i] for r in rx_ids) for i, a in enumerate(agg))
    summary: dict[str, Any] = {
        "mean_prr": {rid: float(np.mean(s)) for rid, s in per_rx.items()}
        | {AGGREGATE_ID: float(np.mean(agg))},
        "verdicts": {"aggregate_prr_dominates_each_receiver": dominates},
    }
    hops = [e for e in report.events if e["kind"] == "hop_command"]
    if scenario.avoidance is not None:
        summary["hop_commands"] = len(hops)
    return summary


def run_experiment(
    document: Mapping[str, Any], label: str, seed: int | None = None, workers: int = 1
) -> ExperimentOutput:
    """Run the ``experiment`` block of a scenario document.

    Without a block the scenario is simply simulated.
    """
    scenario = load_scenario(document, source=label)
    cfg = scenario.experiment_config or {"kind": "simulate"}
    kind = cfg["kind"]
    seed0 = scenario.seed if seed is None else int(seed)
    threshold = float(cfg.get("ber_threshold", DEFAULT_BER_THRESHOLD))

    if kind == "simulate":
        report = simulate(scenario, seed0)
        return ExperimentOutput(
            scenario.name, kind, seed0, report.to_csv(), _simulate_summary(scenario, report), report.to_json()
        )

    if kind == "range_sweep":
        series_param = cfg.get("series_parameter")
        series_values = cfg.get("series_values", [None])
        results = []
        for sv in series_values:
            overrides = {} if series_param is None else {series_param: sv}
            spec = SweepSpec(
                scenario=document,
                parameter=cfg["parameter"],
                values=_grid_values(cfg),
                replications=int(cfg.get("replications", 3)),
                base_seed=seed0,
                ber_threshold=threshold,
                overrides=overrides,
                mode=cfg.get("mode", "analytic"),
                tag=cfg.get("tag"),
                receiver=cfg.get("receiver"),
                workers=workers,
            )
            results.append(({"series": sv} if series_param else {}, run_sweep(spec)))
        buf = io.StringIO()
        write_range_rows(csv.writer(buf, lineterminator="\n"), results)
        ranges = [r.max_range for _, r in results]
        summary: dict[str, Any] = {
            "parameter": cfg["parameter"],
            "ber_threshold": threshold,
            "seeds": list(results[0][1].seeds),
            "max_range": [
                {"series": extra.get("series"), "max_range": r.max_range} for extra, r in results
            ],
            "verdicts": {},
        }
        if series_param is not None:
            summary["series_parameter"] = series_param
            summary["verdicts"]["max_range_strictly_decreasing_over_series"] = all(
                a is not None and (b is None or a > b) for a, b in zip(ranges, ranges[1:])
            )
        return ExperimentOutput(scenario.name, kind, seed0, buf.getvalue(), summary)

    if kind == "profile":
        mode = cfg.get("mode", "bistatic")
        prof = monostatic_bistatic_profile(
            scenario, int(cfg.get("positions", 101)), mode, cfg.get("tag"), cfg.get("receiver")
        )
        mid = (len(prof.power_dbm) - 1) // 2
        p = prof.power_dbm
        verdicts = (
            {
                "minimum_at_midpoint": prof.argmin == mid,
                "ends_at_least_10db_above_minimum": min(p[0], p[-1]) - min(p) >= 10.0,
            }
            if mode == "bistatic"
            else {"strictly_decreasing": all(b < a for a, b in zip(p, p[1:]))}
        )
        summary = {"mode": mode, "positions": len(p), "min_index": prof.argmin, "verdicts": verdicts}
        return ExperimentOutput(scenario.name, kind, seed0, prof.to_csv(), summary)

    if kind == "max_range":
        mode = cfg.get("mode", "fixed")
        series_param = cfg.get("series_parameter")
        rows = []
        for sv in cfg.get("series_values", [None]):
            s = scenario
            if series_param is not None:
                s = load_scenario(apply_overrides(document, {series_param: sv}), source=label)
            r = max_range_search(
                s, cfg.get("tag"), cfg.get("receiver"), mode=mode, ber_threshold=threshold
            )
            rows.append((sv, r))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "max_range_m"])
        for sv, r in rows:
            w.writerow(["" if sv is None else repr(sv), "" if r is None else repr(r)])
        summary = {
            "mode": mode,
            "ber_threshold": threshold,
            "max_range": [{"series": sv, "max_range": r} for sv, r in rows],
            "verdicts": {"range_found": all(r is not None for _, r in rows)},
        }
        return ExperimentOutput(scenario.name, kind, seed0, buf.getvalue(), summary)

    raise ValueError(f"unknown experiment kind {kind!r}")


def output_stem(name: str, timestamp: str, seed0: int) -> str:
    """``<preset>-<timestamp>-<seed0>``, the base name of experiment outputs."""
    return f"{name}-{timestamp}-{seed0}"


__all__ = [
    "SweepSpec",
    "RangeResult",
    "ProfileResult",
    "ExperimentOutput",
    "run_sweep",
    "max_range_search",
    "monostatic_bistatic_profile",
    "calibrate_obstacle_defaults",
    "run_experiment",
    "link_closes",
    "output_stem",
    "MONTE_CARLO_PACKETS",
]
