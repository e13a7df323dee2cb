"""Scenario files: schema validation, default resolution, geometry and obstacles.

A scenario document is UTF-8 JSON with ``"schema_version": 1``; the schema is
shipped as ``scenario.schema.json`` next to this module. Loading resolves every
default into the returned :class:`Scenario`, and :func:`to_document` writes
that fully resolved form back out.
"""

from __future__ import annotations

import copy
import enum
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, ClassVar, Mapping, Sequence, Union

from jsonschema import Draft202012Validator

from .phy import BANDS, PROFILES, Band, RadioProfile
from .rfmath import CC1310_REJECTION, CC2500_REJECTION, RejectionCurve

SCHEMA_VERSION = 1
DEFAULT_WALL_DB = 3.0
DEFAULT_FLOOR_DB = 15.0

Vec3 = tuple[float, float, float]

# Several figure numbers moved between drafts; keep the old names loadable.
PRESET_ALIASES = {
    "fig7-outdoor-24": "fig4-outdoor-24",
    "fig7-outdoor-868": "fig10-river-868",
    "fig12-unison": "fig13-unison",
    "fig13-avoidance": "fig14-avoidance",
}


class ScenarioError(ValueError):
    """Invalid scenario document. ``problems`` holds ``(path, message)`` pairs."""

    def __init__(self, problems: Sequence[tuple[str, str]], source: str | None = None):
        self.problems = list(problems)
        self.source = source
        where = f"{source}: " if source else ""
        lines = [f"{where}{path or '<root>'}: {msg}" for path, msg in self.problems]
        super().__init__("\n".join(lines))


class Role(str, enum.Enum):
    CARRIER = "carrier"
    TAG = "tag"
    RECEIVER = "receiver"
    INTERFERER = "interferer"


class ObstacleKind(str, enum.Enum):
    WALL = "wall"
    FLOOR = "floor"


# -- domain types -----------------------------------------------------------


@dataclass(frozen=True)
class CarrierGenerator:
    id: str
    position: Vec3
    tx_power: float
    frequency: float
    antenna_gain: float
    on_intervals: tuple[tuple[float, float], ...]
    role: ClassVar[Role] = Role.CARRIER

    def active(self, t: float) -> bool:
        return _in_intervals(t, self.on_intervals)


@dataclass(frozen=True)
class Tag:
    id: str
    position: Vec3
    delta_f: float
    k_factor: float
    fsk_deviation: float
    bitrate: float
    power_draw: float
    role: ClassVar[Role] = Role.TAG


@dataclass(frozen=True)
class Receiver:
    id: str
    position: Vec3
    profile: RadioProfile
    tuned: float
    antenna_gain: float
    role: ClassVar[Role] = Role.RECEIVER


@dataclass(frozen=True)
class Interferer:
    id: str
    position: Vec3
    frequency: float
    bandwidth: float
    tx_power: float
    antenna_gain: float
    duty_cycle: float
    duty_period: float
    hop_schedule: tuple[tuple[float, float], ...]
    on_intervals: tuple[tuple[float, float], ...]
    role: ClassVar[Role] = Role.INTERFERER

    def frequency_at(self, t: float) -> float:
        freq = self.frequency
        for start, f in self.hop_schedule:
            if start <= t:
                freq = f
            else:
                break
        return freq

    def active(self, t: float) -> bool:
        if self.duty_cycle <= 0 or not _in_intervals(t, self.on_intervals):
            return False
        if self.duty_cycle >= 1:
            return True
        phase = (t % self.duty_period) / self.duty_period
        return phase < self.duty_cycle


Node = Union[CarrierGenerator, Tag, Receiver, Interferer]


@dataclass(frozen=True)
class Obstacle:
    """A wall (vertical segment between two floor points, over ``z_range``)
    or a floor (axis-aligned rectangle ``footprint`` at height ``z_range[0]``)."""

    kind: ObstacleKind
    attenuation: float
    footprint: tuple[tuple[float, float], tuple[float, float]]
    z_range: tuple[float, float]

    def __post_init__(self) -> None:
        if self.attenuation < 0:
            raise ValueError("obstacle attenuation must be >= 0")


@dataclass(frozen=True)
class PacketSpec:
    payload_bytes: int
    inter_packet_gap: float
    window_packets: int
    mode: str = "packet"

    @property
    def payload_bits(self) -> int:
        return 8 * self.payload_bytes


@dataclass(frozen=True)
class AvoidanceConfig:
    carrier: str
    receiver: str
    channels: tuple[float, ...]
    prr_threshold: float
    hop_latency: int


@dataclass(frozen=True)
class CollisionConfig:
    enabled: bool = False
    transmit_probability: float = 1.0


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    notes: tuple[str, ...]
    band: Band
    path_loss_exponent: float
    duration: float
    time_step: float
    seed: int
    per_product_loss: float
    packet: PacketSpec
    obstacle_defaults: tuple[float, float]
    obstacles: tuple[Obstacle, ...]
    nodes: tuple[Node, ...]
    avoidance: AvoidanceConfig | None
    collisions: CollisionConfig
    experiment: str | None = field(default=None)  # canonical JSON of the block

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    @property
    def carriers(self) -> list[CarrierGenerator]:
        return [n for n in self.nodes if isinstance(n, CarrierGenerator)]

    @property
    def tags(self) -> list[Tag]:
        return [n for n in self.nodes if isinstance(n, Tag)]

    @property
    def receivers(self) -> list[Receiver]:
        return [n for n in self.nodes if isinstance(n, Receiver)]

    @property
    def interferers(self) -> list[Interferer]:
        return [n for n in self.nodes if isinstance(n, Interferer)]

    @property
    def experiment_config(self) -> dict | None:
        return None if self.experiment is None else json.loads(self.experiment)


def _in_intervals(t: float, intervals: Sequence[tuple[float, float]]) -> bool:
    return any(a <= t < b for a, b in intervals)


# -- schema validation ------------------------------------------------------


@lru_cache(maxsize=1)
def scenario_schema() -> dict:
    text = resources.files(__package__).joinpath("scenario.schema.json").read_text("utf-8")
    return json.loads(text)


def _format_path(parts: Sequence[Any]) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _discriminated(error) -> list:
    """Descend into the ``oneOf`` branch selected by a ``role``/``kind`` const."""
    if error.validator != "oneOf" or not error.context:
        return [error]
    branches: dict[int, list] = {}
    for sub in error.context:
        branches.setdefault(sub.relative_schema_path[0], []).append(sub)
    matching = [
        errs
        for errs in branches.values()
        if not any(
            e.validator == "const" and list(e.relative_path)[-1:] in (["role"], ["kind"])
            for e in errs
        )
    ]
    if len(matching) == 1:
        return [leaf for e in matching[0] for leaf in _discriminated(e)]
    return [error]


def _schema_problems(doc: Any) -> list[tuple[str, str]]:
    validator = Draft202012Validator(scenario_schema())
    problems = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        for leaf in _discriminated(err):
            msg = leaf.message
            parts = list(leaf.absolute_path)
            if leaf.validator == "oneOf":
                msg = f"does not match any allowed form ({leaf.message[:80]})"
            elif leaf.validator == "additionalProperties" and isinstance(leaf.instance, dict):
                allowed = leaf.schema.get("properties", {})
                for key in sorted(k for k in leaf.instance if k not in allowed):
                    problems.append((_format_path(parts + [key]), "unknown field"))
                continue
            problems.append((_format_path(parts), msg))
    return problems


# -- loading ----------------------------------------------------------------


def _profile_from_doc(obj: Any, path: str, custom: Mapping[str, Any]) -> RadioProfile:
    if isinstance(obj, str):
        if obj in custom:
            return _profile_from_doc(custom[obj], f"profiles.{obj}", {})
        if obj in PROFILES:
            return PROFILES[obj]
        raise ScenarioError([(path, f"unknown radio profile {obj!r}")])
    rej = obj.get("rejection", "CC2500")
    if rej == "CC2500":
        curve = CC2500_REJECTION
    elif rej == "CC1310":
        curve = CC1310_REJECTION
    else:
        try:
            curve = RejectionCurve.from_pairs(rej)
        except ValueError as exc:
            raise ScenarioError([(f"{path}.rejection", str(exc))]) from None
    try:
        return RadioProfile(
            name=obj["name"],
            band_center=obj.get("band_center_hz", 2440e6),
            sensitivity=obj["sensitivity_dbm"],
            rejection=curve,
            bitrate=obj["bitrate_bps"],
            fsk_deviation=obj["fsk_deviation_hz"],
            rx_bandwidth=obj["rx_bandwidth_hz"],
            noise_figure=obj.get("noise_figure_db", 10.0),
            intermediate_freq=obj["intermediate_freq_hz"],
            demod_loss=obj.get("demod_loss_db"),
            ber_model=obj.get("ber_model", "noncoherent"),
        )
    except ValueError as exc:
        raise ScenarioError([(path, str(exc))]) from None


def _intervals(raw, default, path, problems) -> tuple[tuple[float, float], ...]:
    if raw is None:
        return default
    out = tuple((float(a), float(b)) for a, b in raw)
    for i, (a, b) in enumerate(out):
        if not a < b:
            problems.append((f"{path}[{i}]", "interval start must precede its end"))
    for i in range(1, len(out)):
        if out[i][0] < out[i - 1][1]:
            problems.append((f"{path}[{i}]", "intervals must be sorted and non-overlapping"))
    return out


def _build(doc: dict) -> Scenario:
    problems: list[tuple[str, str]] = []

    ids: dict[str, int] = {}
    for i, n in enumerate(doc["nodes"]):
        if n["id"] in ids:
            problems.append(
                (
                    f"nodes[{i}].id",
                    f"duplicate node id {n['id']!r} (also at nodes[{ids[n['id']]}].id)",
                )
            )
        else:
            ids[n["id"]] = i
    if problems:
        raise ScenarioError(problems)

    band_raw = doc.get("band", "ISM-2.4")
    band = BANDS[band_raw] if isinstance(band_raw, str) else None
    if band is None:
        try:
            band = Band(band_raw["low_hz"], band_raw["high_hz"])
        except ValueError as exc:
            raise ScenarioError([("band", str(exc))]) from None

    packet_raw = doc.get("packet", {})
    gap = float(packet_raw.get("inter_packet_gap_s", 0.25))
    duration = float(doc.get("duration_s", 60.0))
    time_step = float(doc.get("time_step_s", gap))
    if duration < time_step:
        problems.append(("duration_s", "duration must be at least one time step"))

    raw_nodes = doc["nodes"]
    first_carrier_f = next(
        (n.get("frequency_hz", 2440e6) for n in raw_nodes if n["role"] == "carrier"), None
    )
    sub_ghz = first_carrier_f is not None and first_carrier_f < 1e9
    first_tag_df = next(
        (n.get("delta_f_hz", 100e3 if sub_ghz else 2e6) for n in raw_nodes if n["role"] == "tag"),
        None,
    )
    custom_profiles = doc.get("profiles", {})

    always = ((0.0, duration),)
    nodes: list[Node] = []
    for i, n in enumerate(raw_nodes):
        path = f"nodes[{i}]"
        pos = tuple(float(x) for x in n["position"])
        role = n["role"]
        if role == "carrier":
            nodes.append(
                CarrierGenerator(
                    id=n["id"],
                    position=pos,
                    tx_power=float(n.get("tx_power_dbm", 26.0)),
                    frequency=float(n.get("frequency_hz", 2440e6)),
                    antenna_gain=float(n.get("antenna_gain_dbi", 0.0)),
                    on_intervals=_intervals(
                        n.get("on_intervals"), always, f"{path}.on_intervals", problems
                    ),
                )
            )
        elif role == "tag":
            nodes.append(
                Tag(
                    id=n["id"],
                    position=pos,
                    delta_f=float(n.get("delta_f_hz", 100e3 if sub_ghz else 2e6)),
                    k_factor=float(n.get("k_factor_db", -3.0)),
                    fsk_deviation=float(n.get("fsk_deviation_hz", 13e3 if sub_ghz else 190e3)),
                    bitrate=float(n.get("bitrate_bps", 2.9e3)),
                    power_draw=float(n.get("power_draw_uw", 70.0 if sub_ghz else 650.0)),
                )
            )
        elif role == "receiver":
            profile = _profile_from_doc(
                n.get("profile", "LoRea-868" if sub_ghz else "LoRea-2.4"),
                f"{path}.profile",
                custom_profiles,
            )
            tuned = n.get("tuned_hz")
            if tuned is None:
                if first_carrier_f is None or first_tag_df is None:
                    problems.append(
                        (f"{path}.tuned_hz", "required when the scenario has no carrier and tag")
                    )
                    tuned = profile.band_center
                else:
                    tuned = first_carrier_f + first_tag_df
            nodes.append(
                Receiver(
                    id=n["id"],
                    position=pos,
                    profile=profile,
                    tuned=float(tuned),
                    antenna_gain=float(n.get("antenna_gain_dbi", 0.0)),
                )
            )
        else:
            hops = tuple((float(t), float(f)) for t, f in n.get("hop_schedule", []))
            if "frequency_hz" not in n and not hops:
                problems.append((f"{path}.frequency_hz", "interferer needs a frequency or hop_schedule"))
                continue
            if any(b[0] < a[0] for a, b in zip(hops, hops[1:])):
                problems.append((f"{path}.hop_schedule", "hop times must be sorted"))
            freq = float(n.get("frequency_hz", hops[0][1] if hops else 0.0))
            nodes.append(
                Interferer(
                    id=n["id"],
                    position=pos,
                    frequency=freq,
                    bandwidth=float(n.get("bandwidth_hz", 22e6)),
                    tx_power=float(n.get("tx_power_dbm", 18.0)),
                    antenna_gain=float(n.get("antenna_gain_dbi", 0.0)),
                    duty_cycle=float(n.get("duty_cycle", 1.0)),
                    duty_period=float(n.get("duty_period_s", 1.0)),
                    hop_schedule=hops,
                    on_intervals=_intervals(
                        n.get("on_intervals"), always, f"{path}.on_intervals", problems
                    ),
                )
            )

    od = doc.get("obstacle_defaults", {})
    wall_db = float(od.get("wall_db", DEFAULT_WALL_DB))
    floor_db = float(od.get("floor_db", DEFAULT_FLOOR_DB))
    obstacles = []
    for i, o in enumerate(doc.get("obstacles", [])):
        if o["kind"] == "wall":
            z = tuple(o.get("z_range", [-1e9, 1e9]))
            if not z[0] < z[1]:
                problems.append((f"obstacles[{i}].z_range", "z_range must be increasing"))
            if o["start"] == o["end"]:
                problems.append((f"obstacles[{i}]", "wall start and end coincide"))
            obstacles.append(
                Obstacle(
                    ObstacleKind.WALL,
                    float(o.get("attenuation_db", wall_db)),
                    (tuple(map(float, o["start"])), tuple(map(float, o["end"]))),
                    (float(z[0]), float(z[1])),
                )
            )
        else:
            lo, hi = o["min"], o["max"]
            if not (lo[0] < hi[0] and lo[1] < hi[1]):
                problems.append((f"obstacles[{i}]", "floor min must be below max on both axes"))
            obstacles.append(
                Obstacle(
                    ObstacleKind.FLOOR,
                    float(o.get("attenuation_db", floor_db)),
                    (tuple(map(float, lo)), tuple(map(float, hi))),
                    (float(o["z"]), float(o["z"])),
                )
            )

    window = int(packet_raw.get("window_packets", 20))
    avoidance = None
    if "avoidance" in doc:
        a = doc["avoidance"]
        for key, role in (("carrier", CarrierGenerator), ("receiver", Receiver)):
            target = next((n for n in nodes if n.id == a[key]), None)
            if not isinstance(target, role):
                problems.append((f"avoidance.{key}", f"no {key} node with id {a[key]!r}"))
        avoidance = AvoidanceConfig(
            carrier=a["carrier"],
            receiver=a["receiver"],
            channels=tuple(float(c) for c in a["channels_hz"]),
            prr_threshold=float(a.get("prr_threshold", 0.5)),
            hop_latency=int(a.get("hop_latency_windows", 1)),
        )
        carrier = next((n for n in nodes if n.id == a["carrier"]), None)
        if isinstance(carrier, CarrierGenerator) and carrier.frequency not in avoidance.channels:
            problems.append(
                ("avoidance.channels_hz", "must include the carrier's starting frequency")
            )

    col = doc.get("collisions", {})
    experiment = doc.get("experiment")
    if problems:
        raise ScenarioError(problems)
    return Scenario(
        name=doc.get("name", "unnamed"),
        description=doc.get("description", ""),
        notes=tuple(doc.get("notes", [])),
        band=band,
        path_loss_exponent=float(doc.get("path_loss_exponent", 2.0)),
        duration=duration,
        time_step=time_step,
        seed=int(doc.get("seed", 0)),
        per_product_loss=float(doc.get("per_product_loss_db", 3.0)),
        packet=PacketSpec(
            payload_bytes=int(packet_raw.get("payload_bytes", 36 if sub_ghz else 64)),
            inter_packet_gap=gap,
            window_packets=window,
            mode=packet_raw.get("mode", "packet"),
        ),
        obstacle_defaults=(wall_db, floor_db),
        obstacles=tuple(obstacles),
        nodes=tuple(nodes),
        avoidance=avoidance,
        collisions=CollisionConfig(
            enabled=bool(col.get("enabled", False)),
            transmit_probability=float(col.get("transmit_probability", 1.0)),
        ),
        experiment=None if experiment is None else json.dumps(experiment, sort_keys=True),
    )


def load_scenario(document: str | bytes | Mapping[str, Any], source: str | None = None) -> Scenario:
    """Parse and validate a scenario document (JSON text or an already-parsed dict)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioError([("", f"invalid JSON: {exc}")], source) from None
    else:
        doc = copy.deepcopy(dict(document))
    problems = _schema_problems(doc)
    if problems:
        raise ScenarioError(problems, source)
    try:
        return _build(doc)
    except ScenarioError as exc:
        raise ScenarioError(exc.problems, source) from None


def preset_names() -> list[str]:
    root = resources.files(__package__).joinpath("presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_preset(name: str) -> dict:
    name = PRESET_ALIASES.get(name, name)
    path = resources.files(__package__).joinpath("presets").joinpath(f"{name}.json")
    if not path.is_file():
        raise ScenarioError([("", f"unknown preset {name!r}")])
    return json.loads(path.read_text("utf-8"))


def read_document(ref: str | Path) -> tuple[dict, str]:
    """Raw document for a file path or a preset name, plus a display label."""
    p = Path(ref)
    if p.is_file():
        try:
            return json.loads(p.read_text("utf-8")), str(p)
        except json.JSONDecodeError as exc:
            raise ScenarioError([("", f"invalid JSON: {exc}")], str(p)) from None
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    try:
        return read_preset(stem), f"preset:{stem}"
    except ScenarioError:
        raise ScenarioError([("", "no such file or preset")], str(ref)) from None


def load_preset(name: str, overrides: Mapping[str, Any] | None = None) -> Scenario:
    doc = read_preset(name)
    if overrides:
        doc = apply_overrides(doc, overrides)
    return load_scenario(doc, source=f"preset:{name}")


# -- dotted-path overrides --------------------------------------------------


def _step(container: Any, key: str, path: str) -> Any:
    if isinstance(container, dict):
        if key not in container:
            raise ScenarioError([(path, "path does not exist in the document")])
        return container[key]
    if isinstance(container, list):
        return container[_list_index(container, key, path)]
    raise ScenarioError([(path, "cannot descend into a scalar")])


def _list_index(container: list, key: str, path: str) -> int:
    if key.lstrip("-").isdigit():
        idx = int(key)
        if not -len(container) <= idx < len(container):
            raise ScenarioError([(path, "index out of range")])
        return idx
    for i, item in enumerate(container):
        if isinstance(item, dict) and item.get("id") == key:
            return i
    raise ScenarioError([(path, f"no list element with id {key!r}")])


def get_path(doc: Mapping[str, Any], dotted: str) -> Any:
    cur: Any = doc
    parts = dotted.split(".")
    for i, key in enumerate(parts):
        cur = _step(cur, key, ".".join(parts[: i + 1]))
    return cur


def set_path(doc: dict, dotted: str, value: Any) -> None:
    """Set ``dotted`` in ``doc`` in place. List elements may be addressed by
    index or by their ``id`` field (``nodes.rx.position.0``)."""
    parts = dotted.split(".")
    parent: Any = doc
    for i, key in enumerate(parts[:-1]):
        parent = _step(parent, key, ".".join(parts[: i + 1]))
    last = parts[-1]
    if isinstance(parent, dict):
        # new keys are allowed here; the strict schema rejects unknown ones
        parent[last] = value
    elif isinstance(parent, list):
        parent[_list_index(parent, last, dotted)] = value
    else:
        raise ScenarioError([(dotted, "cannot set a field on a scalar")])


def parse_override_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: Mapping[str, Any], overrides: Mapping[str, Any]) -> dict:
    out = copy.deepcopy(dict(doc))
    for dotted, value in overrides.items():
        set_path(out, dotted, value)
    return out


# -- serialisation ----------------------------------------------------------


def _node_doc(n: Node) -> dict:
    base = {"id": n.id, "role": n.role.value, "position": list(n.position)}
    if isinstance(n, CarrierGenerator):
        base |= {
            "tx_power_dbm": n.tx_power,
            "frequency_hz": n.frequency,
            "antenna_gain_dbi": n.antenna_gain,
            "on_intervals": [list(iv) for iv in n.on_intervals],
        }
    elif isinstance(n, Tag):
        base |= {
            "delta_f_hz": n.delta_f,
            "k_factor_db": n.k_factor,
            "fsk_deviation_hz": n.fsk_deviation,
            "bitrate_bps": n.bitrate,
            "power_draw_uw": n.power_draw,
        }
    elif isinstance(n, Receiver):
        base |= {
            "profile": n.profile.to_dict(),
            "tuned_hz": n.tuned,
            "antenna_gain_dbi": n.antenna_gain,
        }
    else:
        base |= {
            "frequency_hz": n.frequency,
            "bandwidth_hz": n.bandwidth,
            "tx_power_dbm": n.tx_power,
            "antenna_gain_dbi": n.antenna_gain,
            "duty_cycle": n.duty_cycle,
            "duty_period_s": n.duty_period,
            "hop_schedule": [list(h) for h in n.hop_schedule],
            "on_intervals": [list(iv) for iv in n.on_intervals],
        }
    return base


def _obstacle_doc(o: Obstacle) -> dict:
    if o.kind is ObstacleKind.WALL:
        return {
            "kind": "wall",
            "attenuation_db": o.attenuation,
            "start": list(o.footprint[0]),
            "end": list(o.footprint[1]),
            "z_range": list(o.z_range),
        }
    return {
        "kind": "floor",
        "attenuation_db": o.attenuation,
        "min": list(o.footprint[0]),
        "max": list(o.footprint[1]),
        "z": o.z_range[0],
    }


def to_document(s: Scenario) -> dict:
    """Fully resolved document; ``load_scenario(to_document(s)) == s``."""
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "name": s.name,
        "description": s.description,
        "notes": list(s.notes),
        "band": {"low_hz": s.band.low, "high_hz": s.band.high},
        "path_loss_exponent": s.path_loss_exponent,
        "duration_s": s.duration,
        "time_step_s": s.time_step,
        "seed": s.seed,
        "per_product_loss_db": s.per_product_loss,
        "packet": {
            "payload_bytes": s.packet.payload_bytes,
            "inter_packet_gap_s": s.packet.inter_packet_gap,
            "window_packets": s.packet.window_packets,
            "mode": s.packet.mode,
        },
        "obstacle_defaults": {"wall_db": s.obstacle_defaults[0], "floor_db": s.obstacle_defaults[1]},
        "obstacles": [_obstacle_doc(o) for o in s.obstacles],
        "nodes": [_node_doc(n) for n in s.nodes],
        "collisions": {
            "enabled": s.collisions.enabled,
            "transmit_probability": s.collisions.transmit_probability,
        },
    }
    if s.avoidance is not None:
        a = s.avoidance
        doc["avoidance"] = {
            "carrier": a.carrier,
            "receiver": a.receiver,
            "channels_hz": list(a.channels),
            "prr_threshold": a.prr_threshold,
            "hop_latency_windows": a.hop_latency,
        }
    if s.experiment is not None:
        doc["experiment"] = json.loads(s.experiment)
    return doc


# -- geometry ---------------------------------------------------------------

_EPS = 1e-12


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.dist(a, b)


def _cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def _crosses(a: Vec3, b: Vec3, o: Obstacle) -> bool:
    if o.kind is ObstacleKind.WALL:
        (qx, qy), (ex, ey) = o.footprint
        rx, ry = b[0] - a[0], b[1] - a[1]
        sx, sy = ex - qx, ey - qy
        denom = _cross(rx, ry, sx, sy)
        if abs(denom) < _EPS:
            return False  # parallel or collinear: grazing, not crossing
        wx, wy = qx - a[0], qy - a[1]
        t = _cross(wx, wy, sx, sy) / denom
        u = _cross(wx, wy, rx, ry) / denom
        if not (-_EPS <= t <= 1 + _EPS):
            return False
        # closed on the low end of the wall so shared corners count once
        if not (-_EPS <= u < 1 - _EPS):
            return False
        z = a[2] + t * (b[2] - a[2])
        return o.z_range[0] - _EPS <= z < o.z_range[1] - _EPS
    h = o.z_range[0]
    dz = b[2] - a[2]
    if abs(dz) < _EPS:
        return False
    t = (h - a[2]) / dz
    if not (-_EPS <= t <= 1 + _EPS):
        return False
    x = a[0] + t * (b[0] - a[0])
    y = a[1] + t * (b[1] - a[1])
    (x0, y0), (x1, y1) = o.footprint
    return x0 - _EPS <= x < x1 - _EPS and y0 - _EPS <= y < y1 - _EPS


def crossings(a: Sequence[float], b: Sequence[float], obstacles: Sequence[Obstacle]) -> list[Obstacle]:
    """Obstacles the straight segment ``a -> b`` passes through.

    Segment endpoints count (closed), a wall's start point counts but its end
    point does not, and paths running parallel to a wall never cross it.
    """
    a = tuple(map(float, a))
    b = tuple(map(float, b))
    if a == b:
        raise ValueError("crossings needs two distinct points")
    return [o for o in obstacles if _crosses(a, b, o)]


def obstacle_loss(path: Sequence[Obstacle]) -> float:
    return float(sum(o.attenuation for o in path))


__all__ = [
    "SCHEMA_VERSION",
    "ScenarioError",
    "Role",
    "ObstacleKind",
    "CarrierGenerator",
    "Tag",
    "Receiver",
    "Interferer",
    "Node",
    "Obstacle",
    "PacketSpec",
    "AvoidanceConfig",
    "CollisionConfig",
    "Scenario",
    "scenario_schema",
    "load_scenario",
    "load_preset",
    "read_preset",
    "read_document",
    "preset_names",
    "PRESET_ALIASES",
    "apply_overrides",
    "get_path",
    "set_path",
    "parse_override_value",
    "to_document",
    "distance",
    "crossings",
    "obstacle_loss",
]
