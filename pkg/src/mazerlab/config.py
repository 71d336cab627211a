"""Run configuration: strict JSON schema with defaults and overrides.

Unknown keys are rejected (with a close-match suggestion) rather than
ignored, so a typo cannot silently fall back to a default.  Every value
is range-checked here; scenario code downstream can assume a valid
configuration.
"""

import difflib
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from .errors import ConfigError, InvalidParameterError, PacketSpecError
from .model import ModelParams, PhotonSector, make_params, photon_distribution
from .solver import WavePacketSpec

__all__ = ["RunConfig", "SCENARIOS", "load_config", "parse_config", "apply_overrides"]

SCENARIOS = ("residual", "residual-sweep", "stationary", "propagate",
             "audit", "resonant-probabilities")

_TOP_KEYS = {
    "scenario", "lambda", "delta", "omega", "cavity_length", "sectors",
    "k", "deltas", "packet", "grid", "time", "audit", "output_dir",
    "svg", "seed",
}
_PACKET_KEYS = {"k0", "sigma_k", "z0"}
_GRID_KEYS = {"dz", "pad_left", "pad_right"}
_TIME_KEYS = {"dt", "n_steps", "snapshot_stride", "norm_tolerance"}
_AUDIT_KEYS = {"delta_min", "delta_max", "points"}

_DEFAULTS: Dict[str, Any] = {
    "lambda": 1.0,
    "delta": 0.0,
    "omega": 0.0,
    "cavity_length": 1.0,
    "sectors": {"0": 1.0},
    "output_dir": "out",
    "svg": False,
    "seed": None,
}
_GRID_DEFAULTS = {"dz": 0.02, "pad_left": 60.0, "pad_right": 60.0}
_TIME_DEFAULTS = {"dt": 0.005, "n_steps": 2000, "snapshot_stride": 0,
                  "norm_tolerance": 1e-6}
_AUDIT_DEFAULTS = {"delta_min": -5.0, "delta_max": 5.0, "points": 201}


@dataclass(frozen=True)
class GridOptions:
    dz: float
    pad_left: float
    pad_right: float


@dataclass(frozen=True)
class TimeOptions:
    dt: float
    n_steps: int
    snapshot_stride: int
    norm_tolerance: float


@dataclass(frozen=True)
class AuditOptions:
    delta_min: float
    delta_max: float
    points: int


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    params: ModelParams
    sectors: Tuple[PhotonSector, ...]
    k: Optional[float]
    deltas: Optional[Tuple[float, ...]]
    packet: Optional[WavePacketSpec]
    grid_options: GridOptions
    time_options: TimeOptions
    audit_options: AuditOptions
    output_dir: str
    svg: bool
    seed: Optional[int]
    resolved: Dict[str, Any]


def _reject_unknown(keys, allowed, where: str):
    for key in keys:
        if key in allowed:
            continue
        hint = difflib.get_close_matches(key, sorted(allowed), n=1, cutoff=0.5)
        extra = f"; did you mean {hint[0]!r}?" if hint else ""
        raise ConfigError(f"unknown {where} key {key!r}{extra}")


def _number(data, key: str, where: str = "config") -> float:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} field {key!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where} field {key!r} must be finite, got {value!r}")
    return value


def _integer(data, key: str, where: str = "config") -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} field {key!r} must be an integer, got {value!r}")
    return value


def _parse_sectors(raw) -> Tuple[PhotonSector, ...]:
    if isinstance(raw, dict):
        items = list(raw.items())
    elif isinstance(raw, list):
        items = []
        for entry in raw:
            if not (isinstance(entry, list) and len(entry) == 2):
                raise ConfigError(f"sectors entries must be [n, weight] pairs, got {entry!r}")
            items.append((entry[0], entry[1]))
    else:
        raise ConfigError(f"sectors must be a mapping or a pair list, got {raw!r}")

    cleaned = []
    for key, weight in items:
        try:
            n = int(key)
        except (TypeError, ValueError):
            raise ConfigError(f"sector label {key!r} is not an integer")
        if n < 0:
            raise ConfigError(f"sector number must be >= 0, got {n}")
        if isinstance(weight, bool) or not isinstance(weight, (int, float)):
            raise ConfigError(f"sector {n} weight must be a number, got {weight!r}")
        cleaned.append((n, float(weight)))

    seen = set()
    for n, _ in cleaned:
        if n in seen:
            raise ConfigError(f"sector {n} listed twice")
        seen.add(n)
    total = math.fsum(w for _, w in cleaned)
    if any(w < 0 for _, w in cleaned):
        raise ConfigError("sector weights must be non-negative")
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"sector weights must sum to 1 within 1e-9, got {total!r}")
    normalized = {n: w / total for n, w in cleaned}
    try:
        return photon_distribution(normalized)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc))


def parse_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a raw mapping and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigError(f"configuration root must be an object, got {type(data).__name__}")
    _reject_unknown(data.keys(), _TOP_KEYS, "config")

    merged = dict(_DEFAULTS)
    merged.update(data)
    if "scenario" not in merged:
        raise ConfigError("missing required key 'scenario'")
    scenario = merged["scenario"]
    if scenario not in SCENARIOS:
        hint = difflib.get_close_matches(str(scenario), SCENARIOS, n=1, cutoff=0.5)
        extra = f"; did you mean {hint[0]!r}?" if hint else ""
        raise ConfigError(f"unknown scenario {scenario!r}{extra}")

    for key in ("lambda", "delta", "omega", "cavity_length"):
        merged[key] = _number(merged, key)
    try:
        params = make_params(merged["lambda"], merged["delta"], merged["omega"],
                             merged["cavity_length"])
    except InvalidParameterError as exc:
        raise ConfigError(str(exc))

    sectors = _parse_sectors(merged["sectors"])

    k = None
    if "k" in merged:
        k = _number(merged, "k")
        if k <= 0:
            raise ConfigError(f"field 'k' must be > 0, got {k!r}")
    deltas = None
    if "deltas" in merged:
        raw = merged["deltas"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("field 'deltas' must be a non-empty list of numbers")
        deltas = tuple(_number({"deltas": v}, "deltas", "deltas entry") for v in raw)

    packet = None
    if "packet" in merged:
        raw = merged["packet"]
        if not isinstance(raw, dict):
            raise ConfigError(f"'packet' must be an object, got {raw!r}")
        _reject_unknown(raw.keys(), _PACKET_KEYS, "packet")
        missing = _PACKET_KEYS - raw.keys()
        if missing:
            raise ConfigError(f"packet is missing {sorted(missing)}")
        try:
            packet = WavePacketSpec(k0=_number(raw, "k0", "packet"),
                                    sigma_k=_number(raw, "sigma_k", "packet"),
                                    z0=_number(raw, "z0", "packet"))
        except PacketSpecError as exc:
            raise ConfigError(str(exc))

    grid_raw = dict(_GRID_DEFAULTS)
    if "grid" in merged:
        if not isinstance(merged["grid"], dict):
            raise ConfigError("'grid' must be an object")
        _reject_unknown(merged["grid"].keys(), _GRID_KEYS, "grid")
        grid_raw.update(merged["grid"])
    grid_options = GridOptions(dz=_number(grid_raw, "dz", "grid"),
                               pad_left=_number(grid_raw, "pad_left", "grid"),
                               pad_right=_number(grid_raw, "pad_right", "grid"))
    if grid_options.dz <= 0:
        raise ConfigError(f"grid field 'dz' must be > 0, got {grid_options.dz!r}")
    if grid_options.pad_left <= 0 or grid_options.pad_right <= 0:
        raise ConfigError("grid pads must be > 0")

    time_raw = dict(_TIME_DEFAULTS)
    if "time" in merged:
        if not isinstance(merged["time"], dict):
            raise ConfigError("'time' must be an object")
        _reject_unknown(merged["time"].keys(), _TIME_KEYS, "time")
        time_raw.update(merged["time"])
    time_options = TimeOptions(dt=_number(time_raw, "dt", "time"),
                               n_steps=_integer(time_raw, "n_steps", "time"),
                               snapshot_stride=_integer(time_raw, "snapshot_stride", "time"),
                               norm_tolerance=_number(time_raw, "norm_tolerance", "time"))
    if time_options.dt <= 0:
        raise ConfigError(f"time field 'dt' must be > 0, got {time_options.dt!r}")
    if time_options.n_steps < 1:
        raise ConfigError(f"time field 'n_steps' must be >= 1, got {time_options.n_steps!r}")
    if time_options.snapshot_stride < 0:
        raise ConfigError("time field 'snapshot_stride' must be >= 0")

    audit_raw = dict(_AUDIT_DEFAULTS)
    if "audit" in merged:
        if not isinstance(merged["audit"], dict):
            raise ConfigError("'audit' must be an object")
        _reject_unknown(merged["audit"].keys(), _AUDIT_KEYS, "audit")
        audit_raw.update(merged["audit"])
    audit_options = AuditOptions(delta_min=_number(audit_raw, "delta_min", "audit"),
                                 delta_max=_number(audit_raw, "delta_max", "audit"),
                                 points=_integer(audit_raw, "points", "audit"))
    if audit_options.points < 2:
        raise ConfigError("audit field 'points' must be >= 2")
    if not audit_options.delta_max > audit_options.delta_min:
        raise ConfigError("audit range needs delta_max > delta_min")

    output_dir = merged["output_dir"]
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError(f"'output_dir' must be a non-empty string, got {output_dir!r}")
    svg = merged["svg"]
    if not isinstance(svg, bool):
        raise ConfigError(f"'svg' must be true or false, got {svg!r}")
    seed = merged["seed"]
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"'seed' must be an integer or null, got {seed!r}")

    # scenario-specific requirements
    needs_k = scenario in ("residual", "residual-sweep", "stationary",
                           "resonant-probabilities")
    if needs_k and k is None:
        raise ConfigError(f"scenario {scenario!r} requires field 'k'")
    if scenario == "residual-sweep" and deltas is None:
        raise ConfigError("scenario 'residual-sweep' requires field 'deltas'")
    if scenario == "propagate" and packet is None:
        raise ConfigError("scenario 'propagate' requires a 'packet' object")
    if scenario == "resonant-probabilities" and params.delta != 0.0:
        raise ConfigError(
            "scenario 'resonant-probabilities' is defined at delta = 0 only; "
            f"got delta = {params.delta!r}")

    resolved = {
        "scenario": scenario,
        "lambda": params.lam, "delta": params.delta, "omega": params.omega,
        "cavity_length": params.cavity_length,
        "sectors": {str(s.n): s.weight for s in sectors},
        "grid": grid_raw, "time": time_raw, "audit": audit_raw,
        "output_dir": output_dir, "svg": svg, "seed": seed,
    }
    if k is not None:
        resolved["k"] = k
    if deltas is not None:
        resolved["deltas"] = list(deltas)
    if packet is not None:
        resolved["packet"] = {"k0": packet.k0, "sigma_k": packet.sigma_k,
                              "z0": packet.z0}

    return RunConfig(scenario=scenario, params=params, sectors=sectors, k=k,
                     deltas=deltas, packet=packet, grid_options=grid_options,
                     time_options=time_options, audit_options=audit_options,
                     output_dir=output_dir, svg=svg, seed=seed, resolved=resolved)


def load_config(path: str) -> RunConfig:
    """Read and validate a JSON configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path!r} is not valid JSON: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})")
    return parse_config(data)


def apply_overrides(data: Dict[str, Any], assignments: List[str]) -> Dict[str, Any]:
    """Apply `--set key=value` pairs onto a raw config mapping.

    Keys use dots for nesting (packet.k0=1.5); values are parsed as JSON
    with a bare-string fallback so `--set scenario=audit` works unquoted.
    """
    out = json.loads(json.dumps(data))  # deep copy, JSON types only
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, raw_value = item.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"override {item!r} has an empty key")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = {}
                node[part] = nxt
            elif not isinstance(nxt, dict):
                raise ConfigError(f"override {key!r} descends into non-object {part!r}")
            node = nxt
        node[parts[-1]] = value
    return out
