"""Run configuration: strict YAML schema in laboratory units.

Frequencies are given as ordinary frequencies in MHz and converted to angular
frequencies (x 2 pi, rad/us) on ingestion; ``kappa_khz`` is in kHz; times are
in us; ``phi_L`` is in radians.  ``delta`` also accepts the strings
``"delta0"`` / ``"-delta0"`` for the dark-state detuning.  Unknown keys are
errors and are reported with their line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ConfigError, InvalidParameters
from .model import TWO_PI, Handedness, SystemParams, delta0

MHZ = TWO_PI            # MHz -> rad/us
KHZ = TWO_PI * 1e-3     # kHz -> rad/us

PARAM_KEYS = {
    # key: (SystemParams field, unit factor); None factor means dimensionless
    "omega_ab": ("omega_ab", MHZ),
    "omega_ca": ("omega_ca", MHZ),
    "omega_cb": ("omega_cb", MHZ),
    "omega_ce": ("omega_ce", MHZ),
    "gamma": ("gamma", MHZ),
    "kappa_khz": ("kappa", KHZ),
    "delta": ("delta", MHZ),
    "Delta": ("Delta", MHZ),
    "Delta_e": ("Delta_e", MHZ),
    "phi_L": ("phi_L", None),
    "n": ("n", None),
}
REQUIRED_PARAMS = ("omega_ab", "omega_ca", "omega_cb", "omega_ce", "gamma")

TOP_KEYS = {"params", "initial_state", "handedness", "evolve", "sweep", "mixture",
            "output", "branching", "meta", "provenance"}
EVOLVE_KEYS = {"t_end_us", "samples", "dt_max_us", "states"}
SWEEP_KEYS = {"axis", "min", "max", "points", "values", "unit"}
MIXTURE_KEYS = {"f_L", "observable", "min_separation_mhz"}
OUTPUT_KEYS = {"path", "format"}

AXIS_UNITS = {
    "kappa": {"kHz": KHZ, "MHz": MHZ},
    "delta": {"MHz": MHZ, "delta0": None},
    "delta_e": {"MHz": MHZ},
    "n": {"count": 1},
}
DEFAULT_AXIS_UNIT = {"kappa": "kHz", "delta": "MHz", "delta_e": "MHz", "n": "count"}
STATE_NAMES = {"uniform", "uniform-abc", "uniform-ab", "pure:a", "pure:b", "pure:c", "pure:D"}


def _line_index(node, path=(), out=None) -> dict[tuple, int]:
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _line_index(v, path + (k.value,), out)
            out[path + (k.value,)] = k.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_index(v, path + (i,), out)
    return out


@dataclass
class SweepSpec:
    axis: str
    user_values: list
    unit: str

    def internal_values(self, params: SystemParams) -> list:
        if self.axis == "n":
            return [int(v) for v in self.user_values]
        if self.unit == "delta0":
            return [v * delta0(params) for v in self.user_values]
        factor = AXIS_UNITS[self.axis][self.unit]
        return [v * factor for v in self.user_values]

    @property
    def column(self) -> str:
        return "n" if self.axis == "n" else f"{self.axis}_{self.unit}"


@dataclass
class RunConfig:
    params: SystemParams
    user_params: dict[str, Any]
    initial_state: Any = "uniform-abc"
    handedness: tuple[Handedness, ...] = (Handedness.LEFT, Handedness.RIGHT)
    t_end_us: float = 5.0
    samples: int = 500
    dt_max_us: float | None = None
    states: tuple[str, ...] | None = None
    sweep: SweepSpec | None = None
    f_L: float | None = None
    observable: str = "a"
    min_separation_mhz: float | None = None
    output_path: str | None = None
    output_format: str | None = None
    meta: dict = field(default_factory=dict)
    provenance: str = ""
    source: str = "<config>"


class _Reader:
    def __init__(self, lines: dict, source: str):
        self.lines = lines
        self.source = source

    def error(self, path: tuple, message: str) -> ConfigError:
        line = self.lines.get(path)
        where = f"{self.source}:{line}" if line else self.source
        key = ".".join(str(p) for p in path) or "<root>"
        return ConfigError(f"{where}: {key}: {message}")

    def mapping(self, data, path, allowed):
        if not isinstance(data, dict):
            raise self.error(path, "expected a mapping")
        for k in data:
            if k not in allowed:
                raise self.error(path + (k,), f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return data

    def number(self, data, path, *, integer=False, positive=False, nonneg=False):
        value = data
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(path, f"expected a number, got {value!r}")
        if integer and int(value) != value:
            raise self.error(path, f"expected an integer, got {value!r}")
        if not math.isfinite(value):
            raise self.error(path, "must be finite")
        if positive and value <= 0:
            raise self.error(path, "must be > 0")
        if nonneg and value < 0:
            raise self.error(path, "must be >= 0")
        return int(value) if integer else float(value)


def _parse_params(r: _Reader, raw) -> tuple[SystemParams, dict]:
    r.mapping(raw, ("params",), set(PARAM_KEYS))
    for key in REQUIRED_PARAMS:
        if key not in raw:
            raise r.error(("params",), f"missing required key {key!r}")
    kwargs: dict[str, Any] = {}
    delta_spec = raw.get("delta", 0.0)
    for key, value in raw.items():
        name, factor = PARAM_KEYS[key]
        path = ("params", key)
        if key == "delta" and isinstance(value, str):
            if value.strip() not in ("delta0", "-delta0", "+delta0"):
                raise r.error(path, f"expected a number in MHz or 'delta0'/'-delta0', got {value!r}")
            continue
        if key == "n":
            kwargs[name] = r.number(value, path, integer=True, nonneg=True)
        else:
            v = r.number(value, path)
            kwargs[name] = v if factor is None else v * factor
    try:
        params = SystemParams(**kwargs)
        if isinstance(delta_spec, str):
            sign = -1.0 if delta_spec.strip().startswith("-") else 1.0
            params = params.replace(delta=sign * delta0(params))
    except (InvalidParameters, ValueError) as exc:
        raise r.error(("params",), str(exc)) from None
    return params, dict(raw)


def _parse_initial(r: _Reader, raw, params: SystemParams):
    path = ("initial_state",)
    if isinstance(raw, str):
        if raw not in STATE_NAMES:
            raise r.error(path, f"unknown initial state {raw!r} (allowed: {', '.join(sorted(STATE_NAMES))})")
        if raw == "pure:D" and not (params.omega_ca or params.omega_cb):
            raise r.error(path, "pure:D needs omega_ca or omega_cb > 0")
        return raw
    if isinstance(raw, dict):
        r.mapping(raw, path, {"diagonal"})
        diag = raw.get("diagonal")
        if not isinstance(diag, list) or len(diag) != params.n + 4:
            raise r.error(path + ("diagonal",), f"expected a list of {params.n + 4} numbers")
        values = [r.number(v, path + ("diagonal", i), nonneg=True) for i, v in enumerate(diag)]
        if sum(values) <= 0:
            raise r.error(path + ("diagonal",), "entries must not all be zero")
        return values
    raise r.error(path, "expected a state name or {diagonal: [...]}")


def _parse_sweep(r: _Reader, raw) -> SweepSpec:
    r.mapping(raw, ("sweep",), SWEEP_KEYS)
    axis = raw.get("axis")
    if axis not in AXIS_UNITS:
        raise r.error(("sweep", "axis"), f"expected one of {sorted(AXIS_UNITS)}, got {axis!r}")
    unit = raw.get("unit", DEFAULT_AXIS_UNIT[axis])
    if unit not in AXIS_UNITS[axis]:
        raise r.error(("sweep", "unit"), f"axis {axis} accepts units {sorted(AXIS_UNITS[axis])}")
    integer = axis == "n"
    if "values" in raw:
        if any(k in raw for k in ("min", "max", "points")):
            raise r.error(("sweep", "values"), "give either values or min/max/points, not both")
        if not isinstance(raw["values"], list) or not raw["values"]:
            raise r.error(("sweep", "values"), "expected a non-empty list")
        values = [r.number(v, ("sweep", "values", i), integer=integer)
                  for i, v in enumerate(raw["values"])]
    else:
        for k in ("min", "max", "points"):
            if k not in raw:
                raise r.error(("sweep",), f"missing {k!r} (or give an explicit values list)")
        lo = r.number(raw["min"], ("sweep", "min"))
        hi = r.number(raw["max"], ("sweep", "max"))
        pts = r.number(raw["points"], ("sweep", "points"), integer=True, positive=True)
        if integer:
            values = [int(v) for v in range(int(lo), int(hi) + 1)]
        else:
            values = [float(v) for v in np.linspace(lo, hi, pts)]
    if axis == "n" and any(v < 1 for v in values):
        raise r.error(("sweep",), "n values must be >= 1")
    if axis == "kappa" and any(v <= 0 for v in values):
        raise r.error(("sweep",), "kappa values must be > 0")
    return SweepSpec(axis, values, unit)


def parse_config(data: dict, source: str = "<config>", lines: dict | None = None) -> RunConfig:
    """Validate a decoded config mapping and convert it to internal units."""
    r = _Reader(lines or {}, source)
    r.mapping(data, (), TOP_KEYS)
    if "params" not in data:
        raise r.error((), "missing required section 'params'")
    params, user_params = _parse_params(r, data["params"])
    cfg = RunConfig(params=params, user_params=user_params, source=source)

    if data.get("branching") is not None:
        raise r.error(("branching",), "weighted branching is reserved; only equal branching is supported")
    if "initial_state" in data:
        cfg.initial_state = _parse_initial(r, data["initial_state"], params)
    if "handedness" in data:
        raw = data["handedness"]
        if raw == "both":
            cfg.handedness = (Handedness.LEFT, Handedness.RIGHT)
        else:
            try:
                cfg.handedness = (Handedness.parse(raw),)
            except ValueError:
                raise r.error(("handedness",), "expected L, R or both") from None
    if "evolve" in data:
        ev = r.mapping(data["evolve"], ("evolve",), EVOLVE_KEYS)
        if "t_end_us" in ev:
            cfg.t_end_us = r.number(ev["t_end_us"], ("evolve", "t_end_us"), positive=True)
        if "samples" in ev:
            cfg.samples = r.number(ev["samples"], ("evolve", "samples"), integer=True, positive=True)
        if ev.get("dt_max_us") is not None:
            cfg.dt_max_us = r.number(ev["dt_max_us"], ("evolve", "dt_max_us"), positive=True)
        if "states" in ev:
            labels = params.space.labels
            states = ev["states"]
            if not isinstance(states, list) or any(s not in labels for s in states):
                raise r.error(("evolve", "states"), f"expected a list drawn from {list(labels)}")
            cfg.states = tuple(states)
    if "sweep" in data:
        cfg.sweep = _parse_sweep(r, data["sweep"])
    if "mixture" in data:
        mx = r.mapping(data["mixture"], ("mixture",), MIXTURE_KEYS)
        if "f_L" in mx:
            f = r.number(mx["f_L"], ("mixture", "f_L"), nonneg=True)
            if f > 1:
                raise r.error(("mixture", "f_L"), "must lie in [0, 1]")
            cfg.f_L = f
        if "observable" in mx:
            if mx["observable"] not in ("a", "b"):
                raise r.error(("mixture", "observable"), "expected 'a' or 'b'")
            cfg.observable = mx["observable"]
        if "min_separation_mhz" in mx:
            cfg.min_separation_mhz = r.number(mx["min_separation_mhz"],
                                              ("mixture", "min_separation_mhz"), positive=True)
    if "output" in data:
        out = r.mapping(data["output"], ("output",), OUTPUT_KEYS)
        if "path" in out:
            cfg.output_path = str(out["path"])
        if "format" in out:
            if out["format"] not in ("csv", "json"):
                raise r.error(("output", "format"), "expected csv or json")
            cfg.output_format = out["format"]
    if "meta" in data:
        if not isinstance(data["meta"], dict):
            raise r.error(("meta",), "expected a mapping")
        cfg.meta = data["meta"]
    if "provenance" in data:
        cfg.provenance = str(data["provenance"])
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if node is None or data is None:
        raise ConfigError(f"{path}: config is empty")
    return parse_config(data, str(path), _line_index(node))
