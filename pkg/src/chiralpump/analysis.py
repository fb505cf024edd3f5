"""Steady-state sweeps, purity/ratio metrics and two-peak enantiodetection."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbiguousPeaks, GridMismatch, PeaksNotFound, UndefinedPurity
from .liouvillian import Liouvillian, check_density_matrix
from .dynamics import steady_state
from .model import Handedness, SystemParams

log = logging.getLogger(__name__)

SWEEP_STATES = ("a", "b", "c", "e")
AXES = {"kappa": "kappa", "n": "n", "delta": "delta", "delta_e": "Delta_e"}
AMBIGUITY_FRACTION = 0.05
MIN_CURVE_POINTS = 21


def purity(left_P: float, right_P: float) -> float:
    """Fraction of left-handed molecules among those found in one state."""
    if left_P < 0 or right_P < 0:
        raise ValueError("populations must be non-negative")
    total = left_P + right_P
    if total == 0:
        raise UndefinedPurity("both populations are zero")
    return left_P / total


@dataclass
class SweepResult:
    """Steady populations of both enantiomers along one parameter axis.

    ``populations[h][s]`` is an array over ``axis_values`` for handedness ``h``
    and state label ``s``.  Axis values are in internal units (rad/us for
    rates and detunings).
    """

    axis_name: str
    axis_values: np.ndarray
    populations: dict[Handedness, dict[str, np.ndarray]]
    residuals: dict[Handedness, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.axis_values = np.asarray(self.axis_values)
        for h, per_state in self.populations.items():
            for s, values in per_state.items():
                if len(values) != len(self.axis_values):
                    raise ValueError(f"{h.value}/{s} has {len(values)} values for "
                                     f"{len(self.axis_values)} axis points")

    def P(self, state: str, h: Handedness | str) -> np.ndarray:
        return self.populations[Handedness.parse(h)][state]

    def ratio(self, state: str) -> np.ndarray:
        """P_s(L) / P_s(R) at every axis point."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.P(state, Handedness.LEFT) / self.P(state, Handedness.RIGHT)

    def purity(self, state: str) -> np.ndarray:
        return np.array([purity(l, r) for l, r in
                         zip(self.P(state, Handedness.LEFT), self.P(state, Handedness.RIGHT))])

    def strictly_decreasing(self, state: str) -> bool:
        return bool(np.all(np.diff(self.ratio(state)) < 0))

    def argmax(self, state: str, h: Handedness | str) -> float:
        return float(self.axis_values[int(np.argmax(self.P(state, h)))])

    def columns(self) -> dict[str, np.ndarray]:
        """Flat column view used by the CSV writer."""
        cols: dict[str, np.ndarray] = {}
        for h in (Handedness.LEFT, Handedness.RIGHT):
            if h not in self.populations:
                continue
            for s, values in self.populations[h].items():
                cols[f"P_{s}_{h.value}"] = values
        if len(self.populations) == 2:
            for s in ("a", "b"):
                if s in self.populations[Handedness.LEFT]:
                    cols[f"ratio_{s}"] = self.ratio(s)
        return cols


def _steady_point(params: SystemParams, h: Handedness, states: Sequence[str]):
    ss = steady_state(Liouvillian.from_params(params, h))
    check_density_matrix(ss.rho, params.n + 4)
    space = params.space
    return [ss.population(s, space) for s in states], ss.residual


def _evaluate(tasks, jobs: int | None):
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(tasks) < 4:
        return [_steady_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() yields in submission order, so output order never depends on timing.
        return list(pool.map(_steady_point, *zip(*tasks), chunksize=max(1, len(tasks) // (4 * jobs))))


def sweep(
    base: SystemParams,
    axis: str,
    values: Iterable,
    *,
    handedness: Sequence[Handedness] = (Handedness.LEFT, Handedness.RIGHT),
    states: Sequence[str] = SWEEP_STATES,
    jobs: int | None = 1,
) -> SweepResult:
    """Steady states of every handedness at every value of one parameter."""
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {sorted(AXES)}")
    values = list(values)
    field_name = AXES[axis]
    points = [base.replace(**{field_name: v}) for v in values]
    for p in points:
        if p.kappa <= 0:
            raise ValueError("steady-state sweeps need kappa > 0")
    tasks = [(p, h, tuple(states)) for h in handedness for p in points]
    results = _evaluate(tasks, jobs)
    pops: dict[Handedness, dict[str, np.ndarray]] = {}
    residuals = {}
    for k, h in enumerate(handedness):
        chunk = results[k * len(points):(k + 1) * len(points)]
        table = np.array([r[0] for r in chunk], dtype=float).reshape(len(points), len(states))
        pops[h] = {s: table[:, i] for i, s in enumerate(states)}
        residuals[h] = np.array([r[1] for r in chunk])
    log.debug("sweep %s over %d points done", axis, len(points))
    return SweepResult(axis, np.array(values, dtype=int if axis == "n" else float), pops, residuals)


def sweep_kappa(base: SystemParams, kappas, **kw) -> SweepResult:
    return sweep(base, "kappa", kappas, **kw)


def sweep_n(base: SystemParams, ns, **kw) -> SweepResult:
    ns = [int(n) for n in ns]
    if any(n < 1 for n in ns):
        raise ValueError("n sweep needs n >= 1")
    return sweep(base, "n", ns, **kw)


def sweep_delta(base: SystemParams, deltas, **kw) -> SweepResult:
    return sweep(base, "delta", deltas, **kw)


def sweep_delta_e(base: SystemParams, delta_es, **kw) -> SweepResult:
    return sweep(base, "delta_e", delta_es, **kw)


def delta_grid(d0: float, points: int = 201, span: float = 3.0) -> np.ndarray:
    """Uniform detuning grid over ``[-span * d0, span * d0]``."""
    return np.linspace(-span * abs(d0), span * abs(d0), points)


@dataclass(frozen=True)
class MixtureSpec:
    f_L: float
    f_R: float | None = None

    def __post_init__(self):
        f_R = 1.0 - self.f_L if self.f_R is None else self.f_R
        object.__setattr__(self, "f_R", f_R)
        if self.f_L < 0 or f_R < 0 or abs(self.f_L + f_R - 1.0) > 1e-12:
            raise ValueError(f"fractions must be >= 0 and sum to 1, got {self.f_L}, {f_R}")


@dataclass
class Curve:
    axis_values: np.ndarray
    values: np.ndarray
    observable: str = "a"


def mixture_curve(spec: MixtureSpec, left: SweepResult, right: SweepResult,
                  state: str = "a") -> Curve:
    """Population curve of a mixture: ``f_L P^L + f_R P^R`` point by point.

    ``left`` and ``right`` may be the same ``SweepResult`` holding both
    handednesses.
    """
    if left.axis_name != right.axis_name or not np.array_equal(left.axis_values, right.axis_values):
        raise GridMismatch("left and right sweeps use different grids")
    values = spec.f_L * left.P(state, Handedness.LEFT) + spec.f_R * right.P(state, Handedness.RIGHT)
    return Curve(left.axis_values.copy(), values, state)


def local_maxima(values: np.ndarray) -> list[int]:
    """Indices of strict local maxima; a flat top reports its leftmost point.

    End points never qualify because they lack a neighbour on one side.
    """
    values = np.asarray(values)
    peaks = []
    i, n = 1, len(values)
    while i < n - 1:
        if values[i] > values[i - 1]:
            j = i
            while j < n - 1 and values[j + 1] == values[i]:
                j += 1
            if j < n - 1 and values[j + 1] < values[i]:
                peaks.append(i)
            i = j + 1
        else:
            i += 1
    return peaks


@dataclass
class DetectionReport:
    peak_positions: tuple[float, float]
    peak_heights: tuple[float, float]
    f_L: float
    f_R: float
    curve: Curve
    calibration: list[dict] | None = None
    max_abs_bias: float | None = None

    def to_dict(self, scale: float = 1.0, unit: str = "rad/us") -> dict:
        """JSON-ready view; positions are divided by ``scale`` and tagged with ``unit``."""
        out = {
            "observable": self.curve.observable,
            "peak_positions": [p / scale for p in self.peak_positions],
            "position_unit": unit,
            "peak_heights": list(self.peak_heights),
            "f_L": self.f_L,
            "f_R": self.f_R,
            "curve": {
                "delta": [v / scale for v in self.curve.axis_values.tolist()],
                "P": self.curve.values.tolist(),
            },
        }
        if self.calibration is not None:
            out["calibration"] = self.calibration
            out["max_abs_bias"] = self.max_abs_bias
        return out


def estimate_fractions(curve: Curve, min_separation: float, phi_L: float = 0.0) -> DetectionReport:
    """Enantiomer fractions from the two dominant peaks of a mixture curve.

    The positive-detuning peak belongs to the enantiomer with the dark state at
    ``+delta0``: left-handed for ``phi_L = 0``, right-handed for ``phi_L = pi``.
    The estimate is the raw height ratio ``h_L / (h_L + h_R)``; no background
    is subtracted, so it is biased for very unequal mixtures (see
    ``calibration_table``).
    """
    x = np.asarray(curve.axis_values, dtype=float)
    y = np.asarray(curve.values, dtype=float)
    if len(x) < MIN_CURVE_POINTS:
        raise ValueError(f"curve needs at least {MIN_CURVE_POINTS} points, got {len(x)}")
    peaks = sorted(local_maxima(y), key=lambda i: (-y[i], i))
    if not peaks:
        raise PeaksNotFound("curve has no local maximum")
    first = peaks[0]
    rest = [i for i in peaks[1:] if abs(x[i] - x[first]) >= min_separation]
    if not rest:
        raise PeaksNotFound("only one peak found; a two-peak analysis needs a mixture")
    second = rest[0]
    others = [i for i in peaks if i not in (first, second)]
    if others and y[others[0]] >= (1 - AMBIGUITY_FRACTION) * y[second]:
        raise AmbiguousPeaks(
            f"third maximum at {x[others[0]]:.6g} is within "
            f"{AMBIGUITY_FRACTION:.0%} of the second at {x[second]:.6g}"
        )
    lo, hi = sorted((first, second), key=lambda i: x[i])
    if x[lo] * x[hi] > 0:
        raise AmbiguousPeaks("both peaks lie on the same side of delta = 0")
    flipped = abs(np.cos(phi_L) + 1) < 1e-9
    left_i, right_i = (lo, hi) if flipped else (hi, lo)
    h_L, h_R = float(y[left_i]), float(y[right_i])
    f_L = h_L / (h_L + h_R)
    return DetectionReport(
        peak_positions=(float(x[left_i]), float(x[right_i])),
        peak_heights=(h_L, h_R),
        f_L=f_L,
        f_R=1.0 - f_L,
        curve=curve,
    )


def calibration_table(
    pure: SweepResult,
    min_separation: float,
    fractions=tuple(np.round(np.arange(1, 10) / 10, 10)),
    state: str = "a",
    phi_L: float = 0.0,
) -> list[dict]:
    """Estimator output against ground truth for synthetic mixtures."""
    rows = []
    for f in fractions:
        report = estimate_fractions(mixture_curve(MixtureSpec(float(f)), pure, pure, state),
                                    min_separation, phi_L)
        rows.append({"f_L": float(f), "f_L_hat": report.f_L, "bias": report.f_L - float(f)})
    return rows
