"""Time evolution, steady states and population readout."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InitialStateRequired,
    InvalidState,
    NonUniqueSteadyState,
    NoConvergence,
    StepSizeUnderflow,
)
from .liouvillian import Liouvillian, apply_rhs, check_density_matrix, unvec, vec
from .model import HilbertSpace, SystemParams, dressed_states

# Largest admissible h * ||L||; far inside the RK4 stability region (|h lambda| < 2.78).
STEP_SAFETY = 0.05
MIN_STEP = 1e-9
NULL_THRESHOLD = 1e-10
WINDOW_CHANGE_TOL = 1e-10


class SteadyMethod(enum.Enum):
    NULL_SPACE = "NullSpace"
    LONG_TIME = "LongTime"


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def rk4_step(rhs, rho: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``drho/dt = rhs(rho)``."""
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * h * k1)
    k3 = rhs(rho + 0.5 * h * k2)
    k4 = rhs(rho + h * k3)
    return rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_step_matrix(generator: np.ndarray, h: float) -> np.ndarray:
    """Propagator of one RK4 step for the linear system ``dv/dt = generator @ v``.

    For a constant linear generator the four RK4 stages collapse to the
    degree-4 Taylor polynomial of ``exp(h L)``; this is that polynomial.
    """
    n = generator.shape[0]
    eye = np.eye(n, dtype=complex)
    hL = h * generator
    step = eye + hL / 4
    step = eye + hL @ step / 3
    step = eye + hL @ step / 2
    return eye + hL @ step


def max_step(liou: Liouvillian, dt_max: float | None = None) -> float:
    """Largest step allowed by ``dt_max`` and by the fastest rate."""
    scale = liou.rate_scale
    bound = STEP_SAFETY / scale if scale > 0 else math.inf
    if dt_max is not None:
        if dt_max <= 0:
            raise ValueError("dt_max must be positive")
        bound = min(bound, dt_max)
    if bound < MIN_STEP:
        raise StepSizeUnderflow(f"stable step {bound:.3g} us is below {MIN_STEP} us")
    return bound


class _IntervalPropagator:
    """Caches the RK4 propagator over intervals of a given length."""

    def __init__(self, liou: Liouvillian, h_max: float):
        self.liou = liou
        self.h_max = h_max
        self._cache: dict[float, np.ndarray] = {}

    def steps(self, interval: float) -> int:
        if math.isinf(self.h_max):
            return 1
        return max(1, math.ceil(interval / self.h_max - 1e-9))

    def __call__(self, interval: float) -> np.ndarray:
        try:
            return self._cache[interval]
        except KeyError:
            pass
        m = self.steps(interval)
        step = rk4_step_matrix(self.liou.matrix, interval / m)
        prop = np.linalg.matrix_power(step, m)
        self._cache[interval] = prop
        return prop


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    space: HilbertSpace
    dressed: tuple[np.ndarray, np.ndarray] | None = None
    steps_per_sample: list[int] = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def population(self, label: str) -> np.ndarray:
        if label in ("D", "B"):
            if self.dressed is None:
                raise KeyError("dressed populations need params with a c-a or c-b coupling")
            vec_ = self.dressed[0] if label == "D" else self.dressed[1]
            return np.einsum("i,kij,j->k", vec_.conj(), self.states, vec_).real
        i = self.space.index(label)
        return self.states[:, i, i].real.copy()

    @property
    def populations(self) -> dict[str, np.ndarray]:
        labels = list(self.space.labels)
        if self.dressed is not None:
            labels += ["D", "B"]
        return {label: self.population(label) for label in labels}


def propagate(
    liou: Liouvillian,
    rho0,
    t_end: float,
    dt_max: float | None = None,
    samples: int = 100,
    times: Sequence[float] | None = None,
    params: SystemParams | None = None,
) -> Trajectory:
    """Integrate the master equation with fixed-step RK4.

    Output is reported at ``samples + 1`` uniform times on ``[0, t_end]`` or at
    the explicit ``times`` (which must start at 0 and increase).  Every output
    interval is split into the fewest equal steps not exceeding
    ``min(dt_max, 0.05 / ||L||)``.  Samples are Hermitized; steps are not.

    Passing ``params`` attaches the dressed basis so ``p_D`` and ``p_B`` are
    available on the result.
    """
    rho0 = check_density_matrix(rho0, liou.dim)
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if times is None:
        if samples < 1:
            raise ValueError("samples must be >= 1")
        interval = t_end / samples
        grid = interval * np.arange(samples + 1)
        grid[-1] = t_end
        intervals = [interval] * samples
    else:
        grid = np.asarray(times, dtype=float)
        if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise ValueError("times must start at 0 and be strictly increasing")
        intervals = list(np.diff(grid))
    prop = _IntervalPropagator(liou, max_step(liou, dt_max))

    d = liou.dim
    states = np.empty((len(grid), d, d), dtype=complex)
    states[0] = rho0
    v = vec(rho0)
    counts = []
    for k, interval in enumerate(intervals, start=1):
        v = prop(interval) @ v
        rho = hermitize(unvec(v, d))
        states[k] = rho
        v = vec(rho)
        counts.append(prop.steps(interval))

    dressed = None
    if params is not None:
        if params.n + 4 != d:
            raise DimensionMismatch("params and generator disagree on dimension")
        if params.omega_ca or params.omega_cb:
            dressed = dressed_states(params)
    return Trajectory(grid, states, HilbertSpace(d - 4), dressed, counts)


@dataclass
class SteadyState:
    rho: np.ndarray
    method: SteadyMethod
    residual: float
    t_final: float | None = None

    def population(self, label: str, space: HilbertSpace | None = None) -> float:
        space = space or HilbertSpace(self.rho.shape[0] - 4)
        i = space.index(label)
        return float(self.rho[i, i].real)


def _total_decay(liou: Liouvillian) -> float:
    return float(sum(j.rate for j in liou.jumps))


def _null_space_state(liou: Liouvillian) -> np.ndarray:
    _, sv, vh = np.linalg.svd(liou.matrix)
    threshold = NULL_THRESHOLD * sv[0]
    zero_count = int(np.count_nonzero(sv < threshold))
    if zero_count > 1:
        raise NonUniqueSteadyState(
            f"{zero_count} singular values below {threshold:.3g}; steady state is not unique"
        )
    rho = unvec(vh[-1].conj(), liou.dim)
    tr = np.trace(rho)
    if abs(tr) < 1e-14:
        raise InvalidState("null vector has zero trace")
    return hermitize(rho / tr)


def _long_time_state(liou, rho0, tol, time_cap, dt_max):
    gamma = _total_decay(liou)
    rate = gamma if gamma > 0 else liou.rate_scale
    rho = hermitize(check_density_matrix(rho0, liou.dim))
    if rate == 0:
        return rho, 0.0
    if tol is None:
        tol = 1e-12 * rate
    window = 10.0 / rate
    prop = _IntervalPropagator(liou, max_step(liou, dt_max))(window)
    d = liou.dim
    t = 0.0
    while True:
        if np.max(np.abs(apply_rhs(liou, rho))) < tol:
            return rho, t
        nxt = hermitize(unvec(prop @ vec(rho), d))
        t += window
        change = np.max(np.abs(nxt - rho))
        rho = nxt
        if change < WINDOW_CHANGE_TOL:
            return rho, t
        if t > time_cap:
            raise NoConvergence(f"no stationary state reached within {time_cap} us")


def steady_state(
    liou: Liouvillian,
    rho0=None,
    method: SteadyMethod | str | None = None,
    *,
    tol: float | None = None,
    time_cap: float = 1e5,
    dt_max: float | None = None,
) -> SteadyState:
    """Stationary state of the master equation.

    With ``kappa > 0`` the default is the unique trace-one null vector of the
    assembled generator (right singular vector of the smallest singular value).
    With ``kappa == 0`` the limit depends on where one starts, so ``rho0`` is
    mandatory and the state is found by propagating in windows of ``10 / gamma``
    until the generator residual drops below ``tol`` or a window changes the
    state by less than 1e-10.
    """
    if method is None:
        method = SteadyMethod.NULL_SPACE if liou.kappa > 0 else SteadyMethod.LONG_TIME
    method = SteadyMethod(method)
    t_final = None
    if method is SteadyMethod.NULL_SPACE:
        rho = _null_space_state(liou)
    else:
        if rho0 is None:
            raise InitialStateRequired(
                "long-time steady state depends on the initial state; pass rho0"
            )
        rho, t_final = _long_time_state(liou, rho0, tol, time_cap, dt_max)
    residual = float(np.max(np.abs(apply_rhs(liou, rho))))
    return SteadyState(rho, method, residual, t_final)


def populations(rho, space: HilbertSpace, params: SystemParams | None = None) -> dict[str, float]:
    """Bare-state populations keyed by label, plus ``D`` and ``B`` when available."""
    rho = np.asarray(rho)
    if rho.shape != (space.dim, space.dim):
        raise DimensionMismatch(f"state shape {rho.shape} does not match dim {space.dim}")
    out = {label: float(rho[i, i].real) for i, label in enumerate(space.labels)}
    if params is not None and (params.omega_ca or params.omega_cb):
        D, Bv = dressed_states(params)
        out["D"] = float(np.vdot(D, rho @ D).real)
        out["B"] = float(np.vdot(Bv, rho @ Bv).real)
    return out


INITIAL_STATES = ("uniform", "uniform-abc", "uniform-ab", "pure:a", "pure:b", "pure:c", "pure:D")


def initial_state(spec, params: SystemParams) -> np.ndarray:
    """Density matrix for a named initial-state recipe or an explicit diagonal.

    Named recipes: ``uniform`` (I/d), ``uniform-abc``, ``uniform-ab``,
    ``pure:a``, ``pure:b``, ``pure:c`` and ``pure:D`` (the dark superposition).
    A sequence is read as the diagonal, normalised to trace one.
    """
    space = params.space
    d = space.dim
    if isinstance(spec, str):
        if spec == "uniform":
            return np.eye(d, dtype=complex) / d
        if spec in ("uniform-abc", "uniform-ab"):
            rho = np.zeros((d, d), dtype=complex)
            members = "abc" if spec == "uniform-abc" else "ab"
            for label in members:
                i = space.index(label)
                rho[i, i] = 1.0 / len(members)
            return rho
        if spec.startswith("pure:"):
            label = spec[5:]
            if label == "D":
                psi = dressed_states(params)[0]
            elif label in ("a", "b", "c", "e"):
                psi = space.basis(label)
            else:
                raise ValueError(f"unknown pure state {label!r}")
            return np.outer(psi, psi.conj())
        raise ValueError(f"unknown initial state {spec!r}; expected one of {INITIAL_STATES}")
    diag = np.asarray(spec, dtype=float)
    if diag.shape != (d,):
        raise DimensionMismatch(f"custom diagonal needs {d} entries, got {diag.shape}")
    if np.any(diag < 0) or diag.sum() <= 0:
        raise ValueError("custom diagonal must be non-negative with positive sum")
    return np.diag(diag / diag.sum()).astype(complex)
