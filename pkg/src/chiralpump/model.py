"""Cyclic three-level chiral molecule: parameters, Hamiltonians, dressed basis.

All angular frequencies are in rad/us and times in us.  The basis ordering is
fixed for the whole package::

    b -> 0, a -> 1, c -> 2, e -> 3, x_k -> 3 + k   (k = 1..n)

The Hamiltonians are written in the interaction picture in which the driven
three-level loop is time independent (three-photon resonance assumed), so only
detunings enter; absolute level energies and field frequencies never appear.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DegenerateCoupling, InvalidParameters, UnsupportedPhase

TWO_PI = 2.0 * math.pi

B, A, C, E = 0, 1, 2, 3
CORE_LABELS = ("b", "a", "c", "e")


class Handedness(enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def phase_offset(self) -> float:
        """Extra loop phase carried by this enantiomer relative to phi_L."""
        return 0.0 if self is Handedness.LEFT else math.pi

    @property
    def mirror(self) -> Handedness:
        return Handedness.RIGHT if self is Handedness.LEFT else Handedness.LEFT

    @classmethod
    def parse(cls, value: str | Handedness) -> Handedness:
        if isinstance(value, Handedness):
            return value
        key = str(value).strip().upper()
        if key in ("L", "LEFT"):
            return cls.LEFT
        if key in ("R", "RIGHT"):
            return cls.RIGHT
        raise ValueError(f"unknown handedness {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Control parameters of one enantiomer ensemble.

    Rabi amplitudes, detunings and rates are angular frequencies [rad/us].

    Attributes
    ----------
    omega_ab, omega_ca, omega_cb : float
        Microwave Rabi amplitudes of the a-b, c-a and c-b transitions.
    omega_ce : float
        Laser Rabi amplitude of the c-e transition.
    phi_L : float
        Overall microwave loop phase seen by the left-handed molecule [rad].
        The right-handed molecule sees ``phi_L + pi``.
    delta : float
        Two-photon detuning, ``E_a - E_b - w_1``.
    Delta : float
        ``E_c - E_b - w_3``.
    Delta_e : float
        Laser detuning, ``E_e - E_c - w_4``.
    gamma : float
        Total spontaneous decay rate of ``|e>``.
    kappa : float
        Collisional relaxation rate.
    n : int
        Number of leakage levels ``x_1..x_n``.
    """

    omega_ab: float = 0.0
    omega_ca: float = 0.0
    omega_cb: float = 0.0
    omega_ce: float = 0.0
    phi_L: float = 0.0
    delta: float = 0.0
    Delta: float = 0.0
    Delta_e: float = 0.0
    gamma: float = 0.0
    kappa: float = 0.0
    n: int = 1

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "n":
                if isinstance(value, bool) or int(value) != value:
                    raise InvalidParameters(f"n must be an integer, got {value!r}")
                object.__setattr__(self, "n", int(value))
                continue
            value = float(value)
            if not math.isfinite(value):
                raise InvalidParameters(f"{f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, value)
        for name in ("omega_ab", "omega_ca", "omega_cb", "omega_ce", "gamma", "kappa"):
            if getattr(self, name) < 0:
                raise InvalidParameters(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.n < 0:
            raise InvalidParameters(f"n must be >= 0, got {self.n}")

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.n)

    def replace(self, **changes) -> SystemParams:
        return replace(self, **changes)

    def at_dark_condition(self) -> SystemParams:
        """Copy with ``delta`` set to the dark-state detuning."""
        return self.replace(delta=delta0(self))


@dataclass(frozen=True)
class HilbertSpace:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameters(f"n must be >= 0, got {self.n}")

    @property
    def dim(self) -> int:
        return self.n + 4

    @property
    def labels(self) -> tuple[str, ...]:
        return CORE_LABELS + tuple(f"x{k}" for k in range(1, self.n + 1))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no state {label!r} in a space with n={self.n}") from None

    def basis(self, label: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index(label)] = 1.0
        return vec


def _unit_phase(phase: float) -> complex:
    # Exact values at multiples of pi/2 so that xi = +-1 carries no 1e-16 residue.
    quarter = phase / (math.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < 1e-12:
        return (1, 1j, -1, -1j)[k % 4]
    return complex(math.cos(phase), math.sin(phase))


def loop_phase(params: SystemParams, h: Handedness) -> float:
    return params.phi_L + h.phase_offset


def xi(params: SystemParams, h: Handedness) -> int:
    """Handedness sign of the a-b coupling, defined only for phi_L in {0, pi}."""
    phase = math.remainder(loop_phase(params, h), TWO_PI)
    if abs(phase) < 1e-12:
        return 1
    if abs(abs(phase) - math.pi) < 1e-12:
        return -1
    raise UnsupportedPhase(
        f"dark-state analytics need phi_L in {{0, pi}}, got phi_L={params.phi_L!r}"
    )


def build_hamiltonian3(params: SystemParams, h: Handedness) -> np.ndarray:
    """Microwave-dressed three-level Hamiltonian embedded in the full space.

    Rows and columns of ``e`` and the leakage levels are zero.
    """
    dim = params.n + 4
    H = np.zeros((dim, dim), dtype=complex)
    H[C, C] = params.Delta
    H[A, A] = params.delta
    H[C, A] = params.omega_ca / 2
    H[C, B] = params.omega_cb / 2
    H[A, B] = _unit_phase(loop_phase(params, h)) * params.omega_ab / 2
    H[A, C] = np.conj(H[C, A])
    H[B, C] = np.conj(H[C, B])
    H[B, A] = np.conj(H[A, B])
    return H


def build_hamiltonian_full(params: SystemParams, h: Handedness) -> np.ndarray:
    """Three-level Hamiltonian plus the c-e laser coupling and e detuning."""
    H = build_hamiltonian3(params, h)
    H[E, E] = params.Delta_e
    H[C, E] = params.omega_ce / 2
    H[E, C] = params.omega_ce / 2
    return H


def coupling_norm(params: SystemParams) -> float:
    """Z = sqrt(omega_cb**2 + omega_ca**2)."""
    return math.hypot(params.omega_cb, params.omega_ca)


def dressed_states(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Return the dark and bright a-b superpositions ``(D, B)``.

    ``D`` has no matrix element to ``c``; ``B`` couples to ``c`` with ``Z/2``.
    Both vectors live in the full ``n + 4`` dimensional space.
    """
    Z = coupling_norm(params)
    if Z == 0.0:
        raise DegenerateCoupling("omega_ca and omega_cb are both zero")
    dim = params.n + 4
    D = np.zeros(dim, dtype=complex)
    Bv = np.zeros(dim, dtype=complex)
    D[A], D[B] = params.omega_cb / Z, -params.omega_ca / Z
    Bv[A], Bv[B] = params.omega_ca / Z, params.omega_cb / Z
    return D, Bv


def dressed_coupling(params: SystemParams, h: Handedness) -> float:
    """Closed-form <B|H3|D> in rad/us."""
    Z = coupling_norm(params)
    if Z == 0.0:
        raise DegenerateCoupling("omega_ca and omega_cb are both zero")
    sign = xi(params, h)
    oab, oca, ocb = params.omega_ab, params.omega_ca, params.omega_cb
    return (params.delta * ocb * oca + 0.5 * sign * oab * (ocb**2 - oca**2)) / Z**2


def delta0(params: SystemParams) -> float:
    """Two-photon detuning at which the D-B coupling cancels for one handedness.

    Returns 0 when ``omega_ca == omega_cb``; no discrimination is possible then.
    """
    if params.omega_ca == 0.0 or params.omega_cb == 0.0:
        raise DegenerateCoupling("delta0 needs omega_ca > 0 and omega_cb > 0")
    oab, oca, ocb = params.omega_ab, params.omega_ca, params.omega_cb
    return oab * (oca**2 - ocb**2) / (2 * ocb * oca)


def dark_state_residual(params: SystemParams, h: Handedness) -> float:
    """Distance of ``D`` from being an eigenvector of the three-level Hamiltonian.

    ``||H3 D - <D|H3|D> D||_2`` in rad/us; zero (to rounding) means ``D`` is a
    dark eigenstate for this handedness.
    """
    D, _ = dressed_states(params)
    H = build_hamiltonian3(params, h)
    HD = H @ D
    return float(np.linalg.norm(HD - np.vdot(D, HD) * D))
