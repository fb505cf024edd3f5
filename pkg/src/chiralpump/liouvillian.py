"""Master-equation generator: coherent part, spontaneous decay of e, collisions.

    drho/dt = -i[H', rho] + L[rho] + D[rho]

``L`` is the Lindblad dissipator of the n + 3 equal-branch decay channels
``|s><e|`` (s = c, a, b, x_1..x_n), each at rate gamma / (n + 3).  ``D`` relaxes
toward the maximally mixed state at rate kappa.

Superoperator matrices use column-stacking: ``vec(rho) = rho.reshape(-1, order="F")``
and ``vec(A rho B) = kron(B.T, A) @ vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapExceeded, DimensionMismatch, InvalidState
from .model import A, B, C, E, Handedness, SystemParams, build_hamiltonian_full

DEFAULT_MATRIX_CAP = 10_000


@dataclass(frozen=True)
class JumpOperator:
    """Quantum jump ``|to><from|`` at ``rate`` [rad/us]."""

    from_index: int
    to_index: int
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"jump rate must be >= 0, got {self.rate}")

    def matrix(self, dim: int) -> np.ndarray:
        op = np.zeros((dim, dim), dtype=complex)
        op[self.to_index, self.from_index] = 1.0
        return op


def build_jump_set(params: SystemParams) -> list[JumpOperator]:
    """Decay channels of ``|e>`` into c, a, b and every leakage level."""
    targets = [C, A, B] + [E + k for k in range(1, params.n + 1)]
    rate = params.gamma / (params.n + 3)
    return [JumpOperator(E, s, rate) for s in targets]


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def check_density_matrix(rho, dim: int | None = None, *, herm_tol=1e-10,
                         trace_tol=1e-9, eig_tol=1e-8) -> np.ndarray:
    """Validate and return ``rho`` as a complex square array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidState(f"density matrix must be square, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise DimensionMismatch(f"state has dimension {rho.shape[0]}, expected {dim}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvalidState("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise InvalidState(f"density matrix trace is {np.trace(rho).real:.3g}, not 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -eig_tol:
        raise InvalidState("density matrix has a negative eigenvalue")
    return rho


def dissipator_action(rho: np.ndarray, jumps) -> np.ndarray:
    """Sum of ``rate * (2 o rho o^+ - o^+ o rho - rho o^+ o) / 2`` over the jumps.

    Uses the rank-one structure of ``o = |s><f|``: the jump feeds
    ``rate * rho_ff`` into ``(s, s)`` and damps row and column ``f`` by
    ``rate / 2``.
    """
    rho = np.asarray(rho)
    out = np.zeros(rho.shape, dtype=complex)
    for jump in jumps:
        f, s, r = jump.from_index, jump.to_index, jump.rate
        if r == 0.0:
            continue
        out[s, s] += r * rho[f, f]
        out[f, :] -= 0.5 * r * rho[f, :]
        out[:, f] -= 0.5 * r * rho[:, f]
    return out


def collision_action(rho: np.ndarray, kappa: float, dim: int | None = None) -> np.ndarray:
    """``kappa * (tr(rho) I / d - rho)``.

    The trace factor is 1 for physical states; keeping it makes the map linear
    and trace-annihilating on all Hermitian inputs.
    """
    rho = np.asarray(rho)
    dim = rho.shape[0] if dim is None else dim
    if kappa == 0.0:
        return np.zeros(rho.shape, dtype=complex)
    return kappa * (np.trace(rho) * np.eye(dim) / dim - rho)


@dataclass(frozen=True, eq=False)
class Liouvillian:
    hamiltonian: np.ndarray
    jumps: tuple[JumpOperator, ...]
    kappa: float
    dim: int

    def __post_init__(self):
        H = np.array(self.hamiltonian, dtype=complex)
        H.setflags(write=False)
        object.__setattr__(self, "hamiltonian", H)
        if H.shape != (self.dim, self.dim):
            raise DimensionMismatch("Hamiltonian shape does not match dim")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        object.__setattr__(self, "jumps", tuple(self.jumps))

    @classmethod
    def from_params(cls, params: SystemParams, h: Handedness) -> Liouvillian:
        return cls(
            hamiltonian=build_hamiltonian_full(params, h),
            jumps=tuple(build_jump_set(params)),
            kappa=params.kappa,
            dim=params.n + 4,
        )

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_rhs(self, rho)

    @cached_property
    def matrix(self) -> np.ndarray:
        return assemble_matrix(self)

    @cached_property
    def rate_scale(self) -> float:
        """Spectral norm of the superoperator; bounds every rate in the problem."""
        return float(np.linalg.norm(self.matrix, 2))


def apply_rhs(liou: Liouvillian, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (liou.dim, liou.dim):
        raise DimensionMismatch(
            f"state has shape {rho.shape}, generator acts on dimension {liou.dim}"
        )
    H = liou.hamiltonian
    out = -1j * (H @ rho - rho @ H)
    out += dissipator_action(rho, liou.jumps)
    out += collision_action(rho, liou.kappa, liou.dim)
    return out


def assemble_matrix(liou: Liouvillian, cap: int = DEFAULT_MATRIX_CAP) -> np.ndarray:
    """Explicit ``d^2 x d^2`` generator acting on column-stacked states."""
    d = liou.dim
    if d * d > cap:
        raise CapExceeded(f"superoperator side {d * d} exceeds cap {cap}")
    eye = np.eye(d)
    H = liou.hamiltonian
    M = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for jump in liou.jumps:
        if jump.rate == 0.0:
            continue
        o = jump.matrix(d)
        odo = o.conj().T @ o
        M += jump.rate * (
            np.kron(o.conj(), o) - 0.5 * np.kron(eye, odo) - 0.5 * np.kron(odo.T, eye)
        )
    if liou.kappa:
        vid = vec(eye)
        M += liou.kappa * (np.outer(vid, vid) / d - np.eye(d * d))
    return M
