"""Enantiomer-specific pumping of cyclic three-level chiral molecules.

Build the handedness-dependent Hamiltonians, evolve the Lindblad master
equation with spontaneous decay and collisional relaxation, extract steady
states and estimate enantiomer fractions from two-peak detuning scans.
"""

from .analysis import (
    DetectionReport,
    MixtureSpec,
    SweepResult,
    estimate_fractions,
    mixture_curve,
    purity,
    sweep_delta,
    sweep_delta_e,
    sweep_kappa,
    sweep_n,
)
from .dynamics import SteadyState, Trajectory, initial_state, populations, propagate, steady_state
from .liouvillian import Liouvillian, apply_rhs, assemble_matrix, build_jump_set
from .model import (
    Handedness,
    HilbertSpace,
    SystemParams,
    build_hamiltonian3,
    build_hamiltonian_full,
    dark_state_residual,
    delta0,
    dressed_coupling,
    dressed_states,
)

__version__ = "0.1.0"

__all__ = [
    "DetectionReport", "MixtureSpec", "SweepResult", "estimate_fractions", "mixture_curve",
    "purity", "sweep_delta", "sweep_delta_e", "sweep_kappa", "sweep_n",
    "SteadyState", "Trajectory", "initial_state", "populations", "propagate", "steady_state",
    "Liouvillian", "apply_rhs", "assemble_matrix", "build_jump_set",
    "Handedness", "HilbertSpace", "SystemParams", "build_hamiltonian3", "build_hamiltonian_full",
    "dark_state_residual", "delta0", "dressed_coupling", "dressed_states",
]
