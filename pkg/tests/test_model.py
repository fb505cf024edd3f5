import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralpump.errors import DegenerateCoupling, InvalidParameters, UnsupportedPhase
from chiralpump.model import (
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

from conftest import TWO_PI, fig2_params

L, R = Handedness.LEFT, Handedness.RIGHT
A, B, C, E = 1, 0, 2, 3

rate = st.floats(min_value=0.0, max_value=TWO_PI * 40, allow_nan=False)
positive = st.floats(min_value=0.1, max_value=TWO_PI * 40, allow_nan=False)
detuning = st.floats(min_value=-TWO_PI * 40, max_value=TWO_PI * 40, allow_nan=False)


@st.composite
def params(draw, phase=None):
    return SystemParams(
        omega_ab=draw(rate), omega_ca=draw(positive), omega_cb=draw(positive),
        omega_ce=draw(rate),
        phi_L=draw(st.floats(-10, 10)) if phase is None else phase,
        delta=draw(detuning), Delta=draw(detuning), Delta_e=draw(detuning),
        gamma=draw(rate), kappa=draw(rate), n=draw(st.integers(0, 5)),
    )


def test_hilbert_space_layout():
    space = HilbertSpace(3)
    assert space.dim == 7
    assert space.labels == ("b", "a", "c", "e", "x1", "x2", "x3")
    assert [space.index(s) for s in space.labels] == list(range(7))
    with pytest.raises(KeyError):
        space.index("x4")


@pytest.mark.parametrize("field", ["omega_ab", "omega_ca", "omega_cb", "omega_ce", "gamma", "kappa"])
def test_negative_rates_rejected(field):
    with pytest.raises(InvalidParameters):
        SystemParams(**{field: -1.0})


def test_bad_leakage_count_rejected():
    with pytest.raises(InvalidParameters):
        SystemParams(n=-1)
    with pytest.raises(InvalidParameters):
        SystemParams(n=1.5)


def test_all_couplings_off_gives_zero_matrix():
    assert np.all(build_hamiltonian3(SystemParams(n=2), L) == 0)


def test_ab_element_sign_follows_handedness():
    p = fig2_params()
    assert build_hamiltonian3(p, L)[A, B] == p.omega_ab / 2
    assert build_hamiltonian3(p, R)[A, B] == -p.omega_ab / 2


def test_three_level_block_is_traceless_and_hermitian():
    p = fig2_params(delta=0.0)
    H = build_hamiltonian3(p, L)
    assert np.array_equal(H, H.conj().T)
    assert abs(np.linalg.eigvalsh(H).sum()) < 1e-12


def test_full_hamiltonian_laser_terms():
    p = fig2_params(Delta_e=TWO_PI * 3)
    H3 = build_hamiltonian3(p, L)
    H = build_hamiltonian_full(p, L)
    assert H[C, E] == p.omega_ce / 2 and H[E, C] == p.omega_ce / 2
    assert H[E, E] == p.Delta_e
    assert np.array_equal(np.delete(np.delete(H, E, 0), E, 1), np.delete(np.delete(H3, E, 0), E, 1))


def test_full_hamiltonian_equals_three_level_with_laser_off():
    p = fig2_params(omega_ce=0.0)
    assert np.array_equal(build_hamiltonian_full(p, R), build_hamiltonian3(p, R))


@settings(max_examples=60, deadline=None)
@given(params())
def test_hamiltonians_are_hermitian(p):
    for h in Handedness:
        for H in (build_hamiltonian3(p, h), build_hamiltonian_full(p, h)):
            assert np.max(np.abs(H - H.conj().T)) < 1e-14
            x = H[4:, :]
            assert not np.any(x)


@settings(max_examples=60, deadline=None)
@given(params())
def test_gauge_swap_is_exact(p):
    swapped = p.replace(phi_L=p.phi_L + math.pi)
    assert np.array_equal(build_hamiltonian3(swapped, L), build_hamiltonian3(p, R))


def test_dressed_states_symmetric_case():
    D, Bv = dressed_states(SystemParams(omega_ca=3.0, omega_cb=3.0))
    s = 1 / math.sqrt(2)
    assert np.allclose(D[:2], [-s, s]) and np.allclose(Bv[:2], [s, s])


def test_dressed_state_coefficients():
    p = fig2_params()
    D, _ = dressed_states(p)
    # Z = 2 pi sqrt(136); coefficients 6/sqrt(136) and -10/sqrt(136)
    assert D[A].real == pytest.approx(6 / math.sqrt(136), abs=1e-14)
    assert D[B].real == pytest.approx(-10 / math.sqrt(136), abs=1e-14)
    assert D[A].real == pytest.approx(0.5145, abs=1e-4)
    assert D[B].real == pytest.approx(-0.8575, abs=1e-4)


def test_dressed_states_need_a_coupling():
    with pytest.raises(DegenerateCoupling):
        dressed_states(SystemParams(omega_ab=1.0))


@settings(max_examples=60, deadline=None)
@given(params())
def test_dressed_basis_properties(p):
    D, Bv = dressed_states(p)
    Z = math.hypot(p.omega_ca, p.omega_cb)
    assert abs(np.vdot(D, D) - 1) < 1e-12
    assert abs(np.vdot(Bv, Bv) - 1) < 1e-12
    assert abs(np.vdot(D, Bv)) < 1e-12
    assert not np.any(D[2:]) and not np.any(Bv[2:])
    for h in Handedness:
        H = build_hamiltonian3(p, h)
        cvec = np.zeros(p.n + 4)
        cvec[C] = 1
        assert abs(cvec @ H @ D) < 1e-10
        assert abs(cvec @ H @ Bv - Z / 2) < 1e-10


def test_delta0_value():
    p = fig2_params()
    # 10 * (100 - 36) / (2 * 6 * 10) = 16/3 in MHz units
    assert delta0(p) == pytest.approx(TWO_PI * 16 / 3, rel=1e-14)


def test_delta0_edge_cases():
    assert delta0(SystemParams(omega_ab=5.0, omega_ca=2.0, omega_cb=2.0)) == 0.0
    assert delta0(SystemParams(omega_ab=0.0, omega_ca=2.0, omega_cb=1.0)) == 0.0
    with pytest.raises(DegenerateCoupling):
        delta0(SystemParams(omega_ab=1.0, omega_ca=1.0, omega_cb=0.0))


def test_dressed_coupling_at_dark_condition():
    p = fig2_params()
    assert dressed_coupling(p, L) == pytest.approx(0.0, abs=1e-12)
    assert dressed_coupling(p, R) == pytest.approx(TWO_PI * 640 / 136, rel=1e-12)


def test_dressed_coupling_vanishes_symmetric_resonant():
    p = SystemParams(omega_ab=4.0, omega_ca=3.0, omega_cb=3.0, delta=0.0)
    assert dressed_coupling(p, L) == 0.0 and dressed_coupling(p, R) == 0.0


@settings(max_examples=60, deadline=None)
@given(params(phase=0.0), st.booleans())
def test_dressed_coupling_matches_matrix_element(p, flip):
    if flip:
        p = p.replace(phi_L=math.pi)
    D, Bv = dressed_states(p)
    for h in Handedness:
        element = np.vdot(Bv, build_hamiltonian3(p, h) @ D)
        assert abs(element.imag) < 1e-10
        assert abs(element.real - dressed_coupling(p, h)) < 1e-10


def test_dressed_coupling_rejects_general_phase():
    with pytest.raises(UnsupportedPhase):
        dressed_coupling(fig2_params(phi_L=0.3), L)


def test_dark_state_residuals():
    p = fig2_params()
    assert dark_state_residual(p, L) < 1e-10
    assert dark_state_residual(p, R) == pytest.approx(TWO_PI * 640 / 136, rel=1e-12)


def test_dark_state_moves_to_right_handed_molecule_when_phase_is_pi():
    p = fig2_params(phi_L=math.pi)
    assert dark_state_residual(p, R) < 1e-10
    assert dark_state_residual(p, L) > 1.0


@settings(max_examples=60, deadline=None)
@given(positive, positive, positive)
def test_dark_state_exclusivity(oab, oca, ocb):
    if abs(oca - ocb) < 1e-3:
        return
    p = SystemParams(omega_ab=oab, omega_ca=oca, omega_cb=ocb).at_dark_condition()
    Z2 = oca**2 + ocb**2
    assert dark_state_residual(p, L) < 1e-10
    assert dark_state_residual(p, R) > 0.1 * oab / Z2 * abs(oca**2 - ocb**2)
