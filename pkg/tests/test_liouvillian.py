import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralpump.errors import CapExceeded, DimensionMismatch, InvalidState
from chiralpump.liouvillian import (
    JumpOperator,
    Liouvillian,
    apply_rhs,
    assemble_matrix,
    build_jump_set,
    check_density_matrix,
    collision_action,
    dissipator_action,
    unvec,
    vec,
)
from chiralpump.model import Handedness, SystemParams

from conftest import TWO_PI, fig2_params, random_density_matrix, random_hermitian


def lindblad_term(o, rho):
    """Textbook Lindblad form with explicit operator products."""
    od = o.conj().T
    return (2 * o @ rho @ od - od @ o @ rho - rho @ od @ o) / 2


def test_jump_set_counts_and_rates():
    jumps = build_jump_set(SystemParams(gamma=8.0, n=1))
    assert len(jumps) == 4
    assert all(j.rate == 2.0 and j.from_index == 3 for j in jumps)
    assert sorted(j.to_index for j in jumps) == [0, 1, 2, 4]


def test_jump_set_without_decay():
    jumps = build_jump_set(SystemParams(gamma=0.0, n=1))
    assert len(jumps) == 4 and all(j.rate == 0.0 for j in jumps)


def test_jump_rates_sum_to_gamma():
    gamma = TWO_PI * 10
    jumps = build_jump_set(SystemParams(gamma=gamma, n=15))
    assert len(jumps) == 18
    assert abs(sum(j.rate for j in jumps) - gamma) < 1e-12


def test_jump_rate_must_be_non_negative():
    with pytest.raises(ValueError):
        JumpOperator(3, 0, -1.0)


def test_dissipator_vanishes_without_excited_population(rng):
    rho = random_density_matrix(rng, 5)
    rho[3, :] = 0
    rho[:, 3] = 0
    rho /= np.trace(rho)
    out = dissipator_action(rho, build_jump_set(SystemParams(gamma=5.0, n=1)))
    assert np.all(out == 0)


def test_dissipator_on_excited_state():
    gamma = TWO_PI * 10
    rho = np.zeros((5, 5), dtype=complex)
    rho[3, 3] = 1
    out = dissipator_action(rho, build_jump_set(SystemParams(gamma=gamma, n=1)))
    q = gamma / 4
    assert np.allclose(np.diag(out).real, [q, q, q, -gamma, q], atol=1e-14)
    assert np.allclose(out - np.diag(np.diag(out)), 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_dissipator_matches_explicit_operator_products(seed, n):
    rng = np.random.default_rng(seed)
    d = n + 4
    jumps = build_jump_set(SystemParams(gamma=rng.uniform(0, 100), n=n))
    rho = random_hermitian(rng, d)
    expected = sum(j.rate * lindblad_term(j.matrix(d), rho) for j in jumps)
    out = dissipator_action(rho, jumps)
    assert np.max(np.abs(out - expected)) < 1e-11
    assert abs(np.trace(out)) < 1e-10


def test_collision_fixed_point_and_zero_rate(rng):
    assert np.allclose(collision_action(np.eye(5) / 5, 3.0, 5), 0)
    assert np.all(collision_action(random_density_matrix(rng, 5), 0.0, 5) == 0)


def test_collision_on_pure_state():
    kappa = TWO_PI * 0.001
    rho = np.zeros((5, 5))
    rho[1, 1] = 1
    out = collision_action(rho, kappa, 5)
    assert np.allclose(np.diag(out), [kappa / 5, -4 * kappa / 5, kappa / 5, kappa / 5, kappa / 5],
                       atol=1e-16)


def test_zero_generator():
    lv = Liouvillian.from_params(SystemParams(n=1), Handedness.LEFT)
    rho = random_density_matrix(np.random.default_rng(0), 5)
    assert np.all(apply_rhs(lv, rho) == 0)


def test_dimension_mismatch():
    lv = Liouvillian.from_params(SystemParams(n=1), Handedness.LEFT)
    with pytest.raises(DimensionMismatch):
        apply_rhs(lv, np.eye(4) / 4)


@st.composite
def generators(draw):
    f = st.floats(0, TWO_PI * 30)
    p = SystemParams(
        omega_ab=draw(f), omega_ca=draw(f), omega_cb=draw(f), omega_ce=draw(f),
        phi_L=draw(st.floats(-4, 4)), delta=draw(st.floats(-100, 100)),
        Delta=draw(st.floats(-100, 100)), Delta_e=draw(st.floats(-100, 100)),
        gamma=draw(f), kappa=draw(st.floats(0, 10)), n=draw(st.integers(0, 6)),
    )
    h = draw(st.sampled_from(list(Handedness)))
    return Liouvillian.from_params(p, h)


@settings(max_examples=60, deadline=None)
@given(generators(), st.integers(0, 2**32 - 1))
def test_rhs_is_hermitian_and_traceless(lv, seed):
    rng = np.random.default_rng(seed)
    for rho in (random_hermitian(rng, lv.dim), random_density_matrix(rng, lv.dim)):
        out = apply_rhs(lv, rho)
        assert np.max(np.abs(out - out.conj().T)) < 1e-12 * max(1.0, np.abs(out).max())
        assert abs(np.trace(out)) < 1e-9 * max(1.0, np.abs(rho).max()) * max(1.0, lv.rate_scale)


def test_physical_state_rhs_trace_below_1e10(rng):
    lv = Liouvillian.from_params(fig2_params(kappa_khz=1.0), Handedness.RIGHT)
    for _ in range(10):
        assert abs(np.trace(apply_rhs(lv, random_density_matrix(rng, 5)))) < 1e-10


@settings(max_examples=40, deadline=None)
@given(generators(), st.integers(0, 2**32 - 1))
def test_assembled_matrix_matches_matrix_free(lv, seed):
    rng = np.random.default_rng(seed)
    M = assemble_matrix(lv)
    for _ in range(10):
        rho = random_hermitian(rng, lv.dim) + 1j * random_hermitian(rng, lv.dim)
        dev = np.max(np.abs(M @ vec(rho) - vec(apply_rhs(lv, rho))))
        assert dev < 1e-10 * max(1.0, lv.rate_scale)
    # vec(I)^T M = 0 is trace preservation in vectorised form
    assert np.max(np.abs(vec(np.eye(lv.dim)) @ M)) < 1e-9 * max(1.0, lv.rate_scale)


def test_vec_is_column_stacking():
    m = np.arange(9).reshape(3, 3)
    assert list(vec(m)) == [0, 3, 6, 1, 4, 7, 2, 5, 8]
    assert np.array_equal(unvec(vec(m), 3), m)


def test_matrix_cap():
    lv = Liouvillian.from_params(fig2_params(n=8), Handedness.LEFT)
    with pytest.raises(CapExceeded):
        assemble_matrix(lv, cap=100)
    assert assemble_matrix(lv).shape == (144, 144)


def test_null_space_is_one_dimensional_with_collisions():
    lv = Liouvillian.from_params(fig2_params(kappa_khz=1.0), Handedness.LEFT)
    sv = np.linalg.svd(lv.matrix, compute_uv=False)
    small = sv < 1e-10 * sv[0]
    assert small.sum() == 1 and small[-1]


def test_check_density_matrix():
    good = np.diag([0.5, 0.5, 0, 0, 0])
    assert check_density_matrix(good, 5).dtype == complex
    with pytest.raises(InvalidState):
        check_density_matrix(np.diag([1.0, 1.0, 0, 0, 0]))
    with pytest.raises(InvalidState):
        check_density_matrix(np.diag([1.5, -0.5, 0, 0, 0]))
    bad = good.astype(complex)
    bad[0, 1] = 0.1
    with pytest.raises(InvalidState):
        check_density_matrix(bad)
    with pytest.raises(DimensionMismatch):
        check_density_matrix(good, 6)


def test_liouvillian_is_immutable():
    lv = Liouvillian.from_params(fig2_params(), Handedness.LEFT)
    with pytest.raises(ValueError):
        lv.hamiltonian[0, 0] = 1.0
    with pytest.raises(AttributeError):
        lv.kappa = 2.0
