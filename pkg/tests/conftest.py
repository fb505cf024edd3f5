import math

import numpy as np
import pytest

from chiralpump.model import SystemParams

TWO_PI = 2 * math.pi


def fig2_params(kappa_khz=0.0, n=1, **changes) -> SystemParams:
    """Control parameters shared by all panels of the pumping figure."""
    p = SystemParams(
        omega_ab=TWO_PI * 10,
        omega_ca=TWO_PI * 10,
        omega_cb=TWO_PI * 6,
        omega_ce=TWO_PI * 20,
        gamma=TWO_PI * 10,
        kappa=TWO_PI * kappa_khz * 1e-3,
        n=n,
    ).at_dark_condition()
    return p.replace(**changes) if changes else p


def random_density_matrix(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


@pytest.fixture
def fig2():
    return fig2_params


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Acceptance criteria register one line each here; printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
