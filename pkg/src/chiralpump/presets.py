"""Shipped run configurations for the published figures.

Every preset is a plain mapping in the same schema as a user config file and
goes through the same validation.
"""

from __future__ import annotations

import copy

from .config import RunConfig, parse_config
from .errors import ConfigError

FIG2_PARAMS = {
    "omega_ab": 10.0,
    "omega_ca": 10.0,
    "omega_cb": 6.0,
    "omega_ce": 20.0,
    "gamma": 10.0,
    "kappa_khz": 0.0,
    "delta": "delta0",
    "Delta": 0.0,
    "Delta_e": 0.0,
    "phi_L": 0.0,
    "n": 1,
}

# Rotational constants of 1-indanol [MHz] and the J <= 1 levels used for a, b, c.
INDANOL_META = {
    "molecule": "1-indanol",
    "rotational_constants_mhz": {"A": 2410.071, "B": 1231.257, "C": 846.356},
    "states": {
        "b": "|0_{0,0,0}>",
        "a": "|1_{0,1,0}>",
        "c": "(|1_{1,0,1}> + |1_{1,0,-1}>)/sqrt(2)",
    },
    "level_differences_mhz": {"E_c-E_b": 3641.328, "E_a-E_b": 2077.613, "E_c-E_a": 1563.715},
    "note": "documentation only; the simulation uses detunings, not level energies",
}


def indanol_level_differences(A: float, B: float, C: float) -> dict[str, float]:
    """Level spacings of the asymmetric-rotor states used for b, a, c.

    For J = 1 the rigid-rotor energies are exact: E(1_01) = B + C and
    E(1_10) = A + B above the ground level 0_00.
    """
    e_a = B + C
    e_c = A + B
    return {"E_c-E_b": e_c, "E_a-E_b": e_a, "E_c-E_a": e_c - e_a}


def _fig2(kappa_khz: float, initial_state: str, provenance: str) -> dict:
    params = dict(FIG2_PARAMS, kappa_khz=kappa_khz)
    return {
        "params": params,
        "initial_state": initial_state,
        "handedness": "both",
        "evolve": {"t_end_us": 5.0, "samples": 500, "states": ["a", "b"]},
        "provenance": provenance,
    }


PRESETS: dict[str, dict] = {
    "fig2a": _fig2(0.0, "uniform-abc", "Fig. 2(a): kappa = 0, rho(0) = (|a><a| + |b><b| + |c><c|)/3."),
    "fig2b": _fig2(1.0, "uniform-abc", "Fig. 2(b): kappa = 2pi x 1 kHz, rho(0) = (|a><a| + |b><b| + |c><c|)/3."),
    "fig2c": _fig2(0.0, "uniform-ab", "Fig. 2(c): kappa = 0, rho(0) = (|a><a| + |b><b|)/2."),
    "fig2d": _fig2(1.0, "uniform-ab", "Fig. 2(d): kappa = 2pi x 1 kHz, rho(0) = (|a><a| + |b><b|)/2."),
    "fig2e": {
        "params": dict(FIG2_PARAMS, kappa_khz=1.0),
        "sweep": {"axis": "kappa", "unit": "kHz",
                  "values": [0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0]},
        "provenance": "Fig. 2(e): steady-state ratios versus kappa, n = 1. "
                      "The kappa grid is a choice; the figure's exact sampling is not given.",
    },
    "fig2f": {
        "params": dict(FIG2_PARAMS, kappa_khz=1.0),
        "sweep": {"axis": "n", "min": 1, "max": 15, "points": 15},
        "provenance": "Fig. 2(f): steady-state ratios versus n = 1..15 at kappa = 2pi x 1 kHz.",
    },
    "fig3": {
        "params": dict(FIG2_PARAMS, kappa_khz=1.0),
        "sweep": {"axis": "delta", "unit": "delta0", "min": -3.0, "max": 3.0, "points": 201},
        "mixture": {"f_L": 0.5, "observable": "a"},
        "provenance": "Fig. 3: steady populations versus delta at kappa = 2pi x 1 kHz, n = 1. "
                      "The grid [-3 delta0, 3 delta0] with 201 points is a choice; "
                      "the figure's range is not stated.",
    },
    "indanol-meta": {
        "params": dict(FIG2_PARAMS, kappa_khz=1.0),
        "meta": INDANOL_META,
        "provenance": "Fig. 2 control parameters with the 1-indanol level assignment attached "
                      "as metadata. Rotational physics and polarisation geometry are not simulated.",
    },
}


def preset_names() -> list[str]:
    return list(PRESETS)


def preset_mapping(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def load_preset(name: str) -> RunConfig:
    return parse_config(preset_mapping(name), source=f"preset:{name}")
