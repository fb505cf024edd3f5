"""Command-line entry point: ``chiralpump {dark,evolve,steady,sweep,detect}``.

Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver error,
4 detection failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import MHZ, RunConfig, SweepSpec, load_config
from .dynamics import initial_state, populations, propagate, steady_state
from .errors import (
    ConfigError,
    DegenerateCoupling,
    DetectionError,
    SolverError,
    UnsupportedPhase,
)
from .liouvillian import Liouvillian
from .model import (
    Handedness,
    coupling_norm,
    dark_state_residual,
    delta0,
    dressed_coupling,
    dressed_states,
)
from .presets import load_preset, preset_names

log = logging.getLogger("chiralpump")

EXIT_IO, EXIT_CONFIG, EXIT_SOLVER, EXIT_DETECTION = 1, 2, 3, 4
DARK_RESIDUAL_TOL = 1e-10

DEFAULT_SWEEPS = {
    "delta": SweepSpec("delta", [float(v) for v in np.linspace(-3.0, 3.0, 201)], "delta0"),
    "kappa": SweepSpec("kappa", [0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0], "kHz"),
    "n": SweepSpec("n", list(range(1, 16)), "count"),
    "delta_e": SweepSpec("delta_e", [-50.0, -25.0, 0.0, 25.0, 50.0], "MHz"),
}


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def render_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _emit(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _dest(cfg: RunConfig, args) -> str | None:
    return args.out or cfg.output_path


def _format(cfg: RunConfig, args, default="csv") -> str:
    return args.format or cfg.output_format or default


# -- commands -----------------------------------------------------------------

def dark_report(cfg: RunConfig) -> dict:
    p = cfg.params
    d0 = delta0(p)
    D, Bv = dressed_states(p)
    report = {
        "params": cfg.user_params,
        "delta0_MHz": d0 / MHZ,
        "delta0_rad_per_us": d0,
        "delta_MHz": p.delta / MHZ,
        "Z_MHz": coupling_norm(p) / MHZ,
        "dressed": {
            "D": {"a": float(D[1].real), "b": float(D[0].real)},
            "B": {"a": float(Bv[1].real), "b": float(Bv[0].real)},
        },
        "coupling_rad_per_us": {},
        "coupling_MHz": {},
        "residual_rad_per_us": {},
        "dark_state_for": [],
        "warnings": [],
    }
    for h in Handedness:
        g = dressed_coupling(p, h)
        res = dark_state_residual(p, h)
        report["coupling_rad_per_us"][h.value] = g
        report["coupling_MHz"][h.value] = g / MHZ
        report["residual_rad_per_us"][h.value] = res
        if res < DARK_RESIDUAL_TOL:
            report["dark_state_for"].append(h.value)
    if d0 == 0.0:
        report["warnings"].append(
            "delta0 = 0 (omega_ca == omega_cb or omega_ab == 0): enantiomer discrimination vanishes"
        )
    return report


def cmd_dark(cfg: RunConfig, args) -> int:
    report = dark_report(cfg)
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if _format(cfg, args, "text") == "json":
        _emit(render_json(report), _dest(cfg, args))
        return 0
    lines = [
        f"delta0     = {fmt(report['delta0_MHz'])} MHz ({fmt(report['delta0_rad_per_us'])} rad/us)",
        f"delta      = {fmt(report['delta_MHz'])} MHz",
        f"Z          = {fmt(report['Z_MHz'])} MHz",
        f"|D>        = {fmt(report['dressed']['D']['a'])} |a> + {fmt(report['dressed']['D']['b'])} |b>",
        f"|B>        = {fmt(report['dressed']['B']['a'])} |a> + {fmt(report['dressed']['B']['b'])} |b>",
    ]
    for h in ("L", "R"):
        lines.append(
            f"<B|H|D>_{h}  = {fmt(report['coupling_MHz'][h])} MHz "
            f"({fmt(report['coupling_rad_per_us'][h])} rad/us), "
            f"dark residual {fmt(report['residual_rad_per_us'][h])} rad/us"
        )
    lines.append(f"dark state : {', '.join(report['dark_state_for']) or 'none'}")
    _emit("\n".join(lines) + "\n", _dest(cfg, args))
    return 0


def cmd_evolve(cfg: RunConfig, args) -> int:
    p = cfg.params
    rho0 = initial_state(cfg.initial_state, p)
    states = cfg.states or p.space.labels
    header = ["t_us"]
    columns = []
    times = None
    for h in cfg.handedness:
        traj = propagate(Liouvillian.from_params(p, h), rho0, cfg.t_end_us,
                         dt_max=cfg.dt_max_us, samples=cfg.samples, params=p)
        times = traj.times
        labels = list(states) + (["D", "B"] if traj.dressed is not None else [])
        for label in labels:
            header.append(f"p_{label}_{h.value}")
            columns.append(traj.population(label))
    rows = [[t, *(col[k] for col in columns)] for k, t in enumerate(times)]
    if _format(cfg, args) == "json":
        _emit(render_json({name: [row[i] for row in rows] for i, name in enumerate(header)}),
              _dest(cfg, args))
    else:
        _emit(render_csv(header, rows), _dest(cfg, args))
    return 0


def cmd_steady(cfg: RunConfig, args) -> int:
    p = cfg.params
    rho0 = initial_state(cfg.initial_state, p) if p.kappa == 0 else None
    space = p.space
    records = []
    for h in cfg.handedness:
        ss = steady_state(Liouvillian.from_params(p, h), rho0)
        pops = populations(ss.rho, space, p)
        records.append({"handedness": h.value, "method": ss.method.value,
                        "residual": ss.residual, **{f"p_{k}": v for k, v in pops.items()}})
    if _format(cfg, args) == "json":
        payload = {"states": records}
        if len(records) == 2:
            for s in ("a", "b"):
                left, right = records[0][f"p_{s}"], records[1][f"p_{s}"]
                payload[f"ratio_{s}"] = left / right if right else None
                payload[f"purity_{s}"] = analysis.purity(left, right)
        _emit(render_json(payload), _dest(cfg, args))
    else:
        header = list(records[0])
        _emit(render_csv(header, [[r[k] for k in header] for r in records]), _dest(cfg, args))
    return 0


def _sweep_spec(cfg: RunConfig, axis: str | None) -> SweepSpec:
    if cfg.sweep is not None and (axis is None or cfg.sweep.axis == axis):
        return cfg.sweep
    if axis is None:
        raise ConfigError(f"{cfg.source}: no sweep section; pass --axis")
    return DEFAULT_SWEEPS[axis]


def _run_sweep(cfg: RunConfig, spec: SweepSpec, jobs) -> analysis.SweepResult:
    p = cfg.params
    if spec.axis != "kappa" and p.kappa <= 0:
        raise ConfigError(f"{cfg.source}: steady-state sweeps need kappa_khz > 0")
    values = spec.internal_values(p)
    return analysis.sweep(p, spec.axis, values, handedness=cfg.handedness, jobs=jobs)


def cmd_sweep(cfg: RunConfig, args) -> int:
    spec = _sweep_spec(cfg, args.axis)
    result = _run_sweep(cfg, spec, args.jobs)
    cols = result.columns()
    header = [spec.column, *cols]
    rows = [[v, *(c[k] for c in cols.values())] for k, v in enumerate(spec.user_values)]
    if _format(cfg, args) == "json":
        _emit(render_json({name: [row[i] for row in rows] for i, name in enumerate(header)}),
              _dest(cfg, args))
    else:
        _emit(render_csv(header, rows), _dest(cfg, args))
    return 0


def cmd_detect(cfg: RunConfig, args) -> int:
    p = cfg.params
    if cfg.f_L is None:
        raise ConfigError(f"{cfg.source}: detect needs mixture.f_L")
    spec = _sweep_spec(cfg, "delta")
    if set(cfg.handedness) != set(Handedness):
        raise ConfigError(f"{cfg.source}: detect needs handedness: both")
    result = _run_sweep(cfg, spec, args.jobs)
    d0 = delta0(p)
    min_sep = cfg.min_separation_mhz * MHZ if cfg.min_separation_mhz else abs(d0)
    curve = analysis.mixture_curve(analysis.MixtureSpec(cfg.f_L), result, result, cfg.observable)
    report = analysis.estimate_fractions(curve, min_sep, p.phi_L)
    try:
        table = analysis.calibration_table(result, min_sep, state=cfg.observable, phi_L=p.phi_L)
        report.calibration = table
        report.max_abs_bias = max(abs(r["bias"]) for r in table)
    except DetectionError as exc:
        log.warning("calibration table unavailable: %s", exc)
    payload = {"f_L_true": cfg.f_L, "delta0_MHz": d0 / MHZ, **report.to_dict(MHZ, "MHz")}
    dest = _dest(cfg, args)
    if _format(cfg, args) == "json":
        _emit(render_json(payload), dest)
        return 0
    obs = cfg.observable
    header = [spec.column, f"P_{obs}_mix", f"P_{obs}_L", f"P_{obs}_R"]
    rows = zip(spec.user_values, curve.values, result.P(obs, "L"), result.P(obs, "R"))
    _emit(render_csv(header, rows), dest)
    if dest and dest != "-":
        Path(dest).with_suffix(".report.json").write_text(render_json(payload), encoding="utf-8")
    else:
        print(f"f_L_hat = {fmt(report.f_L)}, f_R_hat = {fmt(report.f_R)}", file=sys.stderr)
    return 0


COMMANDS = {
    "dark": cmd_dark,
    "evolve": cmd_evolve,
    "steady": cmd_steady,
    "sweep": cmd_sweep,
    "detect": cmd_detect,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralpump",
        description="Enantiomer-specific pumping of cyclic three-level chiral molecules.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "dark": "dark-state condition, dressed couplings and residuals",
        "evolve": "population time traces (CSV)",
        "steady": "steady-state populations",
        "sweep": "steady-state populations along one parameter axis",
        "detect": "two-peak enantiodetection on a simulated mixture",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="YAML run configuration")
        src.add_argument("--preset", choices=preset_names(), help="shipped configuration")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes for sweeps (default: all processors)")
        if name == "sweep":
            sp.add_argument("--axis", choices=sorted(DEFAULT_SWEEPS))
        else:
            sp.set_defaults(axis=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else load_preset(args.preset)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UnsupportedPhase, DegenerateCoupling) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DetectionError as exc:
        print(f"detection failed: {exc}", file=sys.stderr)
        return EXIT_DETECTION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
