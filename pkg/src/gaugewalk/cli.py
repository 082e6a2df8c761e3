"""Command-line harness: simulate, check, and converge subcommands.

Exit codes: 0 success (all checks pass), 1 configuration or validation
error, 2 check failure, 3 runtime error.  Outputs are plain CSV with floats
at 17 significant digits, byte-identical for identical config and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import checks as checks_mod
from .config import RunConfig, load_config
from .dirac import ConvergenceCase, convergence_study
from .errors import GaugewalkError, ValidationError
from .evolution import evolve
from .gauge import sample_phases, GaugePhases
from .lattice import state_norm
from .observables import continuity_residual, current_1d, current_x, current_y, m_set, probability_density

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CHECK_FAILED = 2
EXIT_RUNTIME = 3


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _write_rows(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _out_dir(config: RunConfig, args) -> Path:
    out = args.out or config.out_dir or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _state_time(config: RunConfig, j: int) -> float:
    return j * config.spacing if config.dimension == 1 else j * config.spacing / 2


def run_simulate(config: RunConfig, out_dir: Path, quiet: bool) -> int:
    geom = config.geom()
    params = config.params()
    n_steps = config.n_steps
    psi0 = config.initial_walker()
    if n_steps > 0:
        phases = sample_phases(config.potential_spec(), geom, n_steps)
    else:
        phases = GaugePhases.zeros(geom, 1)
    traj = evolve(psi0, n_steps, phases, params)

    series_rows = []
    for state in traj:
        norm = state_norm(state)
        series_rows.append(
            (
                str(state.time_index),
                _fmt(_state_time(config, state.time_index)),
                _fmt(norm),
                _fmt(norm * norm),
            )
        )
    _write_rows(out_dir / "series.csv", "step,t,norm,total_probability", series_rows)

    obs_rows = []
    gap = 2 if config.dimension == 2 else 1
    x_phys = np.arange(geom.extent_x) * geom.spacing
    y_phys = np.arange(geom.extent_y) * geom.spacing
    for j in range(gap, n_steps - gap + 1):
        if (config.dimension == 2 and j % 2 != 0) or j + gap > n_steps:
            continue
        window = (traj[j - gap], traj[j], traj[j + gap])
        report = continuity_residual(window, phases, params)
        state = traj[j]
        t_str = _fmt(_state_time(config, j))
        j0 = probability_density(state)
        if config.dimension == 1:
            jx = current_1d(state, params.theta)
            for p in range(geom.extent_x):
                obs_rows.append(
                    (t_str, _fmt(x_phys[p]), _fmt(j0[p]), _fmt(jx[p]), _fmt(report.residual[p]))
                )
        else:
            ms = m_set(params.theta1, params.theta2)
            jx = current_x(state, phases, ms)
            jy = current_y(state, phases, ms)
            for p in range(geom.extent_x):
                for iy in range(geom.extent_y):
                    obs_rows.append(
                        (
                            t_str,
                            _fmt(x_phys[p]),
                            _fmt(y_phys[iy]),
                            _fmt(j0[p, iy]),
                            _fmt(jx[p, iy]),
                            _fmt(jy[p, iy]),
                            _fmt(report.residual[p, iy]),
                        )
                    )
    header = "t,x,J0,Jx,residual" if config.dimension == 1 else "t,x,y,J0,Jx,Jy,residual"
    _write_rows(out_dir / "observables.csv", header, obs_rows)

    final = traj[-1]
    state_rows = []
    if config.dimension == 1:
        for p in range(geom.extent_x):
            a = final.amp[p]
            state_rows.append(
                (_fmt(x_phys[p]), _fmt(a[0].real), _fmt(a[0].imag), _fmt(a[1].real), _fmt(a[1].imag))
            )
        state_header = "x,re_R,im_R,re_L,im_L"
    else:
        for p in range(geom.extent_x):
            for iy in range(geom.extent_y):
                a = final.amp[p, iy]
                state_rows.append(
                    (
                        _fmt(x_phys[p]),
                        _fmt(y_phys[iy]),
                        _fmt(a[0].real),
                        _fmt(a[0].imag),
                        _fmt(a[1].real),
                        _fmt(a[1].imag),
                    )
                )
        state_header = "x,y,re_R,im_R,re_L,im_L"
    _write_rows(out_dir / "state_final.csv", state_header, state_rows)

    if not quiet:
        print(f"wrote {out_dir / 'series.csv'}")
        print(f"wrote {out_dir / 'observables.csv'}")
        print(f"wrote {out_dir / 'state_final.csv'}")
    return EXIT_OK


def run_check(config: RunConfig, out_dir: Path, quiet: bool) -> int:
    results = checks_mod.run_all_checks(config)
    report = {
        "pass": all(r.status != "fail" for r in results),
        "checks": [
            {
                "name": r.name,
                "status": r.status,
                "max_deviation": r.max_deviation,
                "tolerance": r.tolerance,
                "note": r.note,
            }
            for r in results
        ],
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    if not quiet:
        for r in results:
            print(r.line())
    return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


def _convergence_case(config: RunConfig) -> tuple[ConvergenceCase, list]:
    conv = config.convergence
    dim = config.dimension
    domain = conv.get("domain", 4.0 if dim == 1 else 2.0)
    final_time = conv.get("final_time", 1.0 if dim == 1 else 0.5)
    eps_list = conv.get("eps_list", [2.0**-k for k in range(4, 8)])
    spec = config.potential_spec()
    center = conv.get("packet_center", [domain / 2] * dim)
    width = conv.get("packet_width", domain / 12)
    momentum = conv.get("packet_momentum", [np.pi] * dim)
    case = ConvergenceCase(
        dimension=dim,
        domain=float(domain),
        final_time=float(final_time),
        mass=config.mass,
        charge=config.charge,
        a0=spec.a0,
        a1=spec.a1,
        a2=spec.a2 if dim == 2 else None,
        packet_center=tuple(center),
        packet_width=float(width),
        packet_momentum=tuple(momentum),
    )
    return case, list(eps_list)


def run_converge(config: RunConfig, out_dir: Path, quiet: bool) -> int:
    case, eps_list = _convergence_case(config)
    result = convergence_study(case, eps_list)
    rows = [(_fmt(e), _fmt(err)) for e, err in zip(result.eps, result.errors)]
    _write_rows(out_dir / "convergence.csv", "epsilon,l2_error", rows)
    (out_dir / "report.json").write_text(
        json.dumps({"slope": result.slope, "monotone": result.monotone}, indent=2) + "\n"
    )
    print(f"slope {result.slope:.4f}")
    if not result.monotone and not quiet:
        print("warning: error sequence is not monotone")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugewalk",
        description="Gauged discrete-time quantum walk simulator and check suite.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "run a walk and write state/observable CSV files"),
        ("check", "run the invariance check suite and write report.json"),
        ("converge", "run the walk-versus-reference convergence study"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (default: config out_dir or '.')")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ValidationError("--seed must be >= 0")
            config = replace(config, seed=args.seed)
        out_dir = _out_dir(config, args)
        if args.command == "simulate":
            return run_simulate(config, out_dir, args.quiet)
        if args.command == "check":
            return run_check(config, out_dir, args.quiet)
        return run_converge(config, out_dir, args.quiet)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GaugewalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
