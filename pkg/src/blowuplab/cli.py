"""Command-line front end: JSON configs in, CSV diagnostics out.

Subcommands: check | aux | exponents | scan | simulate | sweep.  Outputs
are deterministic (fixed quadrature orders, no randomness): identical
configs produce byte-identical CSV.  Exit codes: 0 success, 2 validation
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import auxcalc, exponents, functional, simulator
from .coeffs import DampingModel, Perturbation, ProblemSpec
from .quadrature import QuadratureNonconvergence

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Optional[str], header: list[str], rows: list[list], quiet: bool) -> None:
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        if not quiet:
            print(f"wrote {path}")
    else:
        sys.stdout.write(text)


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _damping_from_args(args, cfg: dict) -> DampingModel:
    block = cfg.get("damping")
    if block and args.damping is None:
        return DampingModel.from_dict(block)
    kind = args.damping or "constant"
    pert = None
    if args.perturbation:
        pert = Perturbation(args.perturbation, args.perturbation_exponent)
    return DampingModel(kind, args.mu, args.kappa, pert)


def _problem_from_args(args, cfg: dict) -> ProblemSpec:
    if cfg.get("spec"):
        return ProblemSpec.from_dict(cfg["spec"])
    return ProblemSpec(
        n=args.n, alpha=args.alpha, gamma=args.gamma, delta=args.delta,
        p=args.p, damping=_damping_from_args(args, cfg),
        c_a=args.c_a, c_f=args.c_f,
    )


def _threads() -> int:
    raw = os.environ.get("BLOWUPLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check(args) -> int:
    cfg = _load_config(args.config)
    model = _damping_from_args(args, cfg)
    report = auxcalc.check_hypothesis(model, args.horizon, margin=args.margin)
    rows = [
        ("liminf b'/b^2", report.liminf_est, "> -1", report.passes_liminf),
        ("limsup t b'/b", report.limsup_est, "< 1", report.passes_limsup),
    ]
    if not args.quiet:
        for name, value, target, ok in rows:
            print(f"{name:>16s} = {value: .6f}  (target {target})  "
                  f"{'PASS' if ok else 'FAIL'}")
        print(f"tail min of t*b(t) = {report.tb_liminf:.6f}")
        print(f"growth exponents m = {report.growth_m:.4f}, M = {report.growth_M:.4f}")
        print(f"(b^2+b')/b^2 in [{report.eps_lower:.4f}, {report.C_upper:.4f}]")
        if report.inconclusive:
            print("note: tail extrema still drifting; verdict inconclusive")
        if report.analytic is not None:
            print(f"closed-form admissibility: {report.analytic}")
    verdict = "PASS" if report.admissible else "FAIL"
    print(f"verdict: {verdict} (numerical evidence at horizon {args.horizon:g})")
    return EXIT_OK


def _cmd_aux(args) -> int:
    cfg = _load_config(args.config)
    model = _damping_from_args(args, cfg)
    table = auxcalc.build_aux_table(model, args.horizon)
    rows = [
        [t, B, beta, Gamma, g]
        for t, B, beta, Gamma, g in zip(
            table.grid, table.B_vals, table.beta_vals, table.Gamma_vals, table.g_vals
        )
    ]
    _write_csv(args.out, ["t", "B", "beta", "Gamma", "g"], rows, args.quiet)
    return EXIT_OK


def _cmd_exponents(args) -> int:
    cfg = _load_config(args.config)
    grid = cfg.get("grid")
    if grid is None:
        grid = [{"n": args.n, "alpha": args.alpha, "gamma": args.gamma, "delta": args.delta}]
    rows = []
    for entry in grid:
        n = int(entry["n"])
        report = exponents.p_crit_damped(
            n, float(entry.get("alpha", 0.0)),
            float(entry.get("gamma", 0.0)), float(entry.get("delta", 0.0)))
        classics = exponents.classic_exponents(n)
        rows.append([
            n, entry.get("alpha", 0.0), entry.get("gamma", 0.0), entry.get("delta", 0.0),
            report.p_min, report.p_crit, report.meaningful,
            classics.fujita, classics.kato, classics.strauss, classics.sobolev,
        ])
    header = ["n", "alpha", "gamma", "delta", "p_min", "p_crit", "meaningful",
              "fujita", "kato", "strauss", "sobolev"]
    _write_csv(args.out, header, rows, args.quiet)
    if not args.quiet and len(rows) == 1:
        print(f"p_C = {_fmt(rows[0][5])}, p_min = {_fmt(rows[0][4])}")
    return EXIT_OK


def _cmd_scan(args) -> int:
    cfg = _load_config(args.config)
    spec = _problem_from_args(args, cfg)
    R_list = cfg.get("R_list") or [float(x) for x in args.R.split(",")]
    result = functional.scan_condition(spec, R_list)
    rows = []
    for label in ("2e0", "e0", "2e_space"):
        for R, H, G, product in result.rows[label]:
            rows.append([label, R, H, G, product,
                         result.fitted[label], result.predicted[label],
                         result.verdicts[label]])
    header = ["alpha_tag", "R", "H", "G", "product",
              "log_slope_fitted", "log_slope_predicted", "verdict"]
    _write_csv(args.out, header, rows, args.quiet)
    print(f"overall verdict: {result.overall} ({result.note})")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if "r_max" in cfg:
        spec = simulator.SimSpec.from_dict(cfg)
    else:
        spec = simulator.SimSpec(
            problem=_problem_from_args(args, cfg),
            r_max=args.r_max, J=args.J, T_max=args.T_max, cfl=args.cfl,
            blowup_threshold=args.threshold,
            u0=simulator.GaussianData(args.u0_amplitude, args.u0_width),
            u1=simulator.GaussianData(args.u1_amplitude, args.u1_width),
            allow_boundary_reflections=args.allow_boundary,
        )
    outcome = simulator.run(spec)
    rows = [[t, s, e] for t, s, e in
            zip(outcome.times, outcome.sup_norms, outcome.energies)]
    _write_csv(args.out, ["t", "sup_norm", "energy"], rows, args.quiet)
    tstar = f" t* = {_fmt(outcome.t_star)}" if outcome.t_star is not None else ""
    print(f"verdict: {outcome.verdict}{tstar} ({outcome.note})")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if "r_max" in cfg:
        spec = simulator.SimSpec.from_dict(cfg)
    else:
        spec = simulator.SimSpec(
            problem=_problem_from_args(args, cfg),
            r_max=args.r_max, J=args.J, T_max=args.T_max, cfl=args.cfl,
            blowup_threshold=args.threshold,
            u0=simulator.GaussianData(args.u0_amplitude, args.u0_width),
            u1=simulator.GaussianData(args.u1_amplitude, args.u1_width),
            allow_boundary_reflections=args.allow_boundary,
        )
    p_list = cfg.get("p_list") or [float(x) for x in args.p_list.split(",")]
    rows_raw = simulator.sweep_p(spec, p_list, workers=_threads())
    rows = [[r["p"], r["verdict"], r["t_star"]] for r in rows_raw]
    _write_csv(args.out, ["p", "verdict", "t_star"], rows, args.quiet)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config path")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--quiet", action="store_true")


def _add_damping(p: argparse.ArgumentParser) -> None:
    p.add_argument("--damping", choices=["constant", "powerlaw", "perturbed"])
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--perturbation", choices=["log", "sin"])
    p.add_argument("--perturbation-exponent", type=float, default=1.0)


def _add_problem(p: argparse.ArgumentParser) -> None:
    _add_damping(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--c-a", type=float, default=1.0, dest="c_a")
    p.add_argument("--c-f", type=float, default=1.0, dest="c_f")


def _add_sim(p: argparse.ArgumentParser) -> None:
    _add_problem(p)
    p.add_argument("--r-max", type=float, default=60.0, dest="r_max")
    p.add_argument("--J", type=int, default=1200)
    p.add_argument("--T-max", type=float, default=50.0, dest="T_max")
    p.add_argument("--cfl", type=float, default=0.5)
    p.add_argument("--threshold", type=float, default=1e6)
    p.add_argument("--u0-amplitude", type=float, default=0.0)
    p.add_argument("--u0-width", type=float, default=1.0)
    p.add_argument("--u1-amplitude", type=float, default=0.0)
    p.add_argument("--u1-width", type=float, default=1.0)
    p.add_argument("--allow-boundary", action="store_true", dest="allow_boundary")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blowuplab",
        description="critical exponents, boundedness scans and blow-up runs "
                    "for damped waves with time-dependent coefficients",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="damping admissibility diagnostics")
    _add_common(p)
    _add_damping(p)
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--margin", type=float, default=0.05)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("aux", help="dump the auxiliary-function table as CSV")
    _add_common(p)
    _add_damping(p)
    p.add_argument("--horizon", type=float, default=100.0)
    p.set_defaults(func=_cmd_aux)

    p = sub.add_parser("exponents", help="critical exponent catalog")
    _add_common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.set_defaults(func=_cmd_exponents)

    p = sub.add_parser("scan", help="boundedness scan of the scale functionals")
    _add_common(p)
    _add_problem(p)
    p.add_argument("--R", default="8,16,32,64,128,256",
                   help="comma-separated scale ladder")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("simulate", help="one radial finite-difference run")
    _add_common(p)
    _add_sim(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="lifespan sweep across powers p")
    _add_common(p)
    _add_sim(p)
    p.add_argument("--p-list", default="1.2,1.5,2.0", dest="p_list")
    p.set_defaults(func=_cmd_sweep)

    return parser


def dispatch(argv: Optional[list[str]] = None) -> int:
    """Parse and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (QuadratureNonconvergence, auxcalc.TailNonconvergence,
            simulator.CflViolation, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
