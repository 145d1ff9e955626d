"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .catalog import build_example, problem_for
from .free_boundary import solve_threshold, threshold_ordering
from .kernels import DomainError
from .mc import (
    McConfig,
    TauSpec,
    estimate_value,
    fukushima_dynkin_residual,
    parse_thresholds,
    threshold_rule,
    threshold_sweep,
)
from .piecewise import PiecewiseFunction
from .quadrature import QuadratureError
from .resolvent import ExampleId
from .verification import check_conditions

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("json", "csv", "plot-data")


class UsageError(Exception):
    pass


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and np.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _alphas(text: str) -> list[float]:
    try:
        return [_positive(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _thresholds(text: str) -> np.ndarray:
    try:
        return parse_thresholds(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optstop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, example=True):
        if example:
            p.add_argument("--example", required=True, choices=[e.value for e in ExampleId])
        p.add_argument("--alpha", type=_positive, default=0.5)
        p.add_argument("--format", choices=FORMATS, default="json")
        p.add_argument("--out-dir", type=Path, default=Path("."))

    def mc(p):
        p.add_argument("--paths", type=_count, default=100_000)
        p.add_argument("--dt", type=_positive, default=1e-3)
        p.add_argument("--horizon", type=_positive, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--antithetic", action="store_true")

    p = sub.add_parser("solve", help="optimal threshold of a worked example")
    common(p)
    p.add_argument("--tol", type=_positive, default=1e-12)

    p = sub.add_parser("verify", help="check the sufficient conditions on a grid")
    common(p)
    p.add_argument("--x0", type=float, default=None, help="threshold to test (default: optimal)")
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=5.0)
    p.add_argument("--grid-n", type=_count, default=1001)
    p.add_argument("--tol", type=_positive, default=1e-6)
    p.add_argument("--deriv-tol", type=_positive, default=1e-4)

    p = sub.add_parser("simulate", help="Monte Carlo value of a threshold rule")
    common(p)
    mc(p)
    p.add_argument("--x", type=float, default=0.0, help="start state")
    p.add_argument("--x0", type=float, default=None, help="threshold (default: optimal)")

    p = sub.add_parser("sweep", help="Monte Carlo threshold sweep on common paths")
    common(p)
    mc(p)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--thresholds", type=_thresholds, required=True, help="a:b:n")

    p = sub.add_parser("table", help="thresholds of all examples across discount rates")
    common(p, example=False)
    p.add_argument("--alphas", type=_alphas, default=[0.25, 0.5, 1.0, 2.0])
    p.set_defaults(format="csv")

    p = sub.add_parser("identity", help="Monte Carlo residuals of the resolvent identity")
    common(p, example=False)
    mc(p)
    return parser


# ---------------------------------------------------------------------------


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def _emit(payload: dict, rows: list[dict] | None, fmt: str, out) -> None:
    if fmt == "csv" and rows:
        out.write(_csv(rows))
    else:
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _default_grid_min(eid: ExampleId) -> float:
    return -5.0 if eid.kind.lower == -np.inf else 0.0


def write_plot_data(example_id, alpha: float, grid: np.ndarray, out_dir: Path, x0: float | None = None) -> list[Path]:
    """Two-column ``x value`` files: one per branch of the value function, plus ``value - g``."""
    bundle = build_example(example_id, alpha, x0)
    out_dir.mkdir(parents=True, exist_ok=True)
    v = bundle.value(grid)
    cont = bundle.value.in_continuation_branch(grid)
    name = bundle.example_id.value
    files = {
        f"{name}_value_continuation.dat": (grid[cont], v[cont]),
        f"{name}_value_stopping.dat": (grid[~cont], v[~cont]),
        f"{name}_excess.dat": (grid, v - bundle.problem.g(grid)),
    }
    written = []
    for fname, (xs, ys) in files.items():
        path = out_dir / fname
        np.savetxt(path, np.column_stack([xs, ys]), fmt="%.17g")
        written.append(path)
    return written


def _cmd_solve(args, out) -> int:
    sol = solve_threshold(args.example, args.alpha, args.tol)
    payload = sol.to_dict()
    _emit(payload, [payload], args.format, out)
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    eid = ExampleId.parse(args.example)
    lo = _default_grid_min(eid) if args.grid_min is None else args.grid_min
    if not args.grid_max > lo or args.grid_n < 3:
        raise UsageError("need grid-max > grid-min and grid-n >= 3")
    grid = np.linspace(lo, args.grid_max, args.grid_n)
    bundle = build_example(eid, args.alpha, args.x0)
    report = check_conditions(bundle.candidate, grid, args.tol, deriv_tol=args.deriv_tol)
    if args.format == "plot-data":
        files = write_plot_data(eid, args.alpha, grid, args.out_dir, args.x0)
        payload = {"files": [str(f) for f in files], "passed": report.passed}
    else:
        payload = {"example": eid.value, "alpha": args.alpha, "x0": bundle.x0, **report.to_dict()}
        if args.format == "csv":
            payload.pop("grid")
    _emit(payload, None, "json", out)
    if not report.passed:
        for name in report.failures():
            check = getattr(report, name)
            print(f"check failed: {name} margin={check.margin:.6g}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _mc_config(args) -> McConfig:
    return McConfig(paths=args.paths, dt=args.dt, horizon=args.horizon, seed=args.seed,
                    antithetic=args.antithetic)


def _cmd_simulate(args, out) -> int:
    bundle = build_example(args.example, args.alpha, args.x0)
    problem = bundle.problem
    problem.kind.check_states(args.x)
    rule = threshold_rule(problem.kind, bundle.x0,
                          continue_above=bundle.example_id is ExampleId.LINEAR_RUNNING)
    est = estimate_value(problem, rule, args.x, _mc_config(args))
    payload = {"example": bundle.example_id.value, "alpha": args.alpha, "x": args.x,
               "x0": bundle.x0, **est.to_dict(),
               "closed_form": float(bundle.value(args.x))}
    _emit(payload, [payload], args.format, out)
    return EXIT_OK


def _cmd_sweep(args, out) -> int:
    eid = ExampleId.parse(args.example)
    problem = problem_for(eid, args.alpha)
    problem.kind.check_states(args.x)
    result = threshold_sweep(problem, args.thresholds, args.x, _mc_config(args),
                             continue_above=eid is ExampleId.LINEAR_RUNNING)
    payload = {"example": eid.value, "alpha": args.alpha, "x": args.x, **result.to_dict()}
    _emit(payload, payload["rows"], args.format, out)
    return EXIT_OK


def _cmd_table(args, out) -> int:
    rows = []
    for alpha in args.alphas:
        order = threshold_ordering(alpha)
        rows.append({
            "alpha": alpha,
            "x0_running": solve_threshold(ExampleId.LINEAR_RUNNING, alpha).x0,
            "x0_stopped": order.standard,
            "x0_reflected": order.reflected,
            "x0_absorbed": order.absorbed,
            "ordering": "absorbed<stopped<reflected" if order.strictly_increasing else "violated",
            "ratio_reflected_stopped": order.reflected / order.standard,
        })
    payload = {"rows": rows, "absorbed_note": solve_threshold(ExampleId.ABSORBED, 1.0).note}
    _emit(payload, rows, args.format, out)
    return EXIT_OK if all(r["ordering"] != "violated" for r in rows) else EXIT_CHECK


def identity_cases(alpha: float):
    """The standard set of (process, psi, stopping time, start) combinations."""
    stopped = build_example(ExampleId.LINEAR_STOPPED, alpha)
    reflected = build_example(ExampleId.REFLECTED, alpha)
    const = lambda x: np.full(np.shape(x), 1.0 / alpha)  # noqa: E731
    return [
        ("standard/constant/fixed(1)", "standard", PiecewiseFunction.constant(1.0), 0.0,
         TauSpec.fixed(1.0), const),
        ("standard/stopped-psi/exit(-2,2)", "standard", stopped.psi, 0.0,
         TauSpec.exit_interval(-2.0, 2.0), stopped.value),
        ("reflected/reflected-psi/fixed(1)", "reflected", reflected.psi, 0.5,
         TauSpec.fixed(1.0), reflected.value),
    ]


def _cmd_identity(args, out) -> int:
    cfg = _mc_config(args)
    rows = []
    for name, kind, psi, x, tau, value in identity_cases(args.alpha):
        est = fukushima_dynkin_residual(kind, psi, args.alpha, x, tau, cfg, value)
        rows.append({"case": name, **est.to_dict(),
                     "within_3se": bool(abs(est.mean) <= 3.0 * est.stderr + 1e-12)})
    _emit({"alpha": args.alpha, "rows": rows}, rows, args.format, out)
    bad = [r for r in rows if not r["within_3se"]]
    for r in bad:
        print(f"check failed: {r['case']} residual={r['mean']:.6g} stderr={r['stderr']:.3g}", file=sys.stderr)
    return EXIT_CHECK if bad else EXIT_OK


COMMANDS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "table": _cmd_table,
    "identity": _cmd_identity,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, RuntimeError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
