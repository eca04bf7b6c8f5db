"""Command-line entry point.

Exit codes: 0 when the certificate holds, 2 when a valid run fails the
test (including underflow in the fundamental solution), 1 on program or
input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .benchmarks import format_table1, run_table1
from .errors import GreenBVPError, UnderflowDiagnostic
from .linear import certify_linear, verify_inhomogeneous
from .nonlinear import certify_nonlinear
from .problems import PROBLEMS, LinearBVProblem, Mesh, builtin_problem
from .solver import _jsonable, export_solution, ingest_solution, solve_linear_bvp, solve_nonlinear_bvp

EXIT_CERTIFIED, EXIT_ERROR, EXIT_FAILED = 0, 1, 2

REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "status", "exit_code", "config"],
    "properties": {
        "command": {"enum": ["certify", "solve", "table1"]},
        "status": {"enum": ["certified", "failed", "error", "solved"]},
        "exit_code": {"enum": [0, 1, 2]},
        "reason": {"type": "string"},
        "config": {"type": "object"},
        "certificate": {"type": ["object", "null"]},
        "error_bound": {"type": ["object", "null"]},
        "rows": {"type": "array", "items": {"type": "object"}},
        "solver": {"type": ["object", "null"]},
    },
}


@dataclass
class RunConfig:
    command: str
    problem: str | None = None
    params: dict = field(default_factory=dict)
    N: int = 64
    m: int = 15
    series_degree: int | None = None
    mode: str = "rigorous"
    weights: str = "identity"
    radius: float = 2.3e-4
    solution: str | None = None
    output: str | None = None
    deterministic: bool = False
    workers: int | None = None

    def __post_init__(self):
        if self.N < 1 or self.m < 1:
            raise GreenBVPError("N and m must be at least 1")
        if self.series_degree is not None and self.series_degree < 1:
            raise GreenBVPError("series degree must be at least 1")
        if self.mode not in ("rigorous", "fast-float"):
            raise GreenBVPError(f"unknown mode {self.mode!r}")
        if self.weights not in ("identity", "adaptive"):
            raise GreenBVPError(f"unknown weights {self.weights!r}")
        if not self.radius > 0:
            raise GreenBVPError("radius must be positive")
        if self.deterministic:
            self.workers = 1


def problem_from_params(name: str, params: dict):
    """Rebuild a built-in problem from the parameters stored in a solution file."""
    params = dict(params)
    if name == "lorenz" and "beta_fraction" in params:
        params["beta"] = Fraction(params.pop("beta_fraction"))
    return builtin_problem(name, **params)


def _problem_params(args) -> dict:
    if args.problem == "exact-test":
        return {"b": args.b}
    if args.problem == "turning-point":
        return {"eps": args.eps}
    if args.problem == "potential-well":
        return {"eps": args.eps, "omega": args.omega}
    if args.problem == "lorenz":
        return {"sigma": args.sigma, "rho": args.rho}
    return {}


def _solve(problem, cfg: RunConfig):
    deg = cfg.series_degree or cfg.m
    mesh = Mesh.uniform(cfg.N)
    if isinstance(problem, LinearBVProblem):
        return solve_linear_bvp(problem, mesh, deg)
    return solve_nonlinear_bvp(problem, mesh, deg)


def cmd_certify(cfg: RunConfig) -> dict:
    report = {"command": "certify", "config": asdict(cfg), "certificate": None,
              "error_bound": None, "solver": None}
    try:
        if cfg.solution:
            approx = ingest_solution(cfg.solution)
            problem = problem_from_params(approx.problem, approx.params)
        else:
            if cfg.problem is None:
                raise GreenBVPError("give --problem or --solution")
            problem = builtin_problem(cfg.problem, **cfg.params)
            approx = _solve(problem, cfg)
        report["solver"] = _jsonable({"N": approx.N, "series_degree": approx.m, **approx.meta})
        if isinstance(problem, LinearBVProblem):
            cert = certify_linear(problem, approx.fundamentals, cfg.m, approx.mesh, cfg.weights,
                                  approx.v_nodes, mode=cfg.mode, workers=cfg.workers)
            report["certificate"] = cert.to_dict()
            if cert.certified:
                err = verify_inhomogeneous(cert, problem, approx.v_nodes, approx.m)
                report["error_bound"] = {"weighted": err.error.hi,
                                         "components": err.components.tolist(),
                                         "residual": err.residual}
        else:
            cert = certify_nonlinear(problem, approx, cfg.m, cfg.radius, cfg.mode, cfg.workers)
            report["certificate"] = cert.to_dict()
        report["status"] = cert.status
        report["reason"] = cert.reason
    except UnderflowDiagnostic as exc:
        report.update(status="failed", reason=f"underflow: {exc}")
    report["exit_code"] = EXIT_CERTIFIED if report["status"] == "certified" else EXIT_FAILED
    return report


def cmd_solve(cfg: RunConfig) -> dict:
    if cfg.problem is None or cfg.output is None:
        raise GreenBVPError("solve needs --problem and --output")
    problem = builtin_problem(cfg.problem, **cfg.params)
    approx = _solve(problem, cfg)
    export_solution(approx, cfg.output)
    return {"command": "solve", "config": asdict(cfg), "status": "solved", "exit_code": 0,
            "solver": _jsonable({"N": approx.N, "series_degree": approx.m, **approx.meta})}


def cmd_table1(cfg: RunConfig) -> dict:
    rows = run_table1(cfg.m, cfg.mode, cfg.workers)
    ok = all(r["status"] == "certified" for r in rows)
    return {"command": "table1", "config": asdict(cfg), "rows": rows,
            "status": "certified" if ok else "failed",
            "exit_code": EXIT_CERTIFIED if ok else EXIT_FAILED}


def format_report(report: dict) -> str:
    if report["command"] == "table1":
        return format_table1(report["rows"])
    lines = [f"status: {report['status']}"]
    if report.get("reason"):
        lines.append(f"reason: {report['reason']}")
    cert = report.get("certificate") or {}
    if cert.get("kind") == "nonlinear":
        lin = cert["linear"]
        lines += [f"|I - FH|: {lin['alpha']:.3e}", f"|F^-1|: {_num(lin['Finv_norm'])}",
                  f"|G(y0)|: {_num(cert['residual_norm'])}"]
        nk = cert.get("newton_kantorovich")
        if nk:
            lines += [f"K: {_num(nk['K'])}", f"h: {_num(nk['h'])}",
                      f"existence radius s0: {_num(nk['s0'])}",
                      f"uniqueness radius s1: {_num(nk['s1'])}"]
    elif cert:
        lines += [f"N: {cert['N']}  m: {cert['m']}  mode: {cert['mode']}",
                  f"|I - FH|: {cert['alpha']:.3e}", f"|H|: {cert['H_norm']:.3e}",
                  f"|F^-1|: {_num(cert['Finv_norm'])}"]
    if report.get("error_bound"):
        comps = ", ".join(f"{c:.3e}" for c in report["error_bound"]["components"])
        lines.append(f"error bound per component: {comps}")
    return "\n".join(lines)


def _num(x):
    return "-" if x is None else f"{x:.3e}"


def _finite(x):
    """Replace non-finite floats by None so reports are strict JSON."""
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_finite(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


class _Parser(argparse.ArgumentParser):
    # usage errors are program errors, not certification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="greenbvp",
                                     description="Certify two-point boundary value problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--m", type=int, default=15, help="Taylor degree of the propagators")
        p.add_argument("--mode", choices=["rigorous", "fast-float"], default="rigorous")
        p.add_argument("--workers", type=int, default=None,
                       help="threads for the row sums (default: $GREENBVP_WORKERS or 1)")
        p.add_argument("--deterministic", action="store_true", help="force a single worker")
        p.add_argument("--output", help="report path (solve: solution file path)")
        p.add_argument("--json", action="store_true", help="print the JSON report to stdout")

    def problem_args(p):
        p.add_argument("--problem", choices=PROBLEMS)
        p.add_argument("--eps", type=float, default=1e-4)
        p.add_argument("--b", type=float, default=1.0)
        p.add_argument("--omega", type=float, default=0.25)
        p.add_argument("--sigma", type=float, default=10.0)
        p.add_argument("--rho", type=float, default=28.0)
        p.add_argument("--N", type=int, default=64, help="number of mesh pieces")
        p.add_argument("--series-degree", type=int, default=None,
                       help="degree of the approximate solution series (default: m)")

    cert = sub.add_parser("certify", help="solve and certify a problem")
    problem_args(cert)
    common(cert)
    cert.add_argument("--weights", choices=["identity", "adaptive"], default="identity")
    cert.add_argument("--radius", type=float, default=2.3e-4,
                      help="ball radius for the nonlinear test")
    cert.add_argument("--solution", help="certify a solution file instead of solving")

    solve = sub.add_parser("solve", help="compute an approximate solution and write it to a file")
    problem_args(solve)
    common(solve)

    table = sub.add_parser("table1", help="run the singularly perturbed reference examples")
    common(table)
    return parser


def config_from_args(args) -> RunConfig:
    kw = dict(command=args.command, m=args.m, mode=args.mode, output=args.output,
              deterministic=args.deterministic, workers=args.workers)
    if args.command in ("certify", "solve"):
        kw.update(problem=args.problem, N=args.N, series_degree=args.series_degree,
                  params=_problem_params(args) if args.problem else {})
    if args.command == "certify":
        kw.update(weights=args.weights, radius=args.radius, solution=args.solution)
    return RunConfig(**kw)


COMMANDS = {"certify": cmd_certify, "solve": cmd_solve, "table1": cmd_table1}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        cfg = config_from_args(args)
        report = COMMANDS[cfg.command](cfg)
    except (GreenBVPError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = _finite(_jsonable(report))
    text = json.dumps(report, indent=1, allow_nan=False, default=str)
    if cfg.output and cfg.command != "solve":
        Path(cfg.output).write_text(text)
    print(text if args.json else format_report(report))
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
