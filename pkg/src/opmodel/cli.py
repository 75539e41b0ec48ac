"""Command-line front end: ``opmodel <command> problem.json``.

Exit codes: 0 all requested checks pass, 1 bad input, 2 a check failed or
was refused (the report is still written), 3 numerical breakdown.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisFailure, InputError, NumericalFailure
from .invariant import invariant_factorization, verify_factorization
from .model import coisometry_residual, model_coisometry
from .multiplier import adjoint_kernel_identity_check, extract_multiplier, verify_multiplier
from .problem import CHECK_ORDER, Lcg, ProblemSpec, load_problem
from .spaces import classify_contraction, gram_psd_check
from .wandering import is_exploratory_kernel, wandering_span_check

COMMANDS = {
    "analyze": ("classify", "gram"),
    "factorize": ("classify", "factorize"),
    "multiplier": ("classify", "factorize", "multiplier", "kernel_identity"),
    "wandering": ("classify", "wandering"),
    "verify": CHECK_ORDER,
}

EXIT_OK, EXIT_INPUT, EXIT_FAIL, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class Report:
    checks: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def overall(self) -> str:
        return "pass" if all(c.get("passed", False) for c in self.checks.values()) else "fail"

    def to_json_obj(self, include_timings: bool = False) -> dict:
        obj = {"overall": self.overall, "checks": self.checks}
        if include_timings:
            obj["timings"] = self.timings
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Report":
        report = cls(obj.get("checks", {}), obj.get("timings", {}))
        if report.overall != obj.get("overall"):
            raise InputError("report 'overall' is inconsistent with its checks")
        return report


def _clean(x):
    """Convert numpy scalars and arrays into plain JSON values."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _refused(exc: Exception) -> dict:
    return {"passed": False, "refused": f"{type(exc).__name__}: {exc}"}


class _Pipeline:
    """Runs checks in order, sharing the factorization and multiplier."""

    def __init__(self, problem: ProblemSpec):
        self.p = problem
        self._pi = None
        self._theta = None

    def factorization(self):
        if self._pi is None:
            self._pi = invariant_factorization(self.p.operator, self.p.subspace, self.p.tol)
        return self._pi

    def multiplier(self):
        if self._theta is None:
            self._theta, self._pi = extract_multiplier(self.p.space, self.p.subspace, self.p.tol)
        return self._theta

    def classify(self) -> dict:
        cls = classify_contraction(self.p.operator, self.p.tol)
        return {"classification": cls.to_dict(), "passed": cls.is_c0}

    def factorize(self) -> dict:
        p = self.p
        model = model_coisometry(p.operator, p.tol)
        co_res = coisometry_residual(model)
        Pi = self.factorization()
        rep = verify_factorization(p.operator, p.subspace, Pi, p.tol)
        out = rep.to_dict()
        out.update(
            coisometry_residual=co_res,
            coisometry_tail_bound=model.tail_bound,
            trunc_order=Pi.trunc_order,
            tail_bound=Pi.tail_bound,
            defect_dim=Pi.defect_dim,
            dim_S=p.subspace.dim,
            trivial_subspace=p.subspace.is_trivial,
            passed=rep.passed and co_res <= model.tail_bound + p.tol.verify_tol,
        )
        out.update(p.notes)
        return out

    def multiplier_check(self) -> dict:
        theta = self.multiplier()
        rep = verify_multiplier(self.p.space, self.p.subspace, theta, self.p.tol, Pi=self._pi)
        out = rep.to_dict()
        out["multiplier"] = theta.to_json()
        return out

    def kernel_identity(self) -> dict:
        theta = self.multiplier()
        rng = Lcg(self.p.seed)
        per_point = []
        for w in self.p.kernel_points:
            zeta = rng.complex_vector(self.p.space.coeff_dim)
            r = adjoint_kernel_identity_check(self.p.space, self.p.subspace, theta, self._pi, w, zeta, self.p.tol)
            per_point.append(r.to_dict())
        excess = max((r["max_excess"] for r in per_point), default=-self.p.tol.verify_tol)
        return {
            "points": per_point,
            "kernel_identity_max_excess": excess,
            "passed": all(r["passed"] for r in per_point),
        }

    def wandering(self) -> dict:
        exploratory = (not self.p.is_shift) or is_exploratory_kernel(self.p.space.kernel)
        rep = wandering_span_check(self.p.operator, self.p.subspace, self.p.tol, exploratory=exploratory)
        out = {"wandering": rep.to_dict(), "passed": rep.passed}
        return out

    def gram(self) -> dict:
        rep = gram_psd_check(self.p.space.kernel, self.p.space.degree, self.p.gram_points, self.p.tol)
        return rep.to_dict()


def run_problem(problem: ProblemSpec, command: str = "verify") -> Report:
    """Execute the requested checks in fixed order and collect a report.

    Hypothesis failures (not C.0, not invariant, ...) become refused checks;
    numerical failures propagate.
    """
    selected = [c for c in CHECK_ORDER if c in problem.checks and c in COMMANDS[command]]
    pipe = _Pipeline(problem)
    runners = {
        "classify": pipe.classify,
        "factorize": pipe.factorize,
        "multiplier": pipe.multiplier_check,
        "kernel_identity": pipe.kernel_identity,
        "wandering": pipe.wandering,
        "gram": pipe.gram,
    }
    report = Report()
    for name in selected:
        start = time.perf_counter()
        try:
            result = runners[name]()
        except HypothesisFailure as exc:
            result = _refused(exc)
        report.checks[name] = _clean(result)
        report.timings[name] = time.perf_counter() - start
    return report


def emit_report(report: Report, fmt: str = "json", include_timings: bool = False) -> str:
    """Serialize a report; JSON output is key-sorted and deterministic."""
    if fmt == "json":
        return json.dumps(report.to_json_obj(include_timings), sort_keys=True, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"{'check':<16} {'field':<34} value", "-" * 72]
    for name, result in report.checks.items():
        for key, value in _flatten(result):
            lines.append(f"{name:<16} {key:<34} {_fmt(value)}")
        if include_timings and name in report.timings:
            lines.append(f"{name:<16} {'time_s':<34} {report.timings[name]:.4f}")
    lines.append("-" * 72)
    lines.append(f"{'overall':<16} {'':<34} {report.overall}")
    return "\n".join(lines) + "\n"


def _flatten(obj, prefix=""):
    for key in sorted(obj):
        value = obj[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, name + ".")
        elif key in ("taylor", "points", "singular_values"):
            continue
        else:
            yield name, value


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opmodel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} checks of a problem file")
        sp.add_argument("problem", help="problem JSON file")
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default="json")
        fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--tol-verify", type=float, help="override verify_tol")
        sp.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identity)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.problem, args.tol_verify)
        report = run_problem(problem, args.command)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = emit_report(report, args.fmt, args.timings)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.overall == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
