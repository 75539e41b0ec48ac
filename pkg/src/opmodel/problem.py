"""Problem files: parsing, validation and deterministic probe generation."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InputError, ParseError
from .invariant import Subspace, span_closure_invariant
from .numerics import ToleranceConfig, as_matrix, orthonormal_range, orthonormality_defect
from .spaces import TruncatedSpace, shift_matrix

CHECK_ORDER = ("classify", "factorize", "multiplier", "kernel_identity", "wandering", "gram")
SHIFT_ONLY_CHECKS = ("multiplier", "kernel_identity")
TOL_ENV_VAR = "OPMODEL_TOL_VERIFY"
DEFAULT_KERNEL_POINTS = (0j, 0.3 + 0j, 0.5j)


class Lcg:
    """64-bit linear congruential generator (Knuth's MMIX constants).

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64;
    uniforms are the top 53 bits of the state scaled to [0, 1).
    """

    A = 6364136223846793005
    C = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int = 1):
        self.state = int(seed) & self.MASK

    def next_u64(self) -> int:
        self.state = (self.A * self.state + self.C) & self.MASK
        return self.state

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def complex_vector(self, n: int) -> np.ndarray:
        """Entries with real and imaginary parts uniform in [-1, 1)."""
        return np.array([complex(2 * self.uniform() - 1, 2 * self.uniform() - 1) for _ in range(n)])

    def disc_points(self, count: int, radius: float = 0.9) -> list[complex]:
        pts = []
        for _ in range(count):
            r = radius * math.sqrt(self.uniform())
            theta = 2 * math.pi * self.uniform()
            pts.append(complex(r * math.cos(theta), r * math.sin(theta)))
        return pts


def parse_scalar(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ParseError(f"expected a number or [re, im] pair, got {x!r}")


def _parse_poly(poly, space: TruncatedSpace) -> np.ndarray:
    if not isinstance(poly, list):
        raise ParseError("each generator must be a list of Taylor coefficients")
    d = space.coeff_dim
    rows = []
    for entry in poly:
        if d == 1:
            rows.append([parse_scalar(entry)])
        else:
            if not isinstance(entry, list) or len(entry) != d:
                raise ParseError(f"Taylor coefficient must have {d} components, got {entry!r}")
            rows.append([parse_scalar(v) for v in entry])
    if len(rows) > space.degree + 1:
        raise DimensionMismatch(f"generator of degree {len(rows) - 1} exceeds truncation degree {space.degree}")
    if not rows:
        rows = [[0j] * d]
    return space.from_taylor(np.array(rows, dtype=complex))


@dataclass
class ProblemSpec:
    space: TruncatedSpace
    operator: np.ndarray
    is_shift: bool
    subspace: Subspace
    tol: ToleranceConfig
    checks: tuple[str, ...]
    seed: int = 1
    kernel_points: tuple[complex, ...] = DEFAULT_KERNEL_POINTS
    gram_points: tuple[complex, ...] = ()
    notes: dict = field(default_factory=dict)


def _parse_tolerances(obj: dict, tol_verify: float | None) -> ToleranceConfig:
    params = {}
    env = os.environ.get(TOL_ENV_VAR)
    if env:
        try:
            params["verify_tol"] = float(env)
        except ValueError as exc:
            raise ParseError(f"{TOL_ENV_VAR}={env!r} is not a number") from exc
    for key in ("rank_tol", "verify_tol", "trunc_tol"):
        if key in obj:
            params[key] = float(obj[key])
    if "max_order" in obj:
        params["max_order"] = int(obj["max_order"])
    if tol_verify is not None:
        params["verify_tol"] = float(tol_verify)
    try:
        return ToleranceConfig(**params)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def parse_problem(obj: dict, tol_verify: float | None = None) -> ProblemSpec:
    """Validate a decoded problem file.

    Tolerance precedence: ``tol_verify`` argument, then the file, then the
    ``OPMODEL_TOL_VERIFY`` environment variable, then built-in defaults.
    """
    if not isinstance(obj, dict):
        raise ParseError("problem file must contain a JSON object")
    try:
        space = TruncatedSpace.from_json(obj["space"])
    except KeyError as exc:
        raise ParseError("problem file needs a 'space' entry") from exc
    except InputError as exc:
        raise ParseError(str(exc)) from exc
    tol = _parse_tolerances(obj.get("tolerances", {}), tol_verify)

    op = obj.get("operator", "truncated_shift")
    if isinstance(op, dict):
        kind = op.get("type")
    else:
        kind = op
    if kind == "truncated_shift":
        T, is_shift = shift_matrix(space), True
    elif kind == "matrix":
        try:
            T = np.array([[parse_scalar(x) for x in row] for row in op["entries"]], dtype=complex)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad operator matrix: {exc}") from exc
        T = as_matrix(T, "operator")
        if T.shape != (space.dim, space.dim):
            raise DimensionMismatch(f"operator of shape {T.shape} for ambient dimension {space.dim}")
        is_shift = False
    else:
        raise ParseError(f"unknown operator {op!r}")

    notes = {}
    sub = obj.get("subspace", {"type": "whole"})
    kind = sub.get("type") if isinstance(sub, dict) else None
    if kind == "generators":
        polys = sub.get("polys")
        if not isinstance(polys, list) or not polys:
            raise ParseError("generators subspace needs a nonempty 'polys' list")
        G = np.column_stack([_parse_poly(p, space) for p in polys])
        S = span_closure_invariant(T, G, tol)
    elif kind == "basis":
        try:
            cols = [[parse_scalar(x) for x in col] for col in sub["columns"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad basis subspace: {exc}") from exc
        B = np.array(cols, dtype=complex).T if cols else np.zeros((space.dim, 0), dtype=complex)
        if B.ndim != 2 or B.shape[0] != space.dim:
            raise DimensionMismatch(f"basis vectors of length {B.shape[0]} for ambient dimension {space.dim}")
        notes["basis_drift"] = orthonormality_defect(B)
        S = Subspace(orthonormal_range(B, tol))
    elif kind == "whole":
        S = Subspace(np.eye(space.dim, dtype=complex))
    else:
        raise ParseError(f"unknown subspace type {kind!r}")

    if "checks" in obj:
        requested = obj["checks"]
        if not isinstance(requested, list) or any(c not in CHECK_ORDER for c in requested):
            raise ParseError(f"checks must be a list drawn from {CHECK_ORDER}")
        if not is_shift and any(c in SHIFT_ONLY_CHECKS for c in requested):
            raise ParseError("multiplier and kernel_identity checks need operator 'truncated_shift'")
        checks = tuple(c for c in CHECK_ORDER if c in requested)
    else:
        checks = tuple(c for c in CHECK_ORDER if is_shift or c not in SHIFT_ONLY_CHECKS)

    seed = int(obj.get("seed", 1))
    ki = obj.get("kernel_identity", {})
    kernel_points = tuple(parse_scalar(p) for p in ki.get("points", DEFAULT_KERNEL_POINTS_JSON))
    gram = obj.get("gram", {})
    if "points" in gram:
        gram_points = tuple(parse_scalar(p) for p in gram["points"])
    else:
        gram_points = tuple(Lcg(seed).disc_points(int(gram.get("count", 8)), float(gram.get("radius", 0.9))))
    return ProblemSpec(space, T, is_shift, S, tol, checks, seed, kernel_points, gram_points, notes)


DEFAULT_KERNEL_POINTS_JSON = [[p.real, p.imag] for p in DEFAULT_KERNEL_POINTS]


def load_problem(path, tol_verify: float | None = None) -> ProblemSpec:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return parse_problem(obj, tol_verify)
