"""Model co-isometry of a C.0 contraction.

For a contraction T with defect operator D = (I - T T*)^(1/2) the map

    h  ->  sum_m (D T*^m h) z^m

is an isometry into the vector-valued Hardy space over ran D whenever T*^m -> 0.
Its adjoint sends z^m (x) eta to T^m D eta, so in block-column form it is the
sequence Pi_m = T^m D E, where E is an orthonormal basis of ran D.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotC0, NotContraction, ParseError, TruncationOverflow
from .numerics import (
    DEFAULT_TOL,
    ToleranceConfig,
    adjoint,
    as_matrix,
    max_abs,
    orthonormal_range,
    psd_sqrt,
    spectral_norm,
)
from .spaces import classify_contraction


@dataclass
class DefectData:
    D: np.ndarray
    basis_E: np.ndarray

    @property
    def defect_dim(self) -> int:
        return self.basis_E.shape[1]


@dataclass
class BlockColumnMap:
    """Blocks Pi_0..Pi_M of a map from H^2 (x) E into C^n.

    ``blocks`` has shape ``(M+1, n, e)``; block m is the image of z^m (x) E.
    ``tail_bound`` bounds the squared norm of the discarded power T^(M+1).
    """

    blocks: np.ndarray
    tail_bound: float

    @property
    def trunc_order(self) -> int:
        return self.blocks.shape[0] - 1

    @property
    def ambient_dim(self) -> int:
        return self.blocks.shape[1]

    @property
    def defect_dim(self) -> int:
        return self.blocks.shape[2]

    def flat(self, num_blocks: int | None = None) -> np.ndarray:
        """[Pi_0 | Pi_1 | ... ], zero-padded to ``num_blocks`` blocks if given."""
        blocks = self.blocks
        if num_blocks is not None and num_blocks > blocks.shape[0]:
            pad = np.zeros((num_blocks - blocks.shape[0],) + blocks.shape[1:], dtype=complex)
            blocks = np.concatenate([blocks, pad])
        return np.concatenate(list(blocks), axis=1)

    def block(self, m: int) -> np.ndarray:
        if m <= self.trunc_order:
            return self.blocks[m]
        return np.zeros(self.blocks.shape[1:], dtype=complex)

    def gram(self) -> np.ndarray:
        """sum_m Pi_m Pi_m^*."""
        return np.einsum("mie,mje->ij", self.blocks, self.blocks.conj())

    def to_json(self) -> dict:
        return {
            "trunc_order": self.trunc_order,
            "tail_bound": self.tail_bound,
            "blocks": [complex_matrix_to_json(b) for b in self.blocks],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BlockColumnMap":
        try:
            blocks = np.array([complex_matrix_from_json(b) for b in obj["blocks"]], dtype=complex)
            out = cls(blocks, float(obj["tail_bound"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad block-column map: {exc}") from exc
        if out.trunc_order != int(obj["trunc_order"]):
            raise ParseError("trunc_order disagrees with the number of blocks")
        return out


def complex_matrix_to_json(A) -> list:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        return [[float(x.real), float(x.imag)] for x in A]
    return [complex_matrix_to_json(row) for row in A]


def complex_matrix_from_json(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.size == 0:
        # an n x 0 matrix serialises as n empty rows
        return np.zeros(arr.shape, dtype=complex)
    if arr.shape[-1:] != (2,):
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def defect_operator(T, tol: ToleranceConfig = DEFAULT_TOL) -> DefectData:
    """D = (I - T T*)^(1/2) together with an orthonormal basis of ran D."""
    T = as_matrix(T)
    cls = classify_contraction(T, tol)
    if not cls.is_contraction:
        raise NotContraction(f"operator norm {cls.operator_norm:.6g} > 1")
    n = T.shape[0]
    D = psd_sqrt(np.eye(n) - T @ adjoint(T), tol)
    return DefectData(D, orthonormal_range(D, tol))


def _require_c0(T, tol):
    cls = classify_contraction(T, tol)
    if not cls.is_c0:
        raise NotC0(
            f"not a C.0 contraction (norm {cls.operator_norm:.6g}, spectral radius {cls.spectral_radius:.6g})"
        )
    return cls


@dataclass
class LSequence:
    """Coefficients of L_T h in basis_E coordinates, one row per power of z."""

    coefficients: np.ndarray
    tail_norm_sq: float  # ||T*^(M+1) h||^2

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def apply_L(T, h, M: int, tol: ToleranceConfig = DEFAULT_TOL, defect: DefectData | None = None) -> LSequence:
    """First M+1 Taylor coefficients D T*^m h of the isometric embedding L_T h."""
    T = as_matrix(T)
    _require_c0(T, tol)
    h = np.asarray(h, dtype=complex).reshape(-1)
    if h.shape[0] != T.shape[0]:
        raise DimensionMismatch(f"vector of length {h.shape[0]} for operator of size {T.shape[0]}")
    if M < 0:
        raise ValueError("M must be >= 0")
    defect = defect or defect_operator(T, tol)
    coupler = adjoint(defect.basis_E) @ defect.D
    Tstar = adjoint(T)
    coeffs = np.empty((M + 1, defect.defect_dim), dtype=complex)
    v = h
    for m in range(M + 1):
        coeffs[m] = coupler @ v
        v = Tstar @ v
    return LSequence(coeffs, float(np.vdot(v, v).real))


def truncation_order(T, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[int, float]:
    """Least M with ||T^(M+1)||^2 <= trunc_tol, and that squared norm."""
    T = as_matrix(T)
    P = T.copy()
    for M in range(tol.max_order + 1):
        tail = spectral_norm(P) ** 2
        if tail <= tol.trunc_tol:
            return M, tail
        P = T @ P
    raise TruncationOverflow(
        f"||T^(M+1)||^2 still above {tol.trunc_tol:g} at M = {tol.max_order}; spectral radius too close to 1"
    )


def power_blocks(T: np.ndarray, first: np.ndarray, M: int) -> np.ndarray:
    """Stack first, T first, ..., T^M first."""
    blocks = np.empty((M + 1,) + first.shape, dtype=complex)
    blocks[0] = first
    for m in range(M):
        blocks[m + 1] = T @ blocks[m]
    return blocks


def model_coisometry(T, tol: ToleranceConfig = DEFAULT_TOL) -> BlockColumnMap:
    """Block columns Pi_m = T^m D E of the model co-isometry of a C.0 contraction."""
    T = as_matrix(T)
    _require_c0(T, tol)
    defect = defect_operator(T, tol)
    M, tail = truncation_order(T, tol)
    return BlockColumnMap(power_blocks(T, defect.D @ defect.basis_E, M), tail)


def coisometry_residual(Pi: BlockColumnMap) -> float:
    return max_abs(Pi.gram() - np.eye(Pi.ambient_dim))


def telescoping_check(T, M: int, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Residual of sum_{m<=M} T^m (I - T T*) T*^m = I - T^(M+1) T*^(M+1)."""
    T = as_matrix(T)
    cls = classify_contraction(T, tol)
    if not cls.is_contraction:
        raise NotContraction(f"operator norm {cls.operator_norm:.6g} > 1")
    n = T.shape[0]
    I = np.eye(n)
    defect_sq = I - T @ adjoint(T)
    lhs = np.zeros((n, n), dtype=complex)
    P = I.astype(complex)
    for _ in range(M + 1):
        lhs += P @ defect_sq @ adjoint(P)
        P = T @ P
    return max_abs(lhs - (I - P @ adjoint(P)))
