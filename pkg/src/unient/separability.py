"""Kronecker-separability tests for states and operators.

A vector on C^m (x) C^n is a product vector iff its m x n coefficient
matrix has rank one, i.e. iff every 2x2 minor vanishes. The residual used
throughout is the sum of the moduli of all ``C(m,2)*C(n,2)`` minors.
Operators are handled through the realignment ``U -> R`` that turns
``A (x) B`` into the rank-one matrix ``vec(A) vec(B)^T``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import OracleDisagreement, ShapeMismatch
from .linalg import as_matrix
from .states import (
    PureState,
    ProductState,
    coefficient_matrix,
    schmidt_coefficients,
)

DEFAULT_TOL = 1e-8

__all__ = [
    "DEFAULT_TOL",
    "ResidualReport",
    "SplitMask",
    "FilterResult",
    "minor_indices",
    "minors",
    "residual_totals",
    "state_kron_residual",
    "is_separable_state",
    "split_coefficient_matrix",
    "multipartite_split_residual",
    "realign",
    "operator_kron_residual",
    "gamma_condition_residual",
    "column_separability_filter",
    "kappa_state",
    "split_named",
]


@dataclass(frozen=True, eq=False)
class ResidualReport:
    total: float
    max_minor: float
    minors: np.ndarray
    indices: np.ndarray  # (count, 4) rows of (i1, i2, j1, j2)

    @property
    def minor_count(self) -> int:
        return len(self.minors)

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "max_minor": self.max_minor,
            "minor_count": self.minor_count,
        }


@lru_cache(maxsize=None)
def minor_indices(rows: int, cols: int) -> np.ndarray:
    """All (i1, i2, j1, j2) with i1 < i2, j1 < j2, in lexicographic order."""
    quads = [
        (i1, i2, j1, j2)
        for i1, i2 in itertools.combinations(range(rows), 2)
        for j1, j2 in itertools.combinations(range(cols), 2)
    ]
    out = np.array(quads, dtype=np.intp).reshape(-1, 4)
    out.setflags(write=False)
    return out


def minors(mat: np.ndarray) -> np.ndarray:
    """2x2 minors ``M[i1,j1] M[i2,j2] - M[i1,j2] M[i2,j1]`` of the last two axes."""
    i1, i2, j1, j2 = minor_indices(mat.shape[-2], mat.shape[-1]).T
    return mat[..., i1, j1] * mat[..., i2, j2] - mat[..., i1, j2] * mat[..., i2, j1]


def residual_totals(mat: np.ndarray) -> np.ndarray:
    """Sum of |minor| over the last two axes; vectorized over leading axes."""
    return np.abs(minors(mat)).sum(axis=-1)


def _report(mat: np.ndarray) -> ResidualReport:
    vals = minors(mat)
    mags = np.abs(vals)
    vals.setflags(write=False)
    return ResidualReport(
        total=float(mags.sum()),
        max_minor=float(mags.max(initial=0.0)),
        minors=vals,
        indices=minor_indices(mat.shape[-2], mat.shape[-1]),
    )


def state_kron_residual(s, shape) -> ResidualReport:
    """Minor residual of the m x n coefficient matrix of `s`."""
    return _report(coefficient_matrix(s, shape))


def is_separable_state(s, shape, tol: float = DEFAULT_TOL) -> bool:
    """Product-state test that requires the minor and Schmidt criteria to agree.

    The state is separable iff the minor residual is <= `tol`; the second
    Schmidt coefficient must then be <= sqrt(tol), and must exceed it
    otherwise.

    Raises
    ------
    OracleDisagreement
        When the two criteria give different answers.
    """
    by_minors = state_kron_residual(s, shape).total <= tol
    sigma = schmidt_coefficients(s, shape)
    by_schmidt = (sigma[1] if sigma.size > 1 else 0.0) <= math.sqrt(tol)
    if by_minors != by_schmidt:
        raise OracleDisagreement(
            f"minor criterion says {by_minors}, Schmidt criterion says {by_schmidt} at tol={tol}"
        )
    return by_minors


@dataclass(frozen=True)
class SplitMask:
    """Bipartition of a register of qudits: `side_a` against the rest."""

    dims: tuple[int, ...]
    side_a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        side = tuple(sorted(set(int(p) for p in self.side_a)))
        if not side or len(side) >= len(self.dims):
            raise ValueError("side_a must be a non-empty proper subset of positions")
        if side[0] < 0 or side[-1] >= len(self.dims):
            raise ValueError(f"positions {side} out of range for {len(self.dims)} qudits")
        object.__setattr__(self, "side_a", side)

    @property
    def side_b(self) -> tuple[int, ...]:
        return tuple(p for p in range(len(self.dims)) if p not in self.side_a)

    @property
    def shape(self) -> tuple[int, int]:
        return (
            math.prod(self.dims[p] for p in self.side_a),
            math.prod(self.dims[p] for p in self.side_b),
        )


def split_coefficient_matrix(s, split: SplitMask) -> np.ndarray:
    amps = s.amplitudes if isinstance(s, PureState) else np.asarray(s, dtype=np.complex128)
    if isinstance(s, ProductState):
        amps = s.flatten().amplitudes
    if amps.size != math.prod(split.dims):
        raise ShapeMismatch(f"state of dimension {amps.size} does not fit qudit dims {split.dims}")
    tensor = amps.reshape(split.dims).transpose(split.side_a + split.side_b)
    return tensor.reshape(split.shape)


def multipartite_split_residual(s, split: SplitMask) -> ResidualReport:
    return _report(split_coefficient_matrix(s, split))


def realign(u, shape) -> np.ndarray:
    """m^2 x n^2 realignment with ``R[i1*m + i2, j1*n + j2] = U[i1*n + j1, i2*n + j2]``."""
    m, n = shape
    u = as_matrix(getattr(u, "matrix", u), square=True)
    if u.shape[0] != m * n:
        raise ShapeMismatch(f"operator of dimension {u.shape[0]} does not fit shape {(m, n)}")
    return u.reshape(m, n, m, n).transpose(0, 2, 1, 3).reshape(m * m, n * n)


def operator_kron_residual(u, shape) -> ResidualReport:
    """Zero (to rounding) iff ``U = A (x) B`` with A m x m and B n x n."""
    return _report(realign(u, shape))


def gamma_condition_residual(n_matrix, shape) -> float:
    """Literal bilinear-form check of ``N = N_A (x) N_B`` over canonical bases.

    With ``gamma(p, q, r, s) = (p (x) r)^H N (q (x) s)`` this sums
    ``|gamma(p1,q1,r1,s1) gamma(p2,q2,r2,s2) - gamma(p1,q1,r2,s2) gamma(p2,q2,r1,s1)|``
    over every choice of basis vectors. Cost grows as (m n)^4, so keep the
    dimensions small.
    """
    m, n = shape
    nm = as_matrix(n_matrix, square=True)
    if nm.shape[0] != m * n:
        raise ShapeMismatch(f"matrix of dimension {nm.shape[0]} does not fit shape {(m, n)}")
    e_m = np.eye(m, dtype=np.complex128)
    e_n = np.eye(n, dtype=np.complex128)

    def gamma(p, q, r, s):
        return np.vdot(np.kron(p, r), nm @ np.kron(q, s))

    # gamma only depends on the pair (p, q) of first-factor vectors and the
    # pair (r, s) of second-factor vectors; tabulate it once
    a_pairs = list(itertools.product(range(m), repeat=2))
    b_pairs = list(itertools.product(range(n), repeat=2))
    table = np.array(
        [[gamma(e_m[p], e_m[q], e_n[r], e_n[s]) for (r, s) in b_pairs] for (p, q) in a_pairs]
    )
    total = 0.0
    for a1, a2 in itertools.product(range(len(a_pairs)), repeat=2):
        for b1, b2 in itertools.product(range(len(b_pairs)), repeat=2):
            lhs = table[a1, b1] * table[a2, b2]
            rhs = table[a1, b2] * table[a2, b1]
            total += abs(lhs - rhs)
    return float(total)


@dataclass(frozen=True)
class FilterResult:
    """Outcome of the separable-column check.

    ``passed`` is True when no column is a product vector. Otherwise
    ``column`` is the lowest offending column index and ``residual`` its
    minor residual.
    """

    passed: bool
    column: int | None = None
    residual: float | None = None

    def __bool__(self) -> bool:
        return self.passed


def column_separability_filter(u, shape, tol: float = DEFAULT_TOL) -> FilterResult:
    """Reject gates that map some computational basis product state to a product state.

    Column k of U is ``U|k>`` and ``|k>`` is itself a product state, so a
    separable column is already a counterexample to universal entangling.
    """
    m, n = shape
    mat = as_matrix(getattr(u, "matrix", u), square=True)
    if mat.shape[0] != m * n:
        raise ShapeMismatch(f"gate of dimension {mat.shape[0]} does not fit shape {(m, n)}")
    cols = mat.T.reshape(m * n, m, n)
    totals = residual_totals(cols)
    bad = np.flatnonzero(totals <= tol)
    if bad.size:
        k = int(bad[0])
        return FilterResult(False, k, float(totals[k]))
    return FilterResult(True)


def kappa_state() -> PureState:
    """Three-qutrit state (|000> - |011> - |112> + |120> - |202> + |221>)/sqrt(6)."""
    terms = {"000": 1, "011": -1, "112": -1, "120": 1, "202": -1, "221": 1}
    v = np.zeros(27, dtype=np.complex128)
    for ket, sign in terms.items():
        v[int(ket, 3)] = sign
    return PureState(v / math.sqrt(6))


def split_named(dims: Sequence[int], label: str) -> SplitMask:
    """Build a split from a label like ``"A|BC"`` or ``"AB|C"``."""
    left, _, _ = label.partition("|")
    return SplitMask(tuple(dims), tuple(ord(c) - ord("A") for c in left))
