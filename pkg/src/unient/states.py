"""Pure bipartite states, Schmidt spectra and von Neumann entanglement."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ShapeMismatch
from .linalg import singular_values

# Schmidt coefficients below this are treated as exact zeros
SCHMIDT_FLOOR = 1e-12
NORM_TOL = 1e-10

__all__ = [
    "BipartiteShape",
    "PureState",
    "ProductState",
    "basis_state",
    "bell_state",
    "coefficient_matrix",
    "schmidt_coefficients",
    "entanglement_entropy",
    "entropy_from_schmidt",
    "apply_gate",
]


class BipartiteShape(NamedTuple):
    m: int
    n: int

    @property
    def dim(self) -> int:
        return self.m * self.n

    def check(self) -> "BipartiteShape":
        if self.m < 2 or self.n < 2:
            raise ShapeMismatch(f"bipartite factors must both be >= 2, got {tuple(self)}")
        return self


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm amplitude vector.

    Amplitude ``k`` (0-based) multiplies the k-th computational basis ket;
    for a bipartite shape ``(m, n)`` that is ``|k // n>|k % n>``.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ravel(np.asarray(self.amplitudes, dtype=np.complex128))
        if amps.size == 0 or not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be a non-empty finite vector")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, vector) -> "PureState":
        v = np.ravel(np.asarray(vector, dtype=np.complex128))
        return cls(v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __len__(self) -> int:
        return self.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __eq__(self, other):
        # exact (bitwise) equality; use a tolerance for numerical comparisons
        if not isinstance(other, PureState):
            return NotImplemented
        return self.amplitudes.shape == other.amplitudes.shape and bool(np.all(self.amplitudes == other.amplitudes))

    __hash__ = None


@dataclass(frozen=True)
class ProductState:
    factor_a: PureState
    factor_b: PureState

    @property
    def shape(self) -> BipartiteShape:
        return BipartiteShape(self.factor_a.dim, self.factor_b.dim)

    def flatten(self) -> PureState:
        return PureState(np.kron(self.factor_a.amplitudes, self.factor_b.amplitudes))


def basis_state(dim: int, index: int) -> PureState:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return PureState(v)


def bell_state() -> PureState:
    """(|00> + |11>)/sqrt(2)."""
    return PureState(np.array([1, 0, 0, 1]) / math.sqrt(2))


def _amplitudes(s) -> np.ndarray:
    if isinstance(s, ProductState):
        s = s.flatten()
    if isinstance(s, PureState):
        return s.amplitudes
    return np.asarray(s, dtype=np.complex128)


def coefficient_matrix(s, shape) -> np.ndarray:
    """Reshape a state on C^m (x) C^n to its m x n coefficient matrix.

    ``M[i, j]`` is the amplitude at flat index ``i*n + j``. A stack of states
    with shape ``(..., m*n)`` is reshaped to ``(..., m, n)``.
    """
    m, n = shape
    amps = _amplitudes(s)
    if amps.shape[-1] != m * n:
        raise ShapeMismatch(f"state of dimension {amps.shape[-1]} does not fit shape {(m, n)}")
    return amps.reshape(amps.shape[:-1] + (m, n))


def schmidt_coefficients(s, shape) -> np.ndarray:
    return singular_values(coefficient_matrix(s, shape))


def entropy_from_schmidt(sigma, log_base: float = math.e) -> np.ndarray | float:
    """-sum p log p along the last axis, p = sigma^2 renormalized, 0 log 0 = 0.

    Renormalizing makes a single surviving coefficient give exactly 0.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = np.where(sigma < SCHMIDT_FLOOR, 0.0, sigma) ** 2
    p = p / p.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    ent = -terms.sum(axis=-1)
    if log_base != math.e:
        ent = ent / math.log(log_base)
    # rounding can leave -0.0 or -1e-17 on separable inputs
    ent = np.maximum(ent, 0.0)
    return float(ent) if np.ndim(ent) == 0 else ent


def entanglement_entropy(s, shape, log_base: float = math.e):
    """Von Neumann entropy of either reduced state of a pure bipartite state.

    Works on a single state or on a stack of amplitude vectors ``(N, m*n)``.
    """
    return entropy_from_schmidt(schmidt_coefficients(s, shape), log_base)


def apply_gate(u, s) -> PureState:
    """Return ``U|s>``."""
    mat = getattr(u, "matrix", u)
    mat = np.asarray(mat, dtype=np.complex128)
    amps = _amplitudes(s)
    if mat.shape != (amps.size, amps.size):
        raise ShapeMismatch(f"gate of shape {mat.shape} cannot act on a {amps.size}-dim state")
    return PureState(mat @ amps)
