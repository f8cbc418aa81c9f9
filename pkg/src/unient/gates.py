"""Qudit gates: generalized Pauli and Fourier families, U_H and the candidates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NotUnitary, ShapeUnknown, TranscriptionError, UnknownGate
from .linalg import TOL_UNITARY, as_matrix, dagger, is_unitary, principal_sqrt_unitary
from .states import BipartiteShape

SQRT_BRANCH = "principal: eigenphase theta in (-pi, pi] -> theta/2"

__all__ = [
    "SQRT_BRANCH",
    "UnitaryGate",
    "infer_shape",
    "identity",
    "shift_x",
    "clock_z",
    "pauli_y",
    "fourier",
    "hadamard_uh",
    "candidate",
    "sqrt_gate",
    "builtin",
    "BUILTIN_NAMES",
]

_DEFAULT_SHAPES = {12: BipartiteShape(3, 4), 16: BipartiteShape(4, 4)}


def infer_shape(d: int, shape=None) -> BipartiteShape | None:
    if shape is not None:
        shape = BipartiteShape(*shape).check()
        if shape.dim != d:
            raise ShapeUnknown(f"shape {tuple(shape)} does not factor dimension {d}")
        return shape
    return _DEFAULT_SHAPES.get(d)


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    """A d x d unitary with a label and an optional bipartite shape.

    `shape` is None for single-qudit gates whose dimension has no
    bipartite reading (e.g. F_3).
    """

    matrix: np.ndarray
    label: str
    shape: BipartiteShape | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        mat = np.array(as_matrix(self.matrix, square=True))
        if not is_unitary(mat, TOL_UNITARY):
            err = np.linalg.norm(dagger(mat) @ mat - np.eye(mat.shape[0]))
            raise NotUnitary(f"{self.label}: ||U^H U - I||_F = {err:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if self.shape is not None:
            shape = BipartiteShape(*self.shape).check()
            if shape.dim != mat.shape[0]:
                raise ShapeUnknown(f"shape {tuple(shape)} does not match dimension {mat.shape[0]}")
            object.__setattr__(self, "shape", shape)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def with_shape(self, shape) -> "UnitaryGate":
        return UnitaryGate(self.matrix, self.label, infer_shape(self.dim, shape), dict(self.provenance))

    def __matmul__(self, other):
        if isinstance(other, UnitaryGate):
            return UnitaryGate(
                self.matrix @ other.matrix,
                f"{self.label}*{other.label}",
                self.shape,
                {"expression": f"{self.label} * {other.label}", "source": "composed"},
            )
        return self.matrix @ np.asarray(other)


def _gate(mat, label, d, shape, expression, branch=None) -> UnitaryGate:
    prov = {"expression": expression, "sqrt_branch": branch, "source": "builtin"}
    return UnitaryGate(mat, label, infer_shape(d, shape), prov)


def _check_d(d: int) -> int:
    if int(d) < 2:
        raise ValueError(f"qudit dimension must be >= 2, got {d}")
    return int(d)


def identity(d: int, shape=None) -> UnitaryGate:
    d = _check_d(d)
    return _gate(np.eye(d), f"I{d}", d, shape, f"I_{d}")


def shift_x(d: int, shape=None) -> UnitaryGate:
    """Cyclic shift ``X|k> = |k+1 mod d>``."""
    d = _check_d(d)
    mat = np.zeros((d, d))
    mat[(np.arange(d) + 1) % d, np.arange(d)] = 1.0
    return _gate(mat, f"X{d}", d, shape, f"X_{d}")


def clock_z(d: int, shape=None) -> UnitaryGate:
    """Clock ``Z|k> = exp(2 pi i k/d)|k>``."""
    d = _check_d(d)
    return _gate(np.diag(np.exp(2j * np.pi * np.arange(d) / d)), f"Z{d}", d, shape, f"Z_{d}")


def pauli_y(d: int, shape=None) -> UnitaryGate:
    """``Y = i X Z``."""
    d = _check_d(d)
    mat = 1j * shift_x(d).matrix @ clock_z(d).matrix
    return _gate(mat, f"Y{d}", d, shape, f"i * X_{d} * Z_{d}")


def fourier(d: int, shape=None) -> UnitaryGate:
    """DFT matrix with entries ``exp(+2 pi i m n/d)/sqrt(d)``."""
    d = _check_d(d)
    k = np.arange(d)
    mat = np.exp(2j * np.pi * np.outer(k, k) / d) / math.sqrt(d)
    return _gate(mat, f"F{d}", d, shape, f"F_{d}")


# rows of U_H, '+' = +1/sqrt(12), '-' = -1/sqrt(12)
_UH_SIGNS = (
    "+-----------",
    "++-+---+++-+",
    "+++-+---+++-",
    "+-++-+---+++",
    "++-++-+---++",
    "+++-++-+---+",
    "++++-++-+---",
    "+-+++-++-+--",
    "+--+++-++-+-",
    "+---+++-++-+",
    "++---+++-++-",
    "+-+---+++-++",
)


def hadamard_uh() -> UnitaryGate:
    """The 12 x 12 sign-pattern gate on C^3 (x) C^4 proposed as a universal entangler."""
    signs = np.array([[1.0 if c == "+" else -1.0 for c in row] for row in _UH_SIGNS])
    mat = signs / math.sqrt(12)
    if signs.shape != (12, 12) or not is_unitary(mat, TOL_UNITARY):
        raise TranscriptionError("embedded U_H sign pattern is not unitary")
    return _gate(mat, "UH", 12, None, "U_H sign pattern")


def sqrt_gate(base: str, d: int, shape=None) -> UnitaryGate:
    """Principal square root of X_d, Z_d or F_d (Y_d is accepted too)."""
    ctor = {"X": shift_x, "Z": clock_z, "F": fourier, "Y": pauli_y}.get(base.upper())
    if ctor is None:
        raise ValueError(f"unknown base gate {base!r}")
    d = _check_d(d)
    shp = infer_shape(d, shape)
    if shp is None:
        raise ShapeUnknown(f"no default bipartite shape for d={d}; pass shape explicitly")
    mat = principal_sqrt_unitary(ctor(d).matrix)
    b = base.upper()
    return _gate(mat, f"SQRT_{b}{d}", d, shp, f"sqrt({b}_{d})", SQRT_BRANCH)


def candidate(name: str) -> UnitaryGate:
    """Universal-entangler candidates UE1..UE4.

    UE1 = sqrt(Y_12), UE2 = sqrt(Y_16),
    UE3 = sqrt(X_12)^H F_12 sqrt(X_12), UE4 likewise with d = 16.
    The daggered factor is the adjoint of the principal root.
    """
    key = name.upper().replace("_", "")
    if key in ("UE1", "UE2"):
        d = 12 if key == "UE1" else 16
        mat = principal_sqrt_unitary(pauli_y(d).matrix)
        expr = f"sqrt(Y_{d})"
    elif key in ("UE3", "UE4"):
        d = 12 if key == "UE3" else 16
        s = principal_sqrt_unitary(shift_x(d).matrix)
        mat = dagger(s) @ fourier(d).matrix @ s
        expr = f"adjoint(sqrt(X_{d})) * F_{d} * sqrt(X_{d})"
    else:
        raise UnknownGate(name)
    return _gate(mat, key, d, None, expr, SQRT_BRANCH)


def _registry() -> dict[str, Callable[[], UnitaryGate]]:
    reg: dict[str, Callable[[], UnitaryGate]] = {"UH": hadamard_uh}
    for d in (12, 16):
        for prefix, ctor in (("X", shift_x), ("Z", clock_z), ("Y", pauli_y), ("F", fourier), ("I", identity)):
            reg[f"{prefix}{d}"] = lambda c=ctor, d=d: c(d)
        for b in ("X", "Z", "F"):
            reg[f"SQRT_{b}{d}"] = lambda b=b, d=d: sqrt_gate(b, d)
    for k in ("UE1", "UE2", "UE3", "UE4"):
        reg[k] = lambda k=k: candidate(k)
    return reg


_REGISTRY = _registry()
BUILTIN_NAMES = tuple(_REGISTRY)


def builtin(name: str) -> UnitaryGate:
    try:
        return _REGISTRY[name.upper()]()
    except KeyError:
        raise UnknownGate(f"unknown builtin gate {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
