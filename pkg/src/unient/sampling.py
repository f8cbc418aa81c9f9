"""Seeded Haar sampling of pure states, product states and unitaries.

Every draw is a pure function of a ``StreamKey``: the pair
``(master_seed, stream_index)`` (plus an internal sub-stream tag) is fed to
``numpy.random.SeedSequence`` and a fresh PCG64 generator is built from it,
so no generator state is shared between calls.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .gates import UnitaryGate, infer_shape
from .states import BipartiteShape, ProductState, PureState

GENERATOR = f"numpy-{np.__version__}/SeedSequence/PCG64"
_UNDERFLOW = 1e-150

__all__ = [
    "GENERATOR",
    "StreamKey",
    "generator",
    "complex_gaussian",
    "haar_state",
    "random_product_state",
    "haar_unitary",
    "product_state_batch",
    "haar_state_batch",
]


class StreamKey(NamedTuple):
    master_seed: int
    stream_index: int = 0


def generator(key: StreamKey | int, *tags: int) -> np.random.Generator:
    key = StreamKey(*key) if isinstance(key, tuple) else StreamKey(int(key))
    entropy = [int(key.master_seed) & (2**64 - 1), int(key.stream_index) & (2**64 - 1), *tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def complex_gaussian(rng: np.random.Generator, size) -> np.ndarray:
    """Standard complex normal samples, E|z|^2 = 1."""
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return z / np.sqrt(2)


def _normalize_rows(v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    low = norms[..., 0] < _UNDERFLOW
    while np.any(low):
        v[low] = complex_gaussian(rng, (int(low.sum()), v.shape[-1]))
        norms = np.linalg.norm(v, axis=-1, keepdims=True)
        low = norms[..., 0] < _UNDERFLOW
    return v / norms


def haar_state(d: int, key: StreamKey) -> PureState:
    rng = generator(key, 0)
    v = _normalize_rows(complex_gaussian(rng, (1, d)), rng)
    return PureState(v[0])


def random_product_state(shape, key: StreamKey) -> ProductState:
    """Independent Haar factors on each side of the bipartition."""
    m, n = shape
    ra, rb = generator(key, 1), generator(key, 2)
    a = _normalize_rows(complex_gaussian(ra, (1, m)), ra)[0]
    b = _normalize_rows(complex_gaussian(rb, (1, n)), rb)[0]
    return ProductState(PureState(a), PureState(b))


def haar_unitary(d: int, key: StreamKey, shape=None) -> UnitaryGate:
    """Haar-distributed unitary from QR of a complex Ginibre matrix.

    Columns of Q are rephased so that diag(R) is real positive; without this
    correction the QR output is not Haar distributed.
    """
    rng = generator(key, 3)
    z = complex_gaussian(rng, (d, d))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    return UnitaryGate(
        q,
        f"HAAR{d}",
        infer_shape(d, shape),
        {"expression": f"haar_unitary({d}, {tuple(key)})", "source": "random", "generator": GENERATOR},
    )


def haar_state_batch(d: int, count: int, key: StreamKey) -> np.ndarray:
    """``(count, d)`` array of Haar-random unit vectors."""
    rng = generator(key, 4)
    return _normalize_rows(complex_gaussian(rng, (count, d)), rng)


def product_state_batch(shape, count: int, key: StreamKey) -> np.ndarray:
    """``(count, m*n)`` array of flattened random product states."""
    m, n = BipartiteShape(*shape)
    ra, rb = generator(key, 5), generator(key, 6)
    a = _normalize_rows(complex_gaussian(ra, (count, m)), ra)
    b = _normalize_rows(complex_gaussian(rb, (count, n)), rb)
    return (a[:, :, None] * b[:, None, :]).reshape(count, m * n)
