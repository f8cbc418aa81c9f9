"""Entanglement distributions over random product inputs, and the |kappa> report."""
from __future__ import annotations

import math

import numpy as np

from .io import DistributionReport
from .sampling import StreamKey, product_state_batch
from .separability import kappa_state, multipartite_split_residual, split_named, split_coefficient_matrix
from .states import BipartiteShape, entanglement_entropy

CHUNK = 20_000

__all__ = ["entanglement_samples", "entanglement_distribution", "kappa_report", "KAPPA_SPLITS"]

KAPPA_SPLITS = ("A|BC", "B|AC", "AB|C")


def entanglement_samples(gate, shape, samples: int, seed: int, log_base: float = math.e) -> np.ndarray:
    """Output entanglement of `gate` on `samples` random product inputs.

    Chunk ``k`` of the inputs is drawn from ``StreamKey(seed, k)``, so the
    result only depends on (gate, shape, samples, seed, log_base).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    shape = BipartiteShape(*shape).check()
    mat_t = np.asarray(gate.matrix).T
    out = np.empty(samples)
    for k, start in enumerate(range(0, samples, CHUNK)):
        count = min(CHUNK, samples - start)
        psi = product_state_batch(shape, count, StreamKey(seed, k))
        out[start : start + count] = entanglement_entropy(psi @ mat_t, shape, log_base)
    return out


def entanglement_distribution(gate, shape, samples: int, seed: int, log_base: float = math.e, bins: int = 60):
    if bins < 1:
        raise ValueError("bins must be >= 1")
    values = entanglement_samples(gate, shape, samples, seed, log_base)
    return DistributionReport.from_samples(
        values, gate_label=gate.label, shape=tuple(shape), log_base=log_base, seed=seed, bins=bins
    )


def kappa_report(log_base: float = math.e) -> list[dict]:
    """Residual and entanglement of |kappa> across each single-qutrit bipartition."""
    kappa = kappa_state()
    rows = []
    for label in KAPPA_SPLITS:
        split = split_named((3, 3, 3), label)
        rep = multipartite_split_residual(kappa, split)
        coeff = split_coefficient_matrix(kappa, split)
        rows.append(
            {
                "split": label,
                "total": rep.total,
                "max_minor": rep.max_minor,
                "minor_count": rep.minor_count,
                "entropy": entanglement_entropy(coeff.ravel(), split.shape, log_base),
            }
        )
    return rows
