"""Differential Evolution and the counterexample / minimum-entanglement searches.

A product input ``|a>|b>`` on C^m (x) C^n is encoded as a real genome of
length ``2(m+n)``: interleaved (re, im) pairs of `a` followed by those of
`b`, each component in [-1, 1]. Decoding normalizes both factors, so the
genome carries a harmless scale/phase gauge freedom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple

import numpy as np

from .errors import InvalidGenome
from .separability import column_separability_filter, residual_totals, state_kron_residual
from .states import (
    BipartiteShape,
    ProductState,
    PureState,
    apply_gate,
    entanglement_entropy,
    entropy_from_schmidt,
)

PENALTY = 1e10
MIN_FACTOR_NORM = 1e-6
# relative fitness spread below which a population is considered collapsed
STALL_TOL = 1e-10

__all__ = [
    "PENALTY",
    "DeConfig",
    "DeResult",
    "de_minimize",
    "restart_seed",
    "decode_product_state",
    "decode_batch",
    "encode_product_state",
    "separability_objective",
    "entanglement_objective",
    "RestartOutcome",
    "CounterexampleFound",
    "SurvivedBudget",
    "RejectedByColumnFilter",
    "MinEntanglementResult",
    "counterexample_search",
    "min_entanglement_search",
    "replay",
]


@dataclass(frozen=True)
class DeConfig:
    """DE/rand/1/bin settings shared by every search.

    `max_evals` is the total objective-evaluation budget of a search; it is
    split evenly over `restarts` independent runs. A run whose population
    collapses onto a non-solution stops early and its unspent evaluations
    fund further restarts.
    """

    population: int = 40
    weight_f: float = 0.7
    crossover_cr: float = 0.9
    max_evals: int = 1_000_000
    restarts: int = 8
    seed: int = 0
    residual_tol: float = 1e-9
    entropy_tol: float = 1e-8

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be >= 4 for rand/1 mutation")
        if not 0.0 < self.weight_f < 2.0:
            raise ValueError("weight_f must lie in (0, 2)")
        if not 0.0 <= self.crossover_cr <= 1.0:
            raise ValueError("crossover_cr must lie in [0, 1]")
        if self.max_evals < 1 or self.restarts < 1:
            raise ValueError("max_evals and restarts must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def evals_per_restart(self) -> int:
        return max(self.max_evals // self.restarts, 2 * self.population)


class DeResult(NamedTuple):
    best_genome: np.ndarray
    best_value: float
    evals_used: int
    history: np.ndarray  # best value after each generation
    stalled: bool


def restart_seed(seed: int, restart: int) -> int:
    """64-bit seed of restart `restart`, derived from the master seed."""
    state = np.random.SeedSequence([seed, restart]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def _partners(rng: np.random.Generator, n: int) -> np.ndarray:
    # three distinct indices per row, none equal to the row index
    keys = rng.random((n, n))
    np.fill_diagonal(keys, np.inf)
    return np.argsort(keys, axis=1, kind="stable")[:, :3]


def de_minimize(
    objective: Callable[[np.ndarray], float | np.ndarray],
    dimension: int,
    config: DeConfig,
    *,
    max_evals: int | None = None,
    threshold: float | None = None,
    vectorized: bool = False,
    stall_tol: float | None = None,
    seed: int | None = None,
) -> DeResult:
    """Minimize `objective` over [-1, 1]^dimension with DE/rand/1/bin.

    Selection is synchronous: every trial of a generation is built from the
    previous population, so a vectorized objective may score them in one call.

    Parameters
    ----------
    objective
        Maps a vector to a float, or (``vectorized=True``) a ``(k, dimension)``
        array to ``k`` floats.
    max_evals
        Evaluation cap for this run, defaults to ``config.max_evals``.
    threshold
        Stop as soon as the best value drops below it.
    stall_tol
        Stop once the population's fitness spread falls below
        ``stall_tol * |best|``.
    seed
        Overrides ``config.seed``.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    budget = config.max_evals if max_evals is None else int(max_evals)
    rng = np.random.Generator(np.random.PCG64(config.seed if seed is None else seed))
    npop, f, cr = config.population, config.weight_f, config.crossover_cr

    if vectorized:
        evaluate = lambda x: np.asarray(objective(x), dtype=float)  # noqa: E731
    else:
        evaluate = lambda x: np.array([float(objective(row)) for row in x])  # noqa: E731

    pop = rng.uniform(-1.0, 1.0, (npop, dimension))
    k0 = min(npop, budget)
    fit = np.full(npop, np.inf)
    fit[:k0] = evaluate(pop[:k0])
    evals = k0
    history = [fit.min()]
    stalled = False
    rows = np.arange(npop)

    while evals < budget:
        if threshold is not None and fit.min() < threshold:
            break
        r = _partners(rng, npop)
        mutant = pop[r[:, 0]] + f * (pop[r[:, 1]] - pop[r[:, 2]])
        cross = rng.random((npop, dimension)) < cr
        cross[rows, rng.integers(0, dimension, npop)] = True
        trial = np.clip(np.where(cross, mutant, pop), -1.0, 1.0)

        k = min(npop, budget - evals)
        trial_fit = evaluate(trial[:k])
        evals += k
        better = trial_fit <= fit[:k]
        idx = np.flatnonzero(better)
        pop[idx] = trial[idx]
        fit[idx] = trial_fit[idx]
        history.append(fit.min())

        if stall_tol is not None:
            lo = fit.min()
            if fit.max() - lo <= stall_tol * max(abs(lo), np.finfo(float).tiny):
                stalled = True
                break

    best = int(np.argmin(fit))
    return DeResult(pop[best].copy(), float(fit[best]), evals, np.array(history), stalled)


# ---------------------------------------------------------------- genomes


def decode_batch(genomes: np.ndarray, shape) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode a ``(k, 2(m+n))`` genome array.

    Returns normalized factors ``a`` (k, m), ``b`` (k, n) and a boolean mask
    of genomes whose factors were both long enough to normalize.
    """
    m, n = shape
    g = np.atleast_2d(np.asarray(genomes, dtype=float))
    if g.shape[-1] != 2 * (m + n):
        raise InvalidGenome(f"genome length {g.shape[-1]} != 2*(m+n) = {2 * (m + n)}")
    a = g[:, 0 : 2 * m : 2] + 1j * g[:, 1 : 2 * m : 2]
    b = g[:, 2 * m :: 2] + 1j * g[:, 2 * m + 1 :: 2]
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ok = (na >= MIN_FACTOR_NORM) & (nb >= MIN_FACTOR_NORM)
    a = a / np.where(ok, na, 1.0)[:, None]
    b = b / np.where(ok, nb, 1.0)[:, None]
    return a, b, ok


def decode_product_state(genome, shape) -> ProductState:
    a, b, ok = decode_batch(genome, shape)
    if not ok[0]:
        raise InvalidGenome("a factor of the genome is too close to zero to normalize")
    return ProductState(PureState(a[0]), PureState(b[0]))


def encode_product_state(state: ProductState) -> np.ndarray:
    """Inverse of `decode_product_state` up to gauge (scaled into [-1, 1])."""
    parts = []
    for factor in (state.factor_a, state.factor_b):
        v = factor.amplitudes
        v = v / max(np.abs(v.real).max(), np.abs(v.imag).max())
        parts.append(np.column_stack([v.real, v.imag]).ravel())
    return np.concatenate(parts)


def _outputs(gate, shape, genomes):
    m, n = shape
    a, b, ok = decode_batch(genomes, shape)
    psi = (a[:, :, None] * b[:, None, :]).reshape(len(a), m * n)
    out = psi @ np.asarray(gate.matrix).T
    return out.reshape(len(a), m, n), ok


def separability_objective(gate, shape) -> Callable[[np.ndarray], float | np.ndarray]:
    """Genome -> minor residual of ``U|a>|b>``.

    The returned callable accepts a single genome (returns a float) or a 2-D
    array of genomes (returns an array). Degenerate genomes score `PENALTY`.
    """
    shape = BipartiteShape(*shape)

    def objective(genomes):
        single = np.ndim(genomes) == 1
        out, ok = _outputs(gate, shape, genomes)
        vals = np.where(ok, residual_totals(out), PENALTY)
        return float(vals[0]) if single else vals

    return objective


def entanglement_objective(gate, shape, log_base: float = math.e):
    """Genome -> von Neumann entanglement of ``U|a>|b>``."""
    shape = BipartiteShape(*shape)

    def objective(genomes):
        single = np.ndim(genomes) == 1
        out, ok = _outputs(gate, shape, genomes)
        sigma = np.linalg.svd(out, compute_uv=False)
        vals = np.where(ok, entropy_from_schmidt(sigma, log_base), PENALTY)
        return float(vals[0]) if single else vals

    return objective


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class RestartOutcome:
    index: int
    seed: int
    best_value: float
    evals_used: int
    stalled: bool
    best_genome: tuple[float, ...]


@dataclass(frozen=True)
class CounterexampleFound:
    state: ProductState
    residual: float
    entanglement: float
    evals_used: int
    restarts: tuple[RestartOutcome, ...] = ()
    kind: str = field(default="CounterexampleFound", init=False)


@dataclass(frozen=True)
class SurvivedBudget:
    best_residual: float
    best_entanglement: float
    best_state: ProductState
    evals_used: int
    restarts: tuple[RestartOutcome, ...] = ()
    kind: str = field(default="SurvivedBudget", init=False)


@dataclass(frozen=True)
class RejectedByColumnFilter:
    column: int
    residual: float
    shape: BipartiteShape
    kind: str = field(default="RejectedByColumnFilter", init=False)

    @property
    def state(self) -> ProductState:
        """The computational basis product state mapped onto the separable column."""
        m, n = self.shape
        ea = np.zeros(m, dtype=complex)
        eb = np.zeros(n, dtype=complex)
        ea[self.column // n] = 1.0
        eb[self.column % n] = 1.0
        return ProductState(PureState(ea), PureState(eb))


Verdict = CounterexampleFound | SurvivedBudget | RejectedByColumnFilter


@dataclass(frozen=True)
class MinEntanglementResult:
    best_entanglement: float
    best_state: ProductState
    evals_used: int
    log_base: float
    restarts: tuple[RestartOutcome, ...] = ()


def _run_restarts(
    objective,
    shape: BipartiteShape,
    config: DeConfig,
    threshold: float,
    accept: Callable[[RestartOutcome], bool],
    on_restart: Callable[[RestartOutcome], None] | None,
    resume: Mapping[int, RestartOutcome] | None,
) -> tuple[list[RestartOutcome], int, RestartOutcome | None]:
    dim = 2 * (shape.m + shape.n)
    outcomes: list[RestartOutcome] = []
    used = 0
    index = 0
    while config.max_evals - used >= config.population:
        budget = min(config.evals_per_restart, config.max_evals - used)
        if resume and index in resume:
            out = resume[index]
        else:
            seed = restart_seed(config.seed, index)
            res = de_minimize(
                objective,
                dim,
                config,
                max_evals=budget,
                threshold=threshold,
                vectorized=True,
                stall_tol=STALL_TOL,
                seed=seed,
            )
            out = RestartOutcome(
                index, seed, res.best_value, res.evals_used, res.stalled, tuple(res.best_genome.tolist())
            )
            if on_restart is not None:
                on_restart(out)
        outcomes.append(out)
        used += out.evals_used
        index += 1
        if accept(out):
            return outcomes, used, out
    return outcomes, used, None


def counterexample_search(
    gate,
    shape,
    config: DeConfig = DeConfig(),
    *,
    skip_filter: bool = False,
    on_restart: Callable[[RestartOutcome], None] | None = None,
    resume: Mapping[int, RestartOutcome] | None = None,
):
    """Look for a product input that `gate` maps to a product output.

    The separable-column check runs first (unless `skip_filter`); a failing
    column is already a certified counterexample. Otherwise independent DE
    runs minimize the output's minor residual. A run only counts as a
    counterexample when the residual is below ``config.residual_tol`` and the
    recomputed output entanglement is below ``config.entropy_tol``.

    `on_restart` is called after each finished run (e.g. to checkpoint);
    `resume` maps restart indices to outcomes to replay instead of rerunning.
    """
    shape = BipartiteShape(*shape).check()
    if not skip_filter:
        filt = column_separability_filter(gate, shape)
        if not filt.passed:
            return RejectedByColumnFilter(filt.column, filt.residual, shape)

    objective = separability_objective(gate, shape)

    def confirm(out: RestartOutcome):
        state = decode_product_state(np.array(out.best_genome), shape)
        image = apply_gate(gate, state.flatten())
        return state, state_kron_residual(image, shape).total, entanglement_entropy(image, shape)

    def accept(out: RestartOutcome) -> bool:
        if out.best_value >= config.residual_tol:
            return False
        _, res, ent = confirm(out)
        return res < config.residual_tol and ent < config.entropy_tol

    outcomes, used, hit = _run_restarts(
        objective, shape, config, config.residual_tol / 10, accept, on_restart, resume
    )
    if hit is not None:
        state, res, ent = confirm(hit)
        return CounterexampleFound(state, res, ent, used, tuple(outcomes))
    best = min(outcomes, key=lambda o: o.best_value)
    state, res, ent = confirm(best)
    return SurvivedBudget(res, ent, state, used, tuple(outcomes))


def min_entanglement_search(
    gate,
    shape,
    config: DeConfig = DeConfig(),
    log_base: float = math.e,
    *,
    skip_filter: bool = False,
    on_restart: Callable[[RestartOutcome], None] | None = None,
    resume: Mapping[int, RestartOutcome] | None = None,
) -> MinEntanglementResult:
    """Smallest output entanglement DE can reach over product inputs.

    Raises ValueError for gates with a separable column unless
    `skip_filter` is set (their minimum is trivially zero).
    """
    shape = BipartiteShape(*shape).check()
    if not skip_filter:
        filt = column_separability_filter(gate, shape)
        if not filt.passed:
            raise ValueError(
                f"column {filt.column} is separable, minimum entanglement is 0; use skip_filter to search anyway"
            )
    objective = entanglement_objective(gate, shape, log_base)
    outcomes, used, _ = _run_restarts(
        objective, shape, config, config.entropy_tol / 10, lambda o: o.best_value < config.entropy_tol / 10,
        on_restart, resume,
    )
    best = min(outcomes, key=lambda o: o.best_value)
    state = decode_product_state(np.array(best.best_genome), shape)
    ent = entanglement_entropy(apply_gate(gate, state.flatten()), shape, log_base)
    return MinEntanglementResult(ent, state, used, log_base, tuple(outcomes))


def replay(records: Iterable[dict]) -> dict[int, RestartOutcome]:
    """Rebuild a `resume` mapping from serialized restart records."""
    out = {}
    for rec in records:
        o = RestartOutcome(
            int(rec["index"]),
            int(rec["seed"]),
            float(rec["best_value"]),
            int(rec["evals_used"]),
            bool(rec["stalled"]),
            tuple(float(x) for x in rec["best_genome"]),
        )
        out[o.index] = o
    return out
