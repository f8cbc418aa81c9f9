import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import differential_evolution

from unient import gates
from unient.errors import InvalidGenome
from unient.search import (
    PENALTY,
    STALL_TOL,
    DeConfig,
    de_minimize,
    decode_product_state,
    encode_product_state,
    entanglement_objective,
    min_entanglement_search,
    replay,
    restart_seed,
    counterexample_search,
    separability_objective,
)
from unient.separability import state_kron_residual
from unient.states import apply_gate, entanglement_entropy

SPHERE = lambda x: float(np.sum(np.asarray(x) ** 2))  # noqa: E731


def sphere_batch(x):
    return np.sum(x**2, axis=1)


def test_sphere_reference_oracle():
    # reference DE run: confirms the target is reachable with these settings
    ref = differential_evolution(
        SPHERE, [(-1, 1)] * 14, strategy="rand1bin", popsize=3, mutation=0.7,
        recombination=0.9, maxiter=1100, tol=0, atol=0, polish=False, seed=1, init="random",
    )
    assert ref.fun < 1e-10 and ref.nfev <= 50_000


def test_sphere_14d():
    res = de_minimize(sphere_batch, 14, DeConfig(max_evals=50_000), vectorized=True)
    assert res.best_value < 1e-10
    assert res.evals_used <= 50_000


def test_scalar_and_vectorized_paths_agree():
    cfg = DeConfig(max_evals=4000, seed=5)
    a = de_minimize(SPHERE, 6, cfg)
    b = de_minimize(sphere_batch, 6, cfg, vectorized=True)
    assert a.best_value == b.best_value
    np.testing.assert_array_equal(a.best_genome, b.best_genome)


def test_constant_objective():
    res = de_minimize(lambda x: 3.25, 5, DeConfig(max_evals=500))
    assert res.best_value == 3.25
    assert res.evals_used == 500


def test_bit_identical_runs():
    cfg = DeConfig(max_evals=3000, seed=11)
    a = de_minimize(sphere_batch, 8, cfg, vectorized=True)
    b = de_minimize(sphere_batch, 8, cfg, vectorized=True)
    assert a.best_genome.tobytes() == b.best_genome.tobytes()
    assert a.history.tobytes() == b.history.tobytes()


def test_history_monotone_and_in_box():
    rastrigin = lambda x: np.sum(x**2 - np.cos(8 * x), axis=1)  # noqa: E731
    res = de_minimize(rastrigin, 10, DeConfig(max_evals=8000, seed=2), vectorized=True)
    assert np.all(np.diff(res.history) <= 0)
    assert np.all(np.abs(res.best_genome) <= 1)


def test_threshold_and_stall_exit():
    cfg = DeConfig(max_evals=200_000)
    early = de_minimize(sphere_batch, 4, cfg, vectorized=True, threshold=1e-3)
    assert early.best_value < 1e-3 and early.evals_used < 20_000
    flat = de_minimize(lambda x: np.ones(len(x)), 4, cfg, vectorized=True, stall_tol=STALL_TOL)
    assert flat.stalled and flat.evals_used == 2 * cfg.population


def test_config_validation():
    with pytest.raises(ValueError):
        DeConfig(population=3)
    with pytest.raises(ValueError):
        DeConfig(weight_f=2.0)
    with pytest.raises(ValueError):
        DeConfig(crossover_cr=1.5)
    assert DeConfig(max_evals=1000, restarts=4).evals_per_restart == 250


def test_restart_seeds_distinct():
    seeds = {restart_seed(0, r) for r in range(100)}
    assert len(seeds) == 100
    assert restart_seed(7, 3) == restart_seed(7, 3)


# ---------------------------------------------------------------- genomes


def test_decode_basis_genome():
    g = np.zeros(14)
    g[0] = g[6] = 1.0
    st_ = decode_product_state(g, (3, 4))
    np.testing.assert_array_equal(st_.flatten().amplitudes, np.eye(12)[0])


def test_decode_interleaving():
    g = np.array([0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    s = decode_product_state(g, (2, 2))
    np.testing.assert_allclose(s.factor_a.amplitudes, [1j, 0])
    np.testing.assert_allclose(s.factor_b.amplitudes, [1, 0])


def test_decode_invalid():
    g = np.zeros(14)
    g[6] = 1.0
    with pytest.raises(InvalidGenome):
        decode_product_state(g, (3, 4))
    with pytest.raises(InvalidGenome):
        decode_product_state(np.ones(13), (3, 4))
    assert separability_objective(gates.identity(12), (3, 4))(np.zeros(14)) == PENALTY


genomes = st.lists(st.floats(-1, 1), min_size=16, max_size=16).filter(
    lambda v: np.linalg.norm(v[:8]) > 1e-3 and np.linalg.norm(v[8:]) > 1e-3
)


@settings(max_examples=60, deadline=None)
@given(genomes)
def test_decoded_state_is_product_and_scale_invariant(values):
    g = np.array(values)
    s = decode_product_state(g, (4, 4)).flatten()
    assert entanglement_entropy(s, (4, 4)) < 1e-10
    half = decode_product_state(0.5 * g, (4, 4)).flatten()
    assert np.linalg.norm(s.amplitudes - half.amplitudes) < 1e-12


def test_encode_round_trip(rng):
    g = rng.uniform(-1, 1, 14)
    s = decode_product_state(g, (3, 4))
    g2 = encode_product_state(s)
    assert np.abs(g2).max() <= 1
    s2 = decode_product_state(g2, (3, 4))
    assert abs(abs(np.vdot(s.flatten().amplitudes, s2.flatten().amplitudes)) - 1) < 1e-12


# ---------------------------------------------------------------- objectives


def test_objective_on_uh_basis_input():
    g = np.zeros(14)
    g[0] = g[6] = 1.0
    assert separability_objective(gates.hadamard_uh(), (3, 4))(g) < 1e-12
    assert entanglement_objective(gates.hadamard_uh(), (3, 4))(g) < 1e-12


def test_objective_identity(rng):
    f = separability_objective(gates.identity(12), (3, 4))
    assert f(rng.uniform(-1, 1, (500, 14))).max() < 1e-10


def test_objective_ue1_positive(rng):
    f = separability_objective(gates.candidate("UE1"), (3, 4))
    assert f(rng.uniform(-1, 1, (1000, 14))).min() > 1e-6


def test_objective_batch_matches_single(rng):
    gate = gates.candidate("UE2")
    f = separability_objective(gate, (4, 4))
    h = entanglement_objective(gate, (4, 4), 2.0)
    batch = rng.uniform(-1, 1, (5, 16))
    np.testing.assert_allclose(f(batch), [f(g) for g in batch], rtol=1e-12)
    for g, v in zip(batch, h(batch)):
        image = apply_gate(gate, decode_product_state(g, (4, 4)).flatten())
        assert v == pytest.approx(entanglement_entropy(image, (4, 4), 2.0), abs=1e-12)


# ---------------------------------------------------------------- searches

SMALL = DeConfig(max_evals=40_000, restarts=4, seed=0)


def test_search_rejects_uh_by_filter():
    v = counterexample_search(gates.hadamard_uh(), (3, 4))
    assert v.kind == "RejectedByColumnFilter" and v.column == 0
    image = apply_gate(gates.hadamard_uh(), v.state.flatten())
    assert state_kron_residual(image, (3, 4)).total < 1e-12


@pytest.mark.parametrize("name", ["SQRT_X12", "SQRT_F16"])
def test_search_finds_counterexample_and_is_sound(name):
    gate = gates.builtin(name)
    v = counterexample_search(gate, gate.shape, DeConfig(max_evals=1_000_000))
    assert v.kind == "CounterexampleFound"
    assert v.residual < 1e-9 and v.entanglement < 1e-8
    # independent re-evaluation
    image = gate.matrix @ np.kron(v.state.factor_a.amplitudes, v.state.factor_b.amplitudes)
    sigma = np.linalg.svd(image.reshape(gate.shape), compute_uv=False)
    assert sigma[1] < 1e-4
    assert state_kron_residual(image, gate.shape).total < 1e-9


def test_search_ue1_survives_short_budget():
    v = counterexample_search(gates.candidate("UE1"), (3, 4), SMALL)
    assert v.kind == "SurvivedBudget"
    assert v.best_residual > 1e-6 and v.best_entanglement > 0
    assert v.evals_used <= SMALL.max_evals
    assert [o.index for o in v.restarts] == list(range(len(v.restarts)))


def test_search_is_deterministic():
    a = counterexample_search(gates.candidate("UE2"), (4, 4), SMALL)
    b = counterexample_search(gates.candidate("UE2"), (4, 4), SMALL)
    assert a == b


def test_restart_order_does_not_matter():
    gate = gates.candidate("UE1")
    v = counterexample_search(gate, (3, 4), SMALL)
    obj = separability_objective(gate, (3, 4))
    rerun = [
        de_minimize(obj, 14, SMALL, max_evals=SMALL.evals_per_restart, threshold=SMALL.residual_tol / 10,
                    vectorized=True, stall_tol=STALL_TOL, seed=restart_seed(SMALL.seed, o.index)).best_value
        for o in reversed(v.restarts)
    ]
    assert sorted(rerun) == sorted(o.best_value for o in v.restarts)


@pytest.mark.parametrize("name", ["X12", "Z12", "F12", "UH", "SQRT_Z12"])
def test_filter_and_de_agree(name):
    gate = gates.builtin(name)
    assert counterexample_search(gate, gate.shape).kind == "RejectedByColumnFilter"
    v = counterexample_search(gate, gate.shape, DeConfig(max_evals=1_000_000), skip_filter=True)
    assert v.kind == "CounterexampleFound"


def test_checkpoint_and_resume():
    gate = gates.candidate("UE1")
    seen = []
    full = counterexample_search(gate, (3, 4), SMALL, on_restart=seen.append)
    assert tuple(seen) == full.restarts
    records = [o.__dict__ | {"best_genome": list(o.best_genome)} for o in seen[:2]]
    calls = []
    resumed = counterexample_search(gate, (3, 4), SMALL, on_restart=calls.append, resume=replay(records))
    assert resumed == full
    assert [o.index for o in calls] == [o.index for o in seen[2:]]


def test_min_entanglement_uh_skip_filter():
    res = min_entanglement_search(gates.hadamard_uh(), (3, 4), DeConfig(max_evals=200_000), skip_filter=True)
    assert res.best_entanglement < 1e-8
    with pytest.raises(ValueError):
        min_entanglement_search(gates.hadamard_uh(), (3, 4))


def test_min_entanglement_identity():
    res = min_entanglement_search(gates.identity(16), (4, 4), DeConfig(max_evals=2_000), skip_filter=True)
    assert res.best_entanglement < 1e-10


def test_min_entanglement_ue3_positive():
    res = min_entanglement_search(gates.candidate("UE3"), (3, 4), SMALL, log_base=2)
    assert res.best_entanglement > 1e-8
    assert res.log_base == 2
    image = apply_gate(gates.candidate("UE3"), res.best_state.flatten())
    assert res.best_entanglement == pytest.approx(entanglement_entropy(image, (3, 4), 2), abs=1e-14)
    assert math.isfinite(res.best_entanglement)
