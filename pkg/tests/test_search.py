from itertools import combinations

import numpy as np
import pytest

from shadamard.core import QshMatrix, ShMatrix, ShVector, gram_matrix, is_hadamard, sylvester
from shadamard.errors import CapacityError, SearchFailure
from shadamard.graph import build_ortho_graph, find_cliques
from shadamard.search import (
    LINEAR_SCHEDULE,
    AnnealerState,
    Proposal,
    SearchBudget,
    ThresholdSchedule,
    energy,
    exhaustive_search,
    osa_construct,
    osa_step,
    random_qsh_state,
    rvs_construct,
)
from shadamard.vectorspace import enumerate_sh_vectors

V = ShVector.from_string


def column_sets(matrices):
    return {frozenset(c.bits for c in H.columns[1:]) for H in matrices}


# ---------------------------------------------------------------- exhaustive


def test_exhaustive_k1():
    result = exhaustive_search(1)
    assert result.candidates_examined == 20
    assert len(result) == 8
    assert result.route == "combinations"
    for H in result:
        assert np.array_equal(gram_matrix(H), 4 * np.eye(4))
        bits = [c.bits for c in H.columns[1:]]
        assert bits == sorted(bits)
    g = build_ortho_graph(1)
    triangles = {frozenset(g.vectors[i].bits for i in c) for c in find_cliques(g)}
    assert column_sets(result) == triangles


def test_exhaustive_routes_agree_at_k1():
    via_cliques = exhaustive_search(1, max_candidates=5)
    assert via_cliques.route == "cliques"
    assert [H.to_array().tolist() for H in via_cliques] == [
        H.to_array().tolist() for H in exhaustive_search(1)
    ]


def test_exhaustive_k2_via_cliques():
    result = exhaustive_search(2)
    assert result.route == "cliques"
    assert len(result) == 3840
    assert len(column_sets(result)) == 3840
    assert all(is_hadamard(H.to_array()) for H in result.matrices[::97])


def test_exhaustive_capacity():
    with pytest.raises(CapacityError) as info:
        exhaustive_search(4)
    assert info.value.required > 10**6


# -------------------------------------------------------------------- energy


def test_energy_examples():
    assert energy(ShMatrix.from_array(sylvester(3))) == 0
    Q = QshMatrix.from_sh_columns([V("++--"), V("--++"), V("+-+-")])
    assert energy(Q) == 8
    swapped = QshMatrix.from_sh_columns([V("+-+-"), V("++--"), V("--++")])
    assert energy(swapped) == 8


def test_energy_zero_iff_hadamard_all_k1_candidates():
    vecs = list(enumerate_sh_vectors(1))
    for combo in combinations(vecs, 3):
        Q = QshMatrix.from_sh_columns(combo)
        assert (energy(Q) == 0) == is_hadamard(Q)
        assert energy(Q) % 2 == 0


@pytest.mark.parametrize("k", [2, 3])
def test_energy_zero_iff_hadamard_random(k):
    rng = np.random.default_rng(k)
    for _ in range(50):
        s = random_qsh_state(k, rng)
        assert s.energy == energy(s.matrix) > 0
        assert s.energy % 2 == 0
        assert not is_hadamard(s.matrix)


# ----------------------------------------------------------------- annealing


def test_schedule_shapes():
    lin = LINEAR_SCHEDULE
    assert lin.threshold(0, 101) == 0.5
    assert lin.threshold(50, 101) == pytest.approx(0.75)
    assert lin.threshold(100, 101) == 1.0
    geo = ThresholdSchedule()
    assert geo.threshold(0, 11) == pytest.approx(0.5)
    assert geo.threshold(10, 11) == pytest.approx(1 - 1e-4)
    v = geo.values(np.arange(11), 11)
    assert np.all(np.diff(v) > 0)
    met = ThresholdSchedule.parse("metropolis:10:2")
    assert met.values(0, 5) == pytest.approx(10) and met.values(4, 5) == pytest.approx(2)
    for text in ("linear:0.5:1", "geometric:0.25:0.9", "metropolis:10:2"):
        assert ThresholdSchedule.parse(text).text() == text
    with pytest.raises(ValueError):
        ThresholdSchedule(start_p=0.9, end_p=0.5)
    with pytest.raises(ValueError):
        ThresholdSchedule.parse("cubic:0.5:1.0")


def test_incremental_energy_matches_recompute():
    rng = np.random.default_rng(11)
    state = random_qsh_state(3, rng)
    sched = ThresholdSchedule(start_p=0.3, end_p=0.6, shape="linear", total_steps=10_000)
    for _ in range(10_000):
        state = osa_step(state, sched, rng)
        if state.energy == 0:
            break
        assert (state.matrix == -1).sum(axis=0)[1:].tolist() == [6] * 11
    assert np.array_equal(state.gram, gram_matrix(state.matrix))
    assert state.energy == energy(state.matrix)


def test_incremental_energy_every_step():
    rng = np.random.default_rng(12)
    state = random_qsh_state(2, rng)
    sched = ThresholdSchedule(start_p=0.5, end_p=0.5, shape="linear")
    for _ in range(2_000):
        state = osa_step(state, sched, rng)
        assert state.energy == energy(state.matrix)
        if state.energy == 0:
            break


def _uphill_proposal(state):
    m = state.order
    for c in range(1, m):
        for i in range(m // 2):
            for j in range(m // 2):
                p = Proposal(c, i, j, 0.5)
                trial = osa_step(state, ThresholdSchedule(start_p=0.0, end_p=0.0, shape="linear"), proposal=p)
                if trial.energy > state.energy:
                    return p
    raise AssertionError("no uphill move")


def test_uphill_rejected_at_threshold_one():
    state = random_qsh_state(2, np.random.default_rng(3))
    p = _uphill_proposal(state)
    greedy = ThresholdSchedule(start_p=1.0, end_p=1.0, shape="linear")
    for u in (0.0, 0.5, 0.999999):
        out = osa_step(state, greedy, proposal=Proposal(p.column, p.neg_index, p.pos_index, u))
        assert out.energy == state.energy
        assert np.array_equal(out.matrix, state.matrix)


def test_uphill_acceptance_frequency_at_half():
    state = random_qsh_state(2, np.random.default_rng(4))
    p = _uphill_proposal(state)
    half = ThresholdSchedule(start_p=0.5, end_p=0.5, shape="linear")
    rng = np.random.default_rng(5)
    n = 10_000
    accepted = 0
    for u in rng.random(n):
        out = osa_step(state, half, proposal=Proposal(p.column, p.neg_index, p.pos_index, float(u)))
        accepted += out.energy != state.energy
    assert abs(accepted / n - 0.5) < 3 * np.sqrt(0.25 / n)


def test_downhill_move_to_zero_is_accepted():
    H = sylvester(3)
    Q = H.copy()
    # swap the first -1 and first +1 of column 1 (rows 1 and 0)
    Q[0, 1], Q[1, 1] = -1, 1
    state = AnnealerState.from_matrix(Q)
    assert state.energy > 0
    greedy = ThresholdSchedule(start_p=1.0, end_p=1.0, shape="linear")
    out = osa_step(state, greedy, proposal=Proposal(1, 0, 0, 0.0))
    assert out.energy == 0
    assert np.array_equal(out.matrix, H)
    assert osa_step(out, greedy, np.random.default_rng(0)) is out


@pytest.mark.parametrize("k", [1, 2, 3])
def test_osa_construct(k):
    H, trace = osa_construct(k, budget=SearchBudget(10**6, 10, 0))
    assert is_hadamard(H.to_array())
    assert energy(H) == 0
    assert trace.total_steps == sum(trace.run_steps)
    assert trace.final_energies[-1] == 0


def test_osa_deterministic():
    a = osa_construct(3, budget=SearchBudget(10**6, 3, 9))
    b = osa_construct(3, budget=SearchBudget(10**6, 3, 9))
    assert np.array_equal(a[0].to_array(), b[0].to_array())
    assert a[1] == b[1]


def test_osa_metropolis_mode():
    H, _ = osa_construct(3, ThresholdSchedule.parse("metropolis:10:2"), SearchBudget(10**6, 5, 0))
    assert is_hadamard(H.to_array())


def test_osa_failure_carries_best_state():
    with pytest.raises(SearchFailure) as info:
        osa_construct(4, budget=SearchBudget(50, 2, 0))
    best = info.value.partial
    assert isinstance(best, AnnealerState)
    assert best.energy == energy(best.matrix) > 0


# ----------------------------------------------------------------------- RVS


def test_rvs_k1():
    for seed in range(10):
        H, trace = rvs_construct(1, SearchBudget(1000, 1, seed))
        assert is_hadamard(H.to_array())
        assert [s for s, _ in trace.stages] == [3, 4]
        assert all(n >= 1 for n in trace.iterations)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_rvs_constructs_hadamard(k):
    H, trace = rvs_construct(k, SearchBudget(10**7, 20, 1))
    A = H.to_array()
    assert is_hadamard(A)
    assert len({c.bits for c in H.columns}) == 4 * k
    assert [s for s, _ in trace.stages] == list(range(3, 4 * k + 1))
    assert trace.total_draws >= sum(trace.iterations) + 1


def test_rvs_deterministic_and_csv():
    a = rvs_construct(3, SearchBudget(10**6, 5, 123))
    b = rvs_construct(3, SearchBudget(10**6, 5, 123))
    assert np.array_equal(a[0].to_array(), b[0].to_array())
    assert a[1] == b[1]
    lines = a[1].to_csv().splitlines()
    assert lines[0].startswith("# schema:")
    assert lines[1] == "stage,iterations"
    assert len(lines) == 2 + 10


def test_rvs_failure_carries_partial_trace():
    with pytest.raises(SearchFailure) as info:
        rvs_construct(6, SearchBudget(100, 2, 0))
    assert info.value.partial.restarts == 2
    assert info.value.partial.total_draws == 200


def test_stochastic_order_cap():
    with pytest.raises(CapacityError):
        rvs_construct(17)
    with pytest.raises(CapacityError):
        osa_construct(17)
    with pytest.raises(ValueError):
        SearchBudget(0, 1, 0)
