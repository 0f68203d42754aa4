"""Construction of SH matrices: exhaustive search, random vector selection, annealing."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator

import numpy as np

from . import _kernels
from .core import QshMatrix, ShMatrix, ShVector, gram_matrix, is_hadamard
from .errors import CapacityError, SearchFailure
from .graph import CLIQUE_BUDGET, build_ortho_graph, find_cliques
from .vectorspace import enumerate_sh_vectors, random_sh_vector, random_sh_words

MAX_STOCHASTIC_ORDER = 64
EXHAUSTIVE_CANDIDATE_CAP = 10**6


@dataclass(frozen=True)
class SearchBudget:
    """Limits for one construction call.

    ``max_iterations`` bounds a single run (RVS draws, or annealing steps);
    ``max_restarts`` is the number of runs attempted.  Run ``r`` draws from
    its own stream, :func:`run_rng` ``(rng_seed, r)``, so runs of different
    seeds never share random numbers.
    """

    max_iterations: int = 10**6
    max_restarts: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1 or self.max_restarts < 1:
            raise ValueError("max_iterations and max_restarts must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Generator for restart ``run`` of a construction seeded with ``seed``."""
    return np.random.default_rng([seed, run])


RVS_DEFAULT_BUDGET = SearchBudget(max_iterations=10**7, max_restarts=20)
OSA_DEFAULT_BUDGET = SearchBudget(max_iterations=10**6, max_restarts=10)


def _check_stochastic_order(k: int) -> int:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    m = 4 * k
    if m > MAX_STOCHASTIC_ORDER:
        raise CapacityError(
            f"stochastic construction supports order <= {MAX_STOCHASTIC_ORDER}, got {m}",
            required=m,
            limit=MAX_STOCHASTIC_ORDER,
        )
    return m


# ---------------------------------------------------------------- exhaustive


@dataclass(frozen=True)
class ExhaustiveResult:
    """SH matrices found by exhaustive search, lexicographic by column tuple."""

    matrices: tuple[ShMatrix, ...]
    candidates_examined: int
    route: str

    def __iter__(self) -> Iterator[ShMatrix]:
        return iter(self.matrices)

    def __len__(self) -> int:
        return len(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]


def exhaustive_search(
    k: int,
    max_candidates: int = EXHAUSTIVE_CANDIDATE_CAP,
    max_cliques: int = CLIQUE_BUDGET,
) -> ExhaustiveResult:
    """Every SH matrix of order 4k, columns 2..4k in lexicographic order.

    Streams all C(N_V, 4k-1) unique QSH candidates when that count fits
    ``max_candidates``; otherwise enumerates (4k-1)-cliques of the
    orthogonality graph, which yields the same set.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    n_v = comb(4 * k, 2 * k)
    n_qu = comb(n_v, 4 * k - 1)
    if n_qu <= max_candidates:
        vectors = list(enumerate_sh_vectors(k))
        found = []
        examined = 0
        for combo in combinations(vectors, 4 * k - 1):
            examined += 1
            Q = QshMatrix.from_sh_columns(combo)
            if is_hadamard(Q):
                found.append(ShMatrix(Q))
        return ExhaustiveResult(tuple(found), examined, "combinations")
    try:
        g = build_ortho_graph(k)
    except CapacityError as exc:
        raise CapacityError(
            f"exhaustive search at k={k} needs {n_qu} candidates (cap {max_candidates}) "
            f"and the clique route is over capacity: {exc}",
            required=n_qu,
            limit=max_candidates,
        ) from exc
    cliques = sorted(find_cliques(g, max_cliques=max_cliques))
    found = tuple(ShMatrix.from_sh_columns(g.vectors[i] for i in c) for c in cliques)
    return ExhaustiveResult(found, len(cliques), "cliques")


# ----------------------------------------------------------------------- RVS


@dataclass(frozen=True)
class RvsTrace:
    """Draws needed per column of the successful run.

    Stage ``i`` is the 1-based column index: column 1 is the unity vector,
    column 2 is taken without testing, so stages run 3..4k.
    """

    stages: tuple[tuple[int, int], ...]
    restarts: int = 0
    total_draws: int = 0
    seed: int | None = None

    @property
    def iterations(self) -> list[int]:
        return [n for _, n in self.stages]

    def to_csv(self) -> str:
        rows = ["# schema: shadamard-rvs-trace/1", "stage,iterations"]
        rows += [f"{s},{n}" for s, n in self.stages]
        return "\n".join(rows) + "\n"


def _rvs_run(k: int, rng: np.random.Generator, max_draws: int):
    m = 4 * k
    half = np.uint64(2 * k)
    draws = 0
    cols: list[np.uint64] = []
    stages: list[tuple[int, int]] = []
    batch = 1024
    while len(cols) < m - 1:
        stage_draws = 0
        hit = None
        while hit is None:
            words = random_sh_words(k, rng, batch)
            if not cols:
                idx = np.arange(len(words))
            else:
                idx = np.flatnonzero(np.bitwise_count(words ^ cols[0]) == half)
                for c in cols[1:]:
                    if idx.size == 0:
                        break
                    idx = idx[np.bitwise_count(words[idx] ^ c) == half]
            remaining = max_draws - draws
            if idx.size and idx[0] < remaining:
                hit = words[idx[0]]
                used = int(idx[0]) + 1
            else:
                used = min(len(words), remaining)
            draws += used
            stage_draws += used
            if hit is None:
                if draws >= max_draws:
                    return None, stages, draws
                batch = min(batch * 2, 1 << 20)
        cols.append(hit)
        if len(cols) > 1:
            stages.append((len(cols) + 1, stage_draws))
        batch = 1024
    return [ShVector(m, int(w)) for w in cols], stages, draws


def rvs_construct(k: int, budget: SearchBudget | None = None) -> tuple[ShMatrix, RvsTrace]:
    """Random vector selection: grow the matrix one random orthogonal column at a time.

    Each candidate is a uniform SH vector; a run gives up after
    ``budget.max_iterations`` draws and the next run starts from scratch.
    """
    _check_stochastic_order(k)
    budget = budget or RVS_DEFAULT_BUDGET
    total = 0
    stages: list = []
    for r in range(budget.max_restarts):
        cols, stages, draws = _rvs_run(k, run_rng(budget.rng_seed, r), budget.max_iterations)
        total += draws
        if cols is not None:
            trace = RvsTrace(tuple(stages), restarts=r, total_draws=total, seed=budget.rng_seed)
            return ShMatrix.from_sh_columns(cols), trace
    partial = RvsTrace(tuple(stages), restarts=budget.max_restarts, total_draws=total)
    raise SearchFailure(
        f"RVS found no order-{4 * k} matrix in {budget.max_restarts} runs "
        f"of {budget.max_iterations} draws",
        partial=partial,
    )


# ----------------------------------------------------------------------- OSA


def energy(Q) -> int:
    """Sum of absolute off-diagonal Gram entries; zero exactly for Hadamard matrices."""
    D = gram_matrix(Q)
    return int(np.abs(D).sum() - np.abs(np.diag(D)).sum())


SCHEDULE_SHAPES = ("linear", "geometric")
ACCEPTANCE_MODES = ("threshold", "metropolis")


@dataclass(frozen=True)
class ThresholdSchedule:
    """Acceptance schedule for uphill annealing moves.

    In ``threshold`` mode an uphill move is accepted when a uniform draw
    exceeds ``P(n)``, which rises from ``start_p`` to ``end_p``.  ``linear``
    interpolates ``P`` directly; ``geometric`` decays ``1 - P``
    geometrically and bottoms out at ``floor`` (a geometric decay cannot
    reach zero).  ``metropolis`` mode ignores the probabilities and accepts
    with ``exp(-dE / T)``, ``T`` decaying geometrically from ``t_start`` to
    ``t_end``.  ``total_steps=None`` spans the per-run step budget.
    """

    start_p: float = 0.5
    end_p: float = 1.0
    shape: str = "geometric"
    total_steps: int | None = None
    floor: float = 1e-4
    acceptance: str = "threshold"
    t_start: float = 10.0
    t_end: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.start_p <= self.end_p <= 1.0:
            raise ValueError("need 0 <= start_p <= end_p <= 1")
        if self.shape not in SCHEDULE_SHAPES:
            raise ValueError(f"shape must be one of {SCHEDULE_SHAPES}")
        if self.acceptance not in ACCEPTANCE_MODES:
            raise ValueError(f"acceptance must be one of {ACCEPTANCE_MODES}")
        if not 0.0 < self.floor <= 1.0:
            raise ValueError("floor must lie in (0, 1]")
        if self.t_start <= 0 or self.t_end <= 0:
            raise ValueError("temperatures must be positive")
        if self.total_steps is not None and self.total_steps < 1:
            raise ValueError("total_steps must be positive")

    @classmethod
    def parse(cls, text: str) -> "ThresholdSchedule":
        """Parse ``shape:start:end`` or ``metropolis:t_start:t_end``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"schedule {text!r} is not of the form shape:a:b")
        name, a, b = parts[0], float(parts[1]), float(parts[2])
        if name == "metropolis":
            return cls(acceptance="metropolis", t_start=a, t_end=b)
        return cls(start_p=a, end_p=b, shape=name)

    def text(self) -> str:
        if self.acceptance == "metropolis":
            return f"metropolis:{self.t_start:g}:{self.t_end:g}"
        return f"{self.shape}:{self.start_p:g}:{self.end_p:g}"

    def position(self, n, total: int):
        span = max(total - 1, 1)
        return np.clip(np.asarray(n, dtype=np.float64) / span, 0.0, 1.0)

    def values(self, n, total: int) -> np.ndarray:
        """``P(n)`` in threshold mode, ``T(n)`` in Metropolis mode."""
        f = self.position(n, total)
        if self.acceptance == "metropolis":
            return self.t_start * (self.t_end / self.t_start) ** f
        if self.shape == "linear":
            return self.start_p + (self.end_p - self.start_p) * f
        q0 = 1.0 - self.start_p
        if q0 == 0.0:
            return np.ones_like(f)
        q1 = max(1.0 - self.end_p, min(self.floor, q0))
        return 1.0 - q0 * (q1 / q0) ** f

    def threshold(self, n: int, total: int) -> float:
        return float(self.values(n, total))


LINEAR_SCHEDULE = ThresholdSchedule(shape="linear")


@dataclass(frozen=True)
class AnnealerState:
    """A candidate matrix (rows x columns, int8) with its Gram matrix and energy.

    Columns may coincide transiently; duplicates carry large off-diagonal
    Gram entries and cannot survive to zero energy.
    """

    matrix: np.ndarray
    gram: np.ndarray
    energy: int
    step: int = 0
    schedule_position: float = 0.0

    @classmethod
    def from_matrix(cls, Q) -> "AnnealerState":
        if isinstance(Q, (QshMatrix, ShMatrix)):
            A = Q.to_array()
        else:
            A = np.array(Q, dtype=np.int8)
        A = np.ascontiguousarray(A, dtype=np.int8)
        D = gram_matrix(A)
        return cls(A, D, energy(A))

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Proposal:
    """Swap the ``neg_index``-th -1 and ``pos_index``-th +1 of ``column`` (counted top-down)."""

    column: int
    neg_index: int
    pos_index: int
    uniform: float


def draw_proposals(rng: np.random.Generator, order: int, n: int):
    """``n`` proposals as parallel arrays (columns, neg indices, pos indices, uniforms)."""
    half = order // 2
    return (
        rng.integers(1, order, size=n),
        rng.integers(0, half, size=n),
        rng.integers(0, half, size=n),
        rng.random(n),
    )


def osa_step(
    state: AnnealerState,
    schedule: ThresholdSchedule,
    rng: np.random.Generator | None = None,
    proposal: Proposal | None = None,
    total_steps: int | None = None,
) -> AnnealerState:
    """One annealing move: swap a -1/+1 pair in a random non-first column.

    The energy change is computed from the touched Gram row only.  Downhill
    and flat moves are always taken; uphill moves follow ``schedule``.
    """
    if proposal is None:
        if rng is None:
            raise ValueError("need an rng or an explicit proposal")
        cols, neg, pos, u = draw_proposals(rng, state.order, 1)
    else:
        cols = np.array([proposal.column])
        neg = np.array([proposal.neg_index])
        pos = np.array([proposal.pos_index])
        u = np.array([proposal.uniform])
    total = total_steps or schedule.total_steps or 1
    params = np.atleast_1d(schedule.values(state.step, total)).astype(np.float64)
    if state.energy == 0:
        return state
    Q = state.matrix.copy()
    D = state.gram.copy()
    _, e, _ = _kernels.anneal_chunk(
        Q, D, np.int64(state.energy), cols.astype(np.int64), neg.astype(np.int64),
        pos.astype(np.int64), u, params, schedule.acceptance == "metropolis",
    )
    step = state.step + 1
    return AnnealerState(Q, D, int(e), step, float(schedule.position(step, total)))


@dataclass(frozen=True)
class OsaTrace:
    """Bookkeeping for an annealing construction."""

    total_steps: int
    run_steps: tuple[int, ...]
    final_energies: tuple[int, ...]
    seed: int

    @property
    def restarts(self) -> int:
        return len(self.run_steps) - 1


def random_qsh_state(k: int, rng: np.random.Generator) -> AnnealerState:
    """Unity column plus 4k-1 distinct uniform SH vectors."""
    m = 4 * k
    seen: set[int] = set()
    cols = []
    while len(cols) < m - 1:
        v = random_sh_vector(k, rng)
        if v.bits not in seen:
            seen.add(v.bits)
            cols.append(v)
    return AnnealerState.from_matrix(QshMatrix.from_sh_columns(cols))


def _anneal_run(state: AnnealerState, schedule, rng, steps: int, chunk: int) -> tuple[AnnealerState, int]:
    total = schedule.total_steps or steps
    Q = state.matrix.copy()
    D = state.gram.copy()
    e = np.int64(state.energy)
    metropolis = schedule.acceptance == "metropolis"
    done = 0
    while done < steps and e != 0:
        n = min(chunk, steps - done)
        cols, neg, pos, u = draw_proposals(rng, state.order, n)
        params = np.asarray(schedule.values(np.arange(done, done + n), total), dtype=np.float64)
        used, e, _ = _kernels.anneal_chunk(Q, D, e, cols, neg, pos, u, params, metropolis)
        done += used
    end = AnnealerState(Q, D, int(e), done, float(schedule.position(done, total)))
    return end, done


def osa_construct(
    k: int,
    schedule: ThresholdSchedule | None = None,
    budget: SearchBudget | None = None,
    chunk: int = 1 << 16,
) -> tuple[ShMatrix, OsaTrace]:
    """Anneal random QSH matrices until one reaches zero energy.

    Each run starts from a fresh random candidate and takes at most
    ``budget.max_iterations`` steps.  Raises :class:`SearchFailure` carrying
    the lowest-energy final state when every run fails.
    """
    _check_stochastic_order(k)
    schedule = schedule or ThresholdSchedule()
    budget = budget or OSA_DEFAULT_BUDGET
    run_steps: list[int] = []
    finals: list[int] = []
    best: AnnealerState | None = None
    for r in range(budget.max_restarts):
        rng = run_rng(budget.rng_seed, r)
        start = random_qsh_state(k, rng)
        end, steps = _anneal_run(start, schedule, rng, budget.max_iterations, chunk)
        run_steps.append(steps)
        finals.append(end.energy)
        if end.energy == 0:
            trace = OsaTrace(sum(run_steps), tuple(run_steps), tuple(finals), budget.rng_seed)
            return ShMatrix.from_array(end.matrix), trace
        if best is None or end.energy < best.energy:
            best = end
    raise SearchFailure(
        f"annealing found no order-{4 * k} matrix in {budget.max_restarts} runs "
        f"of {budget.max_iterations} steps (best energy {best.energy})",
        partial=best,
    )
