"""The Moran process: single steps, trajectories to absorption, and potential drift."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .graph import Graph

MAX_SEED = 2**64 - 1


class Outcome(str, enum.Enum):
    FIXATION = "Fixation"
    EXTINCTION = "Extinction"
    TRUNCATED = "Truncated"


_OUTCOMES = {
    _kernels.FIXATION: Outcome.FIXATION,
    _kernels.EXTINCTION: Outcome.EXTINCTION,
    _kernels.TRUNCATED: Outcome.TRUNCATED,
}


@dataclass(frozen=True)
class TrajectoryResult:
    outcome: Outcome
    steps_taken: int
    start_vertex: int


def rng_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for replicate ``index`` under ``master_seed``.

    The pair is hashed by :class:`numpy.random.SeedSequence` (seed as entropy,
    index as spawn key), so streams depend only on their own index.
    """
    if not 0 <= master_seed <= MAX_SEED:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master_seed}")
    if index < 0:
        raise ValueError(f"replicate index must be non-negative, got {index}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(index,))))


class MutantState:
    """Mutant set with O(1) membership, O(1) uniform indexing and cached total fitness.

    ``order[:m]`` lists the mutants and ``order[m:]`` the non-mutants; ``pos``
    is the inverse permutation.
    """

    __slots__ = ("n", "r", "order", "pos", "m")

    def __init__(self, g: Graph, mutants: Iterable[int], r: float):
        if r <= 0:
            raise ValueError(f"fitness must be positive, got {r}")
        self.n = g.n
        self.r = float(r)
        self.order = np.arange(g.n)
        self.pos = np.arange(g.n)
        self.m = 0
        for v in sorted(set(mutants)):
            if not 0 <= v < g.n:
                raise ValueError(f"vertex {v} out of range for n={g.n}")
            self.m = _kernels._add(self.order, self.pos, self.m, v)

    @property
    def mutant_count(self) -> int:
        return self.m

    @property
    def cached_W(self) -> float:
        return self.r * self.m + (self.n - self.m)

    @property
    def mutants(self) -> frozenset[int]:
        return frozenset(int(v) for v in self.order[: self.m])

    def __contains__(self, v: int) -> bool:
        return bool(self.pos[v] < self.m)

    def is_absorbing(self) -> bool:
        return self.m == 0 or self.m == self.n

    def __repr__(self) -> str:
        return f"MutantState(mutants={sorted(self.mutants)}, r={self.r})"


def step(g: Graph, s: MutantState, r: float, rng: np.random.Generator) -> MutantState:
    """Advance ``s`` by one Moran step in place and return it.

    Absorbing states are fixed points (the two draws are still consumed).
    """
    if r != s.r:
        raise ValueError(f"state was built for r={s.r}, stepped with r={r}")
    s.m = _kernels.step_state(g.indptr, g.indices, s.r, s.order, s.pos, s.m, rng)
    return s


def run_to_absorption(
    g: Graph, r: float, start: int, max_steps: int, rng: np.random.Generator
) -> TrajectoryResult:
    """Run from the single mutant ``start`` until fixation, extinction or ``max_steps`` steps.

    Every step counts, including those that leave the state unchanged.
    """
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    if not 0 <= start < g.n:
        raise ValueError(f"start vertex {start} out of range for n={g.n}")
    code, steps = _kernels.run_from(g.indptr, g.indices, float(r), start, _clamp_steps(max_steps), rng)
    return TrajectoryResult(_OUTCOMES[code], int(steps), start)


def run_replicate(g: Graph, r: float, max_steps: int, rng: np.random.Generator) -> TrajectoryResult:
    """Like :func:`run_to_absorption` with the start vertex drawn uniformly from ``rng`` first."""
    start, code, steps = _kernels.replicate(g.indptr, g.indices, float(r), _clamp_steps(max_steps), rng)
    return TrajectoryResult(_OUTCOMES[code], int(steps), int(start))


@dataclass(frozen=True)
class BatchResult:
    """Column arrays for a batch of replicates; ``outcomes`` holds :class:`Outcome` values."""

    starts: np.ndarray
    outcomes: np.ndarray
    steps: np.ndarray

    def fraction(self, outcome: Outcome) -> float:
        return float(np.mean(self.outcomes == outcome.value))


def simulate_many(g: Graph, r: float, replicates: int, max_steps: int, rng: np.random.Generator) -> BatchResult:
    """Many uniform-start replicates drawn back to back from a single stream.

    Much cheaper per replicate than one stream each, but replicate ``i`` then
    depends on all earlier ones; the estimator does not use this.
    """
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    starts, codes, steps = _kernels.replicate_batch(
        g.indptr, g.indices, float(r), _clamp_steps(max_steps), int(replicates), rng
    )
    labels = np.array([_OUTCOMES[c].value for c in range(3)])
    return BatchResult(starts, labels[codes], steps)


def _clamp_steps(max_steps: int) -> int:
    # caps beyond int64 are unreachable in practice
    return min(int(max_steps), np.iinfo(np.int64).max)


def _proper_subset_mask(g: Graph, X: Iterable[int]) -> np.ndarray:
    mask = np.zeros(g.n, dtype=bool)
    mask[list(set(X))] = True
    k = int(mask.sum())
    if k == 0 or k == g.n:
        raise ValueError("drift is only defined for proper nonempty vertex sets")
    return mask


def expected_drift(g: Graph, X: Iterable[int], r: float) -> float:
    """Exact one-step expected change of the potential from mutant set ``X``.

    Sums ``1/(deg x deg y)`` over cut edges with ``x`` in ``X`` and scales by
    ``(r - 1)/W(X)``; the result is exactly 0.0 at ``r == 1``.
    """
    mask = _proper_subset_mask(g, X)
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    dst = g.indices
    cut = mask[src] & ~mask[dst]
    total = float(np.sum(g.inv_degree[src[cut]] * g.inv_degree[dst[cut]]))
    k = int(mask.sum())
    return (r - 1.0) / (r * k + (g.n - k)) * total


def drift_samples(g: Graph, X: Iterable[int], r: float, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Realized potential increments of ``trials`` independent single steps from ``X``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    X = sorted(set(X))
    _proper_subset_mask(g, X)
    s = MutantState(g, X, r)
    return _kernels.drift_increments(
        g.indptr, g.indices, g.inv_degree, s.r, s.order, s.pos, s.m, int(trials), rng
    )


def empirical_drift(g: Graph, X: Iterable[int], r: float, trials: int, rng: np.random.Generator) -> float:
    """Monte Carlo estimate of :func:`expected_drift`."""
    return float(drift_samples(g, X, r, trials, rng).mean())
