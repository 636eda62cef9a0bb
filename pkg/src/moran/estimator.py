"""Monte Carlo approximation schemes for fixation (r >= 1) and extinction (any r > 0).

Each of the N replicates starts a single mutant at a uniformly random vertex
and runs for at most T steps. If any replicate is cut off before absorption
the whole run is reported as aborted. Replicate ``i`` draws everything,
including its start vertex, from ``rng_stream(master_seed, i)``, so results do
not depend on how replicates are spread over workers.

The guarantees assume r is given in unary (so N and T stay polynomial in the
input size); here r is an ordinary float and that condition is not enforced.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional

from .dynamics import MAX_SEED, Outcome, rng_stream, run_replicate
from .graph import Graph

LN16 = math.log(16.0)
CHUNK = 256


class Mode(str, enum.Enum):
    FIXATION = "fixation"
    EXTINCTION = "extinction"


class Status(str, enum.Enum):
    OK = "Ok"
    ABORTED = "Aborted"


@dataclass(frozen=True)
class EstimatorPlan:
    mode: Mode
    r: float
    epsilon: float
    n: int
    N: int
    T: int
    master_seed: int = 0
    certified: bool = True

    def override(self, N: Optional[int] = None, T: Optional[int] = None) -> "EstimatorPlan":
        """Exploratory copy with a smaller replicate count or step cap; never certified."""
        if N is not None and N < 1:
            raise ValueError("N must be at least 1")
        if T is not None and T < 0:
            raise ValueError("T must be non-negative")
        return replace(
            self,
            N=self.N if N is None else int(N),
            T=self.T if T is None else int(T),
            certified=False,
        )

    def with_seed(self, master_seed: int) -> "EstimatorPlan":
        return replace(self, master_seed=_check_seed(master_seed))


@dataclass(frozen=True)
class EstimateReport:
    mode: Mode
    estimate: float
    successes: int
    N: int
    completed_runs: int
    truncated_runs: int
    status: Status
    certified: bool
    master_seed: int
    T: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["status"] = self.status.value
        return d


def _check_seed(seed: int) -> int:
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {seed}")
    return int(seed)


def replicate_count(mode: Mode, n: int, r: float, epsilon: float) -> int:
    scale = n if mode is Mode.FIXATION else r + n
    return math.ceil(0.5 * epsilon**-2 * scale**2 * LN16)


def step_cap(N: int, n: int, r: float) -> int:
    """Per-replicate step cap for N replicates on an n-vertex graph."""
    rf = Fraction(r)
    if abs(r - 1.0) < 1e-12:
        return 8 * N * n**6
    if r > 1:
        return math.ceil(8 * rf / (rf - 1) * N * n**4)
    return math.ceil(8 / (1 - rf) * N * n**3)


def plan(g: Graph, mode: Mode | str, r: float, epsilon: float, master_seed: int = 0) -> EstimatorPlan:
    mode = Mode(mode)
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if mode is Mode.FIXATION and r < 1:
        raise ValueError(
            "fixation estimation requires r >= 1: whether fixation admits an FPRAS for r < 1 "
            "is an open problem (estimate extinction instead)"
        )
    N = replicate_count(mode, g.n, r, epsilon)
    return EstimatorPlan(
        mode=mode,
        r=float(r),
        epsilon=float(epsilon),
        n=g.n,
        N=N,
        T=step_cap(N, g.n, r),
        master_seed=_check_seed(master_seed),
    )


def _run_chunk(g: Graph, p: EstimatorPlan, lo: int, hi: int) -> tuple[int, int, bool]:
    """Run replicates ``lo..hi-1``; stop at the first truncation.

    Returns ``(successes, completed, truncated)``.
    """
    target = Outcome.FIXATION if p.mode is Mode.FIXATION else Outcome.EXTINCTION
    successes = 0
    for i in range(lo, hi):
        res = run_replicate(g, p.r, p.T, rng_stream(p.master_seed, i))
        if res.outcome is Outcome.TRUNCATED:
            return successes, i - lo + 1, True
        successes += res.outcome is target
    return successes, hi - lo, False


def estimate(g: Graph, p: EstimatorPlan, workers: int = 1) -> EstimateReport:
    """Run the plan and report the fraction of replicates ending in the plan's mode.

    Replicates are processed in fixed chunks of :data:`CHUNK` indices. On the
    first truncated replicate (in index order) the run is aborted; the report
    then covers replicates up to and including that one. ``workers`` only
    changes wall-clock time.
    """
    if p.n != g.n:
        raise ValueError(f"plan was made for n={p.n}, graph has n={g.n}")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    bounds = [(lo, min(lo + CHUNK, p.N)) for lo in range(0, p.N, CHUNK)]

    successes = completed = 0
    aborted = False
    if workers == 1:
        for lo, hi in bounds:
            s, c, aborted = _run_chunk(g, p, lo, hi)
            successes += s
            completed += c
            if aborted:
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            window = 2 * workers
            pending = [pool.submit(_run_chunk, g, p, lo, hi) for lo, hi in bounds[:window]]
            nxt = len(pending)
            k = 0
            while k < len(pending):
                s, c, aborted = pending[k].result()
                successes += s
                completed += c
                k += 1
                if aborted:
                    for fut in pending[k:]:
                        fut.cancel()
                    break
                if nxt < len(bounds):
                    pending.append(pool.submit(_run_chunk, g, p, *bounds[nxt]))
                    nxt += 1

    return EstimateReport(
        mode=p.mode,
        estimate=successes / p.N,
        successes=successes,
        N=p.N,
        completed_runs=completed,
        truncated_runs=int(aborted),
        status=Status.ABORTED if aborted else Status.OK,
        certified=p.certified,
        master_seed=p.master_seed,
        T=p.T,
    )


def hoeffding_error_bound(N: int, epsilon: float, f_lower: float) -> float:
    """``2 exp(-2 eps^2 f^2 N)``: bound on P(|p - f| > eps f) when f >= f_lower."""
    if N <= 0 or epsilon <= 0 or not 0 < f_lower <= 1:
        raise ValueError("N, epsilon must be positive and f_lower in (0, 1]")
    return 2.0 * math.exp(-2.0 * epsilon**2 * f_lower**2 * N)
