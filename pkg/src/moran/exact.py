"""Exact fixation probabilities, closed forms and bounds.

States are vertex subsets encoded as n-bit masks. The absorbing-chain system
is written in rate form: multiplying each row of ``f = P f`` by ``W(S)``
turns the transition probabilities into the rates

    add y via x     r / deg x
    remove x via y  1 / deg y

for every cut edge ``x in S, y not in S``; self-loops drop out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import Graph, graph_potential, phi_prime_0, q_values

DEFAULT_MAX_N = 14
DENSE_MAX_N = 12
R_ONE_TOL = 1e-12


class StateSpaceTooLarge(ValueError):
    """The 2^n state space exceeds the configured cap."""


@dataclass(frozen=True)
class ExactResult:
    per_vertex: np.ndarray
    average: float
    state_values: np.ndarray  # indexed by subset mask, includes both absorbing states

    def __post_init__(self) -> None:
        self.per_vertex.setflags(write=False)
        self.state_values.setflags(write=False)


@dataclass(frozen=True)
class BoundsReport:
    lower: Optional[float]
    upper_coarse: float
    upper_refined: float
    abs_time_bound: float


def _is_one(r: float) -> bool:
    return abs(r - 1.0) < R_ONE_TOL


def transient_masks(n: int) -> np.ndarray:
    """All masks except 0 and 2^n - 1, ordered by population count then value."""
    masks = np.arange(1, (1 << n) - 1, dtype=np.int64)
    pop = np.zeros_like(masks)
    for i in range(n):
        pop += (masks >> i) & 1
    return masks[np.lexsort((masks, pop))]


def rate_system(g: Graph, r: float) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
    """Sparse rate-form system ``A f = b`` over the transient states.

    Returns ``(A, b, masks)`` where row ``i`` belongs to ``masks[i]``.
    """
    n = g.n
    full = (1 << n) - 1
    masks = transient_masks(n)
    row_of = np.full(1 << n, -1, dtype=np.int64)
    row_of[masks] = np.arange(masks.size)

    rows, cols, vals = [], [], []
    out_rate = np.zeros(masks.size)
    b = np.zeros(masks.size)
    rowidx = np.arange(masks.size)
    for x in range(n):
        in_x = ((masks >> x) & 1).astype(bool)
        for y in g.adjacency[x]:
            cut = in_x & ~((masks >> y) & 1).astype(bool)
            src = rowidx[cut]
            for target, rate in (
                (masks[cut] | (1 << y), r * g.inv_degree[x]),
                (masks[cut] & ~(1 << x), g.inv_degree[y]),
            ):
                out_rate[src] += rate
                hit_full = target == full
                np.add.at(b, src[hit_full], rate)
                keep = (target != full) & (target != 0)
                rows.append(src[keep])
                cols.append(row_of[target[keep]])
                vals.append(np.full(int(keep.sum()), -rate))
    rows.append(rowidx)
    cols.append(rowidx)
    vals.append(out_rate)
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(masks.size, masks.size),
    )
    return A, b, masks


def _solve_iterative(A: sp.csr_matrix, b: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    # Jacobi sweeps on the jump chain; monotone from f = 0 for absorbing chains
    diag = A.diagonal()
    off = (A - sp.diags(diag)).tocsr()
    f = np.zeros_like(b)
    for _ in range(max_iter):
        nxt = (b - off @ f) / diag
        if np.max(np.abs(nxt - f)) < tol:
            return nxt
        f = nxt
    raise RuntimeError(f"fixed-point sweep did not converge in {max_iter} iterations")


def fixation_exact(
    g: Graph,
    r: float,
    *,
    max_n: int = DEFAULT_MAX_N,
    method: str = "auto",
    tol: float = 1e-13,
    max_iter: int = 1_000_000,
) -> ExactResult:
    """Fixation probability from every start vertex by solving the full 2^n-state chain.

    ``method`` is ``"dense"`` (LAPACK LU with partial pivoting), ``"sparse"``
    (SuperLU, about a minute at n = 14), ``"iterative"`` (fixed-point sweeps,
    ignores ``max_n``, accurate to roughly 1e-12) or ``"auto"``: dense up to
    n = 12, sparse above.
    """
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    if method not in ("auto", "dense", "sparse", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if g.n > max_n and method != "iterative":
        raise StateSpaceTooLarge(
            f"n={g.n} gives 2^{g.n} states, above the exact-solver cap n <= {max_n}; "
            "use the Monte Carlo estimator instead"
        )
    A, b, masks = rate_system(g, float(r))
    if method == "auto":
        method = "dense" if g.n <= DENSE_MAX_N else "sparse"
    if method == "dense":
        f = np.linalg.solve(A.toarray(), b)
    elif method == "sparse":
        f = spla.spsolve(A.tocsc(), b, permc_spec="MMD_AT_PLUS_A")
    else:
        f = _solve_iterative(A, b, tol, max_iter)

    values = np.zeros(1 << g.n)
    values[masks] = f
    values[-1] = 1.0
    per_vertex = values[1 << np.arange(g.n)].copy()
    return ExactResult(per_vertex=per_vertex, average=float(per_vertex.mean()), state_values=values)


def clique_closed_form(n: int, r: float) -> float:
    """Fixation probability on the n-clique: (1 - 1/r) / (1 - 1/r^n), or 1/n at r = 1."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    if _is_one(r):
        return 1.0 / n
    # expm1 keeps precision for r close to 1
    return math.expm1(-math.log(r)) / math.expm1(-n * math.log(r))


def fixation_lower_bound(n: int, r: float) -> float:
    """1/n, valid for r >= 1 only."""
    if r < 1:
        raise ValueError("no polynomial lower bound on fixation exists for r < 1")
    return 1.0 / n


def fixation_upper_bound(g: Graph, r: float) -> tuple[float, float]:
    """``(coarse, refined)`` upper bounds on the average fixation probability.

    The refined bound stops the chain as soon as a second mutant appears:
    ``(r/n) * sum_x 1/(r + Q(x))``. The coarse bound ``1 - 1/(n + r)`` is its
    worst case over all graphs of order n.
    """
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    coarse = 1.0 - 1.0 / (g.n + r)
    refined = r / g.n * float(np.sum(1.0 / (r + q_values(g))))
    return coarse, refined


def absorption_time_bound(g: Graph, r: float) -> float:
    """Upper bound on the expected number of steps to absorption.

    ``n^3/(1-r)`` for r < 1, ``r/(r-1) n^3 phi(G)`` for r > 1 and
    ``n^4 (phi(G)^2 - phi'_0)`` at r = 1.
    """
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    n = g.n
    if _is_one(r):
        return n**4 * (graph_potential(g) ** 2 - phi_prime_0(g))
    if r < 1:
        return n**3 / (1.0 - r)
    return r / (r - 1.0) * n**3 * graph_potential(g)


def bounds(g: Graph, r: float) -> BoundsReport:
    coarse, refined = fixation_upper_bound(g, r)
    return BoundsReport(
        lower=fixation_lower_bound(g.n, r) if r >= 1 else None,
        upper_coarse=coarse,
        upper_refined=refined,
        abs_time_bound=absorption_time_bound(g, r),
    )
