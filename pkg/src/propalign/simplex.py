"""Small dense simplex solver and zero-sum matrix games.

Only the problem shape needed here is supported: ``max c.x  s.t.  A x <= b,
x >= 0`` with ``b >= 0``, so the slack basis is feasible and no phase one is
required. Bland's rule is used for both pivot choices, which rules out
cycling on the degenerate games that show up with Condorcet winners.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_EPS = 1e-12


class SimplexError(RuntimeError):
    pass


class UnboundedError(SimplexError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    dual: np.ndarray
    objective: float
    pivots: int


def solve_lp_max(c, A, b, max_pivots: int = 10_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise SimplexError("right-hand side must be nonnegative (origin must be feasible)")

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))

    for pivots in range(max_pivots):
        obj = T[m, :-1]
        candidates = np.nonzero(obj < -PIVOT_EPS)[0]
        if candidates.size == 0:
            x = np.zeros(n + m)
            x[basis] = T[:m, -1]
            return LPResult(x[:n], T[m, n:n + m].copy(), float(T[m, -1]), pivots)
        col = int(candidates[0])

        column = T[:m, col]
        rows = np.nonzero(column > PIVOT_EPS)[0]
        if rows.size == 0:
            raise UnboundedError(f"objective unbounded along column {col}")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_EPS]
        row = int(min(tied, key=lambda r: basis[r]))

        T[row] /= T[row, col]
        others = np.arange(m + 1) != row
        T[others] -= np.outer(T[others, col], T[row])
        basis[row] = col

    raise SimplexError(f"no optimum after {max_pivots} pivots")


@dataclass
class GameResult:
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    value: float


def solve_zero_sum(payoff) -> GameResult:
    """Maximin strategies of the game where the row player receives ``payoff``."""
    A = np.asarray(payoff, dtype=float)
    shift = 1.0 - A.min()
    Ap = A + shift
    res = solve_lp_max(np.ones(A.shape[1]), Ap, np.ones(A.shape[0]))
    total = res.objective
    q = res.x / total
    x = res.dual / total
    # renormalize away round-off; both sum to one in exact arithmetic
    q = np.clip(q, 0.0, None)
    x = np.clip(x, 0.0, None)
    return GameResult(x / x.sum(), q / q.sum(), 1.0 / total - shift)


def fictitious_play(payoff, iterations: int = 10_000) -> GameResult:
    """Brown's fictitious play; empirical frequencies approach a maximin pair.

    Deterministic: ties in the best response go to the lowest index.
    """
    A = np.asarray(payoff, dtype=float)
    k, l = A.shape
    row_counts = np.zeros(k)
    col_counts = np.zeros(l)
    row_payoff = np.zeros(k)  # cumulative payoff of each row against column history
    col_payoff = np.zeros(l)  # cumulative payoff conceded by each column against row history
    i, j = 0, 0
    for _ in range(iterations):
        row_counts[i] += 1
        col_counts[j] += 1
        col_payoff += A[i]
        row_payoff += A[:, j]
        i = int(np.argmax(row_payoff))
        j = int(np.argmin(col_payoff))
    x = row_counts / iterations
    q = col_counts / iterations
    return GameResult(x, q, float(x @ A @ q))
