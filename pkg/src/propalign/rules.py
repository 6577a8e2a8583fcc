"""Aggregation rules: profiles or preference matrices to policies.

Rules that only need the preference matrix (everything except random
dictatorship) are exposed both as functions of a matrix and, through
:class:`Rule`, as functions of a profile. Argmax rules break ties toward
the lowest index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import (
    Policy,
    PreferenceMatrix,
    Profile,
    ValidationError,
    as_array,
    group_shares,
    induce_preference,
)
from .simplex import fictitious_play, solve_zero_sum

BT_GRAD_TOL = 1e-10
BT_MAX_ITER = 100_000
BT_CLAMP = 30.0
ARGMAX_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """A solver stopped before meeting its tolerance; ``best`` holds the last iterate."""

    def __init__(self, message: str, best=None, achieved: float | None = None):
        super().__init__(message)
        self.best = best
        self.achieved = achieved


# --- Borda / Bradley-Terry -------------------------------------------------

def borda_scores(profile: Profile) -> np.ndarray:
    """``B[i] = sum_r sigma_r (M - r(y_i))`` with 1-based ranks."""
    pos = profile.positions()  # 0-based, so M - r(y) = M - 1 - pos
    return profile.weights @ (profile.m - 1 - pos)


def borda_from_preference(p) -> np.ndarray:
    a = as_array(p)
    return a.sum(axis=1) - 0.5


def first_argmax(scores, tol: float = ARGMAX_TOL, axis: int = -1):
    """Lowest index whose score is within ``tol`` of the maximum."""
    s = np.asarray(scores, dtype=float)
    return np.argmax(s >= s.max(axis=axis, keepdims=True) - tol, axis=axis)


def _argmax_one_hot(scores: np.ndarray) -> Policy:
    return Policy.one_hot(len(scores), int(first_argmax(scores)))


def maximal_borda(profile: Profile) -> Policy:
    return _argmax_one_hot(borda_scores(profile))


@dataclass
class BtFit:
    rewards: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    diverged: bool = False
    grad_norm: float = float("nan")


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def bt_log_likelihood(p, r) -> float:
    a = as_array(p)
    d = r[:, None] - r[None, :]
    # summing over ordered pairs covers both terms of every unordered pair
    logsig = -np.logaddexp(0.0, -d)
    mask = ~np.eye(len(r), dtype=bool)
    return float((a * logsig)[mask].sum())


def bt_gradient(p, r) -> np.ndarray:
    a = as_array(p)
    g = a - _sigmoid(r[:, None] - r[None, :])
    np.fill_diagonal(g, 0.0)
    return g.sum(axis=1)


def _centered_grad(a, r):
    g = bt_gradient(a, r)
    return g - g.mean()


def _ascend(a: np.ndarray, tol: float, max_iter: int) -> BtFit:
    m = a.shape[0]
    r = np.zeros(m)
    ll = bt_log_likelihood(a, r)
    step = 1.0
    for it in range(max_iter):
        g = _centered_grad(a, r)
        gnorm = float(np.abs(g).max())
        if gnorm < tol:
            return BtFit(r, ll, it, True, False, gnorm)
        accepted = False
        while step >= 1e-12:
            cand = r + step * g
            cand -= cand.mean()
            cand_ll = bt_log_likelihood(a, cand)
            if cand_ll > ll:
                accepted = True
            elif cand_ll >= ll - 1e-14 * abs(ll):
                # near the optimum the likelihood is flat to rounding, so
                # accept any step that still shrinks the gradient
                accepted = float(np.abs(_centered_grad(a, cand)).max()) < gnorm
            if accepted:
                break
            step *= 0.5
        if not accepted:
            return BtFit(r, ll, it, gnorm < math.sqrt(tol), False, gnorm)
        r, ll = cand, max(ll, cand_ll)
        step = min(1.0, step * 2.0)
    raise ConvergenceError(f"BT fit did not converge in {max_iter} iterations", best=r,
                           achieved=float(np.abs(bt_gradient(a, r)).max()))


def fit_bt(p, tol: float = BT_GRAD_TOL, max_iter: int = BT_MAX_ITER) -> BtFit:
    """Maximum-likelihood Bradley-Terry rewards for a preference matrix.

    Damped gradient ascent on the sum-zero subspace: step 1, halved until the
    likelihood improves, convergence at gradient sup-norm ``tol``.

    The MLE is finite only when the "beats with positive probability" graph
    is strongly connected. Otherwise each strong component is fitted on its
    own, components are stacked at well-separated offsets, rewards are
    clamped to +-30 and the fit is flagged ``diverged``.
    """
    a = as_array(p)
    m = a.shape[0]
    n_comp, labels = connected_components(csr_matrix(a > 0), directed=True, connection="strong")
    if n_comp == 1:
        return _ascend(a, tol, max_iter)

    row_sums = a.sum(axis=1)
    comps = sorted(range(n_comp), key=lambda c: -row_sums[labels == c].mean())
    offsets = np.linspace(BT_CLAMP, -BT_CLAMP, n_comp)
    r = np.zeros(m)
    iters = 0
    for c, off in zip(comps, offsets):
        idx = np.nonzero(labels == c)[0]
        if len(idx) > 1:
            sub = _ascend(a[np.ix_(idx, idx)], tol, max_iter)
            r[idx] = sub.rewards + off
            iters += sub.iterations
        else:
            r[idx] = off
    r -= r.mean()
    while np.abs(r).max() > BT_CLAMP + 1e-9:
        r = np.clip(r, -BT_CLAMP, BT_CLAMP)
        r -= r.mean()
    return BtFit(r, bt_log_likelihood(a, r), iters, False, True, float(np.abs(bt_gradient(a, r)).max()))


def rlhf_policy(p) -> Policy:
    """One-hot on the largest BT-MLE reward."""
    return _argmax_one_hot(fit_bt(p).rewards)


# --- maximal lotteries -----------------------------------------------------

@dataclass
class GameSolution:
    policy: Policy
    value: float
    exploitability: float


def exploitability(policy, p) -> float:
    """How far the best pure reply pushes the policy's payoff below 1/2."""
    a = as_array(p)
    pi = np.asarray(policy, dtype=float)
    return float(0.5 - (pi @ a).min())


def maximal_lotteries(p, tol: float = 1e-9) -> GameSolution:
    """Maximin policy of the symmetric game with payoff ``p[i, j]``.

    Solved exactly by the simplex method; when the input admits several
    maximal lotteries the returned one is whichever vertex the pivoting ends
    on.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_array(p)
    game = solve_zero_sum(a)
    pi = game.row_strategy
    expl = exploitability(pi, a)
    if expl > tol:
        raise ConvergenceError(f"maximal lotteries exploitability {expl:.3g} exceeds {tol:.3g}",
                               best=pi, achieved=expl)
    return GameSolution(Policy(pi), game.value, expl)


def maximal_lotteries_fp(p, iterations: int = 20_000) -> GameSolution:
    """Fictitious-play approximation, used to cross-check the LP."""
    a = as_array(p)
    game = fictitious_play(a, iterations)
    pi = game.row_strategy
    return GameSolution(Policy(pi), float(pi @ a @ game.col_strategy), exploitability(pi, a))


# --- random dictatorship ---------------------------------------------------

def random_dictatorship(profile: Profile) -> Policy:
    return Policy(group_shares(profile))


# --- u-vector family -------------------------------------------------------

def u_vector(p) -> np.ndarray:
    """``u[i] = min_{j != i} p[i, j]``."""
    a = as_array(p)
    m = a.shape[0]
    if m < 2:
        raise ValidationError("u-vector needs at least two alternatives")
    masked = a + np.diag(np.full(m, np.inf))
    return masked.min(axis=1)


def _normalize(weights: np.ndarray) -> Policy:
    total = weights.sum()
    if not total > 0:
        raise ValidationError("all u-values are zero; policy undefined")
    return Policy(weights / total)


def f_star(p) -> Policy:
    """Policy proportional to the u-vector."""
    return _normalize(u_vector(p))


def f_beta(p, beta: float) -> Policy:
    """Policy proportional to ``u_i * exp(beta * u_i)``."""
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    u = u_vector(p)
    if beta == 0:
        return _normalize(u)
    return _normalize(u * np.exp(beta * (u - u.max())))


def f_infinity(p) -> Policy:
    """Minimax Condorcet: one-hot on argmax u."""
    return _argmax_one_hot(u_vector(p))


def condorcet_beta(u_winner: float, m: int, alpha_c: float, corrected: bool = False) -> float:
    """Beta at which a Condorcet winner with value ``u_winner`` is meant to get ``alpha_c``.

    The default is the closed-form threshold
    ``log((M-1) alpha_c / (2 (1 - alpha_c))) / (u - 1/2)``. It leaves out a
    factor ``u`` (< 1) on the winner's weight and can fall short, e.g. at
    ``alpha_c = 1/2``, ``M = 3`` it returns 0 while ``f_star`` gives the winner
    about 1/3. ``corrected=True`` puts ``u`` in the denominator of the log
    argument, which makes the guarantee hold. Negative thresholds are
    floored at 0.
    """
    if u_winner <= 0.5:
        raise ValueError("a Condorcet winner has u > 1/2")
    if not 0 < alpha_c < 1:
        raise ValueError("alpha_c must lie in (0, 1)")
    arg = (m - 1) * alpha_c / (2.0 * (1.0 - alpha_c))
    if corrected:
        arg /= u_winner
    return max(0.0, math.log(arg) / (u_winner - 0.5))


# --- batched evaluation on stacks of matrices (used by manipulation search) --

def u_vector_batch(P: np.ndarray) -> np.ndarray:
    m = P.shape[-1]
    return (P + np.diag(np.full(m, np.inf))).min(axis=-1)


def _one_hot_rows(idx: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros((len(idx), m))
    out[np.arange(len(idx)), idx] = 1.0
    return out


def _fbeta_batch(P: np.ndarray, beta: float) -> np.ndarray:
    u = u_vector_batch(P)
    w = u if beta == 0 else u * np.exp(beta * (u - u.max(axis=1, keepdims=True)))
    return w / w.sum(axis=1, keepdims=True)


# --- rule objects ----------------------------------------------------------

RULE_NAMES = ("borda", "ml", "rd", "fstar", "fbeta", "finf")


@dataclass(frozen=True)
class Rule:
    """A named aggregation rule usable on profiles and (when implementable) on matrices.

    ``borda`` on a matrix takes the argmax of row sums, which orders
    alternatives exactly as the BT-MLE rewards do.
    """

    name: str
    beta: float = 0.0
    ml_tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.name not in RULE_NAMES:
            raise ValueError(f"unknown rule {self.name!r}; expected one of {RULE_NAMES}")
        if self.name == "fbeta" and not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError("fbeta needs a finite beta >= 0")

    @property
    def implementable(self) -> bool:
        return self.name != "rd"

    @property
    def label(self) -> str:
        return f"fbeta:{self.beta:g}" if self.name == "fbeta" else self.name

    def __call__(self, profile: Profile) -> Policy:
        if self.name == "rd":
            return random_dictatorship(profile)
        if self.name == "borda":
            return maximal_borda(profile)
        return self.from_preference(induce_preference(profile))

    def from_preference(self, p) -> Policy:
        if self.name == "borda":
            return _argmax_one_hot(borda_from_preference(p))
        if self.name == "ml":
            return maximal_lotteries(p, self.ml_tol).policy
        if self.name == "fstar":
            return f_star(p)
        if self.name == "fbeta":
            return f_beta(p, self.beta)
        if self.name == "finf":
            return f_infinity(p)
        raise ValueError("random dictatorship needs the profile, not just the preference matrix")

    def batch(self, P: np.ndarray) -> np.ndarray:
        """Policies for a stack of matrices, shape (n, M)."""
        m = P.shape[-1]
        if self.name == "fstar":
            return _fbeta_batch(P, 0.0)
        if self.name == "fbeta":
            return _fbeta_batch(P, self.beta)
        if self.name == "finf":
            return _one_hot_rows(first_argmax(u_vector_batch(P), axis=1), m)
        if self.name == "borda":
            return _one_hot_rows(first_argmax(P.sum(axis=-1) - 0.5, axis=1), m)
        return np.stack([np.asarray(self.from_preference(x).probs) for x in P])


def parse_rule(spec: str, beta: float | None = None) -> Rule:
    """Parse ``fstar``, ``fbeta:1``, ``ml`` ... into a :class:`Rule`."""
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    if name == "fbeta":
        b = float(arg) if arg else (0.0 if beta is None else float(beta))
        return Rule("fbeta", b)
    if arg:
        raise ValueError(f"rule {name!r} takes no parameter")
    return Rule(name)


def as_preference(p) -> PreferenceMatrix:
    return p if isinstance(p, PreferenceMatrix) else PreferenceMatrix(p)
