"""Which top-choice distributions are consistent with a preference matrix.

``outer_membership`` is the cheap necessary condition ``w <= u``.
``exact_membership_profile`` solves the full feasibility LP over profiles
for small M, and ``extended_tightness_witness`` builds the explicit group
matrices showing the condition is also sufficient once groups may report
any skew-symmetric preference.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .core import (
    Profile,
    ValidationError,
    all_rankings,
    as_array,
    decompose_groups,
    induce_preference,
    ranking_matrices,
)
from .rules import u_vector

OUTER_TOL = 1e-9
LP_TOL = 1e-7
MAX_EXACT_M = 6


class DegeneratePairError(ValueError):
    def __init__(self, pair: tuple[int, int], group: int):
        super().__init__(f"pair {pair} has 1 - w_i - w_j <= 0 in the construction for group {group}")
        self.pair = pair
        self.group = group


@dataclass
class FeasibilityReport:
    u: np.ndarray
    sum_u: float
    member: bool
    witness_profile: Profile | None = None
    witness_groups: list[np.ndarray | None] | None = None
    residual: float = 0.0
    note: str = ""
    extra: dict = field(default_factory=dict)


def outer_membership(p, w, tol: float = OUTER_TOL) -> bool:
    u = u_vector(p)
    return bool(np.all(np.asarray(w, dtype=float) <= u + tol))


def exact_membership_profile(p, w) -> FeasibilityReport:
    """Is there a profile with induced matrix ``p`` and top-choice shares ``w``?

    LP over all M! rankings; equalities checked to ``LP_TOL``.
    """
    a = as_array(p)
    w = np.asarray(w, dtype=float)
    m = a.shape[0]
    if m > MAX_EXACT_M:
        raise ValidationError(f"exact feasibility is limited to M <= {MAX_EXACT_M}, got {m}")
    u = u_vector(a)
    orders = all_rankings(m)
    mats = ranking_matrices(orders, m)
    iu = np.triu_indices(m, k=1)
    rows = [mats[:, i, j] for i, j in zip(*iu)]
    rhs = [a[i, j] for i, j in zip(*iu)]
    tops = np.array([o[0] for o in orders])
    for k in range(m):
        rows.append((tops == k).astype(float))
        rhs.append(w[k])
    A_eq = np.array(rows)
    b_eq = np.array(rhs)

    res = linprog(np.zeros(len(orders)), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    base = dict(u=u, sum_u=float(u.sum()))
    if res.status != 0 or res.x is None:
        return FeasibilityReport(**base, member=False, residual=float("inf"),
                                 note=f"LP infeasible ({res.message})")
    x = np.clip(res.x, 0.0, None)
    residual = float(np.abs(A_eq @ x - b_eq).max())
    if residual > LP_TOL:
        return FeasibilityReport(**base, member=False, residual=residual,
                                 note="LP solution violates equalities beyond tolerance")
    keep = x > 1e-12
    witness = Profile.renormalize([orders[i] for i in np.nonzero(keep)[0]], x[keep])
    return FeasibilityReport(**base, member=True, witness_profile=witness, residual=residual,
                             note="feasible profile found")


def extended_tightness_witness(p, w, tol: float = OUTER_TOL) -> FeasibilityReport:
    """Group matrices ``P_k`` with ``sum_k w_k P_k = p`` and unanimous row k.

    Off the k-th row and column, ``P_k[i, j] = (p[i, j] - w_i) / (1 - w_i - w_j)``.
    Built for every group with positive share; empty groups get ``None``.
    """
    a = as_array(p)
    w = np.asarray(w, dtype=float)
    m = a.shape[0]
    u = u_vector(a)
    over = np.nonzero(w > u + tol)[0]
    if over.size:
        i = int(over[0])
        raise ValidationError(f"w is outside the outer approximation: w[{i}]={w[i]:.6g} > u[{i}]={u[i]:.6g}")
    if abs(w.sum() - 1.0) > tol or np.any(w < -tol):
        raise ValidationError("w must be a probability vector")

    groups: list[np.ndarray | None] = []
    for k in range(m):
        if w[k] <= 0:
            groups.append(None)
            continue
        g = np.full((m, m), 0.5)
        for i in range(m):
            for j in range(m):
                if i == j or k in (i, j):
                    continue
                denom = 1.0 - w[i] - w[j]
                if denom <= 0:
                    raise DegeneratePairError((i, j), k)
                g[i, j] = (a[i, j] - w[i]) / denom
        g[k, :] = 1.0
        g[:, k] = 0.0
        g[k, k] = 0.5
        groups.append(g)

    recon = sum(wk * g for wk, g in zip(w, groups) if g is not None)
    residual = float(np.abs(recon - a).max())
    checks = {
        "entries_in_unit_interval": all(g.min() >= -tol and g.max() <= 1 + tol for g in groups if g is not None),
        "skew_symmetric": all(np.abs(g + g.T - 1).max() <= tol for g in groups if g is not None),
        "rows_unanimous": all(np.all(np.delete(g[k], k) == 1.0) for k, g in enumerate(groups) if g is not None),
        "reconstructs": residual <= LP_TOL,
    }
    return FeasibilityReport(u=u, sum_u=float(u.sum()), member=all(checks.values()),
                             witness_groups=groups, residual=residual,
                             note="extended (skew-symmetric groups) construction", extra=checks)


def dominated_count(p, delta: float) -> int:
    """Number of alternatives that are NOT delta-dominated."""
    a = as_array(p).copy()
    np.fill_diagonal(a, -np.inf)
    # delta-dominated: some rival wins against it with probability >= delta
    dominated = a.max(axis=0) >= delta - 1e-12
    return int((~dominated).sum())


def alpha_bound(shares, n_delta: int, m: int, delta: float) -> float:
    top = np.sort(np.asarray(shares, dtype=float))[::-1]
    w1, w2 = top[0], top[1] if len(top) > 1 else 0.0
    return 1.0 / ((n_delta - 1) * (1 - w1) + (1 - w2) + (m - n_delta) * (1 - delta))


def ppa_lower_bounds(profile: Profile, delta: float) -> tuple[float, float, int]:
    """``(1 / sum(u), alpha(sigma), N_delta)`` for a profile."""
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    p = induce_preference(profile).p
    u = u_vector(p)
    inv = 1.0 / u.sum()
    n_delta = dominated_count(p, delta)
    alpha = alpha_bound(decompose_groups(profile).shares, n_delta, profile.m, delta)
    if not (alpha <= inv + 1e-9 and inv <= 1 + 1e-9):
        raise AssertionError(f"bound sandwich broken: alpha={alpha}, 1/sum(u)={inv}")
    return float(inv), float(alpha), n_delta


def outer_vertices(p, tol: float = OUTER_TOL) -> np.ndarray:
    """Vertices of ``{w : 0 <= w <= u, sum(w) = 1}``.

    At a vertex at most one coordinate lies strictly between its bounds, so
    fix every other coordinate at 0 or ``u_i`` and solve for the free one.
    """
    u = u_vector(p)
    m = len(u)
    if m > MAX_EXACT_M + 2:
        raise ValidationError(f"vertex enumeration is limited to M <= {MAX_EXACT_M + 2}")
    found = []
    for free in range(m):
        rest = [i for i in range(m) if i != free]
        for bits in itertools.product((0, 1), repeat=m - 1):
            w = np.zeros(m)
            w[rest] = np.array(bits) * u[rest]
            w[free] = 1.0 - w.sum()
            if -tol <= w[free] <= u[free] + tol:
                # snap rounding residue onto the bound it came from
                if abs(w[free]) <= 1e-12:
                    w[free] = 0.0
                elif abs(w[free] - u[free]) <= 1e-12:
                    w[free] = u[free]
                w[free] = min(max(w[free], 0.0), u[free])
                if not any(np.abs(v - w).max() <= 1e-12 for v in found):
                    found.append(w)
    return np.array(found).reshape(-1, m)


def outer_gap(p) -> tuple[int, int]:
    """``(infeasible, total)`` over the outer polytope's vertices, by the exact LP."""
    verts = outer_vertices(p)
    bad = sum(not exact_membership_profile(p, w).member for w in verts)
    return int(bad), len(verts)
