"""Single-group manipulation: manipulated profiles and best-response search.

A group ``G_k`` (evaluators ranking ``y_k`` first) replaces its normalized
sub-profile by any other profile. For implementable rules the effect on
the preference matrix is the exact shift ``w_k (P_sub - P_k)``, so a whole
batch of candidate sub-profiles can be scored with one vectorized rule call.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    Profile,
    ValidationError,
    all_rankings,
    decompose_groups,
    induce_preference,
    ranking_matrices,
)
from .rules import Rule, u_vector
from .sampling import derived_rng

GRID = 10
EXHAUSTIVE_MAX_M = 5
TIE_TOL = 1e-12


def manipulate_profile(profile: Profile, k: int, sub: Profile) -> Profile:
    """``sigma + w_k (sub - sigma_k)``: group k's rankings replaced by ``sub``."""
    if sub.m != profile.m:
        raise ValidationError("sub-profile has a different number of alternatives")
    kept = {o: w for o, w in profile.items() if o[0] != k}
    w_k = 1.0 - sum(kept.values())
    if not any(o[0] == k for o in profile.orders):
        raise ValidationError(f"group {k} is empty and cannot manipulate")
    out = dict(kept)
    for o, w in sub.items():
        out[o] = out.get(o, 0.0) + w_k * w
    return Profile.from_dict(out, profile.m)


@dataclass
class ManipulationResult:
    group: int
    share: float
    u: float
    honest_policy_value: float
    best_manipulated_value: float
    bound_share: float
    bound_affine: float
    best_subprofile: Profile
    n_candidates: int
    is_lower_bound: bool

    @property
    def gain(self) -> float:
        return self.best_manipulated_value - self.honest_policy_value


@functools.lru_cache(maxsize=8)
def _exhaustive_support(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Candidate supports (indices into all_rankings(m)) and weights, padded to 3."""
    n_r = len(all_rankings(m))
    idx, wts = [], []
    for a in range(n_r):
        idx.append((a, a, a))
        wts.append((1.0, 0.0, 0.0))
    for a, b in itertools.combinations(range(n_r), 2):
        for t in range(1, GRID):
            idx.append((a, b, b))
            wts.append((t / GRID, 1 - t / GRID, 0.0))
    triples = [(x, y, GRID - x - y) for x in range(1, GRID) for y in range(1, GRID - x)]
    for a, b, c in itertools.combinations(range(n_r), 3):
        for x, y, z in triples:
            idx.append((a, b, c))
            wts.append((x / GRID, y / GRID, z / GRID))
    return np.array(idx, dtype=np.int64), np.array(wts)


class CandidateSet:
    """Candidate sub-profiles for one group, stored as mixtures of <= 3 rankings.

    Row 0 is always the truthful sub-profile. ``exhaustive`` covers every
    single ranking, every pair on a 1/10 grid and every triple on the
    interior of that grid (M <= 5). ``sampled`` adds ``budget`` random
    mixtures whose rankings put ``y_k`` first half of the time, plus two
    "bury the rivals" rankings with ``y_k`` first and the strongest rivals last.
    """

    def __init__(self, profile: Profile, k: int, mode: str = "exhaustive",
                 budget: int | None = None, seed: int = 0):
        dec = decompose_groups(profile)
        if dec.sub_profiles[k] is None:
            raise ValidationError(f"group {k} is empty and cannot manipulate")
        self.profile = profile
        self.k = k
        self.m = m = profile.m
        self.share = float(dec.shares[k])
        self.truthful = dec.sub_profiles[k]
        self.group_matrix = dec.group_prefs[k].p
        self.complete = True

        if mode == "exhaustive":
            if m > EXHAUSTIVE_MAX_M:
                raise ValidationError(f"exhaustive search is limited to M <= {EXHAUSTIVE_MAX_M}")
            self.orders = np.array(all_rankings(m), dtype=np.int64)
            idx, wts = _exhaustive_support(m)
            if budget is not None and len(idx) > budget:
                idx, wts = idx[:budget], wts[:budget]
                self.complete = False
        elif mode == "sampled":
            rng = derived_rng(seed, k)
            budget = 1000 if budget is None else budget
            p = induce_preference(profile).p
            rivals = [i for i in np.argsort(p.sum(axis=1)) if i != k]
            heur = [[k] + rivals, [k] + [i for i in np.argsort(u_vector(p)) if i != k]]
            n_rand = max(budget - len(heur), 0)
            sizes = rng.integers(1, 4, size=n_rand)
            orders = [np.array(h) for h in heur]
            idx = [(0, 0, 0), (1, 1, 1)][:budget]
            wts = [(1.0, 0.0, 0.0)] * len(idx)
            for s in sizes:
                sel = []
                for _ in range(s):
                    o = rng.permutation(m)
                    if rng.random() < 0.5:
                        o = np.concatenate(([k], o[o != k]))
                    sel.append(len(orders))
                    orders.append(o)
                w = rng.dirichlet(np.ones(s))
                sel += [sel[-1]] * (3 - s)
                idx.append(tuple(sel))
                wts.append(tuple(w) + (0.0,) * (3 - s))
            self.orders = np.array(orders, dtype=np.int64).reshape(-1, m)
            idx = np.array(idx, dtype=np.int64).reshape(-1, 3)
            wts = np.array(wts, dtype=float).reshape(-1, 3)
            self.complete = False
        else:
            raise ValueError(f"unknown mode {mode!r}")

        self.idx, self.wts = idx, wts
        R = ranking_matrices(self.orders, m)
        subs = np.einsum("nt,ntij->nij", wts, R[idx])
        self.sub_matrices = np.concatenate([self.group_matrix[None], subs])

    def __len__(self) -> int:
        return self.sub_matrices.shape[0]

    def subprofile(self, c: int) -> Profile:
        if c == 0:
            return self.truthful
        d: dict[tuple[int, ...], float] = {}
        for i, w in zip(self.idx[c - 1], self.wts[c - 1]):
            if w > 0:
                o = tuple(int(x) for x in self.orders[i])
                d[o] = d.get(o, 0.0) + float(w)
        return Profile.from_dict(d, self.m)

    def reports_top_first(self, c: int) -> bool:
        if c == 0:
            return True
        return all(self.orders[i][0] == self.k for i, w in zip(self.idx[c - 1], self.wts[c - 1]) if w > 0)

    def manipulated_matrices(self, base: np.ndarray | None = None) -> np.ndarray:
        """Stack of manipulated preference matrices, optionally shifted from ``base``."""
        honest = induce_preference(self.profile).p
        start = honest if base is None else np.asarray(base, dtype=float)
        P = start[None] + self.share * (self.sub_matrices - self.group_matrix[None])
        if base is not None:
            # keep an estimated base inside [0, 1] while preserving skew-symmetry
            iu = np.triu_indices(self.m, k=1)
            up = np.clip(P[:, iu[0], iu[1]], 0.0, 1.0)
            P[:, iu[0], iu[1]] = up
            P[:, iu[1], iu[0]] = 1.0 - up
        return P

    def evaluate(self, rule: Rule, base: np.ndarray | None = None) -> ManipulationResult:
        k = self.k
        honest_p = induce_preference(self.profile).p
        u_k = float(u_vector(honest_p)[k])
        if rule.implementable:
            values = rule.batch(self.manipulated_matrices(base))[:, k]
        else:
            if base is not None:
                raise ValidationError(f"rule {rule.name} needs profiles, not an estimated matrix")
            values = np.array([rule(manipulate_profile(self.profile, k, self.subprofile(c)))[k]
                               for c in range(len(self))])
        honest = float(values[0])
        best = float(values.max())
        near = np.nonzero(values >= best - TIE_TOL)[0]
        top_first = [c for c in near if self.reports_top_first(c)]
        c_best = int(top_first[0] if top_first else near[0])
        w_k = self.share
        return ManipulationResult(
            group=k, share=w_k, u=u_k,
            honest_policy_value=honest,
            best_manipulated_value=best,
            bound_share=u_k / (u_k + 1.0 - w_k),
            bound_affine=0.5 * (w_k + 1.0),
            best_subprofile=self.subprofile(c_best),
            n_candidates=len(self),
            is_lower_bound=not self.complete,
        )


def best_response(rule: Rule, profile: Profile, k: int, mode: str = "exhaustive",
                  budget: int | None = None, seed: int = 0, base=None) -> ManipulationResult:
    """Best manipulated value of ``pi(y_k)`` over the candidate sub-profiles.

    ``base`` replaces the honest induced matrix (e.g. an estimate) as the
    starting point for the shift; the truthful candidate then reproduces
    the rule's output on ``base``.
    """
    return CandidateSet(profile, k, mode, budget, seed).evaluate(rule, base)


def pbm_gain(rule: Rule, profile: Profile, mode: str = "exhaustive", budget: int | None = None,
             seed: int = 0, base=None) -> np.ndarray:
    """Per-group gain ``pi'(y_k) - pi(y_k)``; empty groups get 0."""
    shares = decompose_groups(profile).shares
    gains = np.zeros(profile.m)
    for k in range(profile.m):
        if shares[k] > 0:
            gains[k] = best_response(rule, profile, k, mode, budget, seed, base).gain
    return gains
