"""Axiom checkers for aggregation rules.

Every checker returns an :class:`AxiomVerdict`; a failed verdict carries a
counterexample that :func:`replay` can re-run against the same rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Profile, Ranking, as_array, group_shares, induce_preference
from .feasibility import ppa_lower_bounds
from .manipulation import best_response, manipulate_profile
from .rules import Rule

AXIOMS = ("monotonicity", "pareto", "ppa", "pbm", "condorcet", "pmc")
POLICY_TOL = 1e-9
CONDORCET_MARGIN = 1e-12


@dataclass
class Counterexample:
    profile: Profile | None = None
    perturbed: Profile | None = None
    matrix: np.ndarray | None = None
    target: int = -1
    other: int = -1
    before: np.ndarray | None = None
    after: np.ndarray | None = None
    detail: str = ""


@dataclass
class AxiomVerdict:
    axiom: str
    holds: bool
    counterexample: Counterexample | None = None
    measured: float = float("nan")
    tested: int = 0
    note: str = ""
    params: dict = field(default_factory=dict)


def _apply_profile(rule, profile: Profile) -> np.ndarray:
    return np.asarray(rule(profile), dtype=float)


def _apply_matrix(rule, p) -> np.ndarray:
    if isinstance(rule, Rule):
        return np.asarray(rule.from_preference(p), dtype=float)
    return np.asarray(rule(p), dtype=float)


# --- monotonicity ----------------------------------------------------------

def lift(order: tuple[int, ...], pos: int) -> tuple[int, ...]:
    """Move the alternative at 0-based ``pos`` up one place."""
    o = list(order)
    o[pos - 1], o[pos] = o[pos], o[pos - 1]
    return tuple(o)


def improve(profile: Profile, order: tuple[int, ...], pos: int, fraction: float = 1.0) -> Profile:
    """Move ``fraction`` of the weight on ``order`` to the ranking with ``order[pos]`` lifted one place."""
    d = profile.as_dict()
    w = d[order] * fraction
    d[order] -= w
    new = lift(order, pos)
    d[new] = d.get(new, 0.0) + w
    return Profile.from_dict(d, profile.m)


def _monotonicity_cases(profile: Profile):
    for order in profile.orders:
        for pos in range(1, profile.m):
            yield order, pos


def check_monotonicity(rule, profile: Profile, trials: int | None = None, seed: int = 0,
                       fraction: float = 1.0) -> AxiomVerdict:
    """Lift one alternative by one place in one supported ranking; its probability must not drop.

    ``trials=None`` runs every (ranking, position) case; otherwise ``trials``
    cases are sampled with replacement. ``fraction < 1`` moves only part of
    the ranking's weight.
    """
    cases = list(_monotonicity_cases(profile))
    if trials is not None:
        rng = np.random.default_rng(seed)
        cases = [cases[i] for i in rng.integers(0, len(cases), size=trials)] if trials > 0 else []
    before = _apply_profile(rule, profile)
    worst = 0.0
    for order, pos in cases:
        y = order[pos]
        perturbed = improve(profile, order, pos, fraction)
        after = _apply_profile(rule, perturbed)
        drop = before[y] - after[y]
        worst = max(worst, drop)
        if drop > POLICY_TOL:
            cx = Counterexample(profile, perturbed, target=y, before=before, after=after,
                                detail=f"lifting y{y} in {order} lowers its probability by {drop:.3g}")
            return AxiomVerdict("monotonicity", False, cx, measured=drop, tested=len(cases),
                                params={"fraction": fraction})
    return AxiomVerdict("monotonicity", True, measured=worst, tested=len(cases),
                        params={"fraction": fraction})


def search_monotonicity_violation(rule, m: int = 3, n_profiles: int = 1000, support: int = 4,
                                  seed: int = 0) -> AxiomVerdict:
    """Random search over small profiles for a monotonicity counterexample."""
    rng = np.random.default_rng(seed)
    tested = 0
    for _ in range(n_profiles):
        prof = random_small_profile(m, support, rng)
        v = check_monotonicity(rule, prof)
        tested += v.tested
        if not v.holds:
            v.tested = tested
            return v
    return AxiomVerdict("monotonicity", True, tested=tested, note="no violation found by random search")


def random_small_profile(m: int, support: int, rng: np.random.Generator) -> Profile:
    orders = {tuple(rng.permutation(m).tolist()) for _ in range(support)}
    orders = sorted(orders)
    w = rng.dirichlet(np.ones(len(orders)))
    return Profile(tuple(orders), w, m)


# --- Pareto ----------------------------------------------------------------

def unanimous_pairs(profile: Profile) -> list[tuple[int, int]]:
    pos = profile.positions()
    above = np.all(pos[:, :, None] < pos[:, None, :], axis=0)
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(above))]


def check_pareto(rule, profile: Profile) -> AxiomVerdict:
    pi = _apply_profile(rule, profile)
    pairs = unanimous_pairs(profile)
    for y, y2 in pairs:
        if pi[y] < pi[y2] - POLICY_TOL:
            cx = Counterexample(profile, target=y, other=y2, before=pi,
                                detail=f"y{y} above y{y2} everywhere but pi={pi[y]:.6g} < {pi[y2]:.6g}")
            return AxiomVerdict("pareto", False, cx, tested=len(pairs))
    note = "" if pairs else "no unanimous pair; holds vacuously"
    return AxiomVerdict("pareto", True, tested=len(pairs), note=note)


# --- proportional alignment ------------------------------------------------

def ppa_level(policy, shares) -> float:
    """``min_k pi_k / w_k`` over groups with positive share."""
    pi = np.asarray(policy, dtype=float)
    w = np.asarray(shares, dtype=float)
    pos = w > 0
    return float((pi[pos] / w[pos]).min())


def measure_ppa(rule, profile: Profile) -> float:
    return ppa_level(_apply_profile(rule, profile), group_shares(profile))


def check_ppa(rule, profile: Profile, alpha: float | None = None, delta: float = 1.0) -> AxiomVerdict:
    """Achieved PPA level against ``alpha`` (default: the alpha(sigma) bound at ``delta``)."""
    if alpha is None:
        alpha = ppa_lower_bounds(profile, delta)[1]
    pi = _apply_profile(rule, profile)
    w = group_shares(profile)
    level = ppa_level(pi, w)
    if level < alpha - POLICY_TOL:
        ratios = np.where(w > 0, pi / np.where(w > 0, w, 1.0), np.inf)
        k = int(np.argmin(ratios))
        cx = Counterexample(profile, target=k, before=pi,
                            detail=f"pi/w for y{k} is {level:.6g} < alpha {alpha:.6g}")
        return AxiomVerdict("ppa", False, cx, measured=level, params={"alpha": alpha})
    return AxiomVerdict("ppa", True, measured=level, params={"alpha": alpha})


# --- bounded manipulability ------------------------------------------------

def check_pbm(rule, profile: Profile, gamma: tuple[float, float] = (0.5, 0.5),
              mode: str = "exhaustive", budget: int | None = None, seed: int = 0) -> AxiomVerdict:
    """Best single-group manipulation must stay below ``gamma_1 w_k + gamma_2``."""
    w = group_shares(profile)
    worst_excess = -np.inf
    for k in range(profile.m):
        if w[k] <= 0:
            continue
        res = best_response(rule, profile, k, mode, budget, seed)
        cap = gamma[0] * w[k] + gamma[1]
        excess = res.best_manipulated_value - cap
        worst_excess = max(worst_excess, excess)
        if excess > POLICY_TOL:
            perturbed = manipulate_profile(profile, k, res.best_subprofile)
            cx = Counterexample(profile, perturbed, target=k,
                                before=_apply_profile(rule, profile),
                                after=_apply_profile(rule, perturbed),
                                detail=f"group {k} (w={w[k]:.4g}) reaches {res.best_manipulated_value:.6g} > {cap:.6g}")
            return AxiomVerdict("pbm", False, cx, measured=excess, params={"gamma": list(gamma)})
    return AxiomVerdict("pbm", True, measured=float(worst_excess), params={"gamma": list(gamma)})


# --- Condorcet / PMC -------------------------------------------------------

def condorcet_winner(p) -> int | None:
    a = as_array(p)
    m = a.shape[0]
    for i in range(m):
        if all(a[i, j] > 0.5 + CONDORCET_MARGIN for j in range(m) if j != i):
            return i
    return None


def check_condorcet(rule, p) -> AxiomVerdict:
    a = as_array(p)
    winner = condorcet_winner(a)
    if winner is None:
        return AxiomVerdict("condorcet", True, note="no Condorcet winner; holds vacuously")
    pi = _apply_matrix(rule, a)
    if pi[winner] < 1.0 - POLICY_TOL:
        cx = Counterexample(matrix=a, target=winner, before=pi,
                            detail=f"Condorcet winner y{winner} gets {pi[winner]:.6g}")
        return AxiomVerdict("condorcet", False, cx, measured=float(pi[winner]))
    return AxiomVerdict("condorcet", True, measured=float(pi[winner]))


def pmc_ranking(p) -> Ranking | None:
    """The ranking agreeing with every strict majority, if the majority relation is a linear order."""
    a = as_array(p)
    m = a.shape[0]
    beats = a > 0.5 + CONDORCET_MARGIN
    np.fill_diagonal(beats, False)
    off = ~np.eye(m, dtype=bool)
    # complete: every pair decided one way; transitive: win counts are a permutation of 0..m-1
    if not np.all((beats | beats.T)[off]):
        return None
    wins = beats.sum(axis=1)
    if sorted(wins.tolist()) != list(range(m)):
        return None
    return Ranking(tuple(int(i) for i in np.argsort(-wins, kind="stable")))


def check_pmc(rule, p) -> AxiomVerdict:
    a = as_array(p)
    r = pmc_ranking(a)
    if r is None:
        return AxiomVerdict("pmc", True, note="no PMC ranking; holds vacuously")
    pi = _apply_matrix(rule, a)
    for hi, lo in zip(r.order, r.order[1:]):
        if pi[hi] < pi[lo] - POLICY_TOL:
            cx = Counterexample(matrix=a, target=hi, other=lo, before=pi,
                                detail=f"y{hi} ranked above y{lo} by majority but pi {pi[hi]:.6g} < {pi[lo]:.6g}")
            return AxiomVerdict("pmc", False, cx, measured=float(pi[lo] - pi[hi]))
    return AxiomVerdict("pmc", True)


# --- replay ----------------------------------------------------------------

def replay(verdict: AxiomVerdict, rule) -> bool:
    """Re-run a stored counterexample; True when the violation reproduces."""
    cx = verdict.counterexample
    if verdict.holds or cx is None:
        return False
    if verdict.axiom == "monotonicity":
        before = _apply_profile(rule, cx.profile)
        after = _apply_profile(rule, cx.perturbed)
        return bool(before[cx.target] - after[cx.target] > POLICY_TOL)
    if verdict.axiom == "pareto":
        pi = _apply_profile(rule, cx.profile)
        return bool(pi[cx.target] < pi[cx.other] - POLICY_TOL)
    if verdict.axiom == "ppa":
        return measure_ppa(rule, cx.profile) < verdict.params["alpha"] - POLICY_TOL
    if verdict.axiom == "pbm":
        g1, g2 = verdict.params["gamma"]
        w = group_shares(cx.profile)[cx.target]
        return bool(_apply_profile(rule, cx.perturbed)[cx.target] > g1 * w + g2 + POLICY_TOL)
    if verdict.axiom == "condorcet":
        return not check_condorcet(rule, cx.matrix).holds
    if verdict.axiom == "pmc":
        return not check_pmc(rule, cx.matrix).holds
    raise ValueError(f"unknown axiom {verdict.axiom!r}")


def audit(rule: Rule, axiom: str, profile: Profile, trials: int | None = None, seed: int = 0,
          **kwargs) -> AxiomVerdict:
    """Dispatch by axiom name; matrix-level axioms use the profile's induced matrix."""
    axiom = axiom.lower()
    if axiom == "monotonicity":
        return check_monotonicity(rule, profile, trials, seed)
    if axiom == "pareto":
        return check_pareto(rule, profile)
    if axiom == "ppa":
        return check_ppa(rule, profile, **kwargs)
    if axiom == "pbm":
        mode = kwargs.pop("mode", "exhaustive" if profile.m <= 4 else "sampled")
        return check_pbm(rule, profile, mode=mode, budget=trials, seed=seed, **kwargs)
    if axiom == "condorcet":
        return check_condorcet(rule, induce_preference(profile).p)
    if axiom == "pmc":
        return check_pmc(rule, induce_preference(profile).p)
    raise ValueError(f"unknown axiom {axiom!r}; expected one of {AXIOMS}")

