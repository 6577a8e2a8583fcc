"""Acceptance criteria, one ``test_criterion_<key>`` per line of the summary.

The conftest hook prints ``criterion <key>: PASS|FAIL`` at the end of the
run. Tolerances, instance counts and seeds below are the fixed contract;
do not loosen them to make a line go green.
"""
import json
import time

import numpy as np
import pytest

from conftest import ml_epsilon_matrix, planted_condorcet_matrices, random_profile
from propalign import io
from propalign.axioms import check_monotonicity, check_pareto, check_pmc, ppa_level
from propalign.core import Profile, decompose_groups, group_shares, induce_preference
from propalign.experiments import (
    bound_table,
    read_bound_table_csv,
    read_reports_csv,
    reports_from_json,
    reports_to_json,
    run_tabular,
    sign_test_trend,
    summarize,
    write_bound_table_csv,
    write_reports_csv,
)
from propalign.feasibility import outer_membership, ppa_lower_bounds
from propalign.manipulation import best_response, manipulate_profile
from propalign.rules import (
    Rule,
    borda_from_preference,
    borda_scores,
    condorcet_beta,
    f_beta,
    f_star,
    fit_bt,
    maximal_lotteries,
    random_dictatorship,
    u_vector,
)
from propalign.sampling import (
    random_ranking_profile,
    read_dataset_csv,
    sample_comparisons,
    write_dataset_csv,
)

TOL = 1e-6
FSTAR = Rule("fstar")
REF_INV = {10: 0.5553, 20: 0.3360, 50: 0.2085, 100: 0.1427}
REF_ALPHA = {10: 0.2539, 20: 0.1254, 50: 0.0570, 100: 0.0305}
BETAS = (0.0, 0.1, 1.0, 10.0, 100.0)

_property_seconds = {}


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


# --- 1: fixtures ------------------------------------------------------------------

def test_criterion_1a_borda(borda_profile):
    with Timer() as t:
        b = borda_scores(borda_profile)
        moved = manipulate_profile(borda_profile, 1, Profile.single((1, 2, 0)))
        b2 = borda_scores(moved)
    np.testing.assert_allclose(b, [1.3, 1.2, 0.5], atol=TOL)
    np.testing.assert_allclose(b2, [0.85, 1.2, 0.95], atol=TOL)
    assert t.seconds < 1


def test_criterion_1b_maximal_lotteries():
    with Timer() as t:
        sol = maximal_lotteries(ml_epsilon_matrix(1 / 12))
    np.testing.assert_allclose(sol.policy.probs, [0.25, 0.25, 0.5], atol=TOL)
    assert sol.exploitability <= 1e-6
    assert t.seconds < 1


def test_criterion_1c_non_implementability(sigma1, sigma2):
    with Timer() as t:
        p1, p2 = induce_preference(sigma1).p, induce_preference(sigma2).p
        rd1, rd2 = random_dictatorship(sigma1).probs, random_dictatorship(sigma2).probs
    np.testing.assert_allclose(p1, p2, atol=TOL)
    off = p1[~np.eye(3, dtype=bool)]
    assert np.all(np.isclose(off, 2 / 3, atol=TOL) | np.isclose(off, 1 / 3, atol=TOL))
    np.testing.assert_allclose(rd1, [1 / 3, 1 / 3, 1 / 3], atol=TOL)
    np.testing.assert_allclose(rd2, [2 / 3, 0, 1 / 3], atol=TOL)
    assert t.seconds < 1


def test_criterion_1d_pmc(pmc_profile):
    with Timer() as t:
        p = induce_preference(pmc_profile).p
        u = u_vector(p)
        fb = [check_pmc(Rule("fbeta", b), p) for b in (0.0, 1.0, 100.0)]
        fi = check_pmc(Rule("finf"), p)
    np.testing.assert_allclose(u, [0.3, 0.4, 0.6], atol=TOL)
    assert not any(v.holds for v in fb)
    assert fi.holds
    assert t.seconds < 1


# --- 2: property suites -------------------------------------------------------

def _profiles(seed, n, ms, max_support=8):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        m = int(rng.choice(ms))
        yield random_profile(rng, m, int(rng.integers(1, max_support + 1)))


def test_criterion_2a_containment():
    bad = 0
    with Timer() as t:
        for prof in _profiles(101, 2000, [2, 3, 4, 5, 6], 20):
            bad += not outer_membership(induce_preference(prof), group_shares(prof))
    _property_seconds["2a"] = t.seconds
    assert bad == 0


def test_criterion_2b_f_star_monotone_pareto():
    bad, moves = 0, 0
    with Timer() as t:
        for prof in _profiles(102, 1000, [2, 3, 4], 6):
            mono = check_monotonicity(FSTAR, prof)
            moves += mono.tested
            bad += (not mono.holds) + (not check_pareto(FSTAR, prof).holds)
    _property_seconds["2b"] = t.seconds
    assert bad == 0 and moves >= 1000


def test_criterion_2c_level_bounds():
    bad, n = 0, 0
    with Timer() as t:
        for prof in _profiles(103, 1000, [2, 3, 4, 5, 6, 7, 8], 30):
            w = group_shares(prof)
            pi = f_star(induce_preference(prof)).probs
            level = ppa_level(pi, w)
            for delta in (0.5, 0.7, 1.0):
                inv, alpha, _ = ppa_lower_bounds(prof, delta)
                bad += not (level >= inv - 1e-9 and inv >= alpha - 1e-9)
                n += 1
    _property_seconds["2c"] = t.seconds
    assert bad == 0 and n == 3000


def test_criterion_2d_f_star_best_response_bound():
    worst, n = -np.inf, 0
    with Timer() as t:
        for prof in _profiles(104, 1000, [2, 3], 6):
            for k in np.flatnonzero(decompose_groups(prof).shares > 0):
                res = best_response(FSTAR, prof, int(k), mode="exhaustive")
                worst = max(worst, res.best_manipulated_value - res.bound_share)
                n += 1
        for prof in _profiles(105, 40, [4], 8):
            for k in np.flatnonzero(decompose_groups(prof).shares > 0):
                res = best_response(FSTAR, prof, int(k), mode="exhaustive")
                worst = max(worst, res.best_manipulated_value - res.bound_share)
                n += 1
    _property_seconds["2d"] = t.seconds
    assert n >= 1000
    assert worst <= 1e-9


def test_criterion_2e_bt_borda_order():
    rng = np.random.default_rng(106)
    checked, bad = 0, 0
    with Timer() as t:
        while checked < 1000:
            m = int(rng.integers(3, 9))
            a = np.full((m, m), 0.5)
            iu = np.triu_indices(m, 1)
            a[iu] = rng.uniform(0.02, 0.98, len(iu[0]))
            a[iu[1], iu[0]] = 1 - a[iu]
            b = borda_from_preference(a)
            if np.min(np.diff(np.sort(b))) < 1e-6:
                continue
            r = fit_bt(a).rewards
            bad += not np.array_equal(np.argsort(-r), np.argsort(-b))
            checked += 1
    _property_seconds["2e"] = t.seconds
    assert bad == 0


@pytest.mark.parametrize("alpha_c", [0.5, 0.9])
def test_criterion_2f_condorcet_beta(alpha_c):
    short = []
    with Timer() as t:
        for idx, (a, w) in enumerate(planted_condorcet_matrices(100, seed=7)):
            beta = condorcet_beta(u_vector(a)[w], a.shape[0], alpha_c)
            pi = f_beta(a, beta).probs[w]
            if pi < alpha_c - 1e-12:
                short.append((idx, round(float(pi), 4)))
    _property_seconds[f"2f-{alpha_c}"] = t.seconds
    assert not short, f"pi(y*) below {alpha_c} on instances {short}"


def test_criterion_2_runtime():
    assert len(_property_seconds) == 7, "run the whole module to time criterion 2"
    total = sum(_property_seconds.values())
    print(f"criterion 2 runtime {total:.1f}s", {k: round(v, 1) for k, v in _property_seconds.items()})
    assert total < 60


# --- 3: stochastic reference numbers ---------------------------------------------------

@pytest.fixture(scope="module")
def table():
    with Timer() as t:
        rows = bound_table([10, 20, 50, 100], delta=0.7, seeds=10)
    return rows, t.seconds


def test_criterion_3a_bound_table(table):
    rows, seconds = table
    for r in rows:
        print(f"M={r.m}: 1/sum(u)={r.inv_sum_u:.4f} (reference {REF_INV[r.m]}), "
              f"alpha={r.alpha:.4f} (reference {REF_ALPHA[r.m]})")
    for r in rows:
        assert abs(r.inv_sum_u - REF_INV[r.m]) <= 0.05
        assert abs(r.alpha - REF_ALPHA[r.m]) <= 0.05
        assert r.inv_sum_u > 1 / r.m and r.alpha > 1 / r.m
    assert seconds < 300


def test_criterion_3b_max_share():
    shares = [group_shares(random_ranking_profile(20, 1000, s)).max() for s in range(10)]
    mean = float(np.mean(shares))
    print(f"mean max share over 10 seeds: {mean:.4f}")
    assert 0.15 <= mean <= 0.35


# --- 4: trends -----------------------------------------------------------------------

FB_LABELS = [Rule("fbeta", b).label for b in BETAS]


@pytest.fixture(scope="module")
def tabular():
    profile = random_ranking_profile(20, 1000, 0)
    rules = [Rule("fbeta", b) for b in BETAS] + [Rule("borda"), Rule("ml")]
    reports = run_tabular(profile, rules, episodes=50, n_samples=100_000, seed=0,
                          pbm_budget=1000, pbm_rules=set(FB_LABELS) | {"borda"})
    for label, s in summarize(reports).items():
        print(f"{label:>10} win_rate={s['win_rate']:.4f} ppa_level={s['ppa_level']:.4f} "
              f"pbm_gain={s['pbm_gain']:.4f}")
    return reports


def test_criterion_4_win_rate_increases(tabular):
    tt = sign_test_trend(tabular, FB_LABELS, "win_rate", increasing=True)
    print("win-rate sign test wins", tt.wins, "p", tt.p_values)
    assert tt.max_p < 0.01


def test_criterion_4_ppa_decreases(tabular):
    tt = sign_test_trend(tabular, FB_LABELS, "ppa_level", increasing=False)
    print("ppa sign test wins", tt.wins, "p", tt.p_values)
    assert tt.max_p < 0.01


def test_criterion_4_borda_ml_not_proportional(tabular):
    s = summarize(tabular)
    assert s["borda"]["ppa_level"] < 0.01
    assert s["ml"]["ppa_level"] < 0.01


def test_criterion_4_pbm_below_borda(tabular):
    s = summarize(tabular)
    for lab, beta in zip(FB_LABELS, BETAS):
        if beta <= 1:
            assert s[lab]["pbm_gain"] < s["borda"]["pbm_gain"], lab


# --- 5: round trips and determinism ------------------------------------------------

def test_criterion_5_round_trips(tmp_path, borda_profile):
    prof = json.loads(io.dumps(io.profile_to_dict(borda_profile)))
    assert io.profile_from_dict(prof).same_as(borda_profile, tol=0)
    p = induce_preference(borda_profile).p
    np.testing.assert_array_equal(io.preference_from_dict(json.loads(io.dumps(io.preference_to_dict(p)))).p, p)
    pol = f_star(p)
    back = io.policy_from_dict(json.loads(io.dumps(io.policy_to_dict(pol))))
    np.testing.assert_array_equal(back.probs, pol.probs)

    d = sample_comparisons(p, 200, seed=3)
    write_dataset_csv(d, tmp_path / "c.csv")
    assert read_dataset_csv(tmp_path / "c.csv", 3).records == d.records

    reps = run_tabular(borda_profile, ["fstar", "fbeta:1", "ml", "borda", "rd"], 2, 1000, 4, pbm_budget=30)
    write_reports_csv(reps, tmp_path / "r.csv")
    assert reports_to_json(read_reports_csv(tmp_path / "r.csv")) == reports_to_json(reps)
    assert reports_to_json(reports_from_json(reports_to_json(reps))) == reports_to_json(reps)

    rows = bound_table([4, 5], seeds=2, n_evaluators=100)
    write_bound_table_csv(rows, tmp_path / "t.csv")
    assert read_bound_table_csv(tmp_path / "t.csv") == rows


def test_criterion_5_determinism():
    prof = random_ranking_profile(8, 300, 1)
    rules = ["fstar", "fbeta:1", "ml", "borda", "rd"]
    a = run_tabular(prof, rules, 3, 5000, 9, pbm_budget=50)
    b = run_tabular(prof, rules, 3, 5000, 9, pbm_budget=50)
    assert reports_to_json(a) == reports_to_json(b)
    assert bound_table([6], seeds=3) == bound_table([6], seeds=3)
