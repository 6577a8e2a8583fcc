import numpy as np
import pytest
from hypothesis import given, settings

from conftest import ml_epsilon_matrix, profiles, random_profile
from propalign.core import Profile, ValidationError, decompose_groups, induce_preference
from propalign.manipulation import (
    CandidateSet,
    best_response,
    manipulate_profile,
    pbm_gain,
)
from propalign.rules import Rule, borda_scores, maximal_lotteries, u_vector

FSTAR, ML, BORDA, RD = Rule("fstar"), Rule("ml"), Rule("borda"), Rule("rd")


def epsilon_profile(eps):
    """w = (1/3 + eps, 1/3 - eps, 1/3); each group indifferent below its top."""
    return Profile.from_dict({
        (0, 1, 2): (1 / 3 + eps) / 2, (0, 2, 1): (1 / 3 + eps) / 2,
        (1, 0, 2): (1 / 3 - eps) / 2, (1, 2, 0): (1 / 3 - eps) / 2,
        (2, 0, 1): 1 / 6, (2, 1, 0): 1 / 6,
    })


def test_borda_misreport_profile(borda_profile):
    out = manipulate_profile(borda_profile, 1, Profile.single((1, 2, 0)))
    np.testing.assert_allclose(borda_scores(out), [0.85, 1.2, 0.95], atol=1e-12)


@given(profiles(max_m=5))
def test_truthful_manipulation_is_identity(prof):
    dec = decompose_groups(prof)
    for k, sub in enumerate(dec.sub_profiles):
        if sub is not None:
            assert manipulate_profile(prof, k, sub).same_as(prof, tol=1e-12)


def test_empty_group_cannot_manipulate(borda_profile):
    prof = Profile.from_dict({(0, 1, 2): 0.5, (1, 0, 2): 0.5})
    with pytest.raises(ValidationError):
        manipulate_profile(prof, 2, Profile.single((2, 1, 0)))
    with pytest.raises(ValidationError):
        best_response(FSTAR, prof, 2)


def test_ml_counterexample_matrix():
    eps = 1 / 12
    prof = epsilon_profile(eps)
    out = manipulate_profile(prof, 2, Profile.single((2, 1, 0)))
    np.testing.assert_allclose(induce_preference(out).p, ml_epsilon_matrix(eps), atol=1e-12)


@pytest.mark.parametrize("eps, expect", [(1 / 12, 0.5), (1 / 24, 0.75), (1 / 48, 0.875), (1 / 96, 0.9375)])
def test_ml_manipulated_share_tends_to_one(eps, expect):
    pi = maximal_lotteries(ml_epsilon_matrix(eps)).policy.probs
    assert pi[2] == pytest.approx(expect, abs=1e-9)
    res = best_response(ML, epsilon_profile(eps), 2, mode="exhaustive")
    assert res.best_manipulated_value >= expect - 1e-9
    assert res.share == pytest.approx(1 / 3)


def test_borda_best_response(borda_profile):
    res = best_response(BORDA, borda_profile, 1)
    assert res.best_manipulated_value == 1.0
    assert res.honest_policy_value == 0.0
    assert res.share == pytest.approx(0.45)
    assert res.best_subprofile.orders[0][0] == 1
    gains = pbm_gain(BORDA, borda_profile)
    assert gains[1] == 1.0


def test_f_star_binary_gain_is_zero():
    prof = Profile.from_dict({(0, 1): 0.6, (1, 0): 0.4})
    np.testing.assert_allclose(pbm_gain(FSTAR, prof), 0, atol=1e-12)


@pytest.mark.parametrize("rule", [FSTAR, BORDA, ML, RD])
def test_truthful_only_search_has_zero_gain(rule, borda_profile):
    gains = pbm_gain(rule, borda_profile, mode="exhaustive", budget=0)
    np.testing.assert_allclose(gains, 0, atol=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_f_star_best_response_bound_m3(seed):
    prof = random_profile(np.random.default_rng(seed), 3, 4)
    dec = decompose_groups(prof)
    for k in range(3):
        if dec.shares[k] == 0:
            continue
        res = best_response(FSTAR, prof, k)
        assert res.best_manipulated_value <= res.bound_share + 1e-9
        assert res.bound_share <= res.bound_affine + 1e-12
        assert res.best_manipulated_value >= res.honest_policy_value - 1e-9
        # the best response keeps y_k on top
        assert all(o[0] == k for o in res.best_subprofile.orders)
        if res.u <= 0.5 and res.share <= 0.5:
            assert res.best_manipulated_value <= 0.5 + 1e-9


def test_rd_cannot_gain(borda_profile):
    np.testing.assert_allclose(pbm_gain(RD, borda_profile), 0, atol=1e-12)


def test_exhaustive_limits():
    with pytest.raises(ValidationError):
        CandidateSet(Profile.uniform(6), 0, "exhaustive")
    with pytest.raises(ValueError):
        CandidateSet(Profile.uniform(3), 0, "greedy")


def test_candidate_counts():
    assert len(CandidateSet(Profile.uniform(3), 0)) == 1 + 861
    cs = CandidateSet(Profile.uniform(3), 0, budget=10)
    assert len(cs) == 11 and not cs.complete


def test_sampled_mode_is_deterministic_and_lower_bound():
    prof = random_profile(np.random.default_rng(0), 6, 12)
    k = int(np.argmax(decompose_groups(prof).shares))
    a = best_response(FSTAR, prof, k, mode="sampled", budget=300, seed=5)
    b = best_response(FSTAR, prof, k, mode="sampled", budget=300, seed=5)
    assert a.best_manipulated_value == b.best_manipulated_value
    assert a.is_lower_bound and a.n_candidates == 301
    assert a.best_manipulated_value <= a.bound_share + 1e-9


def test_estimated_base_reproduces_honest_policy():
    prof = random_profile(np.random.default_rng(1), 4, 6)
    p = induce_preference(prof).p
    rng = np.random.default_rng(2)
    noise = rng.normal(0, 0.01, p.shape)
    noise = np.triu(noise, 1)
    base = np.clip(p + noise - noise.T, 0, 1)
    res = best_response(FSTAR, prof, 0 if decompose_groups(prof).shares[0] > 0 else 1,
                        mode="exhaustive", base=base)
    np.testing.assert_allclose(res.honest_policy_value,
                               FSTAR.from_preference(base).probs[res.group], atol=1e-12)


@settings(max_examples=25)
@given(profiles(min_m=3, max_m=4, max_rankings=6))
def test_batched_values_match_profile_route(prof):
    dec = decompose_groups(prof)
    k = int(np.argmax(dec.shares))
    cs = CandidateSet(prof, k, budget=40)
    P = cs.manipulated_matrices()
    for c in range(len(cs)):
        direct = induce_preference(manipulate_profile(prof, k, cs.subprofile(c))).p
        np.testing.assert_allclose(P[c], direct, atol=1e-9)
    assert u_vector(P[0])[k] == pytest.approx(u_vector(induce_preference(prof))[k])
