"""Tabular episodes and the random-ranking bound table.

An episode draws pairwise comparisons from the true induced matrix,
estimates ``P_hat`` and scores every rule on three metrics: win rate
against the uniform policy under the true matrix, PPA level against the
true group shares, and the mean best-response gain of a single group
(sampled candidate search, so a lower bound on true manipulability).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.stats import binomtest

from .axioms import ppa_level
from .core import Profile, ValidationError, as_array, group_shares, induce_preference
from .feasibility import ppa_lower_bounds
from .manipulation import CandidateSet
from .rules import Rule, parse_rule, u_vector
from .sampling import derived_rng, estimate_preference, random_ranking_profile, sample_comparisons

PBM_BUDGET = 1000


def win_rate(policy, p, opponent=None) -> float:
    """``sum_ij pi_i opp_j p[i, j]``; the opponent defaults to uniform."""
    a = as_array(p)
    pi = np.asarray(policy, dtype=float)
    m = a.shape[0]
    opp = np.full(m, 1.0 / m) if opponent is None else np.asarray(opponent, dtype=float)
    if pi.shape != (m,) or opp.shape != (m,):
        raise ValidationError(f"dimension mismatch: policy {pi.shape}, opponent {opp.shape}, matrix {a.shape}")
    return float(pi @ a @ opp)


@dataclass
class EpisodeReport:
    rule: str
    beta: float
    win_rate: float
    ppa_level: float
    pbm_gain: float
    sum_u: float
    seed: int
    n_samples: int
    episode: int = 0

    def as_row(self) -> dict:
        return asdict(self)


REPORT_COLUMNS = tuple(f.name for f in fields(EpisodeReport))


def _episode_matrix(profile: Profile, n_samples: int | None, rng) -> np.ndarray:
    p = induce_preference(profile).p
    if n_samples is None:
        return p
    return estimate_preference(sample_comparisons(p, n_samples, rng))


def run_tabular_episode(profile: Profile, rules, n_samples: int | None, seed: int, *,
                        episode: int = 0, pbm_budget: int = PBM_BUDGET,
                        pbm_rules=None) -> list[EpisodeReport]:
    """One episode; ``n_samples=None`` uses the exact induced matrix.

    ``pbm_rules`` restricts the (costly) manipulation search to the given
    rule labels; other rules report ``pbm_gain = nan``. ``None`` means all.
    Random dictatorship sees the true profile, every other rule sees only
    the estimate.
    """
    rules = [r if isinstance(r, Rule) else parse_rule(r) for r in rules]
    rng = derived_rng(seed, episode)
    p_true = induce_preference(profile).p
    p_hat = _episode_matrix(profile, n_samples, rng)
    w = group_shares(profile)
    sum_u = float(u_vector(p_hat).sum())
    groups = [k for k in range(profile.m) if w[k] > 0]

    need_pbm = [r for r in rules if pbm_rules is None or r.label in pbm_rules]
    cand_seed = int(rng.integers(2**63 - 1))
    cands = {k: CandidateSet(profile, k, "sampled", pbm_budget, cand_seed) for k in groups} if need_pbm else {}

    out = []
    for rule in rules:
        if rule.implementable:
            pi = np.asarray(rule.from_preference(p_hat).probs)
        else:
            pi = np.asarray(rule(profile).probs)
        gain = float("nan")
        if rule in need_pbm:
            base = None if not rule.implementable else p_hat
            gain = float(np.mean([cands[k].evaluate(rule, base).gain for k in groups]))
        out.append(EpisodeReport(
            rule=rule.label, beta=rule.beta if rule.name == "fbeta" else float("nan"),
            win_rate=win_rate(pi, p_true), ppa_level=ppa_level(pi, w), pbm_gain=gain,
            sum_u=sum_u, seed=int(seed), n_samples=-1 if n_samples is None else int(n_samples),
            episode=int(episode)))
    return out


def run_tabular(profile: Profile, rules, episodes: int, n_samples: int | None, seed: int,
                **kw) -> list[EpisodeReport]:
    """Episodes ``0..episodes-1``, each with its own derived stream."""
    reports = []
    for e in range(episodes):
        reports.extend(run_tabular_episode(profile, rules, n_samples, seed, episode=e, **kw))
    return reports


def metric_matrix(reports, labels, metric: str) -> np.ndarray:
    """``(episodes, len(labels))`` array of one metric."""
    by = {}
    for r in reports:
        by.setdefault(r.episode, {})[r.rule] = getattr(r, metric)
    eps = sorted(by)
    return np.array([[by[e][lab] for lab in labels] for e in eps])


@dataclass
class TrendTest:
    metric: str
    labels: tuple
    increasing: bool
    wins: list
    n: int
    p_values: list

    @property
    def max_p(self) -> float:
        return max(self.p_values)


def sign_test_trend(reports, labels, metric: str, increasing: bool = True) -> TrendTest:
    """One-sided sign test for every consecutive pair of ``labels``.

    Ties count against the trend, so the test asks for strict movement.
    """
    x = metric_matrix(reports, labels, metric)
    d = np.diff(x, axis=1) if increasing else -np.diff(x, axis=1)
    n = x.shape[0]
    wins = [int((d[:, c] > 0).sum()) for c in range(d.shape[1])]
    pv = [float(binomtest(k, n, 0.5, alternative="greater").pvalue) for k in wins]
    return TrendTest(metric, tuple(labels), increasing, wins, n, pv)


def summarize(reports) -> dict[str, dict[str, float]]:
    """Per-rule means of the three metrics, in first-seen rule order."""
    out: dict[str, dict[str, list]] = {}
    for r in reports:
        d = out.setdefault(r.rule, {"win_rate": [], "ppa_level": [], "pbm_gain": []})
        for key in d:
            d[key].append(getattr(r, key))
    return {lab: {k: float(np.mean(v)) for k, v in d.items()} for lab, d in out.items()}


# --- bound table -----------------------------------------------------------

@dataclass
class BoundRow:
    m: int
    delta: float
    seeds: int
    inv_sum_u: float
    alpha: float
    baseline: float
    max_share: float


BOUND_COLUMNS = tuple(f.name for f in fields(BoundRow))


def bound_table(ms, delta: float = 0.7, seeds: int = 10, n_evaluators: int = 1000) -> list[BoundRow]:
    """Average ``1/sum(u)`` and ``alpha`` over random-ranking profiles seeded ``0..seeds-1``."""
    rows = []
    for m in ms:
        inv, alpha, top = [], [], []
        for s in range(seeds):
            prof = random_ranking_profile(int(m), n_evaluators, s)
            i, a, _ = ppa_lower_bounds(prof, delta)
            inv.append(i)
            alpha.append(a)
            top.append(float(group_shares(prof).max()))
        rows.append(BoundRow(int(m), float(delta), int(seeds), float(np.mean(inv)),
                             float(np.mean(alpha)), 1.0 / m, float(np.mean(top))))
    return rows


# --- serialization ---------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write_csv(rows, columns, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            d = asdict(r)
            w.writerow([_fmt(d[c]) for c in columns])


def _read_csv(cls, path):
    types = {f.name: f.type for f in fields(cls)}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != tuple(types):
            raise ValidationError(f"{path}: expected columns {','.join(types)}")
        for row in reader:
            kw = {}
            for k, v in row.items():
                t = types[k]
                kw[k] = v if t == "str" else (int(v) if t == "int" else float(v))
            out.append(cls(**kw))
    return out


def write_reports_csv(reports, path) -> None:
    _write_csv(reports, REPORT_COLUMNS, path)


def read_reports_csv(path) -> list[EpisodeReport]:
    return _read_csv(EpisodeReport, path)


def write_bound_table_csv(rows, path) -> None:
    _write_csv(rows, BOUND_COLUMNS, path)


def read_bound_table_csv(path) -> list[BoundRow]:
    return _read_csv(BoundRow, path)


def _json_float(x: float):
    # JSON has no NaN; store it as null
    return None if isinstance(x, float) and math.isnan(x) else x


def reports_to_json(reports) -> str:
    return json.dumps([{k: _json_float(v) for k, v in asdict(r).items()} for r in reports])


def reports_from_json(text: str) -> list[EpisodeReport]:
    return [EpisodeReport(**{k: (float("nan") if v is None else v) for k, v in d.items()})
            for d in json.loads(text)]

