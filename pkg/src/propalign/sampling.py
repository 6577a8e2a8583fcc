"""Pairwise-comparison sampling, empirical preference estimates, synthetic
profiles and ranking ingestion.

Randomness comes from numpy's ``Generator`` over PCG64. Integer seeds are
passed straight to ``np.random.default_rng``; per-episode streams use
``np.random.SeedSequence([seed, index])``.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Profile, ValidationError, as_array


def derived_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for item ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class ComparisonDataset:
    winners: np.ndarray
    losers: np.ndarray
    m: int
    seed: int | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.winners, dtype=np.int64)
        l = np.asarray(self.losers, dtype=np.int64)
        if w.shape != l.shape:
            raise ValidationError("winners and losers differ in length")
        if w.size and (np.any(w == l) or w.min() < 0 or l.min() < 0
                       or w.max() >= self.m or l.max() >= self.m):
            raise ValidationError("records need distinct in-range winner and loser indices")
        object.__setattr__(self, "winners", w)
        object.__setattr__(self, "losers", l)

    def __len__(self) -> int:
        return int(self.winners.size)

    @property
    def records(self) -> list[tuple[int, int]]:
        return list(zip(self.winners.tolist(), self.losers.tolist()))


def sample_comparisons(p, n: int, seed=None) -> ComparisonDataset:
    """Draw ``n`` comparisons: uniform unordered pair, then winner ~ ``p``."""
    a = as_array(p)
    m = a.shape[0]
    if m < 2:
        raise ValidationError("need at least two alternatives to compare")
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = _rng(seed)
    iu, ju = np.triu_indices(m, k=1)
    pick = rng.integers(0, iu.size, size=n)
    i, j = iu[pick], ju[pick]
    first_wins = rng.random(n) < a[i, j]
    winners = np.where(first_wins, i, j)
    losers = np.where(first_wins, j, i)
    return ComparisonDataset(winners, losers, m, seed if isinstance(seed, (int, np.integer)) else None)


def count_matrix(d: ComparisonDataset) -> np.ndarray:
    """``n[i, j]`` = number of records where i beat j."""
    n = np.zeros((d.m, d.m), dtype=np.int64)
    np.add.at(n, (d.winners, d.losers), 1)
    return n


def estimate_from_counts(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    tot = n + n.T
    with np.errstate(invalid="ignore", divide="ignore"):
        est = np.where(tot > 0, n / tot, 0.5)
    np.fill_diagonal(est, 0.5)
    return est


def estimate_preference(d: ComparisonDataset) -> np.ndarray:
    """Empirical win frequencies; unobserved pairs get 1/2."""
    return estimate_from_counts(count_matrix(d))


def write_dataset_csv(d: ComparisonDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["winner", "loser"])
        w.writerows(d.records)


def read_dataset_csv(path, m: int | None = None) -> ComparisonDataset:
    winners, losers = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["winner", "loser"]:
            raise ValidationError(f"{path}: expected header 'winner,loser'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                a, b = (int(x) for x in row)
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed record {row!r}") from exc
            winners.append(a)
            losers.append(b)
    if m is None:
        m = max(winners + losers, default=-1) + 1
    return ComparisonDataset(np.array(winners, dtype=np.int64), np.array(losers, dtype=np.int64), m)


def random_ranking_orders(m: int, n_evaluators: int, seed=None, noise_scale: float = 1.0) -> np.ndarray:
    """Evaluator rankings from N(0,1) base rewards plus per-evaluator noise."""
    if m < 2 or n_evaluators < 1:
        raise ValueError("need m >= 2 and at least one evaluator")
    rng = _rng(seed)
    base = rng.standard_normal(m)
    noisy = base[None, :] + noise_scale * rng.standard_normal((n_evaluators, m))
    return np.argsort(-noisy, axis=1, kind="stable")


def random_ranking_profile(m: int, n_evaluators: int, seed=None, noise_scale: float = 1.0) -> Profile:
    orders = random_ranking_orders(m, n_evaluators, seed, noise_scale)
    uniq, counts = np.unique(orders, axis=0, return_counts=True)
    return Profile(tuple(map(tuple, uniq.tolist())), counts / n_evaluators, m)


# --- ingestion -------------------------------------------------------------

def _ingest_csv_rankings(path: Path) -> tuple[Profile, list[str]]:
    labels: list[str] | None = None
    index: dict[str, int] = {}
    orders = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            items = [x.strip() for x in line.split(",")]
            if any(not x for x in items):
                raise ValidationError(f"{path}:{lineno}: empty alternative id")
            if labels is None:
                labels = items
                index = {lab: k for k, lab in enumerate(labels)}
                if len(index) != len(labels):
                    raise ValidationError(f"{path}:{lineno}: duplicate alternative in ranking")
            if len(set(items)) != len(items):
                raise ValidationError(f"{path}:{lineno}: duplicate alternative in ranking")
            unknown = [x for x in items if x not in index]
            if unknown:
                raise ValidationError(f"{path}:{lineno}: unknown alternative(s) {unknown}")
            if len(items) != len(labels):
                raise ValidationError(f"{path}:{lineno}: incomplete ranking "
                                      f"({len(items)} of {len(labels)} alternatives)")
            orders.append(tuple(index[x] for x in items))
    if not orders:
        raise ValidationError(f"{path}: no rankings found")
    return Profile.from_counts(orders), labels


def _ingest_movielens(path: Path, top: int) -> tuple[Profile, list[str]]:
    # ratings.dat: UserID::MovieID::Rating::Timestamp
    rows = []
    with open(path, encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 4:
                raise ValidationError(f"{path}:{lineno}: expected 'user::movie::rating::timestamp'")
            try:
                rows.append(tuple(int(float(x)) if k == 2 else int(x) for k, x in enumerate(parts)))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: non-numeric field") from exc

    counts = Counter(movie for _, movie, _, _ in rows)
    if len(counts) < top:
        raise ValidationError(f"{path}: only {len(counts)} movies, need {top}")
    chosen = sorted(sorted(counts, key=lambda mv: (-counts[mv], mv))[:top])
    index = {mv: k for k, mv in enumerate(chosen)}

    per_user: dict[int, dict[int, tuple[int, int]]] = {}
    for user, movie, rating, ts in rows:
        if movie in index:
            per_user.setdefault(user, {})[movie] = (rating, ts)
    orders = []
    for user in sorted(per_user):
        rated = per_user[user]
        if len(rated) != top:
            continue
        # higher rating first; ties: earlier timestamp, then lower movie id
        ranked = sorted(rated, key=lambda mv: (-rated[mv][0], rated[mv][1], mv))
        orders.append(tuple(index[mv] for mv in ranked))
    if not orders:
        raise ValidationError(f"{path}: no user rated all {top} selected movies")
    return Profile.from_counts(orders), [str(mv) for mv in chosen]


def ingest_rankings(path, fmt: str = "csv-rankings", top: int = 20) -> tuple[Profile, list[str]]:
    """Read evaluator rankings; returns the profile and the alternative labels by index."""
    path = Path(path)
    if fmt == "csv-rankings":
        return _ingest_csv_rankings(path)
    if fmt == "movielens-ratings":
        return _ingest_movielens(path, top)
    raise ValueError(f"unknown format {fmt!r}")
