"""Rankings, profiles, preference matrices and the group decomposition.

Alternatives are 0-based indices throughout. A ranking is stored as its
``order`` tuple (best first); a profile is a sparse map from orders to
population shares.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

WEIGHT_TOL = 1e-9
SKEW_TOL = 1e-9
MAX_ENUMERATION_M = 8


class ValidationError(ValueError):
    """Raised when an input violates a domain invariant."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Ranking:
    """A strict total order; ``order[0]`` is the best alternative."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        order = tuple(int(x) for x in self.order)
        if not order or sorted(order) != list(range(len(order))):
            raise ValidationError(f"ranking {order} is not a permutation of 0..{len(order) - 1}")
        object.__setattr__(self, "order", order)

    @property
    def m(self) -> int:
        return len(self.order)

    def position(self, i: int) -> int:
        """1-based rank of alternative ``i`` (1 = best)."""
        return self.order.index(i) + 1

    def positions(self) -> np.ndarray:
        pos = np.empty(self.m, dtype=int)
        pos[list(self.order)] = np.arange(1, self.m + 1)
        return pos

    @property
    def top(self) -> int:
        return self.order[0]


def all_rankings(m: int) -> list[tuple[int, ...]]:
    """Every permutation of ``range(m)`` in lexicographic order."""
    if m > MAX_ENUMERATION_M:
        raise ValidationError(f"full enumeration is limited to M <= {MAX_ENUMERATION_M}, got {m}")
    return list(itertools.permutations(range(m)))


@dataclass(frozen=True, eq=False)
class Profile:
    """Distribution over rankings of ``m`` alternatives.

    Duplicate orders are merged and zero weights dropped on construction.
    Weights must already sum to one; use :meth:`renormalize` explicitly
    otherwise.
    """

    orders: tuple[tuple[int, ...], ...]
    weights: np.ndarray
    m: int = field(default=-1)

    def __post_init__(self) -> None:
        orders = [Ranking(o).order for o in self.orders]
        weights = np.asarray(self.weights, dtype=float).ravel()
        if len(orders) != len(weights):
            raise ValidationError("orders and weights differ in length")
        if not orders:
            raise ValidationError("profile needs at least one ranking")
        m = self.m if self.m >= 0 else len(orders[0])
        if any(len(o) != m for o in orders):
            raise ValidationError("all rankings must have the same number of alternatives")
        if np.any(~np.isfinite(weights)) or np.any(weights < 0):
            raise ValidationError("weights must be finite and nonnegative")
        total = weights.sum()
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {total!r}, expected 1 within {WEIGHT_TOL}")

        merged: dict[tuple[int, ...], float] = {}
        for o, w in zip(orders, weights):
            if w > 0:
                merged[o] = merged.get(o, 0.0) + float(w)
        keys = sorted(merged)
        object.__setattr__(self, "orders", tuple(keys))
        object.__setattr__(self, "weights", _readonly([merged[k] for k in keys]))
        object.__setattr__(self, "m", m)

    @classmethod
    def from_dict(cls, mapping: Mapping[Sequence[int], float], m: int | None = None) -> "Profile":
        items = list(mapping.items())
        return cls(tuple(tuple(k) for k, _ in items), np.array([float(v) for _, v in items]),
                   -1 if m is None else m)

    @classmethod
    def from_counts(cls, orders: Iterable[Sequence[int]]) -> "Profile":
        """Empirical profile of a list of evaluator rankings (one per evaluator)."""
        counts: dict[tuple[int, ...], int] = {}
        n = 0
        for o in orders:
            o = tuple(int(x) for x in o)
            counts[o] = counts.get(o, 0) + 1
            n += 1
        if n == 0:
            raise ValidationError("no rankings given")
        return cls.from_dict({k: c / n for k, c in counts.items()})

    @classmethod
    def single(cls, order: Sequence[int]) -> "Profile":
        return cls((tuple(order),), np.array([1.0]))

    @classmethod
    def uniform(cls, m: int) -> "Profile":
        orders = all_rankings(m)
        return cls(tuple(orders), np.full(len(orders), 1.0 / len(orders)))

    @staticmethod
    def renormalize(orders: Sequence[Sequence[int]], weights: Sequence[float]) -> "Profile":
        """Build a profile after rescaling nonnegative weights to sum to one."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise ValidationError("cannot renormalize: weights must be nonnegative with positive sum")
        return Profile(tuple(tuple(o) for o in orders), w / w.sum())

    def __len__(self) -> int:
        return len(self.orders)

    def items(self) -> list[tuple[tuple[int, ...], float]]:
        return list(zip(self.orders, self.weights.tolist()))

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(self.items())

    def weight(self, order: Sequence[int]) -> float:
        return self.as_dict().get(tuple(order), 0.0)

    def positions(self) -> np.ndarray:
        """Array ``pos[r, i]`` = 0-based position of alternative i in ranking r."""
        return positions_of(self.orders, self.m)

    def mix(self, other: "Profile", lam: float) -> "Profile":
        """The mixture ``lam * self + (1 - lam) * other``."""
        if other.m != self.m:
            raise ValidationError("profiles over different alternative counts")
        d: dict[tuple[int, ...], float] = {}
        for o, w in self.items():
            d[o] = d.get(o, 0.0) + lam * w
        for o, w in other.items():
            d[o] = d.get(o, 0.0) + (1.0 - lam) * w
        return Profile.from_dict(d, self.m)

    def same_as(self, other: "Profile", tol: float = 1e-12) -> bool:
        a, b = self.as_dict(), other.as_dict()
        keys = set(a) | set(b)
        return self.m == other.m and all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= tol for k in keys)


def positions_of(orders: Sequence[Sequence[int]], m: int) -> np.ndarray:
    orders = np.asarray(orders, dtype=int).reshape(-1, m)
    pos = np.empty_like(orders)
    rows = np.arange(orders.shape[0])[:, None]
    pos[rows, orders] = np.arange(m)[None, :]
    return pos


def ranking_matrices(orders: Sequence[Sequence[int]], m: int) -> np.ndarray:
    """Stack of 0/1 matrices ``[r, i, j] = 1{r ranks i above j}`` (diagonal 1/2)."""
    pos = positions_of(orders, m)
    mats = (pos[:, :, None] < pos[:, None, :]).astype(float)
    idx = np.arange(m)
    mats[:, idx, idx] = 0.5
    return mats


@dataclass(frozen=True, eq=False)
class PreferenceMatrix:
    """Pairwise win probabilities, ``p[i, j] = P(y_i beats y_j)``."""

    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise ValidationError(f"preference matrix must be square, got shape {p.shape}")
        diag = validate_preference(p)
        if not diag.ok:
            raise ValidationError(f"invalid preference matrix: {diag.summary()}")
        np.fill_diagonal(p, 0.5)
        object.__setattr__(self, "p", _readonly(p))

    @property
    def m(self) -> int:
        return self.p.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    @classmethod
    def uniform(cls, m: int) -> "PreferenceMatrix":
        return cls(np.full((m, m), 0.5))

    @classmethod
    def from_upper(cls, m: int, upper: Mapping[tuple[int, int], float]) -> "PreferenceMatrix":
        """Fill ``p[i, j]`` and its complement from a map over pairs."""
        p = np.full((m, m), 0.5)
        for (i, j), v in upper.items():
            p[i, j] = v
            p[j, i] = 1.0 - v
        return cls(p)


@dataclass(frozen=True, eq=False)
class Policy:
    """A probability distribution over alternatives."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float).ravel()
        if np.any(~np.isfinite(probs)) or np.any(probs < -WEIGHT_TOL):
            raise ValidationError("policy entries must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"policy sums to {probs.sum()!r}")
        object.__setattr__(self, "probs", _readonly(np.clip(probs, 0.0, None)))

    @property
    def m(self) -> int:
        return self.probs.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __getitem__(self, i):
        return self.probs[i]

    @classmethod
    def one_hot(cls, m: int, i: int) -> "Policy":
        v = np.zeros(m)
        v[i] = 1.0
        return cls(v)

    @classmethod
    def uniform(cls, m: int) -> "Policy":
        return cls(np.full(m, 1.0 / m))


@dataclass(frozen=True)
class PreferenceDiagnostics:
    skew_violations: list[tuple[int, int, float]]
    range_violations: list[tuple[int, int, float]]
    max_deviation: float

    @property
    def ok(self) -> bool:
        return not self.skew_violations and not self.range_violations

    def summary(self) -> str:
        return (f"{len(self.skew_violations)} skew-symmetry violation(s), "
                f"{len(self.range_violations)} out-of-range entr(ies), "
                f"max deviation {self.max_deviation:.3g}")


def as_array(p) -> np.ndarray:
    if isinstance(p, PreferenceMatrix):
        return p.p
    return np.asarray(p, dtype=float)


def validate_preference(p, tol: float = SKEW_TOL) -> PreferenceDiagnostics:
    """Report skew-symmetry and range problems without raising."""
    a = as_array(p)
    bad_range = ~np.isfinite(a) | (a < -tol) | (a > 1 + tol)
    rng = [(int(i), int(j), float(a[i, j])) for i, j in zip(*np.nonzero(bad_range))]
    dev = np.abs(a + a.T - 1.0)
    iu = np.triu_indices(a.shape[0], k=1)
    upper = dev[iu]
    skew = [(int(i), int(j), float(d)) for i, j, d in zip(iu[0], iu[1], upper) if not d <= tol]
    max_dev = float(np.nanmax(upper)) if upper.size else 0.0
    return PreferenceDiagnostics(skew, rng, max_dev)


def induce_preference(profile: Profile) -> PreferenceMatrix:
    """Pairwise win probabilities induced by a profile."""
    mats = ranking_matrices(profile.orders, profile.m)
    return PreferenceMatrix(np.tensordot(profile.weights, mats, axes=1))


@dataclass(frozen=True, eq=False)
class GroupDecomposition:
    """Top-choice shares and group-conditional preferences.

    ``group_prefs[k]`` is None when group k is empty.
    """

    shares: np.ndarray
    group_prefs: tuple[PreferenceMatrix | None, ...]
    sub_profiles: tuple[Profile | None, ...]

    def reconstruct(self) -> np.ndarray:
        m = len(self.shares)
        total = np.zeros((m, m))
        for w, g in zip(self.shares, self.group_prefs):
            if g is not None:
                total += w * g.p
        return total


def decompose_groups(profile: Profile) -> GroupDecomposition:
    m = profile.m
    shares = np.zeros(m)
    members: list[list[tuple[tuple[int, ...], float]]] = [[] for _ in range(m)]
    for o, w in profile.items():
        shares[o[0]] += w
        members[o[0]].append((o, w))
    prefs: list[PreferenceMatrix | None] = []
    subs: list[Profile | None] = []
    for k in range(m):
        if shares[k] > 0:
            sub = Profile.renormalize([o for o, _ in members[k]], [w for _, w in members[k]])
            subs.append(sub)
            g = induce_preference(sub).p.copy()
            # every member ranks y_k first; pin the row exactly instead of
            # carrying the rounding of the renormalized weights
            g[k, :], g[:, k], g[k, k] = 1.0, 0.0, 0.5
            prefs.append(PreferenceMatrix(g))
        else:
            subs.append(None)
            prefs.append(None)
    return GroupDecomposition(_readonly(shares), tuple(prefs), tuple(subs))


def group_shares(profile: Profile) -> np.ndarray:
    shares = np.zeros(profile.m)
    for o, w in profile.items():
        shares[o[0]] += w
    return shares
