"""JSON formats for profiles, preference matrices, policies and reports.

Floats are written with ``repr`` precision by the stdlib encoder, so every
format round-trips exactly. NaN and infinities become ``null``.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .axioms import AxiomVerdict, Counterexample
from .core import Policy, PreferenceMatrix, Profile, ValidationError
from .feasibility import FeasibilityReport
from .manipulation import ManipulationResult


def _clean(x):
    """Recursively turn numpy values into plain JSON-compatible objects."""
    if isinstance(x, Profile):
        return profile_to_dict(x)
    if isinstance(x, PreferenceMatrix):
        return preference_to_dict(x)
    if isinstance(x, Policy):
        return _clean(x.probs)
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=1)


# --- profile / matrix / policy -------------------------------------------------

def profile_to_dict(profile: Profile, labels=None) -> dict:
    d = {"m": profile.m,
         "rankings": [{"order": list(o), "weight": float(w)} for o, w in profile.items()]}
    if labels is not None:
        d["labels"] = list(labels)
    return d


def profile_from_dict(d: dict) -> Profile:
    try:
        m = int(d["m"])
        rankings = d["rankings"]
        orders = [tuple(int(i) for i in r["order"]) for r in rankings]
        weights = [float(r["weight"]) for r in rankings]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed profile JSON: {exc}") from exc
    return Profile(tuple(orders), np.array(weights), m)


def preference_to_dict(p) -> dict:
    a = np.asarray(p, dtype=float)
    return {"m": int(a.shape[0]), "p": a.tolist()}


def preference_from_dict(d: dict) -> PreferenceMatrix:
    try:
        m = int(d["m"])
        a = np.array(d["p"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed preference JSON: {exc}") from exc
    if a.shape != (m, m):
        raise ValidationError(f"preference matrix has shape {a.shape}, expected ({m}, {m})")
    return PreferenceMatrix(a)


def policy_to_dict(policy: Policy, rule: str | None = None) -> dict:
    d = {"m": len(policy.probs), "probs": [float(x) for x in policy.probs]}
    if rule is not None:
        d["rule"] = rule
    return d


def policy_from_dict(d: dict) -> Policy:
    try:
        return Policy(np.array(d["probs"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed policy JSON: {exc}") from exc


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def save_json(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def load_input(path) -> Profile | PreferenceMatrix:
    """A profile (has ``rankings``) or a preference matrix (has ``p``)."""
    d = load_json(path)
    if "rankings" in d:
        return profile_from_dict(d)
    if "p" in d:
        return preference_from_dict(d)
    raise ValidationError(f"{path}: neither a profile nor a preference matrix")


def load_vector(path) -> np.ndarray:
    """A query vector, either a bare list or ``{"w": [...]}``."""
    d = load_json(path)
    if isinstance(d, dict):
        for key in ("w", "probs", "shares"):
            if key in d:
                d = d[key]
                break
        else:
            raise ValidationError(f"{path}: expected a list or an object with key 'w'")
    return np.array(d, dtype=float)


# --- reports -----------------------------------------------------------------

def feasibility_to_dict(r: FeasibilityReport) -> dict:
    return _clean({
        "u": r.u, "sum_u": r.sum_u, "member": r.member,
        "witness_profile": r.witness_profile,
        "witness_groups": r.witness_groups,
        "residual": r.residual, "note": r.note, "extra": r.extra,
    })


def feasibility_from_dict(d: dict) -> FeasibilityReport:
    wp = d.get("witness_profile")
    wg = d.get("witness_groups")
    return FeasibilityReport(
        u=np.array(d["u"], dtype=float), sum_u=float(d["sum_u"]), member=bool(d["member"]),
        witness_profile=None if wp is None else profile_from_dict(wp),
        witness_groups=None if wg is None else [None if g is None else np.array(g, dtype=float) for g in wg],
        residual=float("inf") if d.get("residual") is None else float(d["residual"]),
        note=d.get("note", ""), extra=d.get("extra", {}))


def manipulation_to_dict(r: ManipulationResult) -> dict:
    return _clean({
        "group": r.group, "share": r.share, "u": r.u,
        "honest_policy_value": r.honest_policy_value,
        "best_manipulated_value": r.best_manipulated_value,
        "gain": r.gain,
        "bound_share": r.bound_share, "bound_affine": r.bound_affine,
        "best_subprofile": r.best_subprofile,
        "n_candidates": r.n_candidates, "is_lower_bound": r.is_lower_bound,
    })


def manipulation_from_dict(d: dict) -> ManipulationResult:
    return ManipulationResult(
        group=int(d["group"]), share=float(d["share"]), u=float(d["u"]),
        honest_policy_value=float(d["honest_policy_value"]),
        best_manipulated_value=float(d["best_manipulated_value"]),
        bound_share=float(d["bound_share"]), bound_affine=float(d["bound_affine"]),
        best_subprofile=profile_from_dict(d["best_subprofile"]),
        n_candidates=int(d["n_candidates"]), is_lower_bound=bool(d["is_lower_bound"]))


def _counterexample_to_dict(c: Counterexample | None):
    if c is None:
        return None
    return _clean({
        "profile": c.profile, "perturbed": c.perturbed,
        "matrix": None if c.matrix is None else preference_to_dict(c.matrix),
        "target": c.target, "other": c.other,
        "before": c.before, "after": c.after, "detail": c.detail,
    })


def _counterexample_from_dict(d):
    if d is None:
        return None
    return Counterexample(
        profile=None if d.get("profile") is None else profile_from_dict(d["profile"]),
        perturbed=None if d.get("perturbed") is None else profile_from_dict(d["perturbed"]),
        matrix=None if d.get("matrix") is None else np.array(d["matrix"]["p"], dtype=float),
        target=int(d.get("target", -1)), other=int(d.get("other", -1)),
        before=None if d.get("before") is None else np.array(d["before"], dtype=float),
        after=None if d.get("after") is None else np.array(d["after"], dtype=float),
        detail=d.get("detail", ""))


def verdict_to_dict(v: AxiomVerdict) -> dict:
    return _clean({
        "axiom": v.axiom, "holds": v.holds,
        "counterexample": _counterexample_to_dict(v.counterexample),
        "measured": v.measured, "tested": v.tested, "note": v.note, "params": v.params,
    })


def verdict_from_dict(d: dict) -> AxiomVerdict:
    return AxiomVerdict(
        axiom=d["axiom"], holds=bool(d["holds"]),
        counterexample=_counterexample_from_dict(d.get("counterexample")),
        measured=float("nan") if d.get("measured") is None else float(d["measured"]), tested=int(d.get("tested", 0)),
        note=d.get("note", ""), params=d.get("params", {}))
