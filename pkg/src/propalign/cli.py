"""Command-line entry point: ``propalign <subcommand> ...``."""
from __future__ import annotations

import argparse
import sys

from . import io
from .axioms import AXIOMS, audit
from .core import PreferenceMatrix, Profile, ValidationError, group_shares, induce_preference
from .experiments import (
    bound_table,
    run_tabular,
    summarize,
    write_bound_table_csv,
    write_reports_csv,
)
from .feasibility import (
    FeasibilityReport,
    exact_membership_profile,
    extended_tightness_witness,
    outer_membership,
)
from .manipulation import best_response
from .rules import RULE_NAMES, Rule, parse_rule, u_vector
from .sampling import (
    estimate_preference,
    ingest_rankings,
    random_ranking_profile,
    read_dataset_csv,
    sample_comparisons,
    write_dataset_csv,
)


def _rule(args) -> Rule:
    return parse_rule(args.rule, beta=getattr(args, "beta", None))


def _need_profile(obj, what: str) -> Profile:
    if not isinstance(obj, Profile):
        raise ValidationError(f"{what} needs a profile JSON, not a preference matrix")
    return obj


def _emit(obj, path) -> None:
    if path:
        io.save_json(obj, path)
    else:
        print(io.dumps(obj))


def cmd_solve(args) -> None:
    rule = _rule(args)
    data = io.load_input(args.input)
    if isinstance(data, PreferenceMatrix):
        policy = rule.from_preference(data)
    else:
        policy = rule(data)
    _emit(io.policy_to_dict(policy, rule.label), args.output)


def cmd_feasible(args) -> None:
    p = io.load_input(args.input)
    if isinstance(p, Profile):
        p = induce_preference(p)
    w = io.load_vector(args.query)
    if args.exact:
        report = exact_membership_profile(p, w)
    elif outer_membership(p, w):
        report = extended_tightness_witness(p, w)
    else:
        u = u_vector(p)
        report = FeasibilityReport(u=u, sum_u=float(u.sum()), member=False,
                                   note="w exceeds u in at least one coordinate")
    _emit(io.feasibility_to_dict(report), args.output)


def cmd_audit(args) -> None:
    rule = _rule(args)
    profile = _need_profile(io.load_input(args.input), "audit")
    verdict = audit(rule, args.axiom, profile, args.trials, args.seed)
    _emit(io.verdict_to_dict(verdict), args.output)


def cmd_attack(args) -> None:
    rule = _rule(args)
    profile = _need_profile(io.load_input(args.input), "attack")
    shares = group_shares(profile)
    groups = [k for k in range(profile.m) if shares[k] > 0] if args.group is None else [args.group]
    results = [best_response(rule, profile, k, args.mode, args.budget, args.seed) for k in groups]
    _emit([io.manipulation_to_dict(r) for r in results], args.output)


def cmd_ingest(args) -> None:
    profile, labels = ingest_rankings(args.path, args.format, args.top)
    _emit(io.profile_to_dict(profile, labels), args.output)


def cmd_sample(args) -> None:
    data = io.load_input(args.input)
    if isinstance(data, Profile):
        data = induce_preference(data)
    d = sample_comparisons(data, args.n, args.seed)
    write_dataset_csv(d, args.output)


def cmd_estimate(args) -> None:
    d = read_dataset_csv(args.input, args.m)
    _emit(io.preference_to_dict(estimate_preference(d)), args.output)


def _parse_random_ranking(spec: str) -> dict:
    out = {"m": 20, "n": 1000}
    for part in spec.split(","):
        key, _, val = part.partition("=")
        if key.strip() not in out or not val:
            raise ValidationError(f"bad --random-ranking spec {spec!r}; expected m=20,n=1000")
        out[key.strip()] = int(val)
    return out


def cmd_experiment_tabular(args) -> None:
    if args.profile:
        profile = _need_profile(io.load_input(args.profile), "experiment tabular")
    else:
        rr = _parse_random_ranking(args.random_ranking)
        profile = random_ranking_profile(rr["m"], rr["n"], args.seed)
    rules = [parse_rule(r) for r in args.rules.split(",") if r]
    pbm_rules = None
    if args.pbm_rules is not None:
        pbm_rules = {parse_rule(r).label for r in args.pbm_rules.split(",") if r}
    n_samples = None if args.samples <= 0 else args.samples
    reports = run_tabular(profile, rules, args.episodes, n_samples, args.seed,
                          pbm_budget=args.pbm_budget, pbm_rules=pbm_rules)
    write_reports_csv(reports, args.out)
    for label, s in summarize(reports).items():
        print(f"{label:>12}  win_rate={s['win_rate']:.4f}  ppa_level={s['ppa_level']:.4f}  "
              f"pbm_gain={s['pbm_gain']:.4f}")


def cmd_experiment_bound_table(args) -> None:
    ms = [int(x) for x in args.ms.split(",") if x]
    rows = bound_table(ms, args.delta, args.seeds)
    write_bound_table_csv(rows, args.out)
    for r in rows:
        print(f"M={r.m:>4}  1/sum(u)={r.inv_sum_u:.4f}  alpha={r.alpha:.4f}  1/M={r.baseline:.4f}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="propalign", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_rule(p):
        p.add_argument("--rule", required=True,
                       help=f"one of {', '.join(RULE_NAMES)}; fbeta also accepts fbeta:B")
        p.add_argument("--beta", type=float, default=None, help="beta for fbeta")

    p = sub.add_parser("solve", help="apply a rule to a profile or preference matrix")
    add_rule(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("feasible", help="test whether w is a feasible top-choice distribution")
    p.add_argument("--input", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--exact", action="store_true", help="solve the exact LP over all rankings")
    p.add_argument("--output")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("audit", help="check an axiom for a rule on a profile")
    add_rule(p)
    p.add_argument("--axiom", required=True, choices=AXIOMS)
    p.add_argument("--input", required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("attack", help="best single-group manipulation")
    add_rule(p)
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--group", type=int, default=None, help="only this group (default: all nonempty)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("ingest", help="read rankings into a profile JSON")
    p.add_argument("--format", choices=("csv-rankings", "movielens-ratings"), required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--output")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sample", help="draw pairwise comparisons into a winner,loser CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="empirical preference matrix from a winner,loser CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=cmd_estimate)

    exp = sub.add_parser("experiment", help="run an experiment").add_subparsers(dest="experiment", required=True)
    p = exp.add_parser("tabular", help="episodes of sampling, estimation and rule evaluation")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile")
    src.add_argument("--random-ranking", metavar="m=20,n=1000")
    p.add_argument("--rules", default="fstar,fbeta:1,ml,borda,rd")
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--samples", type=int, default=100_000, help="comparisons per episode; 0 = exact matrix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pbm-budget", type=int, default=1000)
    p.add_argument("--pbm-rules", default=None,
                   help="comma list of rules to run the manipulation search for (default: all)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment_tabular)

    p = exp.add_parser("bound-table", help="average PPA lower bounds under the random-ranking model")
    p.add_argument("--ms", default="10,20,50,100")
    p.add_argument("--delta", type=float, default=0.7)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment_bound_table)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
