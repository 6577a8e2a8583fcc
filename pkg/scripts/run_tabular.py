"""Beta sweep on a synthetic random-ranking profile.

Runs the tabular episodes for f_beta over a beta grid plus maximal Borda
and maximal lotteries, writes the per-episode CSV, and prints the per-rule
means together with the sign tests for the win-rate and PPA trends.

    python scripts/run_tabular.py --episodes 50 --out tabular.csv
"""
import argparse

from propalign.experiments import run_tabular, sign_test_trend, summarize, write_reports_csv
from propalign.rules import Rule
from propalign.sampling import random_ranking_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=20)
    ap.add_argument("--evaluators", type=int, default=1000)
    ap.add_argument("--betas", default="0,0.1,1,10,100")
    ap.add_argument("--episodes", type=int, default=50)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--pbm-budget", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="tabular.csv")
    args = ap.parse_args()

    profile = random_ranking_profile(args.m, args.evaluators, args.seed)
    fb = [Rule("fbeta", float(b)) for b in args.betas.split(",")]
    labels = [r.label for r in fb]
    # maximal lotteries is slow to re-solve per candidate, so it skips the PBM search
    reports = run_tabular(profile, fb + [Rule("borda"), Rule("ml")], args.episodes, args.samples,
                          args.seed, pbm_budget=args.pbm_budget, pbm_rules=set(labels) | {"borda"})
    write_reports_csv(reports, args.out)

    for label, s in summarize(reports).items():
        print(f"{label:>10}  win_rate={s['win_rate']:.4f}  ppa_level={s['ppa_level']:.4f}  "
              f"pbm_gain={s['pbm_gain']:.4f}")
    for metric, up in (("win_rate", True), ("ppa_level", False)):
        tt = sign_test_trend(reports, labels, metric, increasing=up)
        word = "increase" if up else "decrease"
        print(f"{metric} {word}: wins {tt.wins} of {tt.n}, max p = {tt.max_p:.3g}")


if __name__ == "__main__":
    main()
