"""Average PPA lower bounds under the random-ranking model.

    python scripts/run_bound_table.py --out bound_table.csv
"""
import argparse

from propalign.experiments import bound_table, write_bound_table_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ms", default="10,20,50,100")
    ap.add_argument("--delta", type=float, default=0.7)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--evaluators", type=int, default=1000)
    ap.add_argument("--out", default="bound_table.csv")
    args = ap.parse_args()

    rows = bound_table([int(m) for m in args.ms.split(",")], args.delta, args.seeds, args.evaluators)
    write_bound_table_csv(rows, args.out)
    print(f"{'M':>5} {'1/sum(u)':>10} {'alpha':>8} {'1/M':>8} {'max w':>8}")
    for r in rows:
        print(f"{r.m:>5} {r.inv_sum_u:>10.4f} {r.alpha:>8.4f} {r.baseline:>8.4f} {r.max_share:>8.4f}")


if __name__ == "__main__":
    main()
