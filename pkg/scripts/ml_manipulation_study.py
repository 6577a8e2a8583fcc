"""Maximal lotteries under a single-group misreport, as epsilon shrinks.

Three groups with shares (1/3 + eps, 1/3 - eps, 1/3), each indifferent
below its top choice. Honestly reported, y_0 is a Condorcet winner and the
third group gets nothing from maximal lotteries; its best misreport pushes
its share toward 1 as eps shrinks. f_star is shown alongside with its bound.
"""
import argparse

from propalign.core import Profile
from propalign.manipulation import best_response
from propalign.rules import Rule


def epsilon_profile(eps):
    a, b = (1 / 3 + eps) / 2, (1 / 3 - eps) / 2
    return Profile.from_dict({(0, 1, 2): a, (0, 2, 1): a, (1, 0, 2): b, (1, 2, 0): b,
                              (2, 0, 1): 1 / 6, (2, 1, 0): 1 / 6})


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--denominators", default="12,24,48,96,192")
    args = ap.parse_args()

    ml, fstar = Rule("ml"), Rule("fstar")
    print(f"{'eps':>8} {'ML honest':>10} {'ML manip':>10} {'f* manip':>10} {'f* bound':>10}")
    for d in args.denominators.split(","):
        prof = epsilon_profile(1 / int(d))
        r_ml = best_response(ml, prof, 2, mode="exhaustive")
        r_fs = best_response(fstar, prof, 2, mode="exhaustive")
        print(f"{'1/' + d:>8} {r_ml.honest_policy_value:>10.4f} {r_ml.best_manipulated_value:>10.4f} "
              f"{r_fs.best_manipulated_value:>10.4f} {r_fs.bound_share:>10.4f}")


if __name__ == "__main__":
    main()
