"""Tabulate fidelity and success probability of the truncated squeezer.

    python scripts/fig1_sweep.py --gain 1.1 --out fig1.csv
"""

import argparse
import csv
import sys

from hnla_lab.fock_core import squeezing_from_db
from hnla_lab.hnla_transform import truncated_squeezer


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gain", type=float, default=1.1)
    ap.add_argument("--db", type=float, nargs="+", default=[2.0, 4.0, 6.0, 8.0])
    ap.add_argument("--n-max", type=int, default=20)
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args()

    writer = csv.writer(args.out)
    writer.writerow(["squeezing_db", "N", "fidelity", "p_succ_operational", "p_succ_eq33"])
    for db in args.db:
        for n in range(args.n_max + 1):
            res = truncated_squeezer(squeezing_from_db(db), 0.0, args.gain, n)
            writer.writerow([db, n, f"{res.fidelity:.10f}", f"{res.p_succ:.10f}", f"{res.p_succ_eq33:.10f}"])


if __name__ == "__main__":
    main()
