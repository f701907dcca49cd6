"""Grid-refinement ladders for the homodyne and heterodyne scenarios.

    python scripts/nosignal_convergence.py --s 0.5 --gain 1.1
"""

import argparse

from hnla_lab.ensemble_lab import convergence_table, heterodyne_convergence_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--gain", type=float, default=1.1)
    ap.add_argument("--kind", choices=["gauss", "uniform"], default="gauss")
    args = ap.parse_args()

    print(f"homodyne ({args.kind}): points  d_xp  d_x_thermal  d_p_thermal")
    for row in convergence_table(args.s, args.gain, [2, 4, 8, 16, 32, 64, 128], kind=args.kind):
        print(f"{row['points']:6d}  {row['d_xp']:.3e}  {row['d_x_thermal']:.3e}  {row['d_p_thermal']:.3e}")

    print(f"\nheterodyne ({args.kind}): radial points  distance")
    for row in heterodyne_convergence_table(args.s, args.gain, [1, 2, 4, 8, 16, 32], kind=args.kind):
        print(f"{row['points']:6d}  {row['distance']:.3e}")


if __name__ == "__main__":
    main()
