"""Iteration counts of the universal method against accuracy, with log-log slopes.

    python3 scripts/universal_sweep.py [--eps 1e-1,1e-2,1e-3,1e-4] [--delta-rule coarse]
"""
import argparse

from fgmkit.suites import UNIVERSAL_SUITE, format_sweep, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", default="1e-1,1e-2,1e-3,1e-4")
    ap.add_argument("--delta-rule", default="precise", choices=["precise", "coarse"])
    args = ap.parse_args()
    eps = [float(e) for e in args.eps.split(",")]
    for name, make in UNIVERSAL_SUITE.items():
        rows, fit = sweep(make, eps, delta_rule=args.delta_rule)
        print(format_sweep(name, rows, fit))
        print()


if __name__ == "__main__":
    main()
