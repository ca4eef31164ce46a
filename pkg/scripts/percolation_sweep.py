#!/usr/bin/env python3
"""Sweep the site occupation probability and print spanning frequencies.

The triangular block lattice crosses one half at p = 1/2; comparing kinds
shows why the triangular geometry buys the most fault tolerance.
"""

import argparse

from spinroute.verify import percolation_estimate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kind", default="triangular", choices=["square", "triangular", "cubic"])
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    print("kind=%s L=%d trials=%d" % (args.kind, args.size, args.trials))
    print("%6s  %8s  %8s" % ("p", "spanning", "stderr"))
    for p10 in range(0, 11):
        p = p10 / 10
        res = percolation_estimate(args.kind, args.size, p, args.trials, args.seed)
        print("%6.2f  %8.3f  %8.4f" % (p, res.spanning, res.stderr))


if __name__ == "__main__":
    main()
