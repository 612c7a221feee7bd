#!/usr/bin/env python3
"""Observed order of the predictor-corrector on D^alpha y = -y, y(0) = 1.

The error at t = 1 is measured against the Mittag-Leffler solution
E_alpha(-1) (evaluated with mpmath when available) and by self-convergence
on successive halvings of h.
"""

from __future__ import annotations

import argparse
import math

from fracmalaria import TimeGrid, solve


def mittag_leffler_minus_one(alpha: float) -> float:
    try:
        import mpmath
    except ImportError:
        return math.nan
    return float(mpmath.nsum(lambda k: (-1) ** k / mpmath.gamma(alpha * k + 1), [0, mpmath.inf]))


def final_value(alpha: float, h: float) -> float:
    return solve(lambda t, y: -y, [1.0], alpha, TimeGrid.from_horizon(h, 1.0)).states[-1, 0]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.3, 0.5, 0.7, 0.9, 1.0])
    ap.add_argument("--levels", type=int, default=6, help="number of step halvings from h = 0.04")
    args = ap.parse_args()

    hs = [0.04 / 2**i for i in range(args.levels)]
    for alpha in args.alphas:
        exact = mittag_leffler_minus_one(alpha)
        ys = [final_value(alpha, h) for h in hs]
        print(f"alpha = {alpha:g}   predicted order min(2, 1 + alpha) = {min(2.0, 1 + alpha):g}")
        print(f"  {'h':>10} {'error':>12} {'order':>7} {'self-order':>10}")
        for i, h in enumerate(hs):
            err = abs(ys[i] - exact)
            order = math.log2(abs(ys[i - 1] - exact) / err) if i else math.nan
            self_order = math.log2(abs(ys[i - 2] - ys[i - 1]) / abs(ys[i - 1] - ys[i])) if i >= 2 else math.nan
            print(f"  {h:10.5f} {err:12.3e} {order:7.3f} {self_order:10.3f}")


if __name__ == "__main__":
    main()
