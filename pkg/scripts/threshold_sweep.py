#!/usr/bin/env python3
"""Disease-free stability verdict as the biting rate moves R0 across 1.

R0 is proportional to a^alpha, so scaling ``a`` places R0 exactly on a
uniform grid.  Each row shows R0, the DFE verdict, and whether an endemic
point exists, the classifier branch and verdict, and the direct
eigenvalue verdict.
"""

from __future__ import annotations

import argparse

import numpy as np

from fracmalaria import DEFAULT_PARAMS, basic_reproduction_number, full_report
from fracmalaria.analysis import matignon_verdict


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.9)
    ap.add_argument("--lo", type=float, default=0.5)
    ap.add_argument("--hi", type=float, default=1.5)
    ap.add_argument("--points", type=int, default=41)
    args = ap.parse_args()

    base = basic_reproduction_number(DEFAULT_PARAMS, args.alpha)
    print(f"{'R0':>8} {'a':>10} {'DFE':>9} {'endemic':>8} {'branch':>14} {'verdict':>14} {'eigenvalues':>12}")
    for target in np.linspace(args.lo, args.hi, args.points):
        p = DEFAULT_PARAMS.replace(a=DEFAULT_PARAMS.a * (target / base) ** (1 / args.alpha))
        rep = full_report(p, args.alpha)
        branch = rep.proposition_branch or "-"
        verdict = rep.endemic_verdict or "-"
        eig = matignon_verdict(rep.endemic_eigenvalues, args.alpha) if rep.endemic_present else "-"
        print(f"{rep.r0:8.4f} {p.a:10.6f} {rep.dfe_verdict:>9} {str(rep.endemic_present):>8} {branch:>14} {verdict:>14} {eig:>12}")


if __name__ == "__main__":
    main()
