#!/usr/bin/env python3
"""
Exponent ladder
===============

Goal
----
Watch both kernels blow up along a fixed-angle approach and read the
exponents off a log-log fit:

1. Build a domain of type 2m at the origin.
2. Walk the path tau = const, rho = 1, 1/2, ..., evaluating the Bergman and
   Szego kernels by the sector-representation double integral.
3. Fit trailing-window slopes and compare against the predicted ladder
   -(2 + 1/m) and -(1 + 1/m).

The two kernels ride the same quadrature panels, so each row costs barely
more than a single kernel value.
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from tubekernels import (
    ApproachPath,
    QuadratureConfig,
    blowup_exponent,
    default_rho_grid,
    evaluate_path,
    fit_exponent,
    model_domain,
    rational_domain,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--m", type=int, default=2, help="half the order of degeneracy")
    ap.add_argument("--tau", type=float, default=0.7, help="blow-up angle in (0, 1]")
    ap.add_argument("--n-points", type=int, default=10)
    ap.add_argument("--rel-tol", type=float, default=1e-7)
    ap.add_argument("--rational", action="store_true",
                    help="use g = 1/(1+x^2) instead of the monomial model")
    args = ap.parse_args()

    f = rational_domain(args.m) if args.rational else model_domain(args.m)
    print(f"domain: {f.label}   path: tau = {args.tau}, {args.n_points} points")

    grid = default_rho_grid(args.n_points)
    path = ApproachPath("fixed_tau", {"tau": args.tau}, grid)
    rows = evaluate_path(f, path, QuadratureConfig(rel_tol=args.rel_tol))

    print(f"{'rho':>12} {'x':>12} {'y':>12} {'K':>14} {'S':>14}")
    for r in rows:
        if r["status"] != "ok":
            print(f"{r['rho']:>12.5g} {r['x']:>12.5g} {r['y']:>12.5g}   {r['status']}")
            continue
        print(
            f"{r['rho']:>12.5g} {r['x']:>12.5g} {r['y']:>12.5g} "
            f"{r['bergman'].value:>14.6e} {r['szego'].value:>14.6e}"
        )

    good = [r for r in rows if r["status"] == "ok"]
    rhos = np.array([r["rho"] for r in good])
    for kind in ("bergman", "szego"):
        fit = fit_exponent([r[kind] for r in good], rhos)
        want = -float(blowup_exponent(f.m, kind))
        gap = abs(fit.slope - want) / abs(want)
        print(
            f"{kind:>8}: slope {fit.slope:+.4f}   predicted {want:+.4f}   "
            f"relative gap {gap:.2e}   max residual {fit.max_residual:.1e}"
        )


if __name__ == "__main__":
    main()
