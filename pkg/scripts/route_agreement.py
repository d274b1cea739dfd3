#!/usr/bin/env python3
"""Compare the three density routes (closed form, matrix, quadrature).

Prints the pointwise values and pairwise relative spreads on a quantile grid
so numerical drift between the routes is visible at a glance.

Usage:
    python3 scripts/route_agreement.py --rates 1,2,3 --points 10
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from expstat import conv_pdf, conv_pdf_phase_type, conv_quantile, sum_pdf_quadrature


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rates", required=True, help="comma-separated positive rates")
    parser.add_argument("--points", type=int, default=10)
    args = parser.parse_args(argv)

    rates = tuple(float(part) for part in args.rates.split(","))
    probs = np.linspace(0.05, 0.95, args.points)
    z = np.array([conv_quantile(rates, float(p)) for p in probs])
    closed = np.array([conv_pdf(rates, float(x)) for x in z])
    phase = np.array([conv_pdf_phase_type(rates, float(x)) for x in z])
    quad = sum_pdf_quadrature(rates, z)

    def spread(a, b):
        return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)

    print(f"{'z':>12} {'closed':>18} {'phase':>18} {'quadrature':>18} {'max rel spread':>15}")
    worst = 0.0
    for i in range(z.size):
        s = max(
            spread(closed[i : i + 1], phase[i : i + 1])[0],
            spread(closed[i : i + 1], quad[i : i + 1])[0],
            spread(phase[i : i + 1], quad[i : i + 1])[0],
        )
        worst = max(worst, float(s))
        print(
            f"{z[i]:12.6f} {closed[i]:18.12e} {phase[i]:18.12e} "
            f"{quad[i]:18.12e} {s:15.3e}"
        )
    print(f"worst pairwise relative spread: {worst:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
