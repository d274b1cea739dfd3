#!/usr/bin/env python3
"""Sweep the two-rate sum density over a grid of first rates and check mass.

Writes one CSV per curve (the same ``z,value`` format the CLI emits) and
prints a normalization table: trapezoid integral over the grid against the
exact distribution function at the grid end, which exposes how much tail
mass slow rates leave beyond the plotting window.

Usage:
    python3 scripts/sweep_densities.py --outdir out/sweep
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np

from expstat import conv_cdf
from expstat.cli import main as cli_main

LOG = logging.getLogger("sweep_densities")

Z_MAX = 40.0
POINTS = 4000
RATE_2 = 1.0


def first_rates() -> list[float]:
    coarse = [n / 10.0 for n in range(1, 11)]
    fine = [n / 100.0 for n in range(90, 101)]
    return coarse + fine


def run_curve(rate_1: float) -> str:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(
            [
                "curve",
                "--stat",
                "sum",
                "--rates",
                f"{rate_1},{RATE_2}",
                "--quantity",
                "pdf",
                "--range",
                f"0:{Z_MAX}",
                "--points",
                str(POINTS),
            ]
        )
    if code != 0:
        raise RuntimeError(f"curve command failed for rate_1={rate_1}")
    return buf.getvalue()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", type=Path, default=Path("out/sweep"))
    parser.add_argument("--tolerance", type=float, default=1e-4)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    args.outdir.mkdir(parents=True, exist_ok=True)
    failures = 0
    LOG.info("%8s %14s %14s %12s  %s", "rate_1", "trapezoid", "exact mass", "deviation", "file")
    for rate_1 in first_rates():
        text = run_curve(rate_1)
        path = args.outdir / f"sum_density_l1_{rate_1:.2f}.csv"
        path.write_text(text)
        data = np.array(
            [[float(f) for f in row.split(",")] for row in text.strip().split("\n")[1:]]
        )
        if not np.all(np.isfinite(data)) or np.any(data[:, 1] < 0.0):
            LOG.error("%8.2f produced a non-finite or negative curve", rate_1)
            failures += 1
            continue
        integral = float(np.trapezoid(data[:, 1], data[:, 0]))
        mass = conv_cdf((rate_1, RATE_2), Z_MAX)
        deviation = abs(integral - mass)
        ok = deviation <= args.tolerance
        failures += 0 if ok else 1
        LOG.info(
            "%8.2f %14.9f %14.9f %12.2e  %s%s",
            rate_1,
            integral,
            mass,
            deviation,
            path,
            "" if ok else "  <-- OUT OF TOLERANCE",
        )
    if failures:
        LOG.error("%d curve(s) out of tolerance", failures)
        return 1
    LOG.info("all %d curves match the exact truncated mass within %.0e",
             len(first_rates()), args.tolerance)
    return 0


if __name__ == "__main__":
    sys.exit(main())
