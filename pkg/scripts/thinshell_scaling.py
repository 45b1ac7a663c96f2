#!/usr/bin/env python3
"""Thin-shell variance sweep over several body families.

Compares Var(|X|^2/n) against the 0.8/n cube law and prints the fitted
log-log slopes; writes an SVG of the curves."""

import sys

from thinshell.cli import ExperimentConfig, run
from thinshell.suites import BALL, CUBE, L1_BALL, BodyTemplate


def main() -> int:
    cfg = ExperimentConfig(
        experiment="thinshell",
        bodies=[CUBE, BALL, L1_BALL, BodyTemplate("lp_ball", 3.0)],
        n_grid=[4, 8, 16, 32, 64, 128],
        samples=10 ** 5,
        seed=20250810,
        output_dir="reports/thinshell_scaling",
        plot=True,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
