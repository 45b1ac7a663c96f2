#!/usr/bin/env python3
"""Run every suite with the default (acceptance-scale) parameters.

Writes reports/<suite>/report.{csv,json} plus SVG plots; exits nonzero if any
assertion fails (the clt suite's sup-error scaling assertion at its default
sigma factor is a known red, see README)."""

import sys

from thinshell.cli import default_config, run


def main() -> int:
    worst = 0
    for name in ("identities", "thinshell", "clt", "berry_esseen", "transport", "spectral"):
        cfg = default_config(name)
        cfg.output_dir = f"reports/{name}"
        cfg.plot = True
        print(f"=== {name} ===")
        worst = max(worst, run(cfg))
    return worst


if __name__ == "__main__":
    sys.exit(main())
