#!/usr/bin/env python3
"""Full damped-wave experiment: eigenfrequencies for every angular mode
k <= 40 plus the superposed energy-decay fit. Outputs under
results/damped_wave/: eigenfrequencies.csv, energy.csv,
damped_wave.json.
"""

import sys

from loxokit.cli import main

args = sys.argv[1:]
if "--out" not in args:
    args += ["--out", "results/damped_wave"]
sys.exit(main(["damped-wave"] + args))
