#!/usr/bin/env python3
"""Neck-mode concentration scan over angular wavenumbers k = 10..80.

Writes spectrum.csv (one row per mode: eigenvalue, outside mass, the
normalized product) and spectrum.json (the product band) under
results/spectrum/.
"""

import sys

from loxokit.cli import main

args = sys.argv[1:]
if "--out" not in args:
    args += ["--out", "results/spectrum"]
sys.exit(main(["spectrum"] + args))
