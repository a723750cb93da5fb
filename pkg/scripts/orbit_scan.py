#!/usr/bin/env python3
"""Locate the neck geodesic of the cosh cylinder, linearize its return
map, and store the monodromy spectrum under results/orbit/.

Extra flags are handed to the CLI unchanged, so e.g.

    scripts/orbit_scan.py --config my_model.json --tol 1e-12

scans a different surface or tolerance.
"""

import sys

from loxokit.cli import main

args = sys.argv[1:]
if "--out" not in args:
    args += ["--out", "results/orbit"]
sys.exit(main(["orbit"] + args))
