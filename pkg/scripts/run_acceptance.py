#!/usr/bin/env python3
"""Run the full acceptance table (same checks as tests/test_acceptance.py)
and save the machine-readable summary to results/selftest/selftest.json.

The slow rows are the resolvent ladder and the two scans; the whole
table takes several minutes. Run a subset while iterating:

    scripts/run_acceptance.py --criteria log-exp-roundtrip,monodromy-oracle
"""

import sys

from loxokit.cli import main

args = sys.argv[1:]
if "--out" not in args:
    args += ["--out", "results/selftest"]
sys.exit(main(["selftest"] + args))
