"""
Sweeping the supply rail through the command-line harness
=========================================================

The ``cgbench sweep`` subcommand is the same code path the acceptance
sweeps use: it fans the (scheme, grid point) jobs out, sorts the results
canonically, writes a long-format CSV, and renders one SVG chart each for
average power, clock-to-Q delay, and PDP.  This demo drives it in process
over a reduced supply grid and then reads the CSV back to print the
power-vs-vdd table.

Run from the repository root (takes a couple of minutes):

    python3 demos/03_supply_sweep.py
"""

import csv
from pathlib import Path

from cgbench.bench import main

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
csv_path = OUT / "vdd_sweep.csv"

# Four grid points, all four schemes; identical to the shell invocation
#   cgbench sweep --param vdd --from 0.9 --to 1.2 --step 0.1 --out ...
rc = main(["sweep", "--param", "vdd", "--from", "0.9", "--to", "1.2",
           "--step", "0.1", "--out", str(csv_path)])
assert rc == 0

with open(csv_path, newline="") as fh:
    rows = list(csv.DictReader(fh))

schemes = sorted({r["scheme"] for r in rows})
vdds = sorted({float(r["vdd"]) for r in rows})
avg = {(r["scheme"], float(r["vdd"])): float(r["avg_uW"]) for r in rows}

print(f"\naverage power (uW) from {csv_path.name}:")
print(f"{'vdd':>5s} " + " ".join(f"{s:>12s}" for s in schemes))
for v in vdds:
    print(f"{v:5.2f} " + " ".join(f"{avg[(s, v)]:12.4f}" for s in schemes))

print("\ncharts:")
for svg in sorted(OUT.glob("vdd_sweep_*.svg")):
    print(f"  {svg}")
