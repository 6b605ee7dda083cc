"""
Characterizing all four schemes at the nominal corner
=====================================================

One call to ``report`` runs everything a datasheet row needs: the 64-bit
pseudo-random pattern for average power, four constant-input corners for
static power, and the bisection searches for setup and hold.  This demo
characterizes the ungated flip-flop and the three gated variants at
1.1 V / 5 GHz / 300 K and prints them side by side, plus the average-power
saving of the proposed scheme against each peer.

Run from the repository root (takes a couple of minutes):

    python3 demos/02_power_and_timing.py
"""

from cgbench.cglib import SCHEMES, SchemeSpec
from cgbench.metrics import report

reports = {}
for scheme in SCHEMES:
    print(f"characterizing {scheme} ...")
    reports[scheme] = report(SchemeSpec(scheme))

hdr = (f"\n{'scheme':12s} {'avg uW':>9s} {'static nW':>10s} "
       f"{'dyn uW/GHz':>11s} {'delay ps':>9s} {'setup ps':>9s} "
       f"{'hold ps':>8s} {'pdp fJ':>8s} {'toggles':>8s}")
print(hdr)
print("-" * len(hdr))
for scheme in SCHEMES:
    r = reports[scheme]
    print(f"{scheme:12s} {r.avg_power * 1e6:9.4f} "
          f"{r.static_power * 1e9:10.4f} {r.dynamic_per_ghz * 1e6:11.4f} "
          f"{r.delay * 1e12:9.2f} {r.setup * 1e12:9.2f} "
          f"{r.hold * 1e12:8.2f} {r.pdp * 1e15:8.4f} "
          f"{r.toggles_gated_clock:8d}")

# The headline number: how much average power the data-dependent gate saves
# on a pattern that toggles about once per 24 clock cycles.
prop = reports["proposed_cg"].avg_power
print()
for scheme in SCHEMES:
    if scheme == "proposed_cg":
        continue
    peer = reports[scheme].avg_power
    print(f"proposed vs {scheme:12s}: {(peer - prop) / peer * 100.0:+7.2f}% "
          f"average power")
