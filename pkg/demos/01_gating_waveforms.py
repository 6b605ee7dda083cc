"""
Watching a data-dependent gate swallow clock edges
==================================================

A gated flip-flop only deserves a clock edge when the incoming data
differs from what it already stores.  This demo runs a short bit pattern
through the proposed gating scheme and plots the five probe signals on a
shared time axis: the comparator raises Comp exactly while Data != Q, the
gating core turns that into a single Gated_Clock pulse per capture, and
the long stretches of repeated bits cost no clock activity at all.

Run from the repository root:

    python3 demos/01_gating_waveforms.py

The figure lands in demos/out/gating_waveforms.svg.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from cgbench.cglib import SchemeSpec, build_bench
from cgbench.engine import SimConfig, transient

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# A pattern with both kinds of stretches: back-to-back toggles (every bit
# earns a capture) and runs of equal bits (the gate stays shut).
bits = (0, 1, 1, 1, 0, 0, 1, 0)
spec = SchemeSpec("proposed_cg", f_data=1.03e9, data_bits=bits)
bench = build_bench(spec)

tstop = len(bits) * spec.t_data
trace = transient(bench.circuit, SimConfig(tstep=1e-12, tstop=tstop))

# Stack the probes top to bottom in signal-flow order.
order = ("Data", "Clock", "Comp", "Gated_Clock", "Q")
fig, axes = plt.subplots(len(order), 1, figsize=(9, 7), sharex=True)
t_ns = trace.times * 1e9
for ax, label in zip(axes, order):
    ax.plot(t_ns, trace.voltage(bench.probes[label]), lw=0.8)
    ax.set_ylabel(label, rotation=0, ha="right", va="center")
    ax.set_ylim(-0.15, spec.vdd + 0.15)
    ax.grid(True, alpha=0.25)
for k in range(1, len(bits)):
    for ax in axes:
        ax.axvline(k * spec.t_data * 1e9, color="k", lw=0.5, alpha=0.3)
axes[-1].set_xlabel("time (ns)")
fig.suptitle("proposed gating: one clock pulse per data change")
fig.tight_layout()
path = OUT / "gating_waveforms.svg"
fig.savefig(path)

# Count what the gate let through: the raw clock crosses mid-rail twice per
# period, the gated clock only around the five data changes.
from cgbench.metrics import count_toggles

raw = count_toggles(trace, bench.probes["Clock"], spec.vdd)
gated = count_toggles(trace, bench.probes["Gated_Clock"], spec.vdd)
print(f"bit pattern        : {bits}")
print(f"raw clock crossings: {raw}")
print(f"gated crossings    : {gated}")
print(f"figure             : {path}")
