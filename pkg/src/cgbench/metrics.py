"""Waveform measurements: power, timing, and switching-activity figures.

Everything operates on Traces produced by the engine.  Power integrates the
supply-source current; timing works on 50%-of-Vdd threshold crossings; setup
and hold come from bisection over single-capture experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cglib import BenchHandle, SchemeSpec, build_bench
from .engine import SimConfig, Trace, transient
from .netlist import Dc, Pwl, VSource, Waveform, make_circuit


class MetricsError(RuntimeError):
    """A measurement could not be taken or is internally inconsistent."""


# ---------------------------------------------------------------------------
# threshold crossings


@dataclass(frozen=True)
class Crossing:
    time: float
    rising: bool


@dataclass(frozen=True)
class CrossingList:
    threshold: float
    events: tuple[Crossing, ...]

    def __post_init__(self):
        times = [e.time for e in self.events]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("crossing times must be strictly increasing")
        if any(a.rising == b.rising
               for a, b in zip(self.events, self.events[1:])):
            raise ValueError("crossing directions must alternate")

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def count(self, t1: float = -math.inf, t2: float = math.inf) -> int:
        return sum(1 for e in self.events if t1 <= e.time < t2)

    def rising_times(self) -> list[float]:
        return [e.time for e in self.events if e.rising]


def crossings(trace: Trace, node: str, threshold: float) -> CrossingList:
    """Linear-interpolated threshold crossings of a node voltage.

    Opposite-direction pairs closer than one tstep are chatter around the
    threshold and cancel out.
    """
    v = trace.voltage(node)
    t = trace.times
    above = v > threshold
    flips = np.nonzero(above[1:] != above[:-1])[0]
    events: list[Crossing] = []
    for i in flips:
        tc = t[i] + (threshold - v[i]) * (t[i + 1] - t[i]) / (v[i + 1] - v[i])
        ev = Crossing(float(tc), bool(above[i + 1]))
        if events and (ev.time - events[-1].time) < trace.tstep \
                and events[-1].rising != ev.rising:
            events.pop()
        else:
            events.append(ev)
    return CrossingList(threshold, tuple(events))


# ---------------------------------------------------------------------------
# power


def avg_power(trace: Trace, supply: str, window: tuple[float, float],
              vdd: float | None = None) -> float:
    """Mean supply power Vdd/(t2-t1) * integral of I over the window.

    Current flowing out of the supply's positive terminal counts as positive
    power.  vdd defaults to the traced voltage of the 'vdd' node.
    """
    t1, t2 = window
    t = trace.times
    if not t1 < t2:
        raise MetricsError("power window must have t1 < t2")
    if t1 < t[0] - 1e-15 or t2 > t[-1] + 1e-15:
        raise MetricsError("power window outside trace")
    if vdd is None:
        try:
            vdd = float(trace.voltage("vdd")[0])
        except KeyError:
            raise MetricsError("supply level unknown: no 'vdd' node in trace")
    i1 = int(np.searchsorted(t, t1 - 1e-18))
    i2 = int(np.searchsorted(t, t2 + 1e-18))
    if i2 - i1 < 2:
        raise MetricsError("power window covers fewer than two samples")
    cur = trace.current(supply)[i1:i2]
    tt = t[i1:i2]
    return vdd * float(np.trapezoid(cur, tt)) / float(tt[-1] - tt[0])


def _swap_sources(bench: BenchHandle, waves: dict[str, Waveform]):
    """Rebuild the bench circuit with some source waveforms replaced."""
    devs = []
    for d in bench.circuit.devices:
        if isinstance(d, VSource) and d.name in waves:
            devs.append(VSource(d.name, d.p, d.m, waves[d.name]))
        else:
            devs.append(d)
    return make_circuit(bench.circuit.title, devs, bench.circuit.models)


def _corner_clock(spec: SchemeSpec, level: float) -> Pwl:
    """Two full clock periods, then a ramp to `level` held forever.

    The pulses clock the flip-flop so its latches reach rail-latched
    states consistent with the held data before the inputs freeze.
    Without them an isolated latch sits at its metastable DC point and
    burns crowbar current that would swamp the leakage being measured.
    """
    per, e, v = spec.t_clk, spec.edge, spec.vdd
    pts = []
    for i in range(2):
        t0 = i * per
        pts += [(t0, 0.0), (t0 + e, v), (t0 + per / 2, v),
                (t0 + per / 2 + e, 0.0)]
    pts += [(2 * per, 0.0), (2 * per + e, level)]
    return Pwl(tuple(pts))


def static_power(spec: SchemeSpec, *, tstep: float = 1e-12,
                 settle: float = 2e-9,
                 integrator: str = "trapezoidal") -> float:
    """Leakage power: mean over the four constant (Data, Clock) corners.

    Each corner holds Data at a rail, clocks twice to land the internal
    latches in a definite state, freezes Clock at its corner rail, lets the
    circuit settle, and averages supply power over the final quarter of the
    settling window.
    """
    bench = build_bench(spec)
    lead = 2 * spec.t_clk + spec.edge
    total = 0.0
    for d_high in (0.0, 1.0):
        for c_high in (0.0, 1.0):
            ckt = _swap_sources(bench, {
                "VDATA": Dc(d_high * spec.vdd),
                "VCLK": _corner_clock(spec, c_high * spec.vdd),
            })
            cfg = SimConfig(tstep=tstep, tstop=lead + settle, temp=spec.temp,
                            integrator=integrator)
            tr = transient(ckt, cfg)
            total += avg_power(tr, bench.supply,
                               (lead + 0.75 * settle, lead + settle),
                               spec.vdd)
    return total / 4.0


def dynamic_per_ghz(avg: float, static: float, f_clk: float) -> float:
    """Dynamic power per GHz of clock: (avg - static) / f_GHz."""
    if avg < static:
        raise MetricsError(
            f"measurement inconsistency: avg power {avg:.6e} W below "
            f"static power {static:.6e} W")
    return (avg - static) / (f_clk / 1e9)


# ---------------------------------------------------------------------------
# timing


def prop_delay(trace: Trace, clock_node: str, q_node: str,
               vdd: float) -> float:
    """Median clock-to-Q delay over all capture events in the trace.

    Each Q 50%-crossing pairs with the latest preceding rising 50%-crossing
    of the clock node.
    """
    th = vdd / 2.0
    q_events = crossings(trace, q_node, th).events
    clk_rises = crossings(trace, clock_node, th).rising_times()
    if not q_events:
        raise MetricsError("no Q transition found")
    samples = []
    for ev in q_events:
        i = int(np.searchsorted(clk_rises, ev.time)) - 1
        if i >= 0:
            samples.append(ev.time - clk_rises[i])
    if not samples:
        raise MetricsError("no Q transition found after a clock edge")
    return float(np.median(samples))


# setup/hold characterization: a single 0 -> 1 capture at edge CAPTURE_EDGE,
# with the data transition placed relative to that edge.
CAPTURE_EDGE = 3


def _edge_mid(spec: SchemeSpec, k: int) -> float:
    # clock rising ramp spans [k*T, k*T + edge]; 50% point at +edge/2
    return k * spec.t_clk + spec.edge / 2.0


def _capture_trace(spec: SchemeSpec, data_pts: tuple[tuple[float, float], ...],
                   tstep: float) -> tuple[Trace, BenchHandle]:
    base = SchemeSpec(spec.scheme, spec.vdd, spec.f_clk, spec.f_data,
                      spec.edge, spec.widths, (0,), spec.seed, spec.temp)
    bench = build_bench(base)
    ckt = _swap_sources(bench, {"VDATA": Pwl(data_pts)})
    tstop = (CAPTURE_EDGE + 1) * spec.t_clk
    cfg = SimConfig(tstep=tstep, tstop=tstop, temp=spec.temp)
    return transient(ckt, cfg), bench


def _rise_pts(spec: SchemeSpec, t50: float) -> list[tuple[float, float]]:
    e2 = spec.edge / 2.0
    return [(max(t50 - e2, 0.0), 0.0), (t50 + e2, spec.vdd)]


def nominal_capture_delay(spec: SchemeSpec, *, tstep: float = 1e-12) -> float:
    """Clock-to-Q of a capture whose data settled half a period early."""
    t_edge = _edge_mid(spec, CAPTURE_EDGE)
    pts = [(0.0, 0.0)] + _rise_pts(spec, t_edge - spec.t_clk / 2.0)
    tr, bench = _capture_trace(spec, tuple(pts), tstep)
    q = crossings(tr, bench.probes["Q"], spec.vdd / 2.0).rising_times()
    after = [t for t in q if t > t_edge]
    if not after:
        raise MetricsError(
            f"{spec.scheme}: no capture at maximum setup offset")
    return after[0] - t_edge


def setup_passes(spec: SchemeSpec, t_su: float, nominal: float, *,
                 tstep: float = 1e-12) -> bool:
    """Does a data transition t_su before the capture edge still capture,
    with clock-to-Q within 1.05x the nominal delay?"""
    t_edge = _edge_mid(spec, CAPTURE_EDGE)
    pts = [(0.0, 0.0)] + _rise_pts(spec, t_edge - t_su)
    tr, bench = _capture_trace(spec, tuple(pts), tstep)
    q = tr.voltage(bench.probes["Q"])
    if q[-1] < spec.vdd / 2.0:
        return False
    rises = [x for x in crossings(tr, bench.probes["Q"],
                                  spec.vdd / 2.0).rising_times()
             if x > t_edge]
    if not rises:
        return False
    return (rises[0] - t_edge) <= 1.05 * nominal


def hold_passes(spec: SchemeSpec, t_h: float, *,
                tstep: float = 1e-12) -> bool:
    """Data settles early, is captured at the edge, then reverts t_h after
    the edge; passes if Q still holds the captured value at cycle end."""
    t_edge = _edge_mid(spec, CAPTURE_EDGE)
    e2 = spec.edge / 2.0
    rise50 = t_edge - spec.t_clk / 2.0
    fall50 = t_edge + t_h
    if fall50 - e2 <= rise50 + e2:
        # reversion overlaps the data arrival: value never presented
        return False
    pts = [(0.0, 0.0), (rise50 - e2, 0.0), (rise50 + e2, spec.vdd),
           (fall50 - e2, spec.vdd), (fall50 + e2, 0.0)]
    tr, bench = _capture_trace(spec, tuple(pts), tstep)
    t = tr.times
    q = tr.voltage(bench.probes["Q"])
    t_check = (CAPTURE_EDGE + 1) * spec.t_clk - 2 * tstep
    return bool(q[int(np.searchsorted(t, t_check))] > spec.vdd / 2.0)


def setup_hold(spec: SchemeSpec, resolution: float = 0.1e-12, *,
               tstep: float = 1e-12) -> tuple[float, float]:
    """Setup and hold times by bisection to the given resolution.

    setup: smallest data-to-edge offset in [0, T_clk/2] that captures with
    at most 5% clock-to-Q pushout.  hold: smallest post-edge reversion
    offset in [-T_clk/2, T_clk/2] leaving the captured value intact.
    """
    if resolution < tstep / 10.0:
        raise MetricsError("resolution must be at least tstep/10")
    half = spec.t_clk / 2.0
    nominal = nominal_capture_delay(spec, tstep=tstep)

    lo, hi = 0.0, half
    if setup_passes(spec, lo, nominal, tstep=tstep):
        raise MetricsError("setup bracket contains no pass/fail boundary")
    while hi - lo > resolution:
        mid = 0.5 * (hi + lo)
        if setup_passes(spec, mid, nominal, tstep=tstep):
            hi = mid
        else:
            lo = mid
    setup = hi

    lo, hi = -half, half
    if hold_passes(spec, lo, tstep=tstep):
        raise MetricsError("hold bracket contains no pass/fail boundary")
    if not hold_passes(spec, hi, tstep=tstep):
        raise MetricsError("hold bracket contains no pass/fail boundary")
    while hi - lo > resolution:
        mid = 0.5 * (hi + lo)
        if hold_passes(spec, mid, tstep=tstep):
            hi = mid
        else:
            lo = mid
    hold = hi
    return setup, hold


# ---------------------------------------------------------------------------
# bench-level helpers


def constant_data_windows(spec: SchemeSpec,
                          settle_clocks: float = 2.0,
                          min_clocks: float = 2.0) -> list[tuple[float, float]]:
    """Time windows where Data is constant and the capture has settled.

    One window per maximal run of equal bits, starting settle_clocks clock
    periods into the run; windows shorter than min_clocks periods drop out.
    """
    bits = spec.bits()
    tbit, tclk = spec.t_data, spec.t_clk
    windows = []
    start = 0
    for k in range(1, len(bits) + 1):
        if k == len(bits) or bits[k] != bits[k - 1]:
            t1 = start * tbit + settle_clocks * tclk
            t2 = k * tbit
            if t2 - t1 >= min_clocks * tclk:
                windows.append((t1, t2))
            start = k
    return windows


def snap_to_clock_grid(window: tuple[float, float],
                       spec: SchemeSpec) -> tuple[float, float]:
    """Shrink a window so both ends sit mid-way through a clock-low phase,
    making per-period crossing counts exact."""
    t = spec.t_clk
    phase = -t / 4.0
    t1 = (math.ceil((window[0] - phase) / t)) * t + phase
    t2 = (math.floor((window[1] - phase) / t)) * t + phase
    return t1, t2


def count_toggles(trace: Trace, node: str, vdd: float,
                  window: tuple[float, float] | None = None) -> int:
    cl = crossings(trace, node, vdd / 2.0)
    if window is None:
        return len(cl)
    return cl.count(window[0], window[1])


# ---------------------------------------------------------------------------
# the assembled report


REPORT_COLUMNS = ("scheme", "vdd", "f_clk", "temp", "avg_uW", "static_uW",
                  "dyn_uW_per_GHz", "delay_ps", "setup_ps", "hold_ps",
                  "latency_ps", "pdp_fJ", "toggles")


@dataclass(frozen=True)
class MetricsReport:
    avg_power: float
    static_power: float
    dynamic_per_ghz: float
    delay: float
    setup: float
    hold: float
    latency: float
    pdp: float
    toggles_gated_clock: int
    conditions: tuple[float, float, float, str]  # (vdd, f_clk, temp, scheme)

    def __post_init__(self):
        if self.latency != self.delay + self.setup:
            raise ValueError("latency must equal delay + setup exactly")
        if self.pdp != self.avg_power * self.delay:
            raise ValueError("pdp must equal avg_power * delay exactly")
        if not self.avg_power >= self.static_power >= 0.0:
            raise ValueError("require avg_power >= static_power >= 0")

    def csv_row(self) -> str:
        vdd, f_clk, temp, scheme = self.conditions
        cells = [scheme, _fmt(vdd), _fmt(f_clk), _fmt(temp),
                 _fmt(self.avg_power * 1e6), _fmt(self.static_power * 1e6),
                 _fmt(self.dynamic_per_ghz * 1e6), _fmt(self.delay * 1e12),
                 _fmt(self.setup * 1e12), _fmt(self.hold * 1e12),
                 _fmt(self.latency * 1e12), _fmt(self.pdp * 1e15),
                 str(self.toggles_gated_clock)]
        return ",".join(cells)


def _fmt(x: float) -> str:
    return f"{x:.8g}"


def bench_trace(spec: SchemeSpec, *, tstep: float = 1e-12,
                integrator: str = "trapezoidal") -> tuple[Trace, BenchHandle]:
    """Simulate the full data pattern on the scheme's bench."""
    bench = build_bench(spec)
    tstop = len(spec.bits()) * spec.t_data
    cfg = SimConfig(tstep=tstep, tstop=tstop, temp=spec.temp,
                    integrator=integrator)
    return transient(bench.circuit, cfg), bench


def measurement_window(spec: SchemeSpec) -> tuple[float, float]:
    # first two data bit periods excluded as settling margin
    return 2.0 * spec.t_data, len(spec.bits()) * spec.t_data


def report(spec: SchemeSpec, *, tstep: float = 1e-12,
           integrator: str = "trapezoidal", resolution: float | None = None,
           trace: Trace | None = None,
           bench: BenchHandle | None = None) -> MetricsReport:
    """Run the needed simulations and compose every metric for one scheme."""
    if resolution is None:
        resolution = max(0.1e-12, tstep / 10.0)
    if trace is None or bench is None:
        trace, bench = bench_trace(spec, tstep=tstep, integrator=integrator)
    window = (measurement_window(spec)[0], float(trace.times[-1]))
    avg = avg_power(trace, bench.supply, window, spec.vdd)
    static = static_power(spec, tstep=tstep, integrator=integrator)
    dyn = dynamic_per_ghz(avg, static, spec.f_clk)
    delay = prop_delay(trace, bench.probes["Clock"], bench.probes["Q"],
                       spec.vdd)
    setup, hold = setup_hold(spec, resolution, tstep=tstep)
    toggles = count_toggles(trace, bench.probes["Gated_Clock"], spec.vdd,
                            window)
    return MetricsReport(
        avg_power=avg, static_power=static, dynamic_per_ghz=dyn,
        delay=delay, setup=setup, hold=hold,
        latency=delay + setup, pdp=avg * delay,
        toggles_gated_clock=toggles,
        conditions=(spec.vdd, spec.f_clk, spec.temp, spec.scheme))
