"""Scheme-library tests: LFSR pattern, bench topology audits, and DC/transient
behavior of the comparator, gating cores, LECTOR AND gate, and flip-flop."""

import numpy as np
import pytest

from cgbench.cglib import (DEFAULT_NBITS, DEFAULT_SEED,
                           DEFAULT_WIDTHS, SCHEMES, SchemeSpec, build_bench,
                           build_comp_generator, build_lector_and, build_msff,
                           build_nc2mos_core, build_proposed_core, clock_pulse,
                           data_pwl, lfsr_bits)
from cgbench.devices import default_model_cards
from cgbench.engine import SimConfig, dc_operating_point, transient
from cgbench.netlist import (Dc, GROUND, Mosfet, Pulse, Pwl, VSource,
                             eval_waveform, make_circuit)

CARDS = default_model_cards()
VDD = 1.1


def _fixture(extra, *sources):
    devs = [VSource("VDD", "vdd", GROUND, Dc(VDD))] + list(sources) + extra
    return make_circuit("fixture", devs, CARDS)


# ---------------------------------------------------------------------------
# data pattern


def test_lfsr_frozen_prefix():
    bits = lfsr_bits(64, DEFAULT_SEED)
    assert bits[:16] == (1, 1, 1, 0, 1, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0, 1)
    assert len(bits) == 64
    assert sum(bits) == 36


def test_lfsr_full_period():
    # x^7 + x^6 + 1 is maximal: all 127 nonzero states, then repeats
    one = lfsr_bits(127, DEFAULT_SEED)
    two = lfsr_bits(254, DEFAULT_SEED)
    assert two[:127] == one and two[127:] == one
    assert sorted(set(one)) == [0, 1]


def test_lfsr_every_seed_cycles():
    reference = set()
    for seed in (1, 5, 77, 127):
        bits = lfsr_bits(127, seed)
        assert sum(bits) == 64  # maximal LFSR: 64 ones per period
        reference.add(bits)
    assert len(reference) == 4  # different seeds give shifted sequences


def test_lfsr_seed_validation():
    for bad in (0, 128, -3):
        with pytest.raises(ValueError):
            lfsr_bits(8, bad)


# ---------------------------------------------------------------------------
# SchemeSpec


def test_spec_defaults():
    spec = SchemeSpec("proposed_cg")
    assert spec.vdd == 1.1 and spec.f_clk == 5e9 and spec.f_data == 0.206e9
    assert spec.edge == 20e-12 and spec.temp == 300.0
    assert spec.t_clk == pytest.approx(200e-12)
    assert len(spec.bits()) == DEFAULT_NBITS
    assert dict(spec.widths) == dict(DEFAULT_WIDTHS)


def test_spec_validation():
    with pytest.raises(ValueError):
        SchemeSpec("half_gating")
    with pytest.raises(ValueError):
        SchemeSpec("no_gating", f_clk=1e9, f_data=2e9)   # data faster than clock
    with pytest.raises(ValueError):
        SchemeSpec("no_gating", edge=60e-12)             # edge >= T/4
    with pytest.raises(ValueError):
        SchemeSpec("no_gating", widths={**DEFAULT_WIDTHS, "N3": 0.0})


def test_spec_explicit_bits_win_over_seed():
    spec = SchemeSpec("no_gating", data_bits=(1, 0, 1))
    assert spec.bits() == (1, 0, 1)


# ---------------------------------------------------------------------------
# stimulus


def test_clock_pulse_shape():
    spec = SchemeSpec("no_gating")
    w = clock_pulse(spec)
    assert eval_waveform(w, 0.0) == 0.0
    assert eval_waveform(w, 10e-12) == pytest.approx(VDD / 2)   # mid-rise
    assert eval_waveform(w, 50e-12) == pytest.approx(VDD)
    assert eval_waveform(w, 150e-12) == pytest.approx(0.0)
    assert eval_waveform(w, 210e-12) == pytest.approx(VDD / 2)  # repeats


def test_data_pwl_tracks_bits():
    spec = SchemeSpec("no_gating", data_bits=(0, 1, 1, 0))
    w = data_pwl(spec)
    tbit = spec.t_data
    assert eval_waveform(w, 0.5 * tbit) == 0.0
    assert eval_waveform(w, 1.5 * tbit) == pytest.approx(VDD)
    assert eval_waveform(w, 2.5 * tbit) == pytest.approx(VDD)
    assert eval_waveform(w, 3.5 * tbit) == pytest.approx(0.0)
    assert eval_waveform(w, 10 * tbit) == pytest.approx(0.0)    # holds last
    # deterministic construction
    assert data_pwl(spec) == data_pwl(SchemeSpec("no_gating", data_bits=(0, 1, 1, 0)))


# ---------------------------------------------------------------------------
# topology audits


def _mosfets(devs):
    return [d for d in devs if isinstance(d, Mosfet)]


def test_msff_is_twenty_transistors():
    devs = build_msff("vdd", "clk", "d", "q")
    assert len(_mosfets(devs)) == 20 == len(devs)


def test_msff_split_clock_adds_buffer_pair():
    devs = build_msff("vdd", "gclk", "d", "q", slave_clk="clk")
    assert len(_mosfets(devs)) == 24


def test_comp_generator_is_eight_transistors():
    assert len(_mosfets(build_comp_generator("vdd", "d", "q", "c"))) == 8


def test_lector_and_is_eight_transistors():
    devs = _mosfets(build_lector_and("vdd", "a", "b", "y"))
    assert len(devs) == 8  # 6-T leakage-controlled NAND + 2-T inverter


@pytest.mark.parametrize("maker,xnode,midnode,stack",
                         [(build_proposed_core, "cg.x", "cg.mid",
                           [("N1", "clk"), ("N3", "comp")]),
                          (build_nc2mos_core, "cg.NN2", "cg.NN1",
                           [("N3", "comp"), ("N1", "clk")])])
def test_core_topology(maker, xnode, midnode, stack):
    devs = _mosfets(maker("vdd", "clk", "comp", "gclk"))
    assert len(devs) == 5
    by_name = {d.name.split(".")[-1]: d for d in devs}
    for key in ("P1", "P2", "N1", "N2", "N3"):
        assert by_name[key].w == DEFAULT_WIDTHS[key]
    # precharge device: vdd -> dynamic node, clock gate
    p1 = by_name["P1"]
    assert (p1.d, p1.g, p1.s) == (xnode, "clk", "vdd")
    # evaluation stack order: top device drains the dynamic node
    top, bot = (by_name[stack[0][0]], by_name[stack[1][0]])
    assert (top.d, top.g, top.s) == (xnode, stack[0][1], midnode)
    assert (bot.d, bot.g, bot.s) == (midnode, stack[1][1], GROUND)
    # output buffer inverts the dynamic node
    assert by_name["P2"].g == xnode and by_name["N2"].g == xnode
    assert by_name["P2"].d == "gclk" and by_name["N2"].d == "gclk"


def test_bench_transistor_counts():
    expected = {"no_gating": 20, "proposed_cg": 33, "nc2mos_cg": 33,
                "lb_cg": 40}
    for scheme, count in expected.items():
        bench = build_bench(SchemeSpec(scheme))
        assert len(_mosfets(bench.circuit.devices)) == count, scheme


def test_bench_probes_and_supply():
    for scheme in SCHEMES:
        bench = build_bench(SchemeSpec(scheme))
        for key in ("Data", "Clock", "Comp", "Gated_Clock", "Q"):
            assert key in bench.probes
        supplies = [d for d in bench.circuit.devices
                    if isinstance(d, VSource) and d.name == "VDD"]
        assert len(supplies) == 1
    ungated = build_bench(SchemeSpec("no_gating"))
    assert ungated.probes["Gated_Clock"] == ungated.probes["Clock"]
    assert ungated.probes["Comp"] == GROUND


def test_model_card_env_override(tmp_path, monkeypatch):
    card = tmp_path / "cards.mod"
    card.write_text(".model nch nmos vth0=0.5\n.model pch pmos vth0=-0.5\n")
    monkeypatch.setenv("CGBENCH_MODEL_CARD", str(card))
    bench = build_bench(SchemeSpec("no_gating"))
    assert bench.circuit.models["nch"].vth0 == 0.5


# ---------------------------------------------------------------------------
# comparator behavior


def test_comparator_truth_table():
    for d in (0.0, VDD):
        for q in (0.0, VDD):
            ckt = _fixture(build_comp_generator("vdd", "Data", "Q", "Comp"),
                           VSource("VD", "Data", GROUND, Dc(d)),
                           VSource("VQ", "Q", GROUND, Dc(q)))
            v, _ = dc_operating_point(ckt, SimConfig())
            want = VDD if (d > 0) != (q > 0) else 0.0
            assert v["Comp"] == pytest.approx(want, abs=0.01 * VDD)


# ---------------------------------------------------------------------------
# gating cores


def _core_fixture(maker, clk_wave, comp_wave):
    return _fixture(maker("vdd", "clk", "comp", "gclk"),
                    VSource("VC", "clk", GROUND, clk_wave),
                    VSource("VM", "comp", GROUND, comp_wave))


@pytest.mark.parametrize("maker,xnode", [(build_proposed_core, "cg.x"),
                                         (build_nc2mos_core, "cg.NN2")])
def test_core_discharges_when_enabled(maker, xnode):
    # clock and comparator both high: stack on, dynamic node pulled to ground
    ckt = _core_fixture(maker, Dc(VDD), Dc(VDD))
    v, _ = dc_operating_point(ckt, SimConfig())
    assert abs(v[xnode]) < 0.05
    assert v["gclk"] == pytest.approx(VDD, abs=0.01)


@pytest.mark.parametrize("maker,xnode", [(build_proposed_core, "cg.x"),
                                         (build_nc2mos_core, "cg.NN2")])
def test_core_precharges_when_clock_low(maker, xnode):
    ckt = _core_fixture(maker, Dc(0.0), Dc(0.0))
    v, _ = dc_operating_point(ckt, SimConfig())
    assert v[xnode] == pytest.approx(VDD, abs=0.01)
    assert abs(v["gclk"]) < 0.01


def _clock():
    return Pulse(0.0, VDD, 0.0, 20e-12, 20e-12, 80e-12, 200e-12)


@pytest.mark.parametrize("maker", [build_proposed_core, build_nc2mos_core])
def test_core_gates_clock_off_when_comp_low(maker):
    ckt = _core_fixture(maker, _clock(), Dc(0.0))
    tr = transient(ckt, SimConfig(tstep=1e-12, tstop=2e-9))
    g = tr.voltage("gclk")
    assert g.max() < 0.01 * VDD  # gated output never moves


@pytest.mark.parametrize("maker", [build_proposed_core, build_nc2mos_core])
def test_core_passes_clock_when_comp_high(maker):
    ckt = _core_fixture(maker, _clock(), Dc(VDD))
    tr = transient(ckt, SimConfig(tstep=1e-12, tstop=2e-9))
    t, g, c = tr.times, tr.voltage("gclk"), tr.voltage("clk")
    sel = t > 0.25e-9  # past start-up
    assert g[sel].max() > 0.95 * VDD and g[sel].min() < 0.05 * VDD
    # in phase with the clock: high mid-high-phase, low mid-low-phase
    mid_high = np.argmin(np.abs(t - 1.05e-9))
    mid_low = np.argmin(np.abs(t - 1.15e-9))
    assert g[mid_high] > 0.9 * VDD and c[mid_high] > 0.9 * VDD
    assert g[mid_low] < 0.1 * VDD and c[mid_low] < 0.1 * VDD


def test_charge_sharing_droop_asymmetry():
    """With the clock transistor adjacent to the dynamic node, the idle
    (comp low) clock-high phase shares charge between X and the mid node,
    drooping X by hundreds of mV; the inverted stack order leaves its
    dynamic node untouched.  Either way the buffered output stays quiet."""
    droops = {}
    for maker, xnode in ((build_proposed_core, "cg.x"),
                         (build_nc2mos_core, "cg.NN2")):
        ckt = _core_fixture(maker, _clock(), Dc(0.0))
        tr = transient(ckt, SimConfig(tstep=1e-12, tstop=2e-9))
        t, x, g = tr.times, tr.voltage(xnode), tr.voltage("gclk")
        first_high = (t >= 20e-12) & (t <= 100e-12)
        droops[maker] = VDD - x[first_high].min()
        assert g.max() <= 0.01 * VDD
    assert droops[build_proposed_core] == pytest.approx(0.310, abs=0.02)
    assert droops[build_nc2mos_core] < 0.005


# ---------------------------------------------------------------------------
# LECTOR AND gate


def test_lector_and_truth_table():
    for a in (0.0, VDD):
        for b in (0.0, VDD):
            ckt = _fixture(build_lector_and("vdd", "a", "b", "y"),
                           VSource("VA", "a", GROUND, Dc(a)),
                           VSource("VB", "b", GROUND, Dc(b)))
            v, _ = dc_operating_point(ckt, SimConfig())
            want = VDD if (a > 0 and b > 0) else 0.0
            assert v["y"] == pytest.approx(want, abs=0.01 * VDD)


def test_lector_internal_node_keeps_control_gates_biased():
    # the defining LECTOR property: each control transistor's gate ties to
    # the other's source node, so with the pull-down off the NAND output
    # sits below the rail (LCTP near cutoff) instead of fully precharged
    ckt = _fixture(build_lector_and("vdd", "a", "b", "y"),
                   VSource("VA", "a", GROUND, Dc(0.0)),
                   VSource("VB", "b", GROUND, Dc(0.0)))
    v, _ = dc_operating_point(ckt, SimConfig())
    assert 0.6 < v["la.nand"] < VDD - 0.2
    assert abs(v["y"]) < 0.01  # still a clean logic low after the buffer


# ---------------------------------------------------------------------------
# flip-flop


def test_msff_captures_on_rising_edge():
    devs = build_msff("vdd", "clk", "d", "q")
    ckt = _fixture(devs,
                   VSource("VC", "clk", GROUND, _clock()),
                   # data high around the second rising edge (t = 200 ps)
                   VSource("VD", "d", GROUND,
                           Pulse(0.0, VDD, 150e-12, 20e-12, 20e-12,
                                 180e-12, 10.0)))
    tr = transient(ckt, SimConfig(tstep=1e-12, tstop=1e-9))
    t, q = tr.times, tr.voltage("q")
    assert q[np.argmin(np.abs(t - 190e-12))] < 0.1 * VDD  # before the edge
    assert q[np.argmin(np.abs(t - 300e-12))] > 0.9 * VDD  # captured the 1
    # data drops at ~350 ps (opaque phase); Q must hold until the next edge
    assert q[np.argmin(np.abs(t - 390e-12))] > 0.9 * VDD
    assert q[np.argmin(np.abs(t - 500e-12))] < 0.1 * VDD  # 0 captured at 400 ps


def test_msff_ignores_data_while_clock_high():
    devs = build_msff("vdd", "clk", "d", "q")
    # single rising edge captures a 0, then the clock parks high: the
    # master stays opaque and later data pulses must never reach Q
    ckt = _fixture(devs,
                   VSource("VC", "clk", GROUND, Pwl(((0.0, 0.0),
                                                     (20e-12, VDD)))),
                   VSource("VD", "d", GROUND,
                           Pulse(0.0, VDD, 100e-12, 20e-12, 20e-12,
                                 200e-12, 400e-12)))
    tr = transient(ckt, SimConfig(tstep=1e-12, tstop=2e-9))
    t, q = tr.times, tr.voltage("q")
    assert q[t > 150e-12].max() < 0.1 * VDD


# ---------------------------------------------------------------------------
# assembled benches


@pytest.mark.parametrize("scheme", SCHEMES)
def test_bench_bitwise_equivalence_short_pattern(scheme):
    # incommensurate data rate so bit boundaries drift across clock phases
    bits = (0, 1, 1, 0, 1, 0, 0, 1)
    spec = SchemeSpec(scheme, f_data=1.03e9, data_bits=bits)
    bench = build_bench(spec)
    tstop = len(bits) * spec.t_data
    tr = transient(bench.circuit, SimConfig(tstep=1e-12, tstop=tstop))
    t, q = tr.times, tr.voltage(bench.probes["Q"])
    # sample Q late in each bit window, once captures have settled
    for k, bit in enumerate(bits):
        if k == 0:
            continue  # Q undefined until the first capture of bit 0 ends
        ts = (k + 1) * spec.t_data - 2e-12
        got = q[int(np.searchsorted(t, ts))] > VDD / 2
        assert got == bool(bit), f"{scheme}: bit {k}"


def test_gated_clock_quiet_during_constant_data():
    spec = SchemeSpec("proposed_cg", data_bits=(1, 1, 1, 1))
    bench = build_bench(spec)
    tr = transient(bench.circuit,
                   SimConfig(tstep=1e-12, tstop=4 * spec.t_data))
    t = tr.times
    g = tr.voltage(bench.probes["Gated_Clock"])
    # after the initial capture settles, the gated clock floor stays low
    sel = t > 2 * spec.t_clk
    assert g[sel].max() < VDD / 2
