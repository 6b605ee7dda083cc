"""Clock-gating scheme library.

Builds the four benchmarked flip-flop arrangements as flat Circuits:

* ``no_gating``     - transmission-gate master-slave FF driven by the raw clock
* ``proposed_cg``   - precharge/evaluate gating core (clock transistor at the
                      dynamic node, comparator transistor grounded) + buffer
* ``nc2mos_cg``     - same core with the evaluation stack order inverted
* ``lb_cg``         - master latch clocked through a leakage-controlled AND
                      gate, slave latch on the raw clock

Every bench exposes the same probe set (Data, Clock, Comp, Gated_Clock, Q)
and a single supply source so the measurement code can stay scheme-agnostic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

from .devices import default_model_cards
from .netlist import (Circuit, Dc, Device, GROUND, Mosfet, Pulse, Pwl,
                      VSource, load_model_cards_file, make_circuit)

SCHEMES = ("no_gating", "nc2mos_cg", "lb_cg", "proposed_cg")

# gating-core device widths, metres
DEFAULT_WIDTHS: Mapping[str, float] = MappingProxyType({
    "P1": 0.2e-6,
    "P2": 1.0e-6,
    "N1": 1.0e-6,
    "N2": 0.2e-6,
    "N3": 0.4e-6,
})

# flip-flop / comparator / AND-gate device sizing (not part of the core set)
AUX_WN = 0.4e-6
AUX_WP = 0.8e-6
WEAK_WN = 0.1e-6
WEAK_WP = 0.2e-6

DEFAULT_SEED = 0b1011001
DEFAULT_NBITS = 64


def lfsr_bits(n: int = DEFAULT_NBITS, seed: int = DEFAULT_SEED) -> tuple[int, ...]:
    """First n output bits of the 7-bit LFSR with feedback x^7 + x^6 + 1.

    The polynomial is primitive, so any nonzero seed walks the full
    127-state cycle; the output bit is the register LSB.
    """
    if not 0 < seed < 128:
        raise ValueError("lfsr seed must be a nonzero 7-bit integer")
    if n < 1:
        raise ValueError("lfsr length must be >= 1")
    state = seed
    out = []
    for _ in range(n):
        out.append(state & 1)
        fb = ((state >> 6) ^ (state >> 5)) & 1
        state = ((state << 1) | fb) & 0x7F
    return tuple(out)


@dataclass(frozen=True)
class SchemeSpec:
    """Conditions for one bench: scheme, rails, stimulus, and core sizing."""

    scheme: str
    vdd: float = 1.1
    f_clk: float = 5e9
    f_data: float = 0.206e9
    edge: float = 20e-12
    widths: Mapping[str, float] = DEFAULT_WIDTHS
    data_bits: tuple[int, ...] | None = None
    seed: int = DEFAULT_SEED
    temp: float = 300.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme '{self.scheme}'")
        if self.vdd <= 0:
            raise ValueError("vdd must be > 0")
        if self.f_clk <= self.f_data:
            raise ValueError("f_clk must exceed f_data")
        missing = set(DEFAULT_WIDTHS) - set(self.widths)
        if missing:
            raise ValueError(f"widths missing entries: {sorted(missing)}")
        if any(self.widths[k] <= 0 for k in DEFAULT_WIDTHS):
            raise ValueError("all widths must be > 0")
        if not self.edge < 1.0 / (4.0 * self.f_clk):
            raise ValueError("edge time must be < a quarter clock period")
        if self.data_bits is not None:
            if len(self.data_bits) < 1 or any(b not in (0, 1) for b in self.data_bits):
                raise ValueError("data_bits must be a nonempty 0/1 sequence")
        object.__setattr__(self, "widths", MappingProxyType(dict(self.widths)))

    def bits(self) -> tuple[int, ...]:
        if self.data_bits is not None:
            return tuple(self.data_bits)
        return lfsr_bits(DEFAULT_NBITS, self.seed)

    @property
    def t_clk(self) -> float:
        return 1.0 / self.f_clk

    @property
    def t_data(self) -> float:
        return 1.0 / self.f_data


@dataclass(frozen=True)
class BenchHandle:
    """An elaborated bench plus the bookkeeping the metrics layer needs."""

    circuit: Circuit
    probes: Mapping[str, str]
    supply: str
    spec: SchemeSpec = field(compare=False)

    def __post_init__(self):
        for key in ("Data", "Clock", "Comp", "Gated_Clock", "Q"):
            node = self.probes.get(key)
            if node is None or (node != GROUND and node not in self.circuit.nodes):
                raise ValueError(f"probe '{key}' missing from circuit")
        supplies = [d for d in self.circuit.devices
                    if isinstance(d, VSource) and d.name == self.supply]
        if len(supplies) != 1:
            raise ValueError("bench must contain exactly one supply source")
        object.__setattr__(self, "probes", MappingProxyType(dict(self.probes)))


# ---------------------------------------------------------------------------
# building blocks


def _inv(name: str, vdd: str, a: str, y: str, wp: float = AUX_WP,
         wn: float = AUX_WN) -> list[Device]:
    return [
        Mosfet(f"{name}.MP", y, a, vdd, "pch", wp, 0.1e-6),
        Mosfet(f"{name}.MN", y, a, GROUND, "nch", wn, 0.1e-6),
    ]


def _tgate(name: str, a: str, b: str, ng: str, pg: str) -> list[Device]:
    """Transmission gate a <-> b; conducts when ng is high (pg low)."""
    return [
        Mosfet(f"{name}.MN", a, ng, b, "nch", AUX_WN, 0.1e-6),
        Mosfet(f"{name}.MP", a, pg, b, "pch", AUX_WP, 0.1e-6),
    ]


def build_msff(vdd: str, clk: str, d: str, q: str, prefix: str = "ff",
               slave_clk: str | None = None) -> list[Device]:
    """Transmission-gate master-slave D flip-flop, positive-edge-triggered.

    20 transistors with a shared clock: input inverter, two local clock
    buffers (clkb, clki), per-latch TG + forward/weak-feedback inverter
    pair, output inverter.  Passing slave_clk splits the latch clocks
    (used by the leakage-based scheme) at the cost of a second buffer pair.
    """
    p = prefix
    dev: list[Device] = []
    dev += _inv(f"{p}.XCB", vdd, clk, f"{p}.clkb")
    dev += _inv(f"{p}.XCI", vdd, f"{p}.clkb", f"{p}.clki")
    mb, mi = f"{p}.clkb", f"{p}.clki"
    if slave_clk is None or slave_clk == clk:
        sb, si = mb, mi
    else:
        dev += _inv(f"{p}.XSB", vdd, slave_clk, f"{p}.sclkb")
        dev += _inv(f"{p}.XSI", vdd, f"{p}.sclkb", f"{p}.sclki")
        sb, si = f"{p}.sclkb", f"{p}.sclki"
    dev += _inv(f"{p}.XD", vdd, d, f"{p}.db")
    # master: transparent while its clock is low
    dev += _tgate(f"{p}.TGM", f"{p}.db", f"{p}.m1", mb, mi)
    dev += _inv(f"{p}.XM", vdd, f"{p}.m1", f"{p}.m2")
    dev += _inv(f"{p}.XMF", vdd, f"{p}.m2", f"{p}.m1", WEAK_WP, WEAK_WN)
    # slave: transparent while its clock is high
    dev += _tgate(f"{p}.TGS", f"{p}.m2", f"{p}.s1", si, sb)
    dev += _inv(f"{p}.XS", vdd, f"{p}.s1", f"{p}.s2")
    dev += _inv(f"{p}.XSF", vdd, f"{p}.s2", f"{p}.s1", WEAK_WP, WEAK_WN)
    dev += _inv(f"{p}.XQ", vdd, f"{p}.s2", q)
    return dev


def build_comp_generator(vdd: str, data: str, q: str, comp: str,
                         prefix: str = "cmp") -> list[Device]:
    """Comp = XOR(Data, Q): two inverters plus two transmission gates.

    Comp sits high exactly while the stored output disagrees with the
    incoming data, i.e. while a capture is pending.
    """
    p = prefix
    dev: list[Device] = []
    dev += _inv(f"{p}.XQB", vdd, q, f"{p}.qb")
    dev += _inv(f"{p}.XDB", vdd, data, f"{p}.db")
    # Q = 0 passes Data, Q = 1 passes its complement
    dev += _tgate(f"{p}.TGD", data, comp, f"{p}.qb", q)
    dev += _tgate(f"{p}.TGN", f"{p}.db", comp, q, f"{p}.qb")
    return dev


def _gating_core(vdd: str, clk: str, comp: str, gclk: str,
                 widths: Mapping[str, float], prefix: str,
                 comp_on_top: bool) -> list[Device]:
    """Five-transistor gating core.

    Precharge PMOS P1 (gate = clock) holds the dynamic node high while the
    clock is low; a two-transistor evaluation stack discharges it when both
    clock and Comp are high; P2/N2 buffer the dynamic node to Gated_Clock.
    comp_on_top selects the inverted stack order (comparator device adjacent
    to the dynamic node, clock device at ground) used by the nc2mos scheme.
    """
    p = prefix
    x = f"{p}.NN2" if comp_on_top else f"{p}.x"
    mid = f"{p}.NN1" if comp_on_top else f"{p}.mid"
    dev = [Mosfet(f"{p}.P1", x, clk, vdd, "pch", widths["P1"], 0.1e-6)]
    if comp_on_top:
        dev.append(Mosfet(f"{p}.N3", x, comp, mid, "nch", widths["N3"], 0.1e-6))
        dev.append(Mosfet(f"{p}.N1", mid, clk, GROUND, "nch", widths["N1"], 0.1e-6))
    else:
        dev.append(Mosfet(f"{p}.N1", x, clk, mid, "nch", widths["N1"], 0.1e-6))
        dev.append(Mosfet(f"{p}.N3", mid, comp, GROUND, "nch", widths["N3"], 0.1e-6))
    dev.append(Mosfet(f"{p}.P2", gclk, x, vdd, "pch", widths["P2"], 0.1e-6))
    dev.append(Mosfet(f"{p}.N2", gclk, x, GROUND, "nch", widths["N2"], 0.1e-6))
    return dev


def build_proposed_core(vdd: str, clk: str, comp: str, gclk: str,
                        widths: Mapping[str, float] = DEFAULT_WIDTHS,
                        prefix: str = "cg") -> list[Device]:
    """Gating core with the clock transistor at the dynamic node and the
    comparator transistor at the bottom with its source grounded.  P1 and
    the N1 path are driven by the same clock, so they never conduct
    simultaneously (no contention path from supply to ground)."""
    return _gating_core(vdd, clk, comp, gclk, widths, prefix, comp_on_top=False)


def build_nc2mos_core(vdd: str, clk: str, comp: str, gclk: str,
                      widths: Mapping[str, float] = DEFAULT_WIDTHS,
                      prefix: str = "cg") -> list[Device]:
    """Same core with the evaluation stack order inverted: the comparator
    transistor sits adjacent to the dynamic node (NN2) and the clock
    transistor at ground, leaving the intermediate node NN1 between them."""
    return _gating_core(vdd, clk, comp, gclk, widths, prefix, comp_on_top=True)


def build_lector_and(vdd: str, a: str, b: str, y: str,
                     prefix: str = "la") -> list[Device]:
    """AND(a, b) as a leakage-controlled NAND followed by an inverter.

    The NAND carries two extra leakage-control transistors between the
    pull-up and pull-down networks; each LCT's gate ties to the other's
    source node, so one of them always sits near cutoff and raises the
    off-path stack resistance.  Output is taken between the LCTs.
    """
    p = prefix
    n1, out, n3, n4 = f"{p}.n1", f"{p}.nand", f"{p}.n3", f"{p}.n4"
    dev = [
        Mosfet(f"{p}.MPA", n1, a, vdd, "pch", AUX_WP, 0.1e-6),
        Mosfet(f"{p}.MPB", n1, b, vdd, "pch", AUX_WP, 0.1e-6),
        Mosfet(f"{p}.LCTP", out, n3, n1, "pch", AUX_WP, 0.1e-6),
        Mosfet(f"{p}.LCTN", out, n1, n3, "nch", AUX_WN, 0.1e-6),
        Mosfet(f"{p}.MNA", n3, a, n4, "nch", AUX_WN, 0.1e-6),
        Mosfet(f"{p}.MNB", n4, b, GROUND, "nch", AUX_WN, 0.1e-6),
    ]
    dev += _inv(f"{p}.XO", vdd, out, y)
    return dev


# ---------------------------------------------------------------------------
# stimulus


def clock_pulse(spec: SchemeSpec) -> Pulse:
    period = spec.t_clk
    return Pulse(0.0, spec.vdd, 0.0, spec.edge, spec.edge,
                 period / 2 - spec.edge, period)


def data_pwl(spec: SchemeSpec) -> Pwl:
    """Bit sequence rendered as a PWL wave: one bit per 1/f_data, with the
    configured edge time on every change, holding the last bit forever."""
    bits = spec.bits()
    tbit = spec.t_data
    pts = [(0.0, bits[0] * spec.vdd)]
    for k in range(1, len(bits)):
        if bits[k] != bits[k - 1]:
            t = k * tbit
            pts.append((t, bits[k - 1] * spec.vdd))
            pts.append((t + spec.edge, bits[k] * spec.vdd))
    return Pwl(tuple(pts))


# ---------------------------------------------------------------------------
# bench assembly


def bench_model_cards() -> dict:
    """Model cards used by every bench; CGBENCH_MODEL_CARD overrides the file."""
    path = os.environ.get("CGBENCH_MODEL_CARD")
    if path:
        return load_model_cards_file(path)
    return default_model_cards()


def build_bench(spec: SchemeSpec) -> BenchHandle:
    """Instantiate the scheme with supply, clock, and data sources attached.

    no_gating wires the clock straight to the flip-flop and aliases the
    Comp / Gated_Clock probes to ground and the clock node.
    """
    vdd, clk, data = "vdd", "Clock", "Data"
    devices: list[Device] = [
        VSource("VDD", vdd, GROUND, Dc(spec.vdd)),
        VSource("VCLK", clk, GROUND, clock_pulse(spec)),
        VSource("VDATA", data, GROUND, data_pwl(spec)),
    ]
    probes = {"Data": data, "Clock": clk, "Q": "Q"}
    if spec.scheme == "no_gating":
        devices += build_msff(vdd, clk, data, "Q")
        probes["Comp"] = GROUND
        probes["Gated_Clock"] = clk
    elif spec.scheme in ("proposed_cg", "nc2mos_cg"):
        core = (build_proposed_core if spec.scheme == "proposed_cg"
                else build_nc2mos_core)
        devices += build_comp_generator(vdd, data, "Q", "Comp")
        devices += core(vdd, clk, "Comp", "Gated_Clock", spec.widths)
        devices += build_msff(vdd, "Gated_Clock", data, "Q")
        probes["Comp"] = "Comp"
        probes["Gated_Clock"] = "Gated_Clock"
    else:  # lb_cg: gated master clock, free-running slave clock
        devices += build_comp_generator(vdd, data, "Q", "Comp")
        devices += build_lector_and(vdd, clk, "Comp", "Gated_Clock")
        devices += build_msff(vdd, "Gated_Clock", data, "Q", slave_clk=clk)
        probes["Comp"] = "Comp"
        probes["Gated_Clock"] = "Gated_Clock"
    circuit = make_circuit(f"{spec.scheme} bench", devices,
                           bench_model_cards())
    return BenchHandle(circuit, probes, "VDD", spec)
