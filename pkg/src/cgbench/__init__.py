"""Transistor-level transient simulation and clock-gating characterization.

The package is organized as a stack:

- ``netlist``: circuit description, parsing, and waveform sources
- ``devices``: the square-law MOSFET model with subthreshold leakage
- ``engine``: DC operating point and fixed-step transient solver
- ``cglib``: flip-flop, comparator, and clock-gating cell generators
- ``metrics``: power and timing extraction from traces
- ``bench``: characterization runs, sweeps, and the command line
"""

from .devices import (DEFAULT_L, ModelCard, MosOperatingPoint,
                      default_model_cards, mos_caps, mos_ids)
from .netlist import (Circuit, Capacitor, Dc, GROUND, Mosfet, NetlistError,
                      Pulse, Pwl, Resistor, TranSpec, VSource, eval_waveform,
                      format_number, load_model_cards, load_model_cards_file,
                      make_circuit, parse_netlist, parse_number, to_netlist)
from .engine import (NonConvergenceError, SimConfig, SingularMatrixError,
                     Trace, dc_operating_point, transient)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_L", "ModelCard", "MosOperatingPoint", "default_model_cards",
    "mos_caps", "mos_ids",
    "Circuit", "Capacitor", "Dc", "GROUND", "Mosfet", "NetlistError",
    "Pulse", "Pwl", "Resistor", "TranSpec", "VSource", "eval_waveform",
    "format_number", "load_model_cards", "load_model_cards_file",
    "make_circuit", "parse_netlist", "parse_number", "to_netlist",
    "NonConvergenceError", "SimConfig", "SingularMatrixError", "Trace",
    "dc_operating_point", "transient",
    "__version__",
]
