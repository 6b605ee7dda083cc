"""SPICE-subset netlist dialect: parsing, elaboration and serialization.

Grammar summary
---------------
* First line is the title.  Lines starting with ``*`` are comments, lines
  starting with ``+`` continue the previous statement.
* Element lines are keyed by the first letter of the name token:
  ``R<name> n1 n2 value``, ``C<name> n1 n2 value``,
  ``V<name> p m DC v | PULSE(v1 v2 delay rise fall width period) | PWL(t v ...)``,
  ``M<name> d g s model W=val [L=val]`` and subcircuit instances
  ``X<name> n1 ... nk subckt``.  Hierarchical device names produced by
  expansion keep their leaf type letter after the last ``.``.
* Control lines: ``.model``, ``.subckt``/``.ends``, ``.param``, ``.tran``,
  ``.op``, ``.end``.  Keywords are case-insensitive, names are preserved.
* Numbers accept engineering suffixes f, p, n, u, m, k, meg (``meg`` is
  matched before ``m``).  A bare identifier where a number is expected is
  treated as a ``.param`` reference and resolved during elaboration.

Parsing produces a :class:`RawNetlist` of typed statements with source
line numbers; :func:`elaborate` expands subcircuits (hierarchical names
joined by ``.``), substitutes parameters and returns a validated
:class:`Circuit`.  :func:`to_netlist` writes the canonical flat form,
which re-parses to an identical circuit.
"""

from __future__ import annotations

import re
import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from .devices import DEFAULT_L, ModelCard, default_model_cards

GROUND = "0"

# decimal exponent per suffix; scaling is done in exact decimal arithmetic
# so "120u" parses to the same double as the literal 120e-6
SUFFIX_EXPONENTS = {
    "meg": 6,
    "f": -15,
    "p": -12,
    "n": -9,
    "u": -6,
    "m": -3,
    "k": 3,
}

SUFFIXES = {s: 10.0 ** e for s, e in SUFFIX_EXPONENTS.items()}

_NUMBER_RE = re.compile(
    r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(meg|f|p|n|u|m|k)?$",
    re.IGNORECASE,
)

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


class NetlistError(ValueError):
    """Parse or elaboration failure, carrying the source line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


def parse_number(token: str) -> float:
    """Parse a numeric literal with an optional engineering suffix."""
    m = _NUMBER_RE.match(token)
    if not m:
        raise ValueError(f"malformed number {token!r}")
    suffix = m.group(1)
    if suffix:
        exp = SUFFIX_EXPONENTS[suffix.lower()]
        return float(Decimal(token[: -len(suffix)]) * Decimal(10) ** exp)
    return float(token)


def format_number(value: float) -> str:
    """Shortest round-tripping decimal form used by the canonical netlist."""
    return repr(float(value))


# ---------------------------------------------------------------------------
# waveforms


@dataclass(frozen=True)
class Dc:
    level: float


@dataclass(frozen=True)
class Pulse:
    v1: float
    v2: float
    delay: float
    rise: float
    fall: float
    width: float
    period: float

    def __post_init__(self):
        for name in ("rise", "fall", "width", "period"):
            if getattr(self, name) <= 0:
                raise ValueError(f"PULSE {name} must be > 0")
        if self.delay < 0:
            raise ValueError("PULSE delay must be >= 0")
        if self.period < self.rise + self.fall + self.width:
            raise ValueError("PULSE period must be >= rise + fall + width")


@dataclass(frozen=True)
class Pwl:
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("PWL needs at least one (time, value) pair")
        times = [t for t, _ in self.points]
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("PWL times must be nondecreasing")
        if times[0] < 0:
            raise ValueError("PWL times must be >= 0")


Waveform = Dc | Pulse | Pwl


def eval_waveform(w: Waveform, t: float) -> float:
    """Source value at time ``t``.

    PULSE repeats with its period and sits at ``v1`` before the delay;
    PWL holds its final value past the last point.
    """
    if isinstance(w, Dc):
        return w.level
    if isinstance(w, Pulse):
        if t < w.delay:
            return w.v1
        x = (t - w.delay) % w.period
        if x < w.rise:
            return w.v1 + (w.v2 - w.v1) * x / w.rise
        x -= w.rise
        if x < w.width:
            return w.v2
        x -= w.width
        if x < w.fall:
            return w.v2 + (w.v1 - w.v2) * x / w.fall
        return w.v1
    times = [p[0] for p in w.points]
    values = [p[1] for p in w.points]
    i = bisect_right(times, t)
    if i == 0:
        return values[0]
    if i == len(times):
        return values[-1]
    t0, t1 = times[i - 1], times[i]
    if t1 == t0:
        return values[i]
    return values[i - 1] + (values[i] - values[i - 1]) * (t - t0) / (t1 - t0)


def waveform_samples(w: Waveform, times: np.ndarray) -> np.ndarray:
    """Vectorized :func:`eval_waveform` over a time grid."""
    times = np.asarray(times, dtype=float)
    if isinstance(w, Dc):
        return np.full(times.shape, w.level)
    if isinstance(w, Pulse):
        x = np.mod(times - w.delay, w.period)
        r1 = w.v1 + (w.v2 - w.v1) * x / w.rise
        r2 = w.v2 + (w.v1 - w.v2) * (x - w.rise - w.width) / w.fall
        out = np.select(
            [times < w.delay, x < w.rise, x < w.rise + w.width,
             x < w.rise + w.width + w.fall],
            [np.full_like(x, w.v1), r1, np.full_like(x, w.v2), r2],
            default=w.v1,
        )
        return out
    tx = np.array([p[0] for p in w.points])
    vx = np.array([p[1] for p in w.points])
    return np.interp(times, tx, vx)


# ---------------------------------------------------------------------------
# circuit model


@dataclass(frozen=True)
class Resistor:
    name: str
    n1: str
    n2: str
    value: float


@dataclass(frozen=True)
class Capacitor:
    name: str
    n1: str
    n2: str
    value: float


@dataclass(frozen=True)
class VSource:
    name: str
    p: str
    m: str
    waveform: Waveform


@dataclass(frozen=True)
class Mosfet:
    name: str
    d: str
    g: str
    s: str
    model: str
    w: float
    l: float


Device = Resistor | Capacitor | VSource | Mosfet


def device_nodes(dev: Device) -> tuple[str, ...]:
    if isinstance(dev, Mosfet):
        return (dev.d, dev.g, dev.s)
    if isinstance(dev, VSource):
        return (dev.p, dev.m)
    return (dev.n1, dev.n2)


def device_kind(dev: Device) -> str:
    return {Resistor: "resistor", Capacitor: "capacitor",
            VSource: "vsource", Mosfet: "mosfet"}[type(dev)]


@dataclass(frozen=True)
class TranSpec:
    step: float
    stop: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(".tran step must be > 0")
        if self.stop <= self.step:
            raise ValueError(".tran stop must be > step")


@dataclass(frozen=True)
class OpSpec:
    pass


AnalysisSpec = TranSpec | OpSpec


@dataclass(frozen=True)
class Circuit:
    title: str
    nodes: tuple[str, ...]
    devices: tuple[Device, ...]
    models: dict[str, ModelCard] = field(default_factory=dict)
    analyses: tuple[AnalysisSpec, ...] = ()
    params: dict[str, float] = field(default_factory=dict)


def make_circuit(title, devices, models=None, analyses=(), params=None,
                 check_dangling=False) -> Circuit:
    """Assemble and validate a circuit from device objects.

    Nodes are collected in first-mention order with ground first.  Raises
    on duplicate device names, missing MOSFET models and non-positive
    element values; optionally warns about single-terminal nodes.
    """
    models = dict(models) if models else {}
    seen_names = set()
    nodes = [GROUND]
    touch_count: dict[str, int] = {}
    for dev in devices:
        if dev.name in seen_names:
            raise ValueError(f"duplicate device name {dev.name!r}")
        seen_names.add(dev.name)
        for n in device_nodes(dev):
            if n not in touch_count:
                touch_count[n] = 0
                if n != GROUND:
                    nodes.append(n)
            touch_count[n] += 1
        if isinstance(dev, Resistor) and dev.value <= 0:
            raise ValueError(f"resistor {dev.name}: value must be > 0")
        if isinstance(dev, Capacitor) and dev.value < 0:
            raise ValueError(f"capacitor {dev.name}: value must be >= 0")
        if isinstance(dev, Mosfet):
            if dev.model not in models:
                raise ValueError(
                    f"mosfet {dev.name} references unknown model {dev.model!r}")
            if dev.w <= 0 or dev.l <= 0:
                raise ValueError(f"mosfet {dev.name}: W and L must be > 0")
    if check_dangling:
        for n, count in touch_count.items():
            if n != GROUND and count == 1:
                warnings.warn(f"node {n!r} is attached to a single terminal",
                              stacklevel=2)
    return Circuit(title, tuple(nodes), tuple(devices), models,
                   tuple(analyses), dict(params) if params else {})


# ---------------------------------------------------------------------------
# raw statements


@dataclass(frozen=True)
class ParamRef:
    name: str


Value = float


def _parse_value(token: str, line: int):
    """A numeric literal, or a parameter reference if it looks like a name."""
    try:
        return parse_number(token)
    except ValueError:
        if _IDENT_RE.match(token):
            return ParamRef(token)
        raise NetlistError(line, f"malformed number {token!r}")


@dataclass(frozen=True)
class RStatement:
    line: int
    name: str
    nodes: tuple[str, str]
    value: object


@dataclass(frozen=True)
class CStatement:
    line: int
    name: str
    nodes: tuple[str, str]
    value: object


@dataclass(frozen=True)
class VStatement:
    line: int
    name: str
    nodes: tuple[str, str]
    kind: str            # 'DC' | 'PULSE' | 'PWL'
    args: tuple


@dataclass(frozen=True)
class MStatement:
    line: int
    name: str
    nodes: tuple[str, str, str]
    model: str
    w: object
    l: object


@dataclass(frozen=True)
class XStatement:
    line: int
    name: str
    nodes: tuple[str, ...]
    subckt: str


@dataclass(frozen=True)
class ModelStatement:
    line: int
    name: str
    mtype: str           # 'nmos' | 'pmos'
    params: tuple        # ((key, value), ...)


@dataclass(frozen=True)
class SubcktStatement:
    line: int
    name: str
    ports: tuple[str, ...]


@dataclass(frozen=True)
class EndsStatement:
    line: int


@dataclass(frozen=True)
class ParamStatement:
    line: int
    name: str
    value: object


@dataclass(frozen=True)
class TranStatement:
    line: int
    step: object
    stop: object


@dataclass(frozen=True)
class OpStatement:
    line: int


@dataclass(frozen=True)
class RawNetlist:
    title: str
    statements: tuple


def _logical_lines(text: str):
    """Join continuations, drop comments/blanks, keep 1-based line numbers."""
    out = []
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if num == 1:
            continue  # title handled by caller
        if not line or line.startswith("*"):
            continue
        if line.startswith("+"):
            if not out:
                raise NetlistError(num, "continuation with no statement to continue")
            prev_num, prev = out[-1]
            out[-1] = (prev_num, prev + " " + line[1:].strip())
        else:
            out.append((num, line))
    return out


def _element_letter(name: str, line: int) -> str:
    leaf = name.rsplit(".", 1)[-1]
    if not leaf or not leaf[0].isalpha():
        raise NetlistError(line, f"bad element name {name!r}")
    return leaf[0].upper()


_FUNC_RE = re.compile(r"^(dc|pulse|pwl)\s*(?:\((.*)\))?\s*$", re.IGNORECASE | re.DOTALL)


def _parse_source_tail(tail: str, line: int):
    """Waveform spec of a V line: bare value, DC v, PULSE(...), PWL(...)."""
    m = _FUNC_RE.match(tail.strip())
    if m and m.group(1).lower() != "dc":
        kind = m.group(1).upper()
        body = m.group(2)
        if body is None:
            raise NetlistError(line, f"{kind} requires a parenthesized argument list")
        args = tuple(_parse_value(tok, line)
                     for tok in body.replace(",", " ").split())
        return kind, args
    toks = tail.split()
    if toks and toks[0].lower() == "dc":
        toks = toks[1:]
    if len(toks) != 1:
        raise NetlistError(line, f"malformed source value {tail!r}")
    return "DC", (_parse_value(toks[0], line),)


def _parse_assignments(tokens, line: int):
    """key=value pairs, tolerant of spaces around '='."""
    joined = " ".join(tokens)
    joined = re.sub(r"\s*=\s*", "=", joined)
    pairs = []
    for tok in joined.split():
        if "=" not in tok:
            raise NetlistError(line, f"expected key=value, got {tok!r}")
        key, _, val = tok.partition("=")
        if not key or not val:
            raise NetlistError(line, f"expected key=value, got {tok!r}")
        pairs.append((key, val))
    return pairs


def parse(text: str) -> RawNetlist:
    """Parse netlist text into a title plus typed statements.

    Raises :class:`NetlistError` with the offending line number on
    malformed numbers, unknown element letters or bad statement shapes.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise NetlistError(1, "netlist must start with a title line")
    title = lines[0].strip()
    statements = []
    for num, stmt in _logical_lines(text):
        tokens = stmt.split()
        word = tokens[0]
        if word.startswith("."):
            statements.append(_parse_control(word.lower(), tokens, num))
            if isinstance(statements[-1], _EndMarker):
                statements.pop()
                break
            continue
        statements.append(_parse_element(tokens, num))
    return RawNetlist(title, tuple(statements))


class _EndMarker:
    pass


def _parse_control(word, tokens, num):
    if word == ".end":
        return _EndMarker()
    if word == ".op":
        return OpStatement(num)
    if word == ".tran":
        if len(tokens) != 3:
            raise NetlistError(num, ".tran expects step and stop")
        return TranStatement(num, _parse_value(tokens[1], num),
                             _parse_value(tokens[2], num))
    if word == ".param":
        pairs = _parse_assignments(tokens[1:], num)
        if len(pairs) != 1:
            raise NetlistError(num, ".param expects a single name=value")
        key, val = pairs[0]
        return ParamStatement(num, key, _parse_value(val, num))
    if word == ".model":
        if len(tokens) < 3:
            raise NetlistError(num, ".model expects a name and a type")
        mtype = tokens[2].lower()
        if mtype not in ("nmos", "pmos"):
            raise NetlistError(num, f"unknown model type {tokens[2]!r}")
        pairs = tuple((k.lower(), _parse_value(v, num))
                      for k, v in _parse_assignments(tokens[3:], num))
        return ModelStatement(num, tokens[1], mtype, pairs)
    if word == ".subckt":
        if len(tokens) < 2:
            raise NetlistError(num, ".subckt expects a name")
        return SubcktStatement(num, tokens[1], tuple(tokens[2:]))
    if word == ".ends":
        return EndsStatement(num)
    raise NetlistError(num, f"unknown control statement {word!r}")


def _parse_element(tokens, num):
    name = tokens[0]
    letter = _element_letter(name, num)
    if letter in ("R", "C"):
        if len(tokens) != 4:
            raise NetlistError(num, f"{letter} element expects two nodes and a value")
        cls = RStatement if letter == "R" else CStatement
        return cls(num, name, (tokens[1], tokens[2]), _parse_value(tokens[3], num))
    if letter == "V":
        if len(tokens) < 4:
            raise NetlistError(num, "V element expects two nodes and a value")
        kind, args = _parse_source_tail(" ".join(tokens[3:]), num)
        return VStatement(num, name, (tokens[1], tokens[2]), kind, args)
    if letter == "M":
        if len(tokens) < 5:
            raise NetlistError(num, "M element expects d g s and a model name")
        w = None
        l = None
        for key, val in _parse_assignments(tokens[5:], num):
            if key.upper() == "W":
                w = _parse_value(val, num)
            elif key.upper() == "L":
                l = _parse_value(val, num)
            else:
                raise NetlistError(num, f"unknown mosfet parameter {key!r}")
        if w is None:
            raise NetlistError(num, f"mosfet {name} is missing W=")
        return MStatement(num, name, (tokens[1], tokens[2], tokens[3]),
                          tokens[4], w, DEFAULT_L if l is None else l)
    if letter == "X":
        if len(tokens) < 3:
            raise NetlistError(num, "X instance expects nodes and a subckt name")
        return XStatement(num, name, tuple(tokens[1:-1]), tokens[-1])
    raise NetlistError(num, f"unknown element letter {letter!r} in {name!r}")


# ---------------------------------------------------------------------------
# elaboration


_MODEL_KEYS = ("vth0", "kp", "lambda", "n_sub", "i0", "tc_vth", "mu_exp",
               "cg_per_w", "cj_per_w", "t0")


def _build_model(stmt: ModelStatement, params) -> ModelCard:
    base = default_model_cards()["nch" if stmt.mtype == "nmos" else "pch"]
    fields = {
        "name": stmt.name, "polarity": "n" if stmt.mtype == "nmos" else "p",
        "vth0": base.vth0, "kp": base.kp, "lam": base.lam, "n_sub": base.n_sub,
        "i0": base.i0, "tc_vth": base.tc_vth, "mu_exp": base.mu_exp,
        "cg_per_w": base.cg_per_w, "cj_per_w": base.cj_per_w, "t0": base.t0,
    }
    for key, val in stmt.params:
        if key not in _MODEL_KEYS:
            raise NetlistError(stmt.line, f"unknown model parameter {key!r}")
        fields["lam" if key == "lambda" else key] = _resolve(val, params, stmt.line)
    try:
        return ModelCard(**fields)
    except ValueError as exc:
        raise NetlistError(stmt.line, str(exc)) from exc


def _resolve(value, params, line):
    if isinstance(value, ParamRef):
        if value.name not in params:
            raise NetlistError(line, f"undefined parameter {value.name!r}")
        return params[value.name]
    return value


def _make_waveform(stmt: VStatement, params) -> Waveform:
    args = tuple(_resolve(a, params, stmt.line) for a in stmt.args)
    try:
        if stmt.kind == "DC":
            return Dc(args[0])
        if stmt.kind == "PULSE":
            if len(args) != 7:
                raise ValueError("PULSE expects 7 arguments")
            return Pulse(*args)
        if len(args) % 2 != 0:
            raise ValueError("PWL expects an even number of arguments")
        return Pwl(tuple(zip(args[::2], args[1::2])))
    except ValueError as exc:
        raise NetlistError(stmt.line, str(exc)) from exc


def elaborate(raw: RawNetlist) -> Circuit:
    """Expand subcircuits, substitute parameters and validate.

    Hierarchical node and device names are joined with ``.``; ground is
    global.  Dangling single-terminal nodes are reported as a warning.
    """
    params = {}
    models = {}
    subckts = {}
    analyses = []
    top = []
    it = iter(raw.statements)
    for stmt in it:
        if isinstance(stmt, ParamStatement):
            params[stmt.name] = _resolve(stmt.value, params, stmt.line)
        elif isinstance(stmt, ModelStatement):
            models[stmt.name] = stmt
        elif isinstance(stmt, SubcktStatement):
            body = []
            for inner in it:
                if isinstance(inner, EndsStatement):
                    break
                if isinstance(inner, SubcktStatement):
                    raise NetlistError(inner.line, "nested .subckt definition")
                if not isinstance(inner, (RStatement, CStatement, VStatement,
                                          MStatement, XStatement)):
                    raise NetlistError(inner.line,
                                       "only element statements allowed in .subckt")
                body.append(inner)
            else:
                raise NetlistError(stmt.line, f".subckt {stmt.name} missing .ends")
            subckts[stmt.name] = (stmt.ports, tuple(body))
        elif isinstance(stmt, EndsStatement):
            raise NetlistError(stmt.line, ".ends without .subckt")
        elif isinstance(stmt, TranStatement):
            try:
                analyses.append(TranSpec(_resolve(stmt.step, params, stmt.line),
                                         _resolve(stmt.stop, params, stmt.line)))
            except ValueError as exc:
                raise NetlistError(stmt.line, str(exc)) from exc
        elif isinstance(stmt, OpStatement):
            analyses.append(OpSpec())
        else:
            top.append(stmt)

    built_models = {name: _build_model(s, params) for name, s in models.items()}

    devices = []

    def expand(stmts, prefix, node_map, depth):
        if depth > 32:
            raise NetlistError(stmts[0].line if stmts else 0,
                               "subcircuit recursion too deep")
        def mapped(n):
            if n == GROUND:
                return GROUND
            if n in node_map:
                return node_map[n]
            return prefix + n if prefix else n

        for stmt in stmts:
            name = prefix + stmt.name if prefix else stmt.name
            if isinstance(stmt, RStatement):
                devices.append(Resistor(name, mapped(stmt.nodes[0]),
                                        mapped(stmt.nodes[1]),
                                        _resolve(stmt.value, params, stmt.line)))
            elif isinstance(stmt, CStatement):
                devices.append(Capacitor(name, mapped(stmt.nodes[0]),
                                         mapped(stmt.nodes[1]),
                                         _resolve(stmt.value, params, stmt.line)))
            elif isinstance(stmt, VStatement):
                devices.append(VSource(name, mapped(stmt.nodes[0]),
                                       mapped(stmt.nodes[1]),
                                       _make_waveform(stmt, params)))
            elif isinstance(stmt, MStatement):
                if stmt.model not in built_models:
                    raise NetlistError(
                        stmt.line,
                        f"mosfet {name} references unknown model {stmt.model!r}")
                devices.append(Mosfet(name, mapped(stmt.nodes[0]),
                                      mapped(stmt.nodes[1]), mapped(stmt.nodes[2]),
                                      stmt.model,
                                      _resolve(stmt.w, params, stmt.line),
                                      _resolve(stmt.l, params, stmt.line)))
            else:  # XStatement
                if stmt.subckt not in subckts:
                    raise NetlistError(stmt.line,
                                       f"unknown subcircuit {stmt.subckt!r}")
                ports, body = subckts[stmt.subckt]
                if len(ports) != len(stmt.nodes):
                    raise NetlistError(
                        stmt.line,
                        f"instance {name} has {len(stmt.nodes)} nodes, "
                        f"subckt {stmt.subckt} has {len(ports)} ports")
                inner_map = {p: mapped(n) for p, n in zip(ports, stmt.nodes)}
                expand(body, name + ".", inner_map, depth + 1)

    expand(top, "", {}, 0)

    try:
        return make_circuit(raw.title, devices, built_models, analyses, params,
                            check_dangling=True)
    except ValueError as exc:
        if isinstance(exc, NetlistError):
            raise
        raise NetlistError(0, str(exc)) from exc


def parse_netlist(text: str) -> Circuit:
    """Convenience wrapper: parse then elaborate."""
    return elaborate(parse(text))


# ---------------------------------------------------------------------------
# canonical serialization


def _format_waveform(w: Waveform) -> str:
    if isinstance(w, Dc):
        return f"DC {format_number(w.level)}"
    if isinstance(w, Pulse):
        args = (w.v1, w.v2, w.delay, w.rise, w.fall, w.width, w.period)
        return "PULSE(" + " ".join(format_number(a) for a in args) + ")"
    flat = [x for p in w.points for x in p]
    return "PWL(" + " ".join(format_number(a) for a in flat) + ")"


def _format_model(card: ModelCard) -> str:
    mtype = "nmos" if card.polarity == "n" else "pmos"
    pairs = [
        ("vth0", card.vth0), ("kp", card.kp), ("lambda", card.lam),
        ("n_sub", card.n_sub), ("i0", card.i0), ("tc_vth", card.tc_vth),
        ("mu_exp", card.mu_exp), ("cg_per_w", card.cg_per_w),
        ("cj_per_w", card.cj_per_w), ("t0", card.t0),
    ]
    body = " ".join(f"{k}={format_number(v)}" for k, v in pairs)
    return f".model {card.name} {mtype} {body}"


def to_netlist(circuit: Circuit) -> str:
    """Serialize to canonical flat netlist text (reparses identically)."""
    lines = [circuit.title]
    for name in sorted(circuit.params):
        lines.append(f".param {name}={format_number(circuit.params[name])}")
    for name in sorted(circuit.models):
        lines.append(_format_model(circuit.models[name]))
    for dev in circuit.devices:
        if isinstance(dev, Resistor):
            lines.append(f"{dev.name} {dev.n1} {dev.n2} {format_number(dev.value)}")
        elif isinstance(dev, Capacitor):
            lines.append(f"{dev.name} {dev.n1} {dev.n2} {format_number(dev.value)}")
        elif isinstance(dev, VSource):
            lines.append(f"{dev.name} {dev.p} {dev.m} {_format_waveform(dev.waveform)}")
        else:
            lines.append(f"{dev.name} {dev.d} {dev.g} {dev.s} {dev.model} "
                         f"W={format_number(dev.w)} L={format_number(dev.l)}")
    for an in circuit.analyses:
        if isinstance(an, TranSpec):
            lines.append(f".tran {format_number(an.step)} {format_number(an.stop)}")
        else:
            lines.append(".op")
    lines.append(".end")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# model card files


def load_model_cards(text: str) -> dict[str, ModelCard]:
    """Read model cards from plain ``.model`` lines (comments allowed)."""
    src = "model cards\n" + text
    raw = parse(src)
    cards = {}
    for stmt in raw.statements:
        if isinstance(stmt, ModelStatement):
            cards[stmt.name] = _build_model(stmt, {})
        elif not isinstance(stmt, (ParamStatement,)):
            raise NetlistError(stmt.line, "model card files may only contain .model lines")
    if not cards:
        raise NetlistError(1, "no .model statements found")
    return cards


def load_model_cards_file(path) -> dict[str, ModelCard]:
    with open(path, "r", encoding="utf-8") as fh:
        return load_model_cards(fh.read())
