"""Square-law MOSFET model with subthreshold leakage and temperature effects.

The model is a level-1 style description with three regions:

* subthreshold, Vgst <= 0:
    Ids = i0*(W/L)*exp(Vgst/(n_sub*vT))*(1 - exp(-Vds/vT))
* triode, 0 < Vds < Vgst:
    Ids = K(T)*(W/L)*(Vgst*Vds - Vds^2/2)*(1 + lambda*Vds)
* saturation, Vds >= Vgst:
    Ids = K(T)/2*(W/L)*Vgst^2*(1 + lambda*Vds)

with vT = kB*T/q, Vth(T) = |vth0| - tc_vth*(T - t0) and
K(T) = kp*(T/t0)^mu_exp.  Channel-length modulation is applied in the
triode region as well so that current and both small-signal conductances
are continuous at the triode/saturation border.  The subthreshold branch
joins the square law piecewise at Vgst = 0 (no smoothing function).

Everything is evaluated in NMOS convention internally.  PMOS devices are
handled by reflecting terminal voltages and the current sign through the
same evaluator, and reversed bias (Vds < 0) by swapping source and drain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay runnable
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

KB_OVER_Q = 8.617333262e-5  # Boltzmann constant over electron charge, V/K

DEFAULT_L = 0.1e-6  # channel length used when a device does not specify one, m


@dataclass(frozen=True)
class ModelCard:
    """Parameter set for one device polarity."""

    name: str
    polarity: str          # 'n' or 'p'
    vth0: float            # zero-bias threshold at t0, V (negative for 'p')
    kp: float              # transconductance parameter at t0, A/V^2
    lam: float             # channel-length modulation, 1/V
    n_sub: float           # subthreshold slope factor
    i0: float              # subthreshold prefactor per unit W/L at Vgs = Vth, A
    tc_vth: float          # threshold magnitude decrease per kelvin, V/K
    mu_exp: float          # mobility temperature exponent
    cg_per_w: float        # gate capacitance per channel width, F/m
    cj_per_w: float        # drain/source junction capacitance per width, F/m
    t0: float = 300.0      # reference temperature, K

    def __post_init__(self):
        if self.polarity not in ("n", "p"):
            raise ValueError(f"model {self.name}: polarity must be 'n' or 'p'")
        if self.polarity == "n" and self.vth0 <= 0:
            raise ValueError(f"model {self.name}: vth0 must be > 0 for NMOS")
        if self.polarity == "p" and self.vth0 >= 0:
            raise ValueError(f"model {self.name}: vth0 must be < 0 for PMOS")
        if self.kp <= 0:
            raise ValueError(f"model {self.name}: kp must be > 0")
        if self.n_sub < 1.0:
            raise ValueError(f"model {self.name}: n_sub must be >= 1")
        for field in ("i0", "cg_per_w", "cj_per_w"):
            if getattr(self, field) < 0:
                raise ValueError(f"model {self.name}: {field} must be >= 0")
        if self.t0 <= 0:
            raise ValueError(f"model {self.name}: t0 must be > 0")


@dataclass(frozen=True)
class MosOperatingPoint:
    ids: float
    gm: float
    gds: float
    region: str  # 'subthreshold' | 'triode' | 'saturation'


NCH_DEFAULT = ModelCard(
    name="nch", polarity="n", vth0=0.30, kp=300e-6, lam=0.1, n_sub=1.5,
    i0=50e-9, tc_vth=1.0e-3, mu_exp=-1.5, cg_per_w=1.0e-9, cj_per_w=0.5e-9,
)

PCH_DEFAULT = ModelCard(
    name="pch", polarity="p", vth0=-0.30, kp=120e-6, lam=0.1, n_sub=1.5,
    i0=50e-9, tc_vth=1.0e-3, mu_exp=-1.5, cg_per_w=1.0e-9, cj_per_w=0.5e-9,
)


def default_model_cards() -> dict[str, ModelCard]:
    """Built-in model cards keyed by name."""
    return {"nch": NCH_DEFAULT, "pch": PCH_DEFAULT}


def thermal_voltage(temp: float) -> float:
    return KB_OVER_Q * temp


def vth_at(card: ModelCard, temp: float) -> float:
    """Threshold magnitude at the given temperature (NMOS convention)."""
    return abs(card.vth0) - card.tc_vth * (temp - card.t0)


def kp_at(card: ModelCard, temp: float) -> float:
    return card.kp * (temp / card.t0) ** card.mu_exp


@njit(cache=True)
def _ids_gm_gds(vgst, vds, kwl, lam, nsubvt, i0wl, vt):
    """Region equations for Vds >= 0 in NMOS convention.

    Returns (ids, gm, gds, region) with region 0/1/2 for
    subthreshold/triode/saturation.
    """
    if vgst <= 0.0:
        e = i0wl * math.exp(vgst / nsubvt)
        ids = e * (1.0 - math.exp(-vds / vt))
        gm = ids / nsubvt
        gds = e * math.exp(-vds / vt) / vt
        return ids, gm, gds, 0
    clm = 1.0 + lam * vds
    if vds < vgst:
        ids = kwl * (vgst * vds - 0.5 * vds * vds) * clm
        gm = kwl * vds * clm
        gds = kwl * ((vgst - vds) * clm + (vgst * vds - 0.5 * vds * vds) * lam)
        return ids, gm, gds, 1
    ids = 0.5 * kwl * vgst * vgst * clm
    gm = kwl * vgst * clm
    gds = 0.5 * kwl * vgst * vgst * lam
    return ids, gm, gds, 2


@njit(cache=True)
def _terminal_eval(sign, vd, vg, vs, vth, kwl, lam, nsubvt, i0wl, vt):
    """Drain-to-source current and its partials w.r.t. terminal voltages.

    `sign` is +1 for NMOS and -1 for PMOS; the PMOS case reflects all
    terminal voltages, evaluates as NMOS and negates the current (the
    partials carry over unchanged).  Reversed bias swaps source and drain.
    Returns (ids, di/dvd, di/dvg, di/dvs).
    """
    d = sign * vd
    g = sign * vg
    s = sign * vs
    if d >= s:
        ids, gm, gds, _ = _ids_gm_gds(g - s - vth, d - s, kwl, lam, nsubvt, i0wl, vt)
        return sign * ids, gds, gm, -(gm + gds)
    ids, gm, gds, _ = _ids_gm_gds(g - d - vth, s - d, kwl, lam, nsubvt, i0wl, vt)
    return -sign * ids, gm + gds, -gm, -gds


def mos_ids(card: ModelCard, w: float, l: float, vgs: float, vds: float,
            temp: float = 300.0) -> MosOperatingPoint:
    """Evaluate drain current and small-signal conductances.

    Voltages are source-referenced device values (negative for a typical
    PMOS bias); a PMOS card is reflected through the shared NMOS-convention
    evaluator and its current sign flipped.  The returned ``gm``/``gds``
    are the partial derivatives of ``ids`` with respect to the ``vgs``
    and ``vds`` arguments; a reversed channel is handled by swapping
    source and drain.
    """
    if w <= 0 or l <= 0:
        raise ValueError("mosfet W and L must be > 0")
    vt = thermal_voltage(temp)
    vth = vth_at(card, temp)
    kwl = kp_at(card, temp) * (w / l)
    i0wl = card.i0 * (w / l)
    names = ("subthreshold", "triode", "saturation")
    sgn = 1.0 if card.polarity == "n" else -1.0
    vg = sgn * vgs
    vd = sgn * vds
    if vd >= 0:
        ids, gm, gds, reg = _ids_gm_gds(vg - vth, vd, kwl, card.lam,
                                        card.n_sub * vt, i0wl, vt)
        return MosOperatingPoint(sgn * ids, gm, gds, names[reg])
    # source/drain swap in the reflected frame: ids = -f(vg - vd, -vd)
    ids, gm, gds, reg = _ids_gm_gds(vg - vd - vth, -vd, kwl, card.lam,
                                    card.n_sub * vt, i0wl, vt)
    return MosOperatingPoint(-sgn * ids, -gm, gm + gds, names[reg])


def mos_terminal_current(card: ModelCard, w: float, l: float, vd: float,
                         vg: float, vs: float, temp: float = 300.0):
    """Channel current flowing drain -> source plus terminal partials."""
    if w <= 0 or l <= 0:
        raise ValueError("mosfet W and L must be > 0")
    vt = thermal_voltage(temp)
    sign = 1.0 if card.polarity == "n" else -1.0
    return _terminal_eval(sign, vd, vg, vs, vth_at(card, temp),
                          kp_at(card, temp) * (w / l), card.lam,
                          card.n_sub * vt, card.i0 * (w / l), vt)


def mos_caps(card: ModelCard, w: float):
    """Lumped terminal capacitances to ground: (gate, drain, source)."""
    if w <= 0:
        raise ValueError("mosfet W must be > 0")
    return card.cg_per_w * w, card.cj_per_w * w, card.cj_per_w * w


def card_with(card: ModelCard, **overrides) -> ModelCard:
    return replace(card, **overrides)
