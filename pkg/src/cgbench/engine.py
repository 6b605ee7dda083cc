"""Modified-nodal-analysis engine: DC operating point and fixed-step transient.

Unknowns are the non-ground node voltages plus one branch current per
voltage source.  The nonlinear system is solved with damped Newton
iterations (the update is halved until the residual norm decreases, with
a 1e-3 floor) on top of a dense LU factorization with partial pivoting.
A failed operating point is retried with gmin stepping: the gmin tied to
every node starts 1e6 times larger and is reduced a decade at a time.

The transient uses a fixed step.  Capacitors become companion
conductances (C/h for backward Euler, 2C/h plus a history current for
the trapezoidal rule); waveform sources are evaluated at the end time of
each step, and a nonconvergent step is retried once as four h/4
sub-steps before giving up.  Sample 0 of every trace is the DC operating
point at t = 0.

The per-step work (residual/Jacobian assembly, LU, damping) is compiled
with numba; circuits here are small (tens of nodes) so everything stays
dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

from .devices import _terminal_eval, mos_caps, thermal_voltage, vth_at, kp_at
from .netlist import (Capacitor, Circuit, GROUND, Mosfet, Resistor, VSource,
                      eval_waveform, waveform_samples)


class NonConvergenceError(RuntimeError):
    def __init__(self, time, message):
        self.time = time
        super().__init__(message)


class SingularMatrixError(RuntimeError):
    def __init__(self, node, message):
        self.node = node
        super().__init__(message)


@dataclass
class SimConfig:
    """Solver settings.  tstop is required for transient analysis."""

    tstep: float = 1e-12
    tstop: float | None = None
    temp: float = 300.0           # K
    integrator: str = "trapezoidal"   # 'backward_euler' | 'trapezoidal'
    abstol: float = 1e-12         # A
    reltol: float = 1e-4
    vntol: float = 1e-6           # V
    gmin: float = 1e-12           # S, every node to ground
    cmin: float = 1e-16           # F, every node to ground
    max_newton: int = 100

    def __post_init__(self):
        if self.integrator not in ("backward_euler", "trapezoidal"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.tstep <= 0:
            raise ValueError("tstep must be > 0")
        if self.tstop is not None and self.tstop < 10 * self.tstep:
            raise ValueError("tstop must be at least 10 * tstep")


@dataclass
class Trace:
    """Transient result: one row per accepted step, plus the t=0 point."""

    times: np.ndarray
    node_voltages: dict[str, np.ndarray]
    source_currents: dict[str, np.ndarray]  # positive = out of the + terminal
    tstep: float
    stats: dict = field(default_factory=dict)

    def voltage(self, node: str) -> np.ndarray:
        return self.node_voltages[node]

    def current(self, source: str) -> np.ndarray:
        return self.source_currents[source]

    def to_csv(self, path) -> None:
        """Waveform CSV: time, node voltages, source currents, 9 significant digits."""
        names = list(self.node_voltages)
        srcs = list(self.source_currents)
        cols = [self.times] + [self.node_voltages[n] for n in names] \
            + [self.source_currents[s] for s in srcs]
        header = ",".join(["time"] + names + [f"I({s})" for s in srcs])
        data = np.column_stack(cols)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            fmt = ",".join(["%.8e"] * data.shape[1])
            for row in data:
                fh.write(fmt % tuple(row) + "\n")


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _lu_solve(a, rhs):
    """In-place dense LU with partial pivoting; solution lands in rhs.

    Returns -1 on success, else the column where no usable pivot exists.
    """
    n = a.shape[0]
    for col in range(n):
        p = col
        big = abs(a[col, col])
        for r in range(col + 1, n):
            v = abs(a[r, col])
            if v > big:
                big = v
                p = r
        if big < 1e-300:
            return col
        if p != col:
            for c in range(n):
                tmp = a[col, c]
                a[col, c] = a[p, c]
                a[p, c] = tmp
            tmp = rhs[col]
            rhs[col] = rhs[p]
            rhs[p] = tmp
        inv = 1.0 / a[col, col]
        for r in range(col + 1, n):
            f = a[r, col] * inv
            if f != 0.0:
                a[r, col] = f
                for c in range(col + 1, n):
                    a[r, c] -= f * a[col, c]
                rhs[r] -= f * rhs[col]
    for r in range(n - 1, -1, -1):
        acc = rhs[r]
        for c in range(r + 1, n):
            acc -= a[r, c] * rhs[c]
        rhs[r] = acc / a[r, r]
    return -1


@njit(cache=True)
def _fill_f(x, vext, a_mat, b, f, isc, relems, celems, vsrc, mos, vt, nn):
    """Residual F = A x - b + nonlinear currents, plus per-node current scale."""
    n = x.shape[0]
    for i in range(nn):
        vext[i] = x[i]
    vext[nn] = 0.0
    tmp = np.dot(a_mat, x)
    for i in range(n):
        f[i] = tmp[i] - b[i]
        isc[i] = 0.0
    r_a, r_b, r_g = relems
    for k in range(r_a.shape[0]):
        cur = abs(r_g[k] * (vext[r_a[k]] - vext[r_b[k]]))
        if r_a[k] < nn and cur > isc[r_a[k]]:
            isc[r_a[k]] = cur
        if r_b[k] < nn and cur > isc[r_b[k]]:
            isc[r_b[k]] = cur
    c_a, c_b, c_g, c_ih = celems
    for k in range(c_a.shape[0]):
        cur = abs(c_g[k] * (vext[c_a[k]] - vext[c_b[k]]) - c_ih[k])
        if c_a[k] < nn and cur > isc[c_a[k]]:
            isc[c_a[k]] = cur
        if c_b[k] < nn and cur > isc[c_b[k]]:
            isc[c_b[k]] = cur
    v_p, v_m, v_row = vsrc
    for k in range(v_p.shape[0]):
        cur = abs(x[v_row[k]])
        if v_p[k] < nn and cur > isc[v_p[k]]:
            isc[v_p[k]] = cur
        if v_m[k] < nn and cur > isc[v_m[k]]:
            isc[v_m[k]] = cur
    m_d, m_g, m_s, m_sign, m_vth, m_kwl, m_lam, m_nsubvt, m_i0wl = mos
    for k in range(m_d.shape[0]):
        ids, _, _, _ = _terminal_eval(m_sign[k], vext[m_d[k]], vext[m_g[k]],
                                      vext[m_s[k]], m_vth[k], m_kwl[k],
                                      m_lam[k], m_nsubvt[k], m_i0wl[k], vt)
        cur = abs(ids)
        if m_d[k] < nn:
            f[m_d[k]] += ids
            if cur > isc[m_d[k]]:
                isc[m_d[k]] = cur
        if m_s[k] < nn:
            f[m_s[k]] -= ids
            if cur > isc[m_s[k]]:
                isc[m_s[k]] = cur


@njit(cache=True)
def _fill_j(x, vext, a_mat, jac, mos, vt, nn):
    n = x.shape[0]
    for i in range(nn):
        vext[i] = x[i]
    vext[nn] = 0.0
    for i in range(n):
        for j in range(n):
            jac[i, j] = a_mat[i, j]
    m_d, m_g, m_s, m_sign, m_vth, m_kwl, m_lam, m_nsubvt, m_i0wl = mos
    for k in range(m_d.shape[0]):
        _, dd, dg, ds = _terminal_eval(m_sign[k], vext[m_d[k]], vext[m_g[k]],
                                       vext[m_s[k]], m_vth[k], m_kwl[k],
                                       m_lam[k], m_nsubvt[k], m_i0wl[k], vt)
        d = m_d[k]
        g = m_g[k]
        s = m_s[k]
        if d < nn:
            jac[d, d] += dd
            if g < nn:
                jac[d, g] += dg
            if s < nn:
                jac[d, s] += ds
        if s < nn:
            jac[s, s] -= ds
            if g < nn:
                jac[s, g] -= dg
            if d < nn:
                jac[s, d] -= dd


@njit(cache=True)
def _norm2(v):
    acc = 0.0
    for i in range(v.shape[0]):
        acc += v[i] * v[i]
    return math.sqrt(acc)


@njit(cache=True)
def _newton(x, a_mat, b, relems, celems, vsrc, mos, vt, nn,
            abstol, reltol, vntol, max_iter):
    """Damped Newton on F(x) = 0.

    Returns the iteration count on convergence, -1 if max_iter was
    exhausted, or -(2 + column) when the Jacobian went singular.
    """
    n = x.shape[0]
    vext = np.empty(nn + 1)
    f = np.empty(n)
    ft = np.empty(n)
    isc = np.empty(n)
    isct = np.empty(n)
    jac = np.empty((n, n))
    xt = np.empty(n)
    dx = np.empty(n)
    _fill_f(x, vext, a_mat, b, f, isc, relems, celems, vsrc, mos, vt, nn)
    nf = _norm2(f)
    for it in range(max_iter):
        _fill_j(x, vext, a_mat, jac, mos, vt, nn)
        for i in range(n):
            dx[i] = -f[i]
        bad = _lu_solve(jac, dx)
        if bad >= 0:
            return -(2 + bad)
        alpha = 1.0
        for i in range(n):
            xt[i] = x[i] + dx[i]
        _fill_f(xt, vext, a_mat, b, ft, isct, relems, celems, vsrc, mos, vt, nn)
        nft = _norm2(ft)
        while nft >= nf and nft > 0.0 and alpha > 1e-3:
            alpha *= 0.5
            for i in range(n):
                xt[i] = x[i] + alpha * dx[i]
            _fill_f(xt, vext, a_mat, b, ft, isct, relems, celems, vsrc, mos, vt, nn)
            nft = _norm2(ft)
        conv = True
        for i in range(nn):
            if abs(alpha * dx[i]) >= vntol + reltol * abs(xt[i]):
                conv = False
                break
        if conv:
            for i in range(nn):
                if abs(ft[i]) >= abstol + reltol * isct[i]:
                    conv = False
                    break
        if conv:
            for i in range(nn, n):
                if abs(ft[i]) >= vntol:
                    conv = False
                    break
        for i in range(n):
            x[i] = xt[i]
            f[i] = ft[i]
        nf = nft
        if conv:
            return it + 1
    return -1


@njit(cache=True)
def _tran_loop(big_x, svals, a_mat, relems, celems, vsrc, mos, vt, nn,
               abstol, reltol, vntol, max_iter, cvals, ic, trap, start):
    """March fixed steps from sample `start`; big_x[k] holds each solution.

    Returns (next_sample, status): status 0 done, 1 newton failure at that
    sample (caller decides on sub-stepping), <= -2 singular column code.
    """
    n = big_x.shape[1]
    c_a, c_b, c_g, c_ih = celems
    v_p, v_m, v_row = vsrc
    nsteps = big_x.shape[0] - 1
    b = np.empty(n)
    x = big_x[start - 1].copy()
    for k in range(start, nsteps + 1):
        for i in range(n):
            b[i] = 0.0
        for j in range(v_row.shape[0]):
            b[v_row[j]] = svals[k, j]
        for m in range(c_a.shape[0]):
            va = x[c_a[m]] if c_a[m] < nn else 0.0
            vb = x[c_b[m]] if c_b[m] < nn else 0.0
            ih = c_g[m] * (va - vb)
            if trap:
                ih += ic[m]
            c_ih[m] = ih
            if c_a[m] < nn:
                b[c_a[m]] += ih
            if c_b[m] < nn:
                b[c_b[m]] -= ih
        status = _newton(x, a_mat, b, relems, celems, vsrc, mos, vt, nn,
                         abstol, reltol, vntol, max_iter)
        if status < 0:
            if status == -1:
                return k, 1
            return k, status
        for m in range(c_a.shape[0]):
            va = x[c_a[m]] if c_a[m] < nn else 0.0
            vb = x[c_b[m]] if c_b[m] < nn else 0.0
            ic[m] = c_g[m] * (va - vb) - c_ih[m]
        for i in range(n):
            big_x[k, i] = x[i]
    return nsteps + 1, 0


# ---------------------------------------------------------------------------
# circuit compilation


class _Compiled:
    """Circuit flattened to index/parameter arrays for the kernels."""

    def __init__(self, circuit: Circuit, cfg: SimConfig):
        self.circuit = circuit
        self.cfg = cfg
        self.node_names = [n for n in circuit.nodes if n != GROUND]
        self.nn = len(self.node_names)
        index = {n: i for i, n in enumerate(self.node_names)}
        index[GROUND] = self.nn  # sentinel: held at 0 V in the gather buffer
        self.index = index

        res_a, res_b, res_g = [], [], []
        cap_a, cap_b, cap_c = [], [], []
        self.sources: list[VSource] = []
        src_p, src_m = [], []
        mos_rows = []
        vt = thermal_voltage(cfg.temp)
        for dev in circuit.devices:
            if isinstance(dev, Resistor):
                res_a.append(index[dev.n1])
                res_b.append(index[dev.n2])
                res_g.append(1.0 / dev.value)
            elif isinstance(dev, Capacitor):
                cap_a.append(index[dev.n1])
                cap_b.append(index[dev.n2])
                cap_c.append(dev.value)
            elif isinstance(dev, VSource):
                src_p.append(index[dev.p])
                src_m.append(index[dev.m])
                self.sources.append(dev)
            else:
                card = circuit.models[dev.model]
                sign = 1.0 if card.polarity == "n" else -1.0
                mos_rows.append((index[dev.d], index[dev.g], index[dev.s],
                                 sign, vth_at(card, cfg.temp),
                                 kp_at(card, cfg.temp) * dev.w / dev.l,
                                 card.lam, card.n_sub * vt,
                                 card.i0 * dev.w / dev.l))
                cg, cd, cs = mos_caps(card, dev.w)
                for node, c in ((dev.g, cg), (dev.d, cd), (dev.s, cs)):
                    if c > 0:
                        cap_a.append(index[node])
                        cap_b.append(self.nn)
                        cap_c.append(c)
        for i in range(self.nn):  # cmin from every node to ground
            cap_a.append(i)
            cap_b.append(self.nn)
            cap_c.append(cfg.cmin)

        self.nb = len(self.sources)
        self.n = self.nn + self.nb
        self.vt = vt
        self.relems = (np.array(res_a, dtype=np.int64),
                       np.array(res_b, dtype=np.int64),
                       np.array(res_g, dtype=np.float64))
        self.cap_a = np.array(cap_a, dtype=np.int64)
        self.cap_b = np.array(cap_b, dtype=np.int64)
        self.cap_c = np.array(cap_c, dtype=np.float64)
        self.vsrc = (np.array(src_p, dtype=np.int64),
                     np.array(src_m, dtype=np.int64),
                     np.arange(self.nn, self.n, dtype=np.int64))
        cols = list(zip(*mos_rows)) if mos_rows else [[]] * 9
        self.mos = (np.array(cols[0], dtype=np.int64),
                    np.array(cols[1], dtype=np.int64),
                    np.array(cols[2], dtype=np.int64),
                    np.array(cols[3], dtype=np.float64),
                    np.array(cols[4], dtype=np.float64),
                    np.array(cols[5], dtype=np.float64),
                    np.array(cols[6], dtype=np.float64),
                    np.array(cols[7], dtype=np.float64),
                    np.array(cols[8], dtype=np.float64))

    def linear_matrix(self, cap_g: np.ndarray | None = None) -> np.ndarray:
        """Constant MNA matrix: resistors, gmin, source rows, cap companions."""
        n = self.n
        nn = self.nn
        a = np.zeros((n, n))
        r_a, r_b, r_g = self.relems
        for k in range(len(r_g)):
            ia, ib, g = r_a[k], r_b[k], r_g[k]
            if ia < nn:
                a[ia, ia] += g
                if ib < nn:
                    a[ia, ib] -= g
            if ib < nn:
                a[ib, ib] += g
                if ia < nn:
                    a[ib, ia] -= g
        for i in range(nn):
            a[i, i] += self.cfg.gmin
        v_p, v_m, v_row = self.vsrc
        for k in range(self.nb):
            row = v_row[k]
            if v_p[k] < nn:
                a[v_p[k], row] += 1.0
                a[row, v_p[k]] += 1.0
            if v_m[k] < nn:
                a[v_m[k], row] -= 1.0
                a[row, v_m[k]] -= 1.0
        if cap_g is not None:
            for k in range(len(cap_g)):
                ia, ib, g = self.cap_a[k], self.cap_b[k], cap_g[k]
                if ia < nn:
                    a[ia, ia] += g
                    if ib < nn:
                        a[ia, ib] -= g
                if ib < nn:
                    a[ib, ib] += g
                    if ia < nn:
                        a[ib, ia] -= g
        return a

    def celems(self, cap_g: np.ndarray, c_ih: np.ndarray):
        return (self.cap_a, self.cap_b, cap_g, c_ih)

    def source_values(self, t: float) -> np.ndarray:
        return np.array([eval_waveform(s.waveform, t) for s in self.sources])

    def source_grid(self, times: np.ndarray) -> np.ndarray:
        if not self.sources:
            return np.zeros((len(times), 0))
        return np.column_stack([waveform_samples(s.waveform, times)
                                for s in self.sources])

    def unknown_name(self, i: int) -> str:
        if i < self.nn:
            return self.node_names[i]
        return f"branch I({self.sources[i - self.nn].name})"


def _run_newton(comp: _Compiled, x, a_mat, b, celems, max_iter=None):
    cfg = comp.cfg
    status = _newton(x, a_mat, b, comp.relems, celems, comp.vsrc, comp.mos,
                     comp.vt, comp.nn, cfg.abstol, cfg.reltol, cfg.vntol,
                     max_iter or cfg.max_newton)
    if status <= -2:
        raise SingularMatrixError(
            comp.unknown_name(-(status + 2)),
            f"singular MNA matrix at {comp.unknown_name(-(status + 2))}")
    return status > 0


def _pseudo_transient_op(comp: _Compiled, b: np.ndarray) -> np.ndarray | None:
    """Last-resort operating point via a backward-Euler power-on march.

    Bistable loops defeat gmin continuation: from a flat start the ladder
    tracks the symmetric branch straight onto the metastable ridge, where
    the Jacobian turns near singular.  Marching the real caps up from a
    discharged state follows the power-on trajectory instead, which rolls
    off the ridge to a stable equilibrium that seeds the plain solve.
    """
    cfg = comp.cfg
    ncap = len(comp.cap_c)
    if ncap == 0:
        return None
    c_a, c_b = comp.cap_a, comp.cap_b
    cap_g = np.empty(ncap)
    c_ih = np.empty(ncap)
    x = np.zeros(comp.n)
    x_old = np.empty(comp.n)
    h = cfg.tstep
    h_max = cfg.tstep * 1e6
    settled = False
    for _ in range(400):
        x_old[:] = x
        np.divide(comp.cap_c, h, out=cap_g)
        bt = b.copy()
        for m in range(ncap):
            va = x[c_a[m]] if c_a[m] < comp.nn else 0.0
            vb = x[c_b[m]] if c_b[m] < comp.nn else 0.0
            c_ih[m] = cap_g[m] * (va - vb)
            if c_a[m] < comp.nn:
                bt[c_a[m]] += c_ih[m]
            if c_b[m] < comp.nn:
                bt[c_b[m]] -= c_ih[m]
        try:
            ok = _run_newton(comp, x, comp.linear_matrix(cap_g), bt,
                             (c_a, c_b, cap_g, c_ih))
        except SingularMatrixError:
            ok = False
        if not ok:
            x[:] = x_old
            h *= 0.25
            if h < cfg.tstep * 1e-3:
                return None
            continue
        if h >= h_max and np.max(np.abs(x[:comp.nn] - x_old[:comp.nn])) < cfg.vntol:
            settled = True
            break
        h = min(h * 2.0, h_max)
    if not settled:
        return None
    no_caps = (np.empty(0, np.int64), np.empty(0, np.int64),
               np.empty(0, np.float64), np.empty(0, np.float64))
    try:
        if _run_newton(comp, x, comp.linear_matrix(), b, no_caps):
            return x
    except SingularMatrixError:
        pass
    return None


def _solve_dc(comp: _Compiled, t: float = 0.0) -> np.ndarray:
    """Operating point: plain Newton, then gmin stepping, then pseudo-transient."""
    cfg = comp.cfg
    b = np.zeros(comp.n)
    b[comp.nn:] = comp.source_values(t)
    no_caps = (np.empty(0, np.int64), np.empty(0, np.int64),
               np.empty(0, np.float64), np.empty(0, np.float64))
    x = np.zeros(comp.n)
    if _run_newton(comp, x, comp.linear_matrix(), b, no_caps):
        return x
    # gmin stepping: a million times up, then a decade down per rung,
    # warm-started.  Long gain chains can stall the standard ladder, so a
    # failed rung restarts the whole ladder from a stiffer top.
    top = cfg.gmin * 1e6
    while top <= 1.0:
        x = np.zeros(comp.n)
        g = top
        while True:
            a = comp.linear_matrix()
            for i in range(comp.nn):
                a[i, i] += g - cfg.gmin
            if not _run_newton(comp, x, a, b, no_caps):
                break
            if g <= cfg.gmin:
                return x
            g = max(g / 10.0, cfg.gmin)
        top *= 100.0
    x = _pseudo_transient_op(comp, b)
    if x is not None:
        return x
    raise NonConvergenceError(
        t, "operating point failed to converge (gmin stepping exhausted)")


def dc_operating_point(circuit: Circuit, cfg: SimConfig | None = None):
    """Solve the DC operating point at t = 0 (capacitors open).

    Returns (node_voltages, source_currents) dictionaries; source current
    is positive when flowing out of the + terminal into the circuit.
    """
    cfg = cfg or SimConfig()
    comp = _Compiled(circuit, cfg)
    x = _solve_dc(comp)
    volts = {name: x[i] for i, name in enumerate(comp.node_names)}
    currents = {s.name: -x[comp.nn + j] for j, s in enumerate(comp.sources)}
    return volts, currents


def transient(circuit: Circuit, cfg: SimConfig) -> Trace:
    """Fixed-step transient from the t = 0 operating point."""
    if cfg.tstop is None:
        raise ValueError("SimConfig.tstop is required for transient analysis")
    comp = _Compiled(circuit, cfg)
    h = cfg.tstep
    nsteps = int(round(cfg.tstop / h))
    times = np.arange(nsteps + 1) * h
    svals = comp.source_grid(times)

    kmult = 2.0 if cfg.integrator == "trapezoidal" else 1.0
    cap_g = kmult * comp.cap_c / h
    c_ih = np.zeros(len(comp.cap_c))
    a_tr = comp.linear_matrix(cap_g)
    ic = np.zeros(len(comp.cap_c))  # capacitor currents, zero at the DC point

    big_x = np.empty((nsteps + 1, comp.n))
    big_x[0] = _solve_dc(comp)

    trap = cfg.integrator == "trapezoidal"
    celems = comp.celems(cap_g, c_ih)
    sub_assets = None
    start = 1
    retried = -1
    while True:
        k, status = _tran_loop(big_x, svals, a_tr, comp.relems, celems,
                               comp.vsrc, comp.mos, comp.vt, comp.nn,
                               cfg.abstol, cfg.reltol, cfg.vntol,
                               cfg.max_newton, comp.cap_c, ic, trap, start)
        if status == 0:
            break
        if status <= -2:
            raise SingularMatrixError(
                comp.unknown_name(-(status + 2)),
                f"singular MNA matrix at t={k * h:g}s "
                f"({comp.unknown_name(-(status + 2))})")
        if k == retried:
            raise NonConvergenceError(
                k * h, f"transient failed to converge at t={k * h:g}s")
        # retry this step once as four h/4 sub-steps
        retried = k
        if sub_assets is None:
            hq = h / 4.0
            sub_assets = (kmult * comp.cap_c / hq,
                          comp.linear_matrix(kmult * comp.cap_c / hq))
        cap_g_q, a_q = sub_assets
        x = big_x[k - 1].copy()
        ok = True
        for q in range(1, 5):
            tq = (k - 1) * h + q * (h / 4.0)
            b = np.zeros(comp.n)
            b[comp.nn:] = comp.source_values(tq)
            vext = np.append(x[:comp.nn], 0.0)  # index nn is ground
            vab = vext[comp.cap_a] - vext[comp.cap_b]
            ih = cap_g_q * vab + (ic if trap else 0.0)
            grounded = comp.cap_a < comp.nn
            np.add.at(b, comp.cap_a[grounded], ih[grounded])
            grounded = comp.cap_b < comp.nn
            np.subtract.at(b, comp.cap_b[grounded], ih[grounded])
            c_ih[:] = ih
            if not _run_newton(comp, x, a_q, b, comp.celems(cap_g_q, c_ih)):
                ok = False
                break
            vext = np.append(x[:comp.nn], 0.0)
            vab = vext[comp.cap_a] - vext[comp.cap_b]
            ic[:] = cap_g_q * vab - ih
        if not ok:
            raise NonConvergenceError(
                k * h, f"transient failed to converge at t={k * h:g}s")
        big_x[k] = x
        start = k + 1
        if start > nsteps:
            break

    volts = {name: big_x[:, i] for i, name in enumerate(comp.node_names)}
    currents = {s.name: -big_x[:, comp.nn + j]
                for j, s in enumerate(comp.sources)}
    return Trace(times, volts, currents, h)
