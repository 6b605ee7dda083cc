"""Command-line characterization harness.

Subcommands:

* ``run``     - one scheme at one operating point, appended as a CSV row
* ``compare`` - all four schemes at defaults, with percentage reductions
* ``sweep``   - vdd or temperature sweep: long CSV plus SVG line charts
* ``char``    - setup/hold extraction only
* ``sim``     - escape hatch: simulate a netlist file, dump the trace

Every output file gets a sibling ``<name>.manifest.json`` recording the tool
version, model-card hash, and simulation settings; repeated invocations with
the same flags produce byte-identical CSVs (manifests differ in timestamp).

Exit codes: 0 success, 1 usage error, 2 simulation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .cglib import SCHEMES, SchemeSpec, bench_model_cards
from .engine import (NonConvergenceError, SimConfig, SingularMatrixError,
                     transient)
from .metrics import (REPORT_COLUMNS, MetricsError, _fmt, report, setup_hold)
from .netlist import NetlistError, TranSpec, parse_netlist, parse_number


class UsageError(ValueError):
    pass


_ALIASES = {
    "proposed": "proposed_cg",
    "nc2mos": "nc2mos_cg",
    "lb": "lb_cg",
}


def _resolve_scheme(name: str) -> str:
    full = _ALIASES.get(name, name)
    if full not in SCHEMES:
        raise UsageError(f"unknown scheme '{name}' (choose from "
                         f"{', '.join(SCHEMES)})")
    return full


def _resolve_schemes(arg: str | None) -> tuple[str, ...]:
    if arg is None:
        return SCHEMES
    return tuple(_resolve_scheme(s.strip()) for s in arg.split(","))


# ---------------------------------------------------------------------------
# manifests


def _card_hash() -> str:
    cards = bench_model_cards()
    blob = json.dumps({k: asdict(v) for k, v in sorted(cards.items())},
                      sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _spec_dict(s: SchemeSpec) -> dict:
    return {"scheme": s.scheme, "vdd": s.vdd, "f_clk": s.f_clk,
            "f_data": s.f_data, "edge": s.edge, "widths": dict(s.widths),
            "data_bits": None if s.data_bits is None else list(s.data_bits),
            "seed": s.seed, "temp": s.temp}


def _write_manifest(anchor: str, cfg: SimConfig, specs, outputs) -> None:
    doc = {
        "tool_version": __version__,
        "model_card_hash": _card_hash(),
        "sim_config": asdict(cfg),
        "scheme_specs": [_spec_dict(s) for s in specs],
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    path = Path(f"{anchor}.manifest.json")
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# shared condition plumbing


def _mk_spec(args, scheme: str, **overrides) -> SchemeSpec:
    kw = dict(vdd=args.vdd, f_clk=args.freq, temp=args.temp)
    if args.seed is not None:
        kw["seed"] = args.seed
    kw.update(overrides)
    try:
        return SchemeSpec(scheme, **kw)
    except ValueError as e:
        raise UsageError(str(e))


def _base_config(args) -> SimConfig:
    return SimConfig(tstep=args.tstep, temp=args.temp,
                     integrator=args.integrator)


def _append_row(path: str, row: str) -> None:
    p = Path(path)
    header = ",".join(REPORT_COLUMNS)
    if not p.exists() or p.stat().st_size == 0:
        p.write_text(header + "\n" + row + "\n")
    else:
        with p.open("a") as f:
            f.write(row + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    spec = _mk_spec(args, _resolve_scheme(args.scheme))
    rep = report(spec, tstep=args.tstep, integrator=args.integrator)
    out = args.out or "cgbench_run.csv"
    _append_row(out, rep.csv_row())
    _write_manifest(out, _base_config(args), [spec], [out])
    print(rep.csv_row())
    return 0


def cmd_compare(args) -> int:
    specs = [_mk_spec(args, sch) for sch in SCHEMES]
    reps = {s.scheme: report(s, tstep=args.tstep, integrator=args.integrator)
            for s in specs}
    prop = reps["proposed_cg"]

    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "compare.csv"
    txt_path = out_dir / "compare.txt"

    lines = [",".join(REPORT_COLUMNS) + ",avg_reduction_vs_proposed_pct"]
    for sch in SCHEMES:
        r = reps[sch]
        red = (r.avg_power - prop.avg_power) / r.avg_power * 100.0
        lines.append(r.csv_row() + "," + _fmt(red))
    csv_path.write_text("\n".join(lines) + "\n")

    hdr = (f"{'scheme':12s} {'avg_uW':>10s} {'static_uW':>10s} "
           f"{'delay_ps':>9s} {'setup_ps':>9s} {'hold_ps':>9s} "
           f"{'pdp_fJ':>9s} {'toggles':>8s} {'red_%':>7s}")
    rows = [hdr, "-" * len(hdr)]
    for sch in SCHEMES:
        r = reps[sch]
        red = (r.avg_power - prop.avg_power) / r.avg_power * 100.0
        rows.append(f"{sch:12s} {r.avg_power * 1e6:10.4f} "
                    f"{r.static_power * 1e6:10.6f} {r.delay * 1e12:9.2f} "
                    f"{r.setup * 1e12:9.2f} {r.hold * 1e12:9.2f} "
                    f"{r.pdp * 1e15:9.4f} {r.toggles_gated_clock:8d} "
                    f"{red:7.2f}")
    text = "\n".join(rows) + "\n"
    txt_path.write_text(text)
    print(text, end="")

    _write_manifest(str(csv_path), _base_config(args), specs,
                    [csv_path, txt_path])
    return 0


_SWEEP_DEFAULTS = {"vdd": (0.8, 1.3, 0.1), "temp": (248.0, 398.0, 25.0)}


def _sweep_grid(param: str, frm, to, step) -> list[float]:
    d_from, d_to, d_step = _SWEEP_DEFAULTS[param]
    lo = d_from if frm is None else frm
    hi = d_to if to is None else to
    st = d_step if step is None else step
    if st <= 0:
        raise UsageError("--step must be > 0")
    if not lo < hi:
        raise UsageError("--from must be < --to")
    npts = int(round((hi - lo) / st)) + 1
    grid = [lo + k * st for k in range(npts) if lo + k * st <= hi + st * 1e-9]
    if len(grid) < 3:
        raise UsageError("sweep grid needs at least 3 points")
    return grid


def _sweep_point(job) -> tuple[str, float, str]:
    scheme, param, value, kw, tstep, integrator = job
    kw = dict(kw)
    kw[param] = value
    spec = SchemeSpec(scheme, **kw)
    rep = report(spec, tstep=tstep, integrator=integrator)
    return scheme, value, rep.csv_row()


def cmd_sweep(args) -> int:
    if args.param not in _SWEEP_DEFAULTS:
        raise UsageError("--param must be 'vdd' or 'temp'")
    schemes = _resolve_schemes(args.scheme)
    grid = _sweep_grid(args.param, args.frm, args.to, args.step)

    kw = dict(vdd=args.vdd, f_clk=args.freq, temp=args.temp)
    if args.seed is not None:
        kw["seed"] = args.seed
    jobs = [(sch, "vdd" if args.param == "vdd" else "temp", v, kw,
             args.tstep, args.integrator)
            for sch in schemes for v in grid]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    results.sort(key=lambda r: (r[0], r[1]))

    out = args.out or f"sweep_{args.param}.csv"
    rows = [",".join(REPORT_COLUMNS)] + [r[2] for r in results]
    Path(out).write_text("\n".join(rows) + "\n")

    charts = _render_charts(out, args.param, results)
    _write_manifest(out, _base_config(args),
                    [SchemeSpec(s, **kw) for s in schemes],
                    [out] + charts)
    print(f"wrote {out} ({len(results)} rows) and {len(charts)} charts")
    return 0


# (column index in REPORT_COLUMNS, axis label, file tag)
_CHART_SPECS = (
    (4, "Average power (uW)", "avg_power"),
    (7, "Clk-to-Q delay (ps)", "delay"),
    (11, "PDP (fJ)", "pdp"),
)


def _render_charts(csv_path: str, param: str, results) -> list[str]:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "cgbench"
    import matplotlib.pyplot as plt

    stem = str(Path(csv_path).with_suffix(""))
    xlabel = "Vdd (V)" if param == "vdd" else "Temperature (K)"
    by_scheme: dict[str, list[tuple[float, list[str]]]] = {}
    for scheme, value, row in results:
        by_scheme.setdefault(scheme, []).append((value, row.split(",")))

    paths = []
    for col, ylabel, tag in _CHART_SPECS:
        fig, ax = plt.subplots(figsize=(6, 4))
        for scheme in sorted(by_scheme):
            pts = sorted(by_scheme[scheme])
            ax.plot([p[0] for p in pts], [float(p[1][col]) for p in pts],
                    marker="o", label=scheme)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = f"{stem}_{tag}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


def cmd_char(args) -> int:
    spec = _mk_spec(args, _resolve_scheme(args.scheme))
    res = max(0.1e-12, args.tstep / 10.0)
    su, hd = setup_hold(spec, resolution=res, tstep=args.tstep)
    lines = ["scheme,setup_ps,hold_ps",
             f"{spec.scheme},{_fmt(su * 1e12)},{_fmt(hd * 1e12)}"]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
        _write_manifest(args.out, _base_config(args), [spec], [args.out])
    return 0


def cmd_sim(args) -> int:
    try:
        text = Path(args.netlist).read_text()
    except OSError as e:
        raise UsageError(f"cannot read netlist: {e}")
    circuit = parse_netlist(text)
    if args.tran:
        tstep, tstop = (parse_number(t) for t in args.tran)
    else:
        trans = [a for a in circuit.analyses if isinstance(a, TranSpec)]
        if not trans:
            raise UsageError(
                "no --tran given and the netlist has no .tran card")
        tstep, tstop = trans[0].step, trans[0].stop
    cfg = SimConfig(tstep=tstep, tstop=tstop, temp=args.temp,
                    integrator=args.integrator)
    trace = transient(circuit, cfg)
    out = args.out or f"{Path(args.netlist).stem}_tran.csv"
    trace.to_csv(out)
    _write_manifest(out, cfg, [], [out])
    print(f"wrote {out} ({len(trace.times)} samples)")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_conditions(p: argparse.ArgumentParser) -> None:
    p.add_argument("--vdd", type=parse_number, default=1.1,
                   help="supply voltage, V (default 1.1)")
    p.add_argument("--freq", type=parse_number, default=5e9,
                   help="clock frequency, Hz (default 5e9)")
    p.add_argument("--temp", type=parse_number, default=300.0,
                   help="temperature, K (default 300)")
    p.add_argument("--seed", type=int, default=None,
                   help="7-bit LFSR seed for the data pattern")
    p.add_argument("--tstep", type=parse_number, default=1e-12,
                   help="transient step, s (default 1 ps)")
    p.add_argument("--integrator", default="trapezoidal",
                   choices=("trapezoidal", "backward_euler"))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cgbench",
        description="Clock-gating flip-flop characterization harness")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="characterize one scheme")
    run.add_argument("--scheme", required=True)
    run.add_argument("--out", help="CSV to append the row to")
    _add_conditions(run)
    run.set_defaults(func=cmd_run)

    comp = sub.add_parser("compare", help="all four schemes at one point")
    comp.add_argument("--out", help="output directory (default .)")
    _add_conditions(comp)
    comp.set_defaults(func=cmd_compare)

    sw = sub.add_parser("sweep", help="sweep vdd or temperature")
    sw.add_argument("--param", required=True,
                    help="swept parameter: vdd or temp")
    sw.add_argument("--from", dest="frm", type=parse_number, default=None)
    sw.add_argument("--to", type=parse_number, default=None)
    sw.add_argument("--step", type=parse_number, default=None)
    sw.add_argument("--scheme",
                    help="comma-separated subset (default: all four)")
    sw.add_argument("--out", help="long-format CSV path")
    sw.add_argument("--jobs", type=int, default=1,
                    help="parallel worker processes")
    _add_conditions(sw)
    sw.set_defaults(func=cmd_sweep)

    ch = sub.add_parser("char", help="setup/hold only")
    ch.add_argument("--scheme", required=True)
    ch.add_argument("--out", help="CSV output path")
    _add_conditions(ch)
    ch.set_defaults(func=cmd_char)

    sim = sub.add_parser("sim", help="simulate a netlist file")
    sim.add_argument("netlist", help="netlist file path")
    sim.add_argument("--tran", nargs=2, metavar=("TSTEP", "TSTOP"),
                     help="step and stop time (suffixes allowed, e.g. 1p 5n)")
    sim.add_argument("--out", help="trace CSV path")
    sim.add_argument("--temp", type=parse_number, default=300.0)
    sim.add_argument("--integrator", default="trapezoidal",
                     choices=("trapezoidal", "backward_euler"))
    sim.set_defaults(func=cmd_sim)
    return p


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        return args.func(args)
    except (UsageError, NetlistError) as e:
        print(f"cgbench: error: {e}", file=sys.stderr)
        return 1
    except (NonConvergenceError, SingularMatrixError, MetricsError) as e:
        print(f"cgbench: simulation failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
