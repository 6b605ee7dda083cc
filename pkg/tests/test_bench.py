"""CLI tests: argument validation, exit codes, and output artifacts.

Everything calls ``main(argv)`` in process.  The slow subcommands (run, char,
sweep) each get one smoke test at a coarsened time step; reproducibility and
full-grid sweeps belong to the acceptance suite.
"""

import json
import shutil
import subprocess

import pytest

from cgbench.bench import UsageError, _resolve_scheme, main
from cgbench.metrics import REPORT_COLUMNS

RC_NETLIST = """rc lowpass
V1 in 0 PULSE(0 1 0 1n 1n 49n 100n)
R1 in out 1k
C1 out 0 1p
.tran 100p 10n
.end
"""


# ---------------------------------------------------------------------------
# argument handling


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "sweep" in capsys.readouterr().out


def test_missing_subcommand_exits_one(capsys):
    assert main([]) == 1
    capsys.readouterr()


def test_unknown_scheme_exits_one(capsys):
    assert main(["run", "--scheme", "bogus"]) == 1
    err = capsys.readouterr().err
    assert "unknown scheme 'bogus'" in err
    assert "no_gating" in err              # diagnostic lists the choices


def test_scheme_aliases():
    assert _resolve_scheme("proposed") == "proposed_cg"
    assert _resolve_scheme("nc2mos") == "nc2mos_cg"
    assert _resolve_scheme("lb") == "lb_cg"
    assert _resolve_scheme("no_gating") == "no_gating"
    with pytest.raises(UsageError):
        _resolve_scheme("lbcg")


def test_sweep_param_validation(capsys):
    assert main(["sweep", "--param", "freq"]) == 1
    assert main(["sweep", "--param", "vdd", "--step", "-0.1"]) == 1
    assert main(["sweep", "--param", "vdd", "--from", "1.2", "--to", "1.0"]) == 1
    capsys.readouterr()


def test_sweep_grid_needs_three_points(capsys):
    rc = main(["sweep", "--param", "vdd",
               "--from", "1.0", "--to", "1.05", "--step", "0.1"])
    assert rc == 1
    assert "at least 3 points" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sim


def test_sim_netlist_roundtrip(tmp_path, capsys):
    nl = tmp_path / "rc.cir"
    nl.write_text(RC_NETLIST)
    out = tmp_path / "rc.csv"
    assert main(["sim", str(nl), "--out", str(out)]) == 0
    capsys.readouterr()

    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "time"
    assert "out" in header and "I(V1)" in header
    assert len(lines) - 1 == 101           # .tran 100p 10n plus the t=0 row

    man = json.loads((tmp_path / "rc.csv.manifest.json").read_text())
    assert set(man) == {"tool_version", "model_card_hash", "sim_config",
                        "scheme_specs", "timestamp", "outputs"}
    assert man["outputs"] == [str(out)]
    assert man["sim_config"]["tstep"] == pytest.approx(100e-12)


def test_sim_tran_flag_overrides_card(tmp_path, capsys):
    nl = tmp_path / "rc.cir"
    nl.write_text(RC_NETLIST)
    out = tmp_path / "short.csv"
    assert main(["sim", str(nl), "--tran", "50p", "2n",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    assert len(out.read_text().splitlines()) - 1 == 41


def test_sim_missing_file_exits_one(tmp_path, capsys):
    assert main(["sim", str(tmp_path / "nope.cir")]) == 1
    assert "cannot read netlist" in capsys.readouterr().err


def test_sim_malformed_netlist_reports_line(tmp_path, capsys):
    nl = tmp_path / "bad.cir"
    nl.write_text("t\nR1 a 0\n.end\n")
    assert main(["sim", str(nl)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_sim_singular_circuit_exits_two(tmp_path, capsys):
    # two ideal sources forcing the same node to different voltages
    nl = tmp_path / "conflict.cir"
    nl.write_text("t\nV1 a 0 DC 1\nV2 a 0 DC 2\nR1 a 0 1k\n.tran 1p 10p\n.end\n")
    assert main(["sim", str(nl)]) == 2
    assert "simulation failure" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# run / char / sweep smoke (coarse tstep keeps these to a few seconds each)


def test_run_appends_rows_and_manifest(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    argv = ["run", "--scheme", "proposed", "--tstep", "2p", "--out", str(out)]
    assert main(argv) == 0
    assert main(argv) == 0                 # second call appends, one header
    capsys.readouterr()

    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert len(lines) == 3
    assert lines[1] == lines[2]            # deterministic re-run
    cells = lines[1].split(",")
    assert len(cells) == len(REPORT_COLUMNS) == 13
    assert cells[0] == "proposed_cg"
    assert float(cells[1]) == pytest.approx(1.1)
    assert float(cells[4]) > 0             # avg power in uW

    man = json.loads((tmp_path / "rows.csv.manifest.json").read_text())
    assert man["scheme_specs"][0]["scheme"] == "proposed_cg"
    assert len(man["model_card_hash"]) == 64


def test_char_schema(tmp_path, capsys):
    out = tmp_path / "char.csv"
    rc = main(["char", "--scheme", "no_gating", "--tstep", "2p",
               "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert stdout.startswith("scheme,setup_ps,hold_ps\n")
    assert out.read_text() == stdout
    row = stdout.splitlines()[1].split(",")
    assert row[0] == "no_gating"
    float(row[1]), float(row[2])           # both parse as numbers


def test_sweep_small_grid_artifacts(tmp_path, capsys):
    out = tmp_path / "sw.csv"
    rc = main(["sweep", "--param", "vdd", "--from", "0.9", "--to", "1.1",
               "--step", "0.1", "--scheme", "proposed", "--tstep", "2p",
               "--out", str(out)])
    assert rc == 0
    capsys.readouterr()

    lines = out.read_text().splitlines()
    assert len(lines) == 4                 # header + 3 grid points
    vdds = [float(l.split(",")[1]) for l in lines[1:]]
    assert vdds == sorted(vdds) == pytest.approx([0.9, 1.0, 1.1])

    man = json.loads((tmp_path / "sw.csv.manifest.json").read_text())
    charts = [p for p in man["outputs"] if p.endswith(".svg")]
    assert len(charts) == 3
    for p in charts:
        assert (tmp_path / p.split("/")[-1]).exists()


def test_console_script_help():
    exe = shutil.which("cgbench")
    assert exe, "console script not installed"
    res = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "compare" in res.stdout
