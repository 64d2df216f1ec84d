import json
import shutil
import subprocess

import pytest

from maskforge.cli import main
from maskforge.fixtures import FIG1_TEXT, FIG2_TEXT, NEGATION_TEXT, identity_gadget
from maskforge.netlist import dump, load
from maskforge.verify import verify_nlr


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in (("fig1", FIG1_TEXT), ("fig2", FIG2_TEXT), ("neg", NEGATION_TEXT)):
        p = tmp_path / f"{name}.mfc"
        p.write_text(text)
        out[name] = p
    out["id"] = tmp_path / "id.mfc"
    dump(identity_gadget(1), out["id"])
    return out


def test_verify_ok_and_json(files, tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["verify", "-n", "2", "-i", str(files["fig1"]), "--json", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["verdict"] == "ok" and data["order"] == 2
    assert "2-leakage-resilient" in capsys.readouterr().out


def test_verify_leak_exit_code(files, capsys):
    assert main(["verify", "--order", "2", "--input", str(files["neg"]), "--no-prune", "--json"]) == 1
    out = capsys.readouterr().out
    assert "leaks at order 2" in out
    assert '"witness"' in out


def test_verify_infeasible(files, tmp_path):
    conf = tmp_path / "cap.conf"
    conf.write_text("# tiny cap\ncap = 4\n")
    assert main(["verify", "-n", "2", "-i", str(files["fig1"]), "--no-prune", "--config", str(conf)]) == 2


def test_verify_random_free_needs_lenient(files, capsys):
    assert main(["verify", "-i", str(files["fig2"])]) == 3
    assert "--lenient" in capsys.readouterr().err
    assert main(["verify", "-i", str(files["fig2"]), "--lenient"]) == 1


def test_bad_input_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.mfc"
    bad.write_text("circuit x\n node\n")
    assert main(["verify", "-i", str(bad)]) == 3
    assert main(["verify", "-i", str(tmp_path / "missing.mfc")]) == 3
    assert main(["verify", "-n", "0", "-i", str(bad)]) == 3


def test_synth_writes_a_verified_circuit(files, tmp_path):
    out = tmp_path / "masked.mfc"
    assert main(["synth", "-n", "1", "-i", str(files["fig2"]), "-o", str(out), "--mono-timeout", "5"]) == 0
    assert verify_nlr(load(out), 1).ok


def test_synth_mono_single_output(tmp_path, capsys):
    src = tmp_path / "x.mfc"
    src.write_text("circuit x\n public p\n secret k\n node o = XOR k p\n output o\nend\n")
    report = tmp_path / "mono.json"
    assert main(["synth-mono", "-i", str(src), "--timeout", "10", "--json", str(report)]) == 0
    assert capsys.readouterr().out.startswith("circuit ")
    data = json.loads(report.read_text())
    assert data["status"] == "ok" and data["height"] == 2
    two = tmp_path / "two.mfc"
    two.write_text("circuit y\n secret a b\n node o = XOR a b\n output o b\nend\n")
    assert main(["synth-mono", "-i", str(two)]) == 3


def test_table_dump_and_safety(files, tmp_path, capsys):
    tsv = tmp_path / "neg.tsv"
    assert main(["table", "-i", str(files["neg"]), "--check-safe", "1", "1", "2", "--dump", str(tsv)]) == 0
    lines = tsv.read_text().splitlines()
    assert lines[0].split("\t") == ["a1", "a2", "a3", "a4", "a5", "a6", "count"]
    assert len(lines) == 9
    assert main(["table", "-i", str(files["neg"]), "--check-safe", "1", "2", "2"]) == 1


def test_table_needs_public_values(files):
    assert main(["table", "-i", str(files["fig1"])]) == 3


def test_compose_sequential_plan(files, tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"kind": "sequential", "first": ["id.mfc"], "second": "id.mfc"}))
    out = tmp_path / "chain.mfc"
    assert main(["compose", "--plan", str(plan), "-o", str(out)]) == 0
    assert verify_nlr(load(out), 1).ok
    plan.write_text(json.dumps({"kind": "diagonal"}))
    assert main(["compose", "--plan", str(plan)]) == 3


def test_bench_on_custom_suite(files, tmp_path):
    suite = tmp_path / "suite"
    suite.mkdir()
    shutil.copy(files["fig2"], suite / "fig2.mfc")
    out = tmp_path / "out"
    assert main(["bench", "--suite", str(suite), "--orders", "1", "--out", str(out), "--no-plots"]) == 0
    assert (out / "bench.json").exists() and not list(out.glob("*.png"))


def test_console_script_is_installed():
    exe = shutil.which("maskforge")
    if exe is None:
        pytest.skip("console script not on PATH")
    res = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "maskforge" in res.stdout
