import io
import json
import subprocess
import sys

import pytest

from walkohm import build_network, effective_resistance
from walkohm.cli import run

FOUR_NODE = "# resistor example\na c 1\na d 1\nb c 1\nb d 2\nc d 2\n"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    net = tmp_path / "ex31.txt"
    net.write_text(FOUR_NODE, encoding="utf-8")
    madison = tmp_path / "madison.txt"
    madison.write_text("".join(f"{i} {i + 1} 1\n" for i in range(5)), encoding="utf-8")
    bnd = tmp_path / "bnd.txt"
    bnd.write_text("0 0\n5 1\n", encoding="utf-8")
    script = tmp_path / "edits.txt"
    script.write_text("cut c d\nbridge c d 3\n", encoding="utf-8")
    return {"net": str(net), "madison": str(madison), "bnd": str(bnd), "script": str(script),
            "dir": tmp_path}


def test_resistance_example(files):
    code, out, _ = call("resistance", "--network", files["net"], "--source", "a", "--sink", "b")
    assert code == 0
    rep = json.loads(out)
    assert rep["r_eff"] == pytest.approx(16 / 19, abs=1e-13)
    assert rep["p_esc"] == pytest.approx(19 / 32, abs=1e-13)
    assert {"voltages", "currents", "c_eff", "energy", "config"} <= rep.keys()
    cd = [c for c in rep["currents"] if (c["from"], c["to"]) == ("c", "d")][0]
    assert cd["amps"] == pytest.approx(1 / 8)


def test_resistance_by_reduction(files, tmp_path):
    cube = tmp_path / "pair.txt"
    cube.write_text("a m 1\nm b 1\na b 1\n", encoding="utf-8")
    code, out, _ = call("resistance", "--network", str(cube), "--source", "a", "--sink", "b",
                        "--method", "reduce")
    assert code == 0
    assert json.loads(out)["r_eff"] == pytest.approx(2 / 3)


def test_classical_example():
    code, out, _ = call("classical", "--dim", "3", "--model", "sc", "--emit", "u", "--nmax", "1000")
    assert code == 0
    assert json.loads(out)["u"] == pytest.approx(.340537329544, abs=1e-9)


def test_solve_example(files):
    for method in ("exact", "relax", "chain"):
        code, out, _ = call("solve", "--network", files["madison"], "--boundary", files["bnd"],
                            "--method", method)
        assert code == 0
        vals = json.loads(out)["values"]
        for x in range(6):
            assert vals[str(x)] == pytest.approx(x / 5, abs=1e-9)


def test_monte_carlo_echoes_seed(files):
    code, out, _ = call("solve", "--network", files["madison"], "--boundary", files["bnd"],
                        "--method", "mc", "--walks", "2000", "--seed", "9")
    rep = json.loads(out)
    assert code == 0 and rep["config"]["seed"] == 9
    assert rep["values"]["2"] == pytest.approx(0.4, abs=0.05)


def test_other_commands(files):
    code, out, _ = call("chain", "--network", files["madison"], "--absorb", "0,5", "--emit", "t")
    assert code == 0
    assert json.loads(out)["t"] == pytest.approx([x * (5 - x) for x in range(1, 5)])  # gambler's ruin
    code, out, _ = call("edit", "--network", files["net"], "--script", files["script"],
                        "--source", "a", "--sink", "b")
    assert code == 0
    rep = json.loads(out)
    assert rep["r_eff_before"] == pytest.approx(16 / 19)
    swapped = build_network([("a", "c", 1), ("a", "d", 1), ("b", "c", 1), ("b", "d", 2), ("c", "d", 3)])
    assert rep["r_eff_after"] == pytest.approx(effective_resistance(swapped, "a", "b"))
    assert [e["holds"] for e in rep["edits"]] == [True, True]
    code, out, _ = call("tree", "--kind", "binary", "--levels", "10")
    assert code == 0 and json.loads(out)["verdict"] == "Transient"
    code, out, _ = call("lattice", "--dim", "2", "--method", "short", "--rmax", "5")
    assert code == 0 and json.loads(out)["verdict"] == "Recurrent"
    code, out, _ = call("flow", "--dim", "3", "--nmax", "10", "--rcheck", "3")
    assert code == 0
    for row in json.loads(out)["certificate_checks"]:
        assert row["flow_energy"] >= row["r_eff"]


def test_deterministic_output_is_byte_identical(files):
    argv = ("solve", "--network", files["madison"], "--boundary", files["bnd"], "--method", "mc",
            "--walks", "1500", "--seed", "4", "--deterministic")
    first, second = call(*argv), call(*argv)
    assert first == second
    assert "timestamp" not in json.loads(first[1])
    threaded = call(*argv, "--threads", "3")
    one = json.loads(first[1])
    three = json.loads(threaded[1])
    assert one["values"] == three["values"]
    stamped = json.loads(call(*argv[:-1])[1])
    assert "timestamp" in stamped


def _scalars(obj, prefix=""):
    for k, v in obj.items():
        if isinstance(v, dict):
            yield from _scalars(v, prefix + k + ".")
        elif isinstance(v, float):
            yield prefix + k, v


def test_text_and_json_agree(files):
    base = ("resistance", "--network", files["net"], "--source", "a", "--sink", "b", "--deterministic")
    rep = json.loads(call(*base)[1])
    text = call(*base, "--format", "text")[1]
    parsed = {}
    stack = []
    for line in text.splitlines():
        depth = (len(line) - len(line.lstrip())) // 2
        key, _, val = line.strip().partition(": ")
        stack = stack[:depth]
        if val:
            parsed[".".join(stack + [key])] = val
        else:
            stack.append(key.rstrip(":"))
    checked = 0
    for key, v in _scalars(rep):
        if key.startswith("config."):
            continue
        assert float(parsed[key]) == pytest.approx(float(f"{v:.6g}"), rel=1e-12), key
        checked += 1
    assert checked >= 6


def test_exit_codes(files):
    code, _, err = call("resistance", "--network", files["net"], "--source", "a", "--sink", "zz")
    assert code == 1 and "UnknownVertex" in err
    code, _, err = call("resistance", "--network", files["net"], "--source", "a", "--sink", "a")
    assert code == 1 and "SameVertex" in err
    code, _, err = call("resistance", "--network", str(files["dir"] / "missing.txt"),
                        "--source", "a", "--sink", "b")
    assert code == 2 and "UsageError" in err
    assert call("nonsense")[0] == 2
    assert call("tree", "--kind", "oak")[0] == 2
    assert call("solve", "--network", files["net"])[0] == 2


def test_console_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "walkohm.cli", "tree", "--kind", "deg3", "--levels", "5",
                           "--format", "text", "--deterministic"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "verdict: Transient" in proc.stdout
