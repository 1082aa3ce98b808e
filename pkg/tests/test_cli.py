import json
import os
import subprocess
import sys

import pytest

from rcc.cli import evaluate_expression, main
from rcc.channel import make_joint
from rcc.errors import ValidationError
from rcc.io import channel_to_obj, dumps, input_to_obj, load_input, parse_json, read_csv, write_text

import oracles


@pytest.fixture
def files(tmp_path, flip, uniform_input):
    write_text(tmp_path / "ch.json", dumps(channel_to_obj(flip)))
    write_text(tmp_path / "in.json", dumps(input_to_obj(uniform_input)))
    return tmp_path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExpressions:
    def test_grammar(self, flip, uniform_input):
        joint = make_joint(flip, uniform_input)
        assert evaluate_expression(joint, "I(X;Z|US)") == pytest.approx(1 - oracles.h2(0.25))
        assert evaluate_expression(joint, " H( Z | XS ) ") == pytest.approx(oracles.h2(0.25))
        assert evaluate_expression(joint, "I(XS;Y)") == pytest.approx(1.0)

    @pytest.mark.parametrize("expr", ["I(X;Y)+1", "I(X|Y)", "H(X;Y)", "I(W;Y)", "I(X;X)"])
    def test_rejects(self, flip, uniform_input, expr):
        with pytest.raises(ValidationError):
            evaluate_expression(make_joint(flip, uniform_input), expr)


class TestCommands:
    def test_classify(self, files, capsys):
        code, out, _ = run(["classify", files / "ch.json"], capsys)
        assert code == 0
        rep = parse_json(out)
        assert rep["reversely_degraded"] and rep["class_nl"] and not rep["degraded"]

    def test_mi(self, files, capsys):
        code, out, _ = run(["mi", files / "ch.json", files / "in.json", "--expr", "I(X;Z|US)"], capsys)
        assert code == 0
        assert float(out) == pytest.approx(0.188722, abs=1e-6)

    def test_region_trace(self, files, capsys):
        out_csv = files / "pts.csv"
        code, _, _ = run(["region", "--bound", "d-in-tilde", "--channel", files / "ch.json",
                          "--restarts", 4, "--grid", 2, "--r0-grid", 5, "--out", out_csv], capsys)
        assert code == 0
        header, rows = read_csv(out_csv.read_text())
        assert header == ["bound", "R0", "R1", "Re", "slack_min"]
        assert len(rows) == 5

    def test_region_point_and_witness(self, files, capsys, flip):
        wit = files / "wit.json"
        code, out, _ = run(["region", "--bound", "d-in-tilde", "--channel", files / "ch.json",
                            "--restarts", 4, "--point", "0,0.9,0.5", "--witness-out", wit], capsys)
        assert code == 0 and parse_json(out)["found"]
        load_input(wit, flip)

    def test_gaussian(self, files, capsys):
        out_csv = files / "g.csv"
        code, _, _ = run(["gaussian", "--region", "gd-out", "--P1", 1, "--P2", 1, "--N1", 1,
                          "--N2", 2, "--rho", 0.5, "--resolution", 5, "--out", out_csv], capsys)
        assert code == 0
        header, rows = read_csv(out_csv.read_text())
        assert header[0] == "region" and len(rows) == 5 * 11 * 2

    def test_gaussian_capacity(self, capsys):
        code, out, _ = run(["gaussian", "--capacity", "--P1", 1, "--P2", 1, "--N1", 1, "--N2", 2,
                            "--rho", 0.5**0.5], capsys)
        assert code == 0
        assert parse_json(out)["lower"] == pytest.approx(0.2075187496394219, abs=1e-12)

    def test_secrecy(self, files, capsys):
        code, out, _ = run(["secrecy", "--channel", files / "ch.json", "--restarts", 4], capsys)
        d = parse_json(out)
        assert code == 0 and d["lower"] <= d["upper"] + 1e-12

    def test_simulate(self, files, capsys):
        out_json = files / "rep.json"
        code, _, _ = run(["simulate", "--channel", files / "ch.json", "--input", files / "in.json",
                          "--n", 8, "--blocks", 3, "--trials", 10, "--out", out_json], capsys)
        assert code == 0
        rep = parse_json(out_json.read_text())
        assert rep["trials"] == 10 and len(rep["e1c"]) == 2

    def test_simulate_explicit_rates(self, files, capsys):
        code, out, _ = run(["simulate", "--channel", files / "ch.json", "--input", files / "in.json",
                            "--n", 8, "--blocks", 2, "--trials", 5, "--rates", "0,0,0.5,0.1"], capsys)
        assert code == 0 and parse_json(out)["rates"]["r1"] == 0.5


class TestExitCodes:
    def test_usage(self, capsys):
        assert run(["region"], capsys)[0] == 1
        assert run(["nonsense"], capsys)[0] == 1

    def test_gaussian_without_region_is_usage(self, capsys):
        assert run(["gaussian", "--P1", 1, "--P2", 1, "--N1", 1, "--N2", 1], capsys)[0] == 1

    def test_validation(self, files, capsys):
        bad = files / "bad.json"
        bad.write_text('{"X": 1, "S": 1, "Y": 1, "Z": 1, "gamma": [[[[0.5]]]]}')
        code, _, err = run(["classify", bad], capsys)
        assert code == 2 and "invalid input" in err

    def test_bad_point(self, files, capsys):
        code, _, _ = run(["region", "--bound", "d-in", "--channel", files / "ch.json", "--point", "1,2"], capsys)
        assert code == 2

    def test_budget(self, files, capsys):
        code, _, _ = run(["region", "--bound", "d-in-tilde", "--channel", files / "ch.json",
                          "--point", "0,1.5,0", "--budget", "1e-9"], capsys)
        assert code == 3

    def test_cap(self, files, capsys):
        code, _, _ = run(["simulate", "--channel", files / "ch.json", "--input", files / "in.json",
                          "--n", 30, "--rates", "0,0,0.9,0.2"], capsys)
        assert code == 3

    def test_suite_pass(self, capsys):
        code, out, _ = run(["check", "--suite", "zeta-bound"], capsys)
        assert code == 0 and out.startswith("[PASS] zeta-bound")


def test_module_entry_point_is_byte_stable(files):
    env = dict(os.environ, RCC_THREADS="2")
    args = [sys.executable, "-m", "rcc", "simulate", "--channel", "ch.json", "--input", "in.json",
            "--n", "8", "--blocks", "3", "--trials", "20", "--seed", "3"]
    a = subprocess.run(args, cwd=files, env=env, capture_output=True, check=True).stdout
    b = subprocess.run(args, cwd=files, env=env, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["seed"] == 3
