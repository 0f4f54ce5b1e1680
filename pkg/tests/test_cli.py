import json

import numpy as np
import pytest

from ncscale import cli, repro
from ncscale.cli import SchemaError, build_parser, main, parse_instance, parse_instance_data, run_command

E11 = [[1, 0], [0, 0]]
E12 = [[0, 1], [0, 0]]
E22 = [[0, 0], [0, 1]]
ZERO = [[0, 0], [0, 0]]


def write(tmp_path, obj, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def cpmap(*mats):
    return {"kind": "cpmap", "m": 2, "n": 2, "kraus": list(mats)}


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# --- parsing ----------------------------------------------------------------

def test_parse_single_kraus():
    inst = parse_instance_data({"kind": "cpmap", "m": 2, "n": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]})
    assert inst.kind == "cpmap"
    assert inst.data.kraus.shape == (1, 2, 2)
    assert np.allclose(inst.data.kraus[0], E11)


def test_parse_complex_entries_as_pairs():
    inst = parse_instance_data(cpmap([[[0, 1], 0], [0, 2]]))
    assert inst.data.kraus[0, 0, 0] == 1j and inst.data.kraus[0, 1, 1] == 2


def test_negative_dimension_is_a_schema_error():
    with pytest.raises(SchemaError, match="nonnegative"):
        parse_instance_data({"kind": "cpmap", "m": -1, "n": 2, "kraus": [E11]})


def test_lines_file():
    inst = parse_instance_data({"kind": "lines", "n": 2, "lines": [[[1, 0], [0, 1]]]})
    assert inst.kind == "lines" and inst.data.p == 1 and inst.data.n == 2


@pytest.mark.parametrize("obj", [
    [], {"kind": "tensor"}, {"kind": "cpmap", "m": 2, "n": 2, "kraus": []},
    {"kind": "cpmap", "m": 2, "n": 2, "kraus": [[[1, 0]]]},
    {"kind": "matrix", "m": 1, "n": 1, "entries": [[-1]]},
    {"kind": "lines", "n": 2, "lines": [[[1, 0]]]},
    {"kind": "cpmap", "m": 1, "n": 1, "kraus": [[[True]]]},
])
def test_schema_violations(obj):
    with pytest.raises(SchemaError):
        parse_instance_data(obj)


def test_bad_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "cpmap",\n "m": }')
    with pytest.raises(SchemaError, match=r"bad.json:2:"):
        parse_instance(p)


# --- commands ---------------------------------------------------------------

def test_ncrank_command(tmp_path, capsys):
    code, out, _ = run(capsys, ["ncrank", write(tmp_path, cpmap(E11, E12))])
    env = json.loads(out)
    assert code == 0 and env["result"]["ncrank"] == 1 and env["result"]["r_star"] == 2
    assert env["schema_version"] == 1 and env["command"] == "ncrank"


def test_decide_bounded_and_unbounded(tmp_path, capsys):
    code, out, _ = run(capsys, ["decide", write(tmp_path, cpmap(E11, E22)), "--k", "2", "--r", "0"])
    assert code == 0 and json.loads(out)["result"]["decision"] == "bounded"
    code, out, _ = run(capsys, ["decide", write(tmp_path, cpmap(E11, E12)), "--k", "2", "--r", "0"])
    assert code == 2 and json.loads(out)["result"]["decision"] == "unbounded"


def test_match_on_one_spanning_line(tmp_path, capsys):
    path = write(tmp_path, {"kind": "lines", "n": 2, "lines": [[[1, 0], [0, 1]]]})
    code, out, _ = run(capsys, ["match", path, "--eps", "0.05"])
    assert code == 0 and json.loads(out)["result"]["value"] >= 0.95


def test_member_far_exit_code(tmp_path, capsys):
    path = write(tmp_path, {"kind": "lines", "n": 2, "lines": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]})
    code, out, _ = run(capsys, ["bl-member", path, "--point", "0.6,0.6", "--eps", "0.1"])
    assert code == 2 and json.loads(out)["result"]["verdict"] == "far"


def test_weighted_command(tmp_path, capsys):
    path = write(tmp_path, {"kind": "lines", "n": 2, "lines": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]})
    code, out, _ = run(capsys, ["weighted", path, "--w", "1,1"])
    assert code == 0 and json.loads(out)["result"]["opt"] == "1"


def test_weighted_rejects_fractional_weights(tmp_path, capsys):
    path = write(tmp_path, {"kind": "lines", "n": 2, "lines": [[[1, 0], [0, 1]]]})
    code, _, err = run(capsys, ["weighted", path, "--w", "1.5"])
    assert code == 1 and "integers" in err


def test_matscale_command(tmp_path, capsys):
    path = write(tmp_path, {"kind": "matrix", "m": 2, "n": 2, "entries": [[1, 1], [0, 0]]})
    code, out, _ = run(capsys, ["matscale", path, "--k", "1", "--eps", "0.1"])
    assert code == 0
    S = np.array(json.loads(out)["result"]["scaled_matrix"])
    assert S.sum() >= 0.81 - 1e-12


def test_schema_error_exit_code_goes_to_stderr(tmp_path, capsys):
    path = write(tmp_path, {"kind": "cpmap", "m": -2, "n": 2, "kraus": [E11]})
    code, out, err = run(capsys, ["ncrank", path])
    assert code == 1 and out == "" and "error" in json.loads(err)


def test_run_command_rejects_unknown_command():
    inst = parse_instance_data(cpmap(E11))
    with pytest.raises(SchemaError):
        run_command("frobnicate", inst, build_parser().parse_args(["ncrank", "x"]))


def test_output_is_byte_identical_across_runs(tmp_path, capsys):
    path = write(tmp_path, cpmap(E11, E12))
    outs = [run(capsys, ["shrunk", path, "--method", "wong", "--seed", "3"])[1] for _ in range(2)]
    assert outs[0] == outs[1]
    outs = [run(capsys, ["scale", path, "--k", "1", "--eps", "0.1"])[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_timing_flag_adds_seconds_only_when_asked(tmp_path, capsys):
    path = write(tmp_path, cpmap(E11, E12))
    env = json.loads(run(capsys, ["ncrank", path])[1])
    assert "seconds" not in env and "timing" not in env["flags"]
    env = json.loads(run(capsys, ["ncrank", path, "--timing"])[1])
    assert env["seconds"] >= 0


def test_trace_writes_objective_csv(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, _, _ = run(capsys, ["scale", write(tmp_path, cpmap(E11, E12)), "--k", "1", "--eps", "0.1",
                              "--trace", str(trace)])
    lines = trace.read_text().splitlines()
    assert code == 0 and lines[0].startswith("iteration") and len(lines) >= 2


def test_help_documents_numeric_defaults():
    text = build_parser()._subparsers._group_actions[0].choices["scale"].format_help()
    for flag in ("--eps", "--max-iter", "--seed", "--precision-bits", "--denom-bound", "--floor-const"):
        assert flag in text
    assert "default" in text


# --- repro ------------------------------------------------------------------

def test_repro_filter_runs_one_criterion(capsys):
    code, out, _ = run(capsys, ["repro", "--filter", "kl"])
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 1 and lines[0].startswith("[PASS] 5")


def test_repro_unknown_filter_is_an_error(capsys):
    code, _, err = run(capsys, ["repro", "--filter", "nonsense"])
    assert code == 1 and err


def test_corrupted_constant_flips_its_criterion(monkeypatch, capsys):
    monkeypatch.setattr(repro, "BIT_CONSTANT", 0.1)
    code, out, _ = run(capsys, ["repro", "--filter", "bits"])
    assert code == 1 and out.startswith("[FAIL] 9")
    monkeypatch.setattr(repro, "KL_AGREEMENT", -1.0)
    res = repro.run_suite("kl", out=None)
    assert not res[0].passed
