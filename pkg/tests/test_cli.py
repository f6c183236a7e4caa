import json
from fractions import Fraction

import pytest

from fairlot.cli import run
from fairlot import Instance, Lottery


@pytest.fixture
def t1_path(tmp_path, t1):
    path = tmp_path / "t1.json"
    t1.save(path)
    return str(path)


@pytest.fixture
def t2_path(tmp_path, t2):
    path = tmp_path / "t2.json"
    t2.save(path)
    return str(path)


@pytest.fixture
def identity_path(tmp_path, identity_lottery):
    path = tmp_path / "identity.json"
    identity_lottery.save(path)
    return str(path)


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_solve_hull_t2(t2_path, tmp_path, capsys):
    out_path = str(tmp_path / "lot.json")
    code = run(["solve", t2_path, "--method", "hull", "-o", out_path])
    report = _json_out(capsys)
    assert code == 0
    assert report["method"] == "hull"
    assert report["social_welfare"] == "4"
    saved = Lottery.load(out_path)
    assert saved.to_json_dict() == report["lottery"]


def test_solve_fixpoint_nonconvergence_exit_3(t1_path, capsys):
    code = run(["solve", t1_path, "--method", "fixpoint"])
    report = _json_out(capsys)
    assert code == 3
    assert report["converged"] is False
    assert report["trace"]
    assert report["trace"][0]["envy_arcs"]  # 1-based arcs in the trace


def test_verify_pass_and_fail(t2_path, t1_path, identity_path, capsys):
    assert run(["verify", t2_path, identity_path]) == 0
    report = _json_out(capsys)
    assert report["ef"] is True and report["pareto"]["dominated"] is False

    assert run(["verify", t1_path, identity_path]) == 1
    report = _json_out(capsys)
    assert report["envy_pairs"] == [
        {"envier": 2, "envied": 1, "own_utility": "0", "other_utility": "1"}]


def test_verify_structural_error_exit_2(t2_path, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": ["1"], "q": [[["1","0"],["1","0"]]]}')
    assert run(["verify", t2_path, str(bad)]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_verify_dump_lp(t2_path, identity_path, tmp_path, capsys):
    dump = tmp_path / "pareto.lp"
    assert run(["verify", t2_path, identity_path, "--dump-lp", str(dump)]) == 0
    text = dump.read_text()
    assert "max:" in text and "subject to:" in text


def test_welfare_threshold(t2_path, capsys):
    assert run(["welfare", t2_path, "--threshold", "4"]) == 0
    report = _json_out(capsys)
    assert report["social_welfare"] == "4"
    assert report["meets_threshold"] is True
    assert run(["welfare", t2_path, "--threshold", "9/2"]) == 1
    report = _json_out(capsys)
    assert report["meets_threshold"] is False


def test_rho(t2_path, capsys):
    assert run(["rho", t2_path]) == 0
    assert _json_out(capsys) == {"rho": "1/2", "epsilon": "1/8", "J_size": 0}


def test_decimal_strings_rejected(tmp_path, capsys):
    bad = tmp_path / "inst.json"
    bad.write_text('{"n": 2, "partitions": [{"utilities": [["1.5", "0"], ["0", "1"]]}]}')
    assert run(["rho", str(bad)]) == 2


def test_missing_file_exit_2(capsys):
    assert run(["rho", "/nonexistent/inst.json"]) == 2


def test_unknown_command_exit_2(capsys):
    assert run(["frobnicate"]) == 2


def _write_phi(tmp_path):
    phi = tmp_path / "phi.json"
    phi.write_text(json.dumps(
        {"r": 6, "triples": [[1, 2, 3], [4, 5, 6], [2, 3, 4]]}))
    return str(phi)


def test_x3c_pipeline(tmp_path, capsys):
    phi_path = _write_phi(tmp_path)
    inst_path = str(tmp_path / "inst.json")
    side_path = str(tmp_path / "side.json")
    code = run(["gen-x3c", phi_path, "-o", inst_path, "--sidecar", side_path])
    captured = capsys.readouterr()
    assert code == 0
    summary = json.loads(captured.out)
    assert summary["n"] == 3 + 1 + 2 * 9 + 18 == 40
    assert summary["m"] == 9
    assert "warning" in captured.err  # t=3 < 9
    side = json.loads(open(side_path).read())
    assert side["partition_index"]["1,1"] == 0

    inst = Instance.load(inst_path)
    assert inst.n == 40 and inst.m == 9

    lot_path = str(tmp_path / "wit.json")
    assert run(["witness", phi_path, "--cover", "1,2", "-o", lot_path]) == 0
    report = _json_out(capsys)
    assert report["social_welfare"] == report["K"]
    assert run(["verify", inst_path, lot_path, "--mode", "exact"]) == 0
    _json_out(capsys)

    dec_path = str(tmp_path / "dec.json")
    assert run(["decompose", inst_path, lot_path, "-o", dec_path]) == 0
    summary = _json_out(capsys)
    assert summary["partitions"] == 9
    assert sum(summary["permutation_counts"]) == 3  # one permutation per active slice

    assert run(["sample", dec_path, "--seed", "5", "--count", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    for line in lines:
        draw = json.loads(line)
        assert sorted(draw["perm"]) == list(range(1, 41))


def test_witness_invalid_cover_exit_2(tmp_path, capsys):
    phi_path = _write_phi(tmp_path)
    lot_path = str(tmp_path / "wit.json")
    assert run(["witness", phi_path, "--cover", "1,3", "-o", lot_path]) == 2
    assert "covered" in capsys.readouterr().err


def test_byte_identical_reruns(t2_path, capsys):
    run(["solve", t2_path])
    first = capsys.readouterr().out
    run(["solve", t2_path])
    second = capsys.readouterr().out
    assert first == second
