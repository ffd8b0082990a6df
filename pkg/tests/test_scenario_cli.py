import json
import subprocess
import sys

import numpy as np
import pytest

from mofkit import cli
from mofkit import scenario as sc
from mofkit.errors import DimensionMismatch, ParseError, SchemaVersionMismatch, StructureViolation

import oracles


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write_example(tmp_path, capsys, *args, name="s.json"):
    path = tmp_path / name
    code, _, _ = run(["example", *args, "--out", path], capsys)
    assert code == 0
    return path


def test_round_trip_is_bit_exact(tmp_path, e2, e2_identity):
    doc = sc.scenario_to_dict(e2, {"identity": e2_identity}, seed=3)
    path = tmp_path / "e2.json"
    sc.save_scenario(path, doc)
    scen = sc.load_scenario(path)
    again = sc.scenario_to_dict(scen.mof, scen.fields, seed=scen.seed)
    assert sc.dumps(again) == path.read_text()
    for (x, y), v in e2.stored_items():
        assert np.array_equal(scen.mof.D(x, y).matrix, v.matrix)
    assert scen.digest.startswith("sha256:")


def test_round_trip_irrational_entries(tmp_path, rng):
    from mofkit import instances
    m = instances.make_instance("staircase", 5).mof
    doc = sc.scenario_to_dict(m)
    scen = sc.scenario_from_dict(json.loads(sc.dumps(doc)))
    for (x, y), v in m.stored_items():
        assert np.array_equal(scen.mof.D(x, y).matrix, v.matrix)


def test_parse_errors(e2):
    good = sc.scenario_to_dict(e2)
    with pytest.raises(ParseError):
        sc.scenario_from_dict([])
    bad = dict(good, schema_version="9.9")
    with pytest.raises(SchemaVersionMismatch):
        sc.scenario_from_dict(bad)
    bad = dict(good)
    del bad["D"]
    with pytest.raises(ParseError):
        sc.scenario_from_dict(bad)
    bad = dict(good, states={"x0": good["states"]["x0"]})
    with pytest.raises(StructureViolation):
        sc.scenario_from_dict(bad)
    bad = json.loads(json.dumps(good))
    bad["D"][1]["matrix"] = sc.encode_matrix(np.eye(3))
    with pytest.raises(DimensionMismatch, match="x0"):
        sc.scenario_from_dict(bad)
    bad = json.loads(json.dumps(good))
    bad["D"][0]["pair"] = ["x0", "nowhere"]
    with pytest.raises(StructureViolation):
        sc.scenario_from_dict(bad)
    bad = json.loads(json.dumps(good))
    bad["D"][0]["matrix"] = [[1, 2]]
    with pytest.raises(ParseError):
        sc.scenario_from_dict(bad)
    with pytest.raises(ParseError):
        sc.load_scenario("/nonexistent/file.json")


def test_tolerance_overrides_in_file(e2):
    doc = dict(sc.scenario_to_dict(e2), tolerances={"eq": 1e-6})
    assert sc.scenario_from_dict(doc).mof.tol.eq == 1e-6


def test_covers_in_file(e2):
    doc = dict(sc.scenario_to_dict(e2), covers=[{"radius": 1.0}, {"sets": [["x0", "x1"]]}])
    scen = sc.scenario_from_dict(doc)
    assert len(scen.covers) == 2 and len(scen.covers[0].sets) == 2


def test_validate_e2_passes(tmp_path, capsys):
    path = write_example(tmp_path, capsys, "quotient", "--preset", "e2")
    code, out, _ = run(["validate", "--scenario", path, "--report", "json"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["passed"] and report["command"] == "validate"
    assert report["input_digest"] == sc.digest_bytes(path.read_bytes())


def test_validate_corrupted_fails_with_axiom_named(tmp_path, capsys, e2):
    path = tmp_path / "bad.json"
    sc.save_scenario(path, sc.scenario_to_dict(oracles.negative_controls(e2)["(iv)"]))
    code, out, _ = run(["validate", "--scenario", path], capsys)
    assert code == 2
    assert "[FAIL] mof: (iv) tensor triangle inequality" in out


def test_input_errors_exit_one(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run(["validate", "--scenario", path], capsys)
    assert code == 1 and json.loads(err)["error"] == "ParseError"
    path.write_text(json.dumps({"schema_version": "0.1"}))
    code, _, err = run(["lipnorm", "--scenario", path], capsys)
    assert code == 1 and json.loads(err)["error"] == "SchemaVersionMismatch"
    code, _, _ = run(["validate"], capsys)
    assert code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["validate", "--report", "yaml"])
    assert exc.value.code == 1


def test_example_is_deterministic(tmp_path, capsys):
    a = write_example(tmp_path, capsys, "staircase", "--n", 3, "--mesh", 2, "--seed", 7, name="a.json")
    b = write_example(tmp_path, capsys, "staircase", "--n", 3, "--mesh", 2, "--seed", 7, name="b.json")
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("command", ["lipnorm", "probmetric", "deleeuw", "dixmier"])
def test_commands_pass_on_e2(tmp_path, capsys, command):
    path = write_example(tmp_path, capsys, "quotient", "--preset", "e2")
    code, out, _ = run([command, "--scenario", path, "--report", "json", "--seed", 1], capsys)
    report = json.loads(out)
    assert code == 0, [c for c in report["checks"] if not c["passed"]]
    assert report["seed"] == 1


def test_lipnorm_e2_identity_value(tmp_path, capsys):
    path = write_example(tmp_path, capsys, "quotient", "--preset", "e2")
    code, out, _ = run(["lipnorm", "--scenario", path, "--field", "identity", "--report", "json"], capsys)
    fields = json.loads(out)["results"]
    assert abs(fields["identity"]["lip"]["seminorm"] - 1) < 1e-12


def test_lipnorm_unknown_field(tmp_path, capsys):
    path = write_example(tmp_path, capsys, "quotient", "--preset", "e2")
    code, _, err = run(["lipnorm", "--scenario", path, "--field", "nope"], capsys)
    assert code == 1


@pytest.mark.parametrize("kind,args", [("quotient", ["--size", 5, "--classes", 3]),
                                       ("scalar", ["--size", 3]),
                                       ("staircase", ["--n", 2, "--mesh", 1])])
def test_generated_examples_validate(tmp_path, capsys, kind, args):
    path = write_example(tmp_path, capsys, kind, *args, "--seed", 4)
    for command in ("validate", "lipnorm", "deleeuw"):
        code, out, _ = run([command, "--scenario", path, "--seed", 4], capsys)
        assert code == 0, out


def test_tol_flag_overrides_eq(tmp_path, capsys):
    path = write_example(tmp_path, capsys, "quotient", "--preset", "e2")
    code, out, _ = run(["validate", "--scenario", path, "--tol", "1e-6", "--report", "json"], capsys)
    assert json.loads(out)["tolerances"]["eq"] == 1e-6
    code, _, _ = run(["validate", "--scenario", path, "--tol", "-1"], capsys)
    assert code == 1


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "mofkit", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "mofkit" in out.stdout
