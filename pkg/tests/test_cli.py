import json

import pytest

from chainlab.cli.router import main
from chainlab.schemas.modulus import ChainFamily, FunctionClass, FunctionClassTag
from chainlab.schemas.run import ResultEnvelope
from chainlab.services.fixture_service import FixtureService, two_sequence_objective
from chainlab.services.modulus_service import ModulusService
from chainlab.services.poincare_service import PoincareService

TWO_SEQUENCE = "fixture:two_sequence_3_50"


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_minimal_gradient_on_fixture(capsys):
    code, data = run(capsys, [
        "gradient", "min", "--space", TWO_SEQUENCE, "--u", TWO_SEQUENCE, "--eps", "0.3333333333333333",
    ])
    assert code == 0
    envelope = ResultEnvelope.model_validate(data)
    assert envelope.command == "gradient"
    assert envelope.action == "min"
    assert set(envelope.input_digests) == {"space", "u"}
    report = envelope.outputs["report"]
    assert report["objective"] == pytest.approx(two_sequence_objective(3, 50), rel=1e-7)
    assert "runtime_ms" not in report
    assert len(envelope.meta["solver_runtime_ms"]) == 1


def test_outputs_are_deterministic(capsys):
    argv = ["modulus", "--space", "fixture:grid1d_11", "--family", "connect:0,10", "--eps", "0.2"]
    _, first = run(capsys, argv)
    _, second = run(capsys, argv)
    assert first["outputs"] == second["outputs"]
    assert first["input_digests"] == second["input_digests"]


def test_files_written_with_global_flags(capsys, tmp_path):
    out = tmp_path / "result.json"
    csv_out = tmp_path / "g.csv"
    code, data = run(capsys, [
        "--out", str(out), "--csv-out", str(csv_out),
        "gradient", "min", "--space", "fixture:grid1d_11", "--u", "expr:x", "--eps", "0.1",
    ])
    assert code == 0
    assert data is None
    assert json.loads(out.read_text())["outputs"]["report"]["status"] == "optimal"
    lines = csv_out.read_text().splitlines()
    assert lines[0] == "id,g"
    assert len(lines) == 12


def test_global_flags_after_subcommand(capsys, tmp_path):
    out = tmp_path / "result.json"
    code, data = run(capsys, [
        "gradient", "min", "--space", "fixture:grid1d_11", "--u", "expr:x", "--eps", "0.1",
        "--out", str(out), "--seed", "7",
    ])
    assert code == 0
    assert data is None
    envelope = json.loads(out.read_text())
    assert envelope["outputs"]["report"]["status"] == "optimal"


def test_flag_before_subcommand_survives(capsys, tmp_path):
    out = tmp_path / "fixtures.json"
    code, _ = run(capsys, ["--out", str(out), "fixtures"])
    assert code == 0
    assert out.exists()


def test_exceptional_set(capsys):
    code, data = run(capsys, [
        "modulus", "--space", "fixture:punctured_grid1d_11", "--family", "hit:5",
        "--eps", "0.1", "--exceptional",
    ])
    assert code == 0
    assert data["outputs"]["verdict"]["exceptional"] is True
    assert data["outputs"]["verdict"]["certificate"]["kind"] == "null_set"


def test_chain_width(capsys):
    code, data = run(capsys, [
        "poincare", "width", "--space", "fixture:grid1d_11", "--x", "0", "--y", "10", "--set", "5", "--eps", "0.1",
    ])
    assert code == 0
    assert data["outputs"]["width"] == pytest.approx(0.1)


def test_riemann(capsys):
    code, data = run(capsys, ["riemann", "--f", "s", "--t", "0.5", "--n", "10"])
    assert code == 0
    assert data["outputs"]["value"] == pytest.approx(0.5)


def test_eb_pipeline(capsys):
    code, data = run(capsys, ["eb-pipeline", "--sizes", "10,20", "--u", "x*(1-x)", "--g", "abs(1-2*x)"])
    assert code == 0
    rows = data["outputs"]["report"]["rows"]
    assert [row["n"] for row in rows] == [10, 20]
    assert all(row["verified"] for row in rows)


def test_potential_unreachable_written_as_inf(capsys):
    code, data = run(capsys, [
        "potential", "--space", "fixture:grid1d_11", "--seeds", "0", "--seed-values", "0",
        "--g", "expr:1", "--eps", "0.05",
    ])
    assert code == 0
    assert data["outputs"]["potential"][0] == 0
    assert data["outputs"]["potential"][1] == "inf"


def test_saved_config(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "command": "space",
        "action": "validate",
        "parameters": {"eps": 0.1},
        "inputs": {"space": "fixture:grid1d_11"},
    }))
    code, data = run(capsys, ["--config", str(path)])
    assert code == 0
    assert data["outputs"]["n"] == 11
    assert data["outputs"]["components"]["count"] == 1


def test_fixture_listing_and_write(capsys, tmp_path):
    code, data = run(capsys, ["fixtures", "--write", str(tmp_path)])
    assert code == 0
    names = {f["name"] for f in data["outputs"]["fixtures"]}
    assert "two_sequence_3_50" in names
    assert (tmp_path / "manifest.json").is_file()
    assert (tmp_path / "grid1d_11.json").is_file()


class TestModulusForms:
    GRID = "fixture:grid1d_11"

    @staticmethod
    def direct(measure=None, fclass=None):
        space = FixtureService.build("grid1d_11")
        return ModulusService.chain_modulus(space, ChainFamily.connect(0, 10), 0.2, 1.0, measure, fclass).objective

    def test_riesz_measure(self, capsys):
        code, data = run(capsys, [
            "modulus", "--space", self.GRID, "--family", "connect:0,10", "--eps", "0.2",
            "--measure", "riesz:0,10,1", "--class", "finite:0,10",
        ])
        assert code == 0
        space = FixtureService.build("grid1d_11")
        expected = self.direct(PoincareService.riesz_weights(space, 0, 10, 1.0), FunctionClass.finite_at(0, 10))
        assert expected > 0
        assert data["outputs"]["report"]["objective"] == pytest.approx(expected, rel=1e-12)

    def test_default_measure_is_space_mass(self, capsys):
        _, plain = run(capsys, ["modulus", "--space", self.GRID, "--family", "connect:0,10", "--eps", "0.2"])
        _, default = run(capsys, [
            "modulus", "--space", self.GRID, "--family", "connect:0,10", "--eps", "0.2", "--measure", "default",
        ])
        assert plain["outputs"] == default["outputs"]

    @pytest.mark.parametrize("flag, fclass", [
        ("all", FunctionClass.all_borel()),
        ("finite:0,10", FunctionClass.finite_at(0, 10)),
        ("lip:5", FunctionClass(tag=FunctionClassTag.LIPSCHITZ, bound=5.0)),
    ])
    def test_function_classes(self, capsys, flag, fclass):
        code, data = run(capsys, [
            "modulus", "--space", self.GRID, "--family", "connect:0,10", "--eps", "0.2", "--class", flag,
        ])
        assert code == 0
        assert data["outputs"]["report"]["objective"] == pytest.approx(self.direct(fclass=fclass), rel=1e-12)

    def test_chains_file(self, capsys, tmp_path):
        path = tmp_path / "chains.json"
        path.write_text(json.dumps([[0, 1, 2]]))
        code, data = run(capsys, [
            "modulus", "--space", self.GRID, "--family", f"file:{path}", "--eps", "0.1",
        ])
        assert code == 0
        assert data["outputs"]["report"]["objective"] == pytest.approx(1.0, rel=1e-9)
        assert "chains" in data["input_digests"]

    @pytest.mark.parametrize("flag, value", [
        ("--family", "connect:0"),
        ("--family", "loop:1,2"),
        ("--class", "lip:abc"),
        ("--measure", "riesz:0"),
    ])
    def test_malformed_forms(self, capsys, flag, value):
        argv = ["modulus", "--space", self.GRID, "--family", "connect:0,10", "--eps", "0.2"]
        if flag == "--family":
            argv[4] = value
        else:
            argv += [flag, value]
        code, data = run(capsys, argv)
        assert code == 2
        assert data["error"] == "usage_error"


class TestErrors:
    def test_missing_file_is_input_error(self, capsys, tmp_path):
        code, data = run(capsys, ["space", "validate", "--space", str(tmp_path / "absent.json")])
        assert code == 2
        assert data["error"] == "missing_input"
        assert data["success"] is False
        assert data["run_id"]

    def test_bad_config_is_input_error(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"command": "space", "bogus": 1}))
        code, data = run(capsys, ["--config", str(path)])
        assert code == 2
        assert data["error"] == "config_parse"

    def test_unknown_command_in_config(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"command": "nope"}))
        code, data = run(capsys, ["--config", str(path)])
        assert code == 2
        assert "commands" in data["context"]

    def test_non_positive_eps_is_domain_error(self, capsys):
        code, data = run(capsys, [
            "gradient", "verify", "--space", "fixture:grid1d_11", "--u", "expr:x", "--g", "expr:1", "--eps", "0",
        ])
        assert code == 3
        assert data["error"] == "non_positive_eps"

    def test_unknown_fixture(self, capsys):
        code, data = run(capsys, ["space", "gen", "--fixture", "nope"])
        assert code == 2
        assert data["error"] == "missing_input"

    def test_field_size_mismatch(self, capsys, tmp_path):
        path = tmp_path / "u.json"
        path.write_text("[1, 2]")
        code, data = run(capsys, [
            "gradient", "min", "--space", "fixture:grid1d_11", "--u", str(path), "--eps", "0.1",
        ])
        assert code == 2
        assert data["error"] == "invalid_parameter"

    def test_no_command_is_usage_error(self, capsys):
        code, data = run(capsys, [])
        assert code == 2
        assert data["error"] == "usage_error"
        assert data["success"] is False

    def test_unknown_flag_is_usage_error(self, capsys):
        code, data = run(capsys, ["fixtures", "--bogus"])
        assert code == 2
        assert data["error"] == "usage_error"
        assert "--bogus" in data["detail"]

    def test_bad_flag_value_is_usage_error(self, capsys):
        code, data = run(capsys, ["gradient", "ladder", "--space", "fixture:grid1d_11", "--u", "expr:x",
                                  "--eps-list", "0.2,abc"])
        assert code == 2
        assert data["error"] == "usage_error"
