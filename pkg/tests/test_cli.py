"""
Tests for the command-line front end.
"""

import json

import pytest

from itlbench.cli import REPORT_SCHEMA, build_parser, main
from itlbench.config_manager import ConfigManager
from itlbench.countermodels import fisher_servi_model
from itlbench.model import parse_model, serialize_model


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "fs.model"
    path.write_text(serialize_model(fisher_servi_model()))
    return str(path)


def run(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def test_check_named_model(capsys, no_config):
    status, out, _ = run(capsys, "check", "@fisher-servi", "w", "(X p -> X q) -> X(p -> q)",
                         "--config", no_config)
    assert status == 0
    assert "false" in out


def test_check_model_file_json(capsys, no_config, model_file):
    status, out, _ = run(capsys, "check", model_file, "u", "p", "--json", "--config", no_config)
    assert status == 0
    report = json.loads(out)
    assert report["schema"] == REPORT_SCHEMA
    assert report["command"] == "check"
    assert report["verdict"] is True


def test_bad_formula_exits_with_one(capsys, no_config):
    status, _, err = run(capsys, "check", "@fisher-servi", "w", "p &", "--config", no_config)
    assert status == 1
    assert "error" in err


def test_unknown_world_exits_with_one(capsys, no_config):
    status, _, err = run(capsys, "check", "@fisher-servi", "zz", "p", "--config", no_config)
    assert status == 1
    assert "zz" in err


def test_missing_model_file(capsys, no_config, tmp_path):
    status, _, _ = run(capsys, "check", str(tmp_path / "none.model"), "w", "p", "--config", no_config)
    assert status == 1


def test_formula_artifact_is_not_a_model(capsys, no_config):
    status, _, _ = run(capsys, "check", "@diamond-from-box", "w", "p", "--config", no_config)
    assert status == 1


def test_valid_with_formula_file(capsys, no_config, tmp_path):
    formulas = tmp_path / "formulas.txt"
    formulas.write_text("p -> p\nX p | ~X p\n")
    status, out, _ = run(capsys, "valid", "@fisher-servi", "--file", str(formulas),
                         "--json", "--config", no_config)
    assert status == 0
    report = json.loads(out)
    assert report["verdict"] is False
    rows = report["data"]["formulas"]
    assert rows[0]["valid"] is True
    assert rows[1]["fails_at"] == "v"


def test_countermodel_search(capsys, no_config):
    status, out, _ = run(capsys, "countermodel", "p | ~p", "--max-worlds", "2", "--config", no_config)
    assert status == 0
    assert "verdict: found" in out
    assert "worlds:" in out


def test_countermodel_exhausted(capsys, no_config):
    status, out, _ = run(capsys, "countermodel", "(X p -> X q) -> X(p -> q)", "--class", "persistent",
                         "--max-worlds", "2", "--json", "--config", no_config)
    assert status == 0
    assert json.loads(out)["verdict"] == "exhausted"


def test_countermodel_get_emits_parsable_model(capsys, no_config):
    status, out, _ = run(capsys, "countermodel", "get", "H2", "--config", no_config)
    assert status == 0
    body = "\n".join(line for line in out.splitlines() if not line.startswith("#"))
    assert parse_model(body).size == 8


def test_countermodel_get_lists_artifacts(capsys, no_config):
    status, out, _ = run(capsys, "countermodel", "get", "--config", no_config)
    assert status == 0
    assert "fisher-servi" in out


def test_equiv(capsys, no_config):
    status, out, _ = run(capsys, "equiv", "F p", "@diamond-from-box", "--class", "ht",
                         "--max-worlds", "4", "--json", "--config", no_config)
    assert status == 0
    assert json.loads(out)["verdict"] == "exhausted"


def test_bisim_pair_query(capsys, no_config):
    status, out, _ = run(capsys, "bisim", "@H1", "@H1", "--kind", "until", "--depth", "1",
                         "--pair", "0_0", "0_1", "--config", no_config)
    assert status == 0
    assert "deepest level: 1" in out


def test_bisim_repeated_pairs_json(capsys, no_config):
    status, out, _ = run(capsys, "bisim", "@H1", "@H1", "--kind", "until", "--depth", "1",
                         "--pair", "0_0", "0_1", "--pair", "0_0", "0_0", "--json", "--config", no_config)
    assert status == 0
    pairs = json.loads(out)["data"]["pairs"]
    assert [row["worlds"] for row in pairs] == [["0_0", "0_1"], ["0_0", "0_0"]]
    assert pairs[1]["level"] == 1


def test_bisim_negative_depth_exits_with_one(capsys, no_config):
    status, _, err = run(capsys, "bisim", "@H1", "@H1", "--depth", "-1", "--config", no_config)
    assert status == 1
    assert "depth" in err


def test_bisim_bad_configured_kind_exits_with_one(capsys, tmp_path):
    path = tmp_path / "config.json"
    config = ConfigManager(str(path), load=False)
    config.set("bisim.kind", "sometimes")
    config.save_config()
    status, _, err = run(capsys, "bisim", "@H1", "@H1", "--config", str(path))
    assert status == 1
    assert "sometimes" in err


def test_bisim_verifies_family_file(capsys, no_config, tmp_path):
    family = tmp_path / "fam.txt"
    family.write_text("level 0: (0_0,0_1)\nlevel 1: (0_0,0_1)\n")
    status, out, _ = run(capsys, "bisim", "@H1", "@H1", "--kind", "box", "--family", str(family),
                         "--json", "--config", no_config)
    assert status == 0
    report = json.loads(out)
    assert report["verdict"] is False
    assert report["data"]["violations"][0]["clause"] == "Forth ->"


def test_normal_form(capsys, no_config):
    status, out, _ = run(capsys, "normal-form", "X(p & F q)", "--no-confirm", "--config", no_config)
    assert status == 0
    assert out.strip() == "X p & F X q"


def test_paper_subset(capsys, tmp_path):
    path = tmp_path / "config.json"
    config = ConfigManager(str(path), load=False)
    config.set("suite.valid_max_worlds", 3)
    config.save_config()
    status, out, _ = run(capsys, "paper", "--only", "ht-axiom", "--json", "--config", str(path))
    assert status == 0
    report = json.loads(out)
    assert report["verdict"] is True
    assert report["data"]["items"][0]["key"] == "ht-axiom"
    assert report["data"]["preset"] == "full"

    status, out, _ = run(capsys, "paper", "--only", "ht-axiom", "--quick", "--json", "--config", str(path))
    assert status == 0
    assert json.loads(out)["data"]["preset"] == "quick"


def test_paper_unknown_item(capsys, no_config):
    status, _, err = run(capsys, "paper", "--only", "prop9", "--config", no_config)
    assert status == 1
    assert "prop9" in err


def test_config_show_and_init(capsys, no_config, tmp_path):
    status, out, _ = run(capsys, "config", "show", "--config", no_config)
    assert status == 0
    assert json.loads(out)["search"]["frame_class"] == "expanding"

    target = tmp_path / "written.json"
    status, _, _ = run(capsys, "config", "init", str(target), "--config", no_config)
    assert status == 0
    assert json.loads(target.read_text())["bisim"]["kind"] == "until"


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
