from __future__ import annotations

import json

import pytest

from tggkit import documents
from tggkit.cli import main
from tggkit.engine import Session, replay
from tggkit.graph import Domain, Node, TripleGraph
from tggkit.rules import OperationKind

from .conftest import GOLDEN_DIR, RULESET_PATH, TRIPLE_PATH
from .oracles import source_with

RULESET = str(RULESET_PATH)
TRIPLE = str(TRIPLE_PATH)


def _usage_error(argv):
    with pytest.raises(SystemExit) as caught:
        main(argv)
    assert caught.value.code == 2


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_fixture_ruleset(capsys):
    assert main(["validate", "--ruleset", RULESET]) == 0
    assert capsys.readouterr().out.strip() == "OK: 4 rules, no violations"


def test_validate_json_output(capsys):
    assert main(["validate", "--ruleset", RULESET, "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] is True
    assert payload["rules"] == [
        "AdminToRouterRule",
        "CompanyToITRule",
        "EmployeeToLaptopRule",
        "EmployeeToPCRule",
    ]


def test_validate_reports_rule_violations(tmp_path, capsys):
    document = json.loads(RULESET_PATH.read_text())
    rule = document["payload"]["rules"][0]  # rules are stored sorted by name
    assert rule["name"] == "AdminToRouterRule"
    company = next(n for n in rule["nodes"] if n["id"] == "company")
    company["annotation"] = "GREEN"  # ceoEdge keeps BLACK: context closure breaks
    broken = tmp_path / "broken.ruleset.json"
    broken.write_text(json.dumps(document))

    assert main(["validate", "--ruleset", str(broken)]) == 1
    assert "CONTEXT_CLOSURE" in capsys.readouterr().err


def test_validate_wrong_document_kind(capsys):
    assert main(["validate", "--ruleset", TRIPLE]) == 3
    assert "expected a RULESET" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# gen / fwd / bwd
# ---------------------------------------------------------------------------


def test_gen_is_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.triple.json"
        proto = tmp_path / f"{name}.protocol.json"
        argv = [
            "gen", "--ruleset", RULESET, "--seed", "7", "--max-steps", "12",
            "--out", str(out), "--protocol", str(proto),
        ]
        assert main(argv) == 0
        outs.append((out.read_bytes(), proto.read_bytes()))
    assert outs[0] == outs[1]
    assert "MAX_STEPS after 12 steps" in capsys.readouterr().out


def test_gen_requires_max_steps(tmp_path):
    _usage_error(["gen", "--ruleset", RULESET, "--seed", "1", "--out", str(tmp_path / "x.json")])


def test_fwd_translates_the_fixture(tmp_path, capsys, metamodel):
    out = tmp_path / "out.triple.json"
    argv = ["fwd", "--ruleset", RULESET, "--input", TRIPLE, "--seed", "3", "--out", str(out)]
    assert main(argv) == 0
    assert "EXHAUSTED after 4 steps" in capsys.readouterr().out
    result = documents.load_path(out, expected_kind="TRIPLE", metamodel=metamodel)
    assert sum(result.counts()) > sum(documents.load_path(TRIPLE).counts())


def test_fwd_json_reports_the_run(tmp_path, capsys):
    out = tmp_path / "out.triple.json"
    argv = ["fwd", "--ruleset", RULESET, "--input", TRIPLE, "--seed", "3", "--out", str(out), "--json"]
    assert main(argv) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload == {
        "ok": True,
        "steps": 4,
        "haltReason": "EXHAUSTED",
        "untranslated": [],
        "warnings": [],
    }


def test_fwd_incomplete_translation_exits_one(tmp_path, capsys):
    stuck = source_with(admins=1, employees=0).without(["ed_ar1"])
    source = tmp_path / "stuck.triple.json"
    documents.save_path(stuck, source)
    out = tmp_path / "out.triple.json"

    argv = ["fwd", "--ruleset", RULESET, "--input", str(source), "--seed", "1", "--out", str(out)]
    assert main(argv) == 1
    err = capsys.readouterr().err
    assert err.startswith("INCOMPLETE: 2 element(s) untranslated")
    assert "a1" in err and "ed_a1" in err
    assert out.exists()  # the partial result is still written


def test_fwd_rejects_input_with_target_content(tmp_path, capsys):
    mixed = source_with(admins=0, employees=0)
    mixed.add_node(Node("it9", "IT"), Domain.TARGET)
    source = tmp_path / "mixed.triple.json"
    documents.save_path(mixed, source)

    argv = ["fwd", "--ruleset", RULESET, "--input", str(source), "--seed", "1",
            "--out", str(tmp_path / "out.json")]
    assert main(argv) == 1
    assert "empty target" in capsys.readouterr().err


def test_fwd_rejects_nonconformant_input(tmp_path, capsys):
    document = json.loads(TRIPLE_PATH.read_text())
    document["payload"]["edges"].append(
        {"id": "ed9", "type": "ceo", "source": "c1", "target": "ceo1", "domain": "SOURCE"}
    )
    source = tmp_path / "bad.triple.json"
    source.write_text(json.dumps(document))

    argv = ["fwd", "--ruleset", RULESET, "--input", str(source), "--seed", "1",
            "--out", str(tmp_path / "out.json")]
    assert main(argv) == 1
    assert "UPPER_BOUND" in capsys.readouterr().err


def test_missing_input_file_is_an_io_error(tmp_path, capsys):
    argv = ["fwd", "--ruleset", RULESET, "--input", str(tmp_path / "nope.json"), "--seed", "1",
            "--out", str(tmp_path / "out.json")]
    assert main(argv) == 3
    assert "error:" in capsys.readouterr().err


def test_malformed_document_is_an_io_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("hello")
    assert main(["validate", "--ruleset", str(bad)]) == 3
    assert "invalid JSON" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


@pytest.fixture()
def recorded_run(tmp_path):
    out = tmp_path / "gen.triple.json"
    proto = tmp_path / "gen.protocol.json"
    argv = [
        "gen", "--ruleset", RULESET, "--seed", "5", "--max-steps", "6",
        "--out", str(out), "--protocol", str(proto),
    ]
    assert main(argv) == 0
    return out, proto


def test_replay_every_prefix_matches_the_engine(tmp_path, recorded_run, grammar):
    _, proto = recorded_run
    record = documents.load_path(proto, expected_kind="PROTOCOL")
    for k in range(len(record.applications)):
        out = tmp_path / f"at{k}.triple.json"
        assert main(["replay", "--ruleset", RULESET, "--protocol", str(proto),
                     "--at", str(k), "--out", str(out)]) == 0
        expected, _ = replay(grammar, record.kind, record.initial, record.applications, upto=k + 1)
        assert documents.load_path(out) == expected


def test_replay_round_trips_the_final_state(tmp_path, recorded_run, capsys):
    final, proto = recorded_run
    out = tmp_path / "replayed.triple.json"
    assert main(["replay", "--ruleset", RULESET, "--protocol", str(proto),
                 "--at", "5", "--out", str(out)]) == 0
    assert out.read_bytes() == final.read_bytes()
    assert "state after step 5" in capsys.readouterr().out


def test_replay_prefix_out_of_range(tmp_path, recorded_run, capsys):
    _, proto = recorded_run
    assert main(["replay", "--ruleset", RULESET, "--protocol", str(proto),
                 "--at", "6", "--out", str(tmp_path / "x.json")]) == 2
    assert "--at must be in 0..5" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# diagram
# ---------------------------------------------------------------------------


def test_rule_diagram_matches_the_golden(tmp_path, capsys):
    out = tmp_path / "axiom.puml"
    assert main(["diagram", "--ruleset", RULESET, "--rule", "CompanyToITRule", "--out", str(out)]) == 0
    assert out.read_text() == (GOLDEN_DIR / "axiom_rule.puml").read_text()
    assert "puml diagram ->" in capsys.readouterr().out


def test_protocol_diagram_with_a_range_selection(tmp_path, recorded_run):
    _, proto = recorded_run
    out = tmp_path / "steps.dot"
    argv = ["diagram", "--ruleset", RULESET, "--protocol", str(proto),
            "--select", "0..2,4", "--format", "dot", "--out", str(out)]
    assert main(argv) == 0
    assert out.read_text().startswith("digraph view {")


def test_diagram_applies_display_options(tmp_path):
    opts = tmp_path / "opts.json"
    opts.write_text(json.dumps({"showTarget": False, "labelMode": "NONE"}))
    out = tmp_path / "rule.puml"
    argv = ["diagram", "--ruleset", RULESET, "--rule", "AdminToRouterRule",
            "--options", str(opts), "--out", str(out)]
    assert main(argv) == 0
    text = out.read_text()
    assert "Router" not in text
    assert '""' in text  # blanked labels


def test_diagram_usage_errors(tmp_path, recorded_run, capsys):
    _, proto = recorded_run
    out = str(tmp_path / "x.puml")
    _usage_error(["diagram", "--ruleset", RULESET, "--protocol", str(proto), "--out", out])
    _usage_error(["diagram", "--ruleset", RULESET, "--rule", "A", "--protocol", str(proto),
                  "--select", "0", "--out", out])
    capsys.readouterr()

    assert main(["diagram", "--ruleset", RULESET, "--rule", "NoSuchRule", "--out", out]) == 2
    assert "unknown rule" in capsys.readouterr().err

    assert main(["diagram", "--ruleset", RULESET, "--protocol", str(proto),
                 "--select", "nope", "--out", out]) == 2
    assert "bad selection" in capsys.readouterr().err

    assert main(["diagram", "--ruleset", RULESET, "--protocol", str(proto),
                 "--select", "0..99", "--out", out]) == 2
    capsys.readouterr()


def test_diagram_bad_options_file(tmp_path, recorded_run, capsys):
    opts = tmp_path / "opts.json"
    out = str(tmp_path / "x.puml")

    opts.write_text("{nope")
    assert main(["diagram", "--ruleset", RULESET, "--rule", "CompanyToITRule",
                 "--options", str(opts), "--out", out]) == 3

    opts.write_text(json.dumps({"labelMode": "TINY"}))
    assert main(["diagram", "--ruleset", RULESET, "--rule", "CompanyToITRule",
                 "--options", str(opts), "--out", out]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def test_unknown_subcommand():
    _usage_error(["frobnicate"])


def test_serve_requires_input_for_fwd(capsys):
    assert main(["serve", "--ruleset", RULESET, "--mode", "fwd", "--port", "0", "--seed", "1"]) == 2
    assert "--input is required" in capsys.readouterr().err


def test_bwd_accepts_a_target_only_input(tmp_path, grammar, capsys):
    driver = Session.create(grammar, OperationKind.GEN, TripleGraph.empty(), 11)
    driver.run_background(7)
    from .oracles import target_only

    source = tmp_path / "it.triple.json"
    documents.save_path(target_only(driver.triple), source)
    out = tmp_path / "back.triple.json"
    argv = ["bwd", "--ruleset", RULESET, "--input", str(source), "--seed", "2", "--out", str(out)]
    assert main(argv) == 0
    assert "after" in capsys.readouterr().out
