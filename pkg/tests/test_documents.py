from __future__ import annotations

import json

import pytest

from tggkit.documents import ProtocolRecord, load, load_path, save, save_path
from tggkit.engine import Session
from tggkit.errors import ArgumentError, DocumentError, ValidationError
from tggkit.graph import Domain, Edge, Node, TripleGraph
from tggkit.rules import OperationKind

from .conftest import METAMODEL_PATH, RULESET_PATH, TRIPLE_PATH


def _fwd_record(grammar, two_admins, seed=9) -> tuple[Session, ProtocolRecord]:
    session = Session.create(grammar, OperationKind.FWD, two_admins, seed)
    session.run_background(100)
    record = ProtocolRecord(kind=session.kind, initial=session.initial_triple, applications=tuple(session.protocol))
    return session, record


def _mutate(data: bytes, fn) -> bytes:
    document = json.loads(data)
    fn(document)
    return json.dumps(document).encode()


# ---------------------------------------------------------------------------
# Round trips
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("path", [METAMODEL_PATH, RULESET_PATH, TRIPLE_PATH])
def test_fixture_documents_double_save_byte_stable(path):
    first = save(load(path.read_bytes()))
    assert save(load(first)) == first


def test_triple_round_trip_is_semantically_lossless(two_admins, metamodel):
    restored = load(save(two_admins), expected_kind="TRIPLE", metamodel=metamodel)
    assert restored == two_admins
    assert restored.domain_of("a1") is Domain.SOURCE


def test_protocol_round_trip(grammar, two_admins):
    _, record = _fwd_record(grammar, two_admins)
    data = save(record)
    restored = load(data, expected_kind="PROTOCOL")
    assert restored.kind is record.kind
    assert restored.applications == record.applications
    assert restored.initial == record.initial
    assert save(restored) == data


def test_session_round_trip(grammar, two_admins):
    session, _ = _fwd_record(grammar, two_admins)
    data = save(session)
    restored = load(data, expected_kind="SESSION")
    assert restored.protocol == session.protocol
    assert restored.triple == session.triple
    assert restored.marking.source == session.marking.source
    assert save(restored) == data


def test_empty_triple_round_trip():
    data = save(TripleGraph.empty())
    assert load(data, expected_kind="TRIPLE").is_empty
    assert save(load(data)) == data


def test_saving_ignores_insertion_order():
    a, b = TripleGraph(), TripleGraph()
    a.add_node(Node("n1", "Company"), Domain.SOURCE)
    a.add_node(Node("n2", "CEO"), Domain.SOURCE)
    a.add_edge(Edge("ed", "ceo", "n1", "n2"), Domain.SOURCE)
    b.add_node(Node("n2", "CEO"), Domain.SOURCE)
    b.add_node(Node("n1", "Company"), Domain.SOURCE)
    b.add_edge(Edge("ed", "ceo", "n1", "n2"), Domain.SOURCE)
    assert save(a) == save(b)


def test_documents_are_tidy_utf8_json():
    data = save(TripleGraph.empty())
    assert data.endswith(b"\n")
    text = data.decode("utf-8")
    assert text.startswith('{\n  "formatVersion": "1"')
    assert json.loads(text)["kind"] == "TRIPLE"


def test_save_rejects_foreign_objects():
    with pytest.raises(ArgumentError, match="serialize"):
        save({"not": "a model"})


def test_path_helpers(tmp_path, two_admins, metamodel):
    out = tmp_path / "t.triple.json"
    save_path(two_admins, out)
    assert load_path(out, expected_kind="TRIPLE", metamodel=metamodel) == two_admins


# ---------------------------------------------------------------------------
# Envelope errors
# ---------------------------------------------------------------------------


def _expect_error(data, code, path_fragment, message_fragment="", **kwargs):
    with pytest.raises(DocumentError) as caught:
        load(data, **kwargs)
    err = caught.value
    assert err.code == code
    assert path_fragment in err.path
    assert message_fragment in str(err)
    return err


def test_not_utf8():
    _expect_error(b"\xff\xfe{}", "PARSE", "$", "UTF-8")


def test_broken_json_reports_the_location():
    err = _expect_error(b'{\n  "formatVersion": }', "PARSE", "$", "line 2")
    assert "column" in str(err)


def test_root_must_be_an_object():
    _expect_error(b"[1, 2]", "SCHEMA", "$")


def test_unsupported_format_version(two_admins):
    data = _mutate(save(two_admins), lambda d: d.update(formatVersion="99"))
    _expect_error(data, "VERSION", "$.formatVersion", "99")


def test_missing_format_version(two_admins):
    data = _mutate(save(two_admins), lambda d: d.pop("formatVersion"))
    _expect_error(data, "SCHEMA", "$")


def test_unknown_document_kind(two_admins):
    data = _mutate(save(two_admins), lambda d: d.update(kind="BANANA"))
    _expect_error(data, "SCHEMA", "$.kind", "BANANA")


def test_kind_mismatch_is_its_own_error(two_admins):
    _expect_error(save(two_admins), "KIND", "$.kind", "expected a RULESET", expected_kind="RULESET")


def test_payload_must_be_an_object(two_admins):
    data = _mutate(save(two_admins), lambda d: d.update(payload=3))
    _expect_error(data, "SCHEMA", "$.payload")


# ---------------------------------------------------------------------------
# Triple payload errors
# ---------------------------------------------------------------------------


def test_duplicate_element_id(two_admins):
    def tamper(d):
        d["payload"]["nodes"][1]["id"] = d["payload"]["nodes"][0]["id"]

    _expect_error(_mutate(save(two_admins), tamper), "REFERENCE", "$.payload.nodes[1].id", "duplicate")


def test_edge_with_unknown_endpoint(two_admins):
    def tamper(d):
        d["payload"]["edges"][0]["target"] = "ghost"

    _expect_error(_mutate(save(two_admins), tamper), "REFERENCE", "$.payload.edges[0].target", "ghost")


def test_bad_domain_value(two_admins):
    def tamper(d):
        d["payload"]["nodes"][0]["domain"] = "MIDDLE"

    _expect_error(_mutate(save(two_admins), tamper), "SCHEMA", ".domain", "MIDDLE")


def test_undeclared_type_needs_a_metamodel(two_admins, metamodel):
    def tamper(d):
        d["payload"]["nodes"][0]["type"] = "Printer"

    data = _mutate(save(two_admins), tamper)
    load(data)  # structurally fine without a metamodel
    _expect_error(data, "REFERENCE", "$.payload", "undeclared type 'Printer'", metamodel=metamodel)


def test_nonconformant_triple_with_metamodel(two_admins, metamodel):
    def tamper(d):
        d["payload"]["edges"].append(
            {"id": "ed9", "type": "ceo", "source": "c1", "target": "a1", "domain": "SOURCE"}
        )

    data = _mutate(save(two_admins), tamper)
    with pytest.raises(ValidationError, match="conform"):
        load(data, metamodel=metamodel)


# ---------------------------------------------------------------------------
# Protocol and session payload errors
# ---------------------------------------------------------------------------


def test_tampered_match_id_is_rejected(grammar, two_admins):
    _, record = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["applications"][0]["matchId"] = "CompanyToITRule#0000000000000000"

    _expect_error(
        _mutate(save(record), tamper), "REFERENCE", "applications[0].matchId", "does not digest"
    )


def test_tampered_mapping_is_rejected_by_the_digest(grammar, two_admins):
    _, record = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["applications"][0]["mapping"]["company"] = "ceo1"

    _expect_error(_mutate(save(record), tamper), "REFERENCE", "applications[0].matchId")


def test_application_kind_must_match_the_run(grammar, two_admins):
    _, record = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["applications"][0]["kind"] = "GEN"

    _expect_error(_mutate(save(record), tamper), "REFERENCE", "applications[0].kind", "differs")


def test_session_with_unreplayable_protocol(grammar, two_admins):
    session, _ = _fwd_record(grammar, two_admins)

    def tamper(d):
        apps = d["payload"]["applications"]
        apps[1]["created"] = apps[0]["created"]  # collide fresh ids

    _expect_error(_mutate(save(session), tamper), "REFERENCE", "applications", "replay")


def test_session_with_wrong_created_arity(grammar, two_admins):
    session, _ = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["applications"][0]["created"].append("e999")

    _expect_error(_mutate(save(session), tamper), "REFERENCE", "applications", "replay")


def test_session_ever_applicable_names_must_be_rules(grammar, two_admins):
    session, _ = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["everApplicable"]["GhostRule"] = True

    _expect_error(_mutate(save(session), tamper), "REFERENCE", "everApplicable.GhostRule", "GhostRule")


def test_session_breakpoint_rule_must_exist(grammar, two_admins):
    session, _ = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["breakpoints"].append({"kind": "RULE_ABOUT_TO_APPLY", "rule": "GhostRule"})

    _expect_error(_mutate(save(session), tamper), "REFERENCE", "breakpoints[0].rule", "GhostRule")


def test_session_step_count_breakpoint_needs_a_count(grammar, two_admins):
    session, _ = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["breakpoints"].append({"kind": "STEP_COUNT"})

    _expect_error(_mutate(save(session), tamper), "SCHEMA", "breakpoints[0].count", "count")


def test_protocol_initial_triple_is_fully_checked(grammar, two_admins):
    _, record = _fwd_record(grammar, two_admins)

    def tamper(d):
        d["payload"]["initialTriple"]["edges"][0]["source"] = "ghost"

    _expect_error(
        _mutate(save(record), tamper), "REFERENCE", "$.payload.initialTriple.edges[0].source", "ghost"
    )


def test_error_paths_always_start_at_the_root(grammar, two_admins):
    session, record = _fwd_record(grammar, two_admins)
    tampers = [
        (save(record), lambda d: d["payload"].pop("applications")),
        (save(session), lambda d: d["payload"].pop("rng")),
        (save(session), lambda d: d["payload"]["rng"].pop("state")),
        (save(two_admins), lambda d: d["payload"].pop("nodes")),
    ]
    for data, fn in tampers:
        with pytest.raises(DocumentError) as caught:
            load(_mutate(data, fn))
        assert caught.value.path.startswith("$")
