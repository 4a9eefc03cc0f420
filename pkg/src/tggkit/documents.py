"""Loading and saving every model kind as canonical JSON documents.

Every document is an envelope ``{"formatVersion": "1", "kind": ...,
"payload": ...}``.  Saving is canonical: fixed key order, element lists
sorted by id, type lists by name, two-space indent, ``\\n`` line ends,
UTF-8.  Loading a saved document restores a semantically equal object,
and saving that object again reproduces the bytes.

Errors always locate the offending part of the document:
``DocumentError`` carries a JSON path such as
``$.payload.rules[0].nodes[2].type``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .engine import Breakpoint, BreakpointKind, Mode, RuleApplication, Session
from .errors import ArgumentError, DocumentError, ValidationError
from .graph import (
    CorrLink,
    CorrType,
    Domain,
    Edge,
    EdgeType,
    Metamodel,
    Node,
    NodeType,
    TripleGraph,
    TripleMetamodel,
    UpperBound,
    check_conformance,
)
from .matching import Match, compute_match_id
from .rules import Grammar, OperationKind, RuleAnnotation, TGGRule, validate_rule

FORMAT_VERSION = "1"
KINDS = ("METAMODEL", "RULESET", "TRIPLE", "PROTOCOL", "SESSION")


@dataclass(frozen=True)
class ProtocolRecord:
    """A saved run: the operation kind, the starting triple, the steps."""

    kind: OperationKind
    initial: TripleGraph
    applications: tuple[RuleApplication, ...]


# ---------------------------------------------------------------------------
# Typed accessors with JSON paths
# ---------------------------------------------------------------------------


def _obj(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise DocumentError("SCHEMA", path, f"expected an object, found {type(value).__name__}")
    return value


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise DocumentError("SCHEMA", path, f"expected an array, found {type(value).__name__}")
    return value


def _get(obj: dict, key: str, path: str, required: bool = True, default: Any = None) -> Any:
    if key not in obj:
        if required:
            raise DocumentError("SCHEMA", f"{path}.{key}", "required key is missing")
        return default
    return obj[key]


def _str(obj: dict, key: str, path: str, required: bool = True, default: Any = None) -> Any:
    value = _get(obj, key, path, required, default)
    if value is default and not required:
        return value
    if not isinstance(value, str):
        raise DocumentError("SCHEMA", f"{path}.{key}", f"expected a string, found {type(value).__name__}")
    return value


def _bool(obj: dict, key: str, path: str, required: bool = True, default: Any = None) -> Any:
    value = _get(obj, key, path, required, default)
    if value is default and not required:
        return value
    if not isinstance(value, bool):
        raise DocumentError("SCHEMA", f"{path}.{key}", f"expected a boolean, found {type(value).__name__}")
    return value


def _int(obj: dict, key: str, path: str, required: bool = True, default: Any = None) -> Any:
    value = _get(obj, key, path, required, default)
    if value is default and not required:
        return value
    if not isinstance(value, int) or isinstance(value, bool):
        raise DocumentError("SCHEMA", f"{path}.{key}", f"expected an integer, found {type(value).__name__}")
    return value


def _enum(obj: dict, key: str, path: str, enum_cls, required: bool = True, default: Any = None) -> Any:
    value = _str(obj, key, path, required, default)
    if value is default and not required:
        return value
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise DocumentError("SCHEMA", f"{path}.{key}", f"expected one of {allowed}, found {value!r}") from None


# ---------------------------------------------------------------------------
# Metamodel documents
# ---------------------------------------------------------------------------


def _metamodel_payload(meta: TripleMetamodel) -> dict:
    def one(mm: Metamodel) -> dict:
        node_types = []
        for nt in sorted(mm.node_types, key=lambda t: t.name):
            entry: dict[str, Any] = {"name": nt.name, "abstract": nt.abstract}
            if nt.supertype is not None:
                entry["supertype"] = nt.supertype
            node_types.append(entry)
        edge_types = [
            {"name": et.name, "source": et.source, "target": et.target, "upperBound": et.upper_bound.value}
            for et in sorted(mm.edge_types, key=lambda t: t.name)
        ]
        return {"name": mm.name, "nodeTypes": node_types, "edgeTypes": edge_types}

    return {
        "name": meta.name,
        "source": one(meta.source),
        "target": one(meta.target),
        "corrTypes": [
            {"name": ct.name, "source": ct.source, "target": ct.target}
            for ct in sorted(meta.corr_types, key=lambda t: t.name)
        ],
    }


def _load_one_metamodel(payload: dict, path: str) -> Metamodel:
    name = _str(payload, "name", path)
    node_types: list[NodeType] = []
    names: set[str] = set()
    for i, raw in enumerate(_list(_get(payload, "nodeTypes", path), f"{path}.nodeTypes")):
        p = f"{path}.nodeTypes[{i}]"
        entry = _obj(raw, p)
        nt = NodeType(
            name=_str(entry, "name", p),
            abstract=_bool(entry, "abstract", p, required=False, default=False),
            supertype=_str(entry, "supertype", p, required=False),
        )
        if nt.name in names:
            raise DocumentError("REFERENCE", f"{p}.name", f"duplicate node type {nt.name!r}")
        names.add(nt.name)
        node_types.append(nt)
    for i, nt in enumerate(node_types):
        if nt.supertype is not None and nt.supertype not in names:
            raise DocumentError(
                "REFERENCE", f"{path}.nodeTypes[{i}].supertype", f"unknown node type {nt.supertype!r}"
            )
    edge_types: list[EdgeType] = []
    edge_names: set[str] = set()
    for i, raw in enumerate(_list(_get(payload, "edgeTypes", path), f"{path}.edgeTypes")):
        p = f"{path}.edgeTypes[{i}]"
        entry = _obj(raw, p)
        et = EdgeType(
            name=_str(entry, "name", p),
            source=_str(entry, "source", p),
            target=_str(entry, "target", p),
            upper_bound=_enum(entry, "upperBound", p, UpperBound, required=False, default=UpperBound.MANY),
        )
        if et.name in edge_names:
            raise DocumentError("REFERENCE", f"{p}.name", f"duplicate edge type {et.name!r}")
        edge_names.add(et.name)
        for key, ref in (("source", et.source), ("target", et.target)):
            if ref not in names:
                raise DocumentError("REFERENCE", f"{p}.{key}", f"unknown node type {ref!r}")
        edge_types.append(et)
    try:
        return Metamodel(name, node_types, edge_types)
    except ArgumentError as exc:  # e.g. a supertype cycle
        raise DocumentError("REFERENCE", path, str(exc)) from None


def _load_metamodel(payload: dict, path: str) -> TripleMetamodel:
    name = _str(payload, "name", path)
    source = _load_one_metamodel(_obj(_get(payload, "source", path), f"{path}.source"), f"{path}.source")
    target = _load_one_metamodel(_obj(_get(payload, "target", path), f"{path}.target"), f"{path}.target")
    corr_types: list[CorrType] = []
    seen: set[str] = set()
    for i, raw in enumerate(_list(_get(payload, "corrTypes", path), f"{path}.corrTypes")):
        p = f"{path}.corrTypes[{i}]"
        entry = _obj(raw, p)
        ct = CorrType(name=_str(entry, "name", p), source=_str(entry, "source", p), target=_str(entry, "target", p))
        if ct.name in seen:
            raise DocumentError("REFERENCE", f"{p}.name", f"duplicate correspondence type {ct.name!r}")
        seen.add(ct.name)
        if not source.has_node_type(ct.source):
            raise DocumentError("REFERENCE", f"{p}.source", f"unknown source node type {ct.source!r}")
        if not target.has_node_type(ct.target):
            raise DocumentError("REFERENCE", f"{p}.target", f"unknown target node type {ct.target!r}")
        corr_types.append(ct)
    return TripleMetamodel(name, source, target, corr_types)


# ---------------------------------------------------------------------------
# Triple documents
# ---------------------------------------------------------------------------


def _triple_payload(triple: TripleGraph) -> dict:
    nodes = []
    for node in sorted(triple.nodes(), key=lambda n: n.id):
        entry: dict[str, Any] = {"id": node.id, "type": node.type, "domain": triple.domain_of(node.id).value}
        if node.label:
            entry["label"] = node.label
        nodes.append(entry)
    edges = [
        {
            "id": edge.id,
            "type": edge.type,
            "source": edge.source,
            "target": edge.target,
            "domain": triple.domain_of(edge.id).value,
        }
        for edge in sorted(triple.edges(), key=lambda e: e.id)
    ]
    corrs = [
        {"id": corr.id, "type": corr.type, "source": corr.source, "target": corr.target}
        for corr in sorted(triple.corrs(), key=lambda c: c.id)
    ]
    return {"nodes": nodes, "edges": edges, "corrs": corrs}


def _load_triple(payload: dict, path: str, metamodel: TripleMetamodel | None = None) -> TripleGraph:
    triple = TripleGraph()
    ids: set[str] = set()
    node_domain_names = {Domain.SOURCE.value, Domain.TARGET.value}
    for i, raw in enumerate(_list(_get(payload, "nodes", path), f"{path}.nodes")):
        p = f"{path}.nodes[{i}]"
        entry = _obj(raw, p)
        domain_name = _str(entry, "domain", p)
        if domain_name not in node_domain_names:
            raise DocumentError("SCHEMA", f"{p}.domain", f"expected SOURCE or TARGET, found {domain_name!r}")
        node = Node(
            id=_str(entry, "id", p),
            type=_str(entry, "type", p),
            label=_str(entry, "label", p, required=False, default=""),
        )
        if node.id in ids:
            raise DocumentError("REFERENCE", f"{p}.id", f"duplicate element id {node.id!r}")
        ids.add(node.id)
        triple.add_node(node, Domain(domain_name))
    for i, raw in enumerate(_list(_get(payload, "edges", path), f"{path}.edges")):
        p = f"{path}.edges[{i}]"
        entry = _obj(raw, p)
        domain_name = _str(entry, "domain", p)
        if domain_name not in node_domain_names:
            raise DocumentError("SCHEMA", f"{p}.domain", f"expected SOURCE or TARGET, found {domain_name!r}")
        edge = Edge(
            id=_str(entry, "id", p),
            type=_str(entry, "type", p),
            source=_str(entry, "source", p),
            target=_str(entry, "target", p),
        )
        if edge.id in ids:
            raise DocumentError("REFERENCE", f"{p}.id", f"duplicate element id {edge.id!r}")
        ids.add(edge.id)
        for key, ref in (("source", edge.source), ("target", edge.target)):
            if not triple.is_node(ref):
                raise DocumentError("REFERENCE", f"{p}.{key}", f"unknown node id {ref!r}")
        triple.add_edge(edge, Domain(domain_name))
    for i, raw in enumerate(_list(_get(payload, "corrs", path), f"{path}.corrs")):
        p = f"{path}.corrs[{i}]"
        entry = _obj(raw, p)
        corr = CorrLink(
            id=_str(entry, "id", p),
            type=_str(entry, "type", p),
            source=_str(entry, "source", p),
            target=_str(entry, "target", p),
        )
        if corr.id in ids:
            raise DocumentError("REFERENCE", f"{p}.id", f"duplicate element id {corr.id!r}")
        ids.add(corr.id)
        for key, ref in (("source", corr.source), ("target", corr.target)):
            if not triple.is_node(ref):
                raise DocumentError("REFERENCE", f"{p}.{key}", f"unknown node id {ref!r}")
        triple.add_corr(corr)

    if metamodel is not None:
        unknown = _find_unknown_type(triple, metamodel)
        if unknown is not None:
            element_id, type_name = unknown
            raise DocumentError(
                "REFERENCE", path, f"element {element_id!r} references undeclared type {type_name!r}"
            )
        violations = check_conformance(triple, metamodel)
        if violations:
            raise ValidationError(
                "triple does not conform to the metamodel: "
                + "; ".join(f"{v.code} {v.element_ids}" for v in violations),
                violations,
                path=path,
            )
    return triple


def _find_unknown_type(triple: TripleGraph, metamodel: TripleMetamodel) -> tuple[str, str] | None:
    for node in triple.nodes():
        if not metamodel.metamodel(triple.domain_of(node.id)).has_node_type(node.type):
            return node.id, node.type
    for edge in triple.edges():
        if not metamodel.metamodel(triple.domain_of(edge.id)).has_edge_type(edge.type):
            return edge.id, edge.type
    for corr in triple.corrs():
        if not metamodel.has_corr_type(corr.type):
            return corr.id, corr.type
    return None


# ---------------------------------------------------------------------------
# Ruleset documents
# ---------------------------------------------------------------------------


def _ruleset_payload(grammar: Grammar) -> dict:
    rules = []
    for rule in sorted(grammar.rules, key=lambda r: r.name):
        pattern = rule.elements
        nodes = []
        for node in sorted(pattern.nodes(), key=lambda n: n.id):
            entry: dict[str, Any] = {
                "id": node.id,
                "type": node.type,
                "domain": pattern.domain_of(node.id).value,
                "annotation": rule.annotations[node.id].value,
            }
            if node.label:
                entry["label"] = node.label
            nodes.append(entry)
        edges = [
            {
                "id": edge.id,
                "type": edge.type,
                "source": edge.source,
                "target": edge.target,
                "domain": pattern.domain_of(edge.id).value,
                "annotation": rule.annotations[edge.id].value,
            }
            for edge in sorted(pattern.edges(), key=lambda e: e.id)
        ]
        corrs = [
            {
                "id": corr.id,
                "type": corr.type,
                "source": corr.source,
                "target": corr.target,
                "annotation": rule.annotations[corr.id].value,
            }
            for corr in sorted(pattern.corrs(), key=lambda c: c.id)
        ]
        rules.append({"name": rule.name, "nodes": nodes, "edges": edges, "corrs": corrs})
    return {"name": grammar.name, "metamodel": _metamodel_payload(grammar.metamodel), "rules": rules}


def _load_ruleset(payload: dict, path: str) -> Grammar:
    name = _str(payload, "name", path)
    metamodel = _load_metamodel(_obj(_get(payload, "metamodel", path), f"{path}.metamodel"), f"{path}.metamodel")
    rules: list[TGGRule] = []
    rule_names: set[str] = set()
    for i, raw in enumerate(_list(_get(payload, "rules", path), f"{path}.rules")):
        p = f"{path}.rules[{i}]"
        entry = _obj(raw, p)
        rule_name = _str(entry, "name", p)
        if rule_name in rule_names:
            raise DocumentError("REFERENCE", f"{p}.name", f"duplicate rule name {rule_name!r}")
        rule_names.add(rule_name)
        pattern = TripleGraph()
        annotations: dict[str, RuleAnnotation] = {}
        ids: set[str] = set()
        for j, raw_node in enumerate(_list(_get(entry, "nodes", p), f"{p}.nodes")):
            pn = f"{p}.nodes[{j}]"
            node_entry = _obj(raw_node, pn)
            domain = _enum(node_entry, "domain", pn, Domain)
            if domain is Domain.CORRESPONDENCE:
                raise DocumentError("SCHEMA", f"{pn}.domain", "rule nodes live in SOURCE or TARGET")
            node = Node(
                id=_str(node_entry, "id", pn),
                type=_str(node_entry, "type", pn),
                label=_str(node_entry, "label", pn, required=False, default=""),
            )
            if node.id in ids:
                raise DocumentError("REFERENCE", f"{pn}.id", f"duplicate element id {node.id!r}")
            ids.add(node.id)
            pattern.add_node(node, domain)
            annotations[node.id] = _enum(node_entry, "annotation", pn, RuleAnnotation)
        for j, raw_edge in enumerate(_list(_get(entry, "edges", p), f"{p}.edges")):
            pe = f"{p}.edges[{j}]"
            edge_entry = _obj(raw_edge, pe)
            domain = _enum(edge_entry, "domain", pe, Domain)
            if domain is Domain.CORRESPONDENCE:
                raise DocumentError("SCHEMA", f"{pe}.domain", "rule edges live in SOURCE or TARGET")
            edge = Edge(
                id=_str(edge_entry, "id", pe),
                type=_str(edge_entry, "type", pe),
                source=_str(edge_entry, "source", pe),
                target=_str(edge_entry, "target", pe),
            )
            if edge.id in ids:
                raise DocumentError("REFERENCE", f"{pe}.id", f"duplicate element id {edge.id!r}")
            ids.add(edge.id)
            for key, ref in (("source", edge.source), ("target", edge.target)):
                if not pattern.is_node(ref):
                    raise DocumentError("REFERENCE", f"{pe}.{key}", f"unknown element id {ref!r}")
            pattern.add_edge(edge, domain)
            annotations[edge.id] = _enum(edge_entry, "annotation", pe, RuleAnnotation)
        for j, raw_corr in enumerate(_list(_get(entry, "corrs", p), f"{p}.corrs")):
            pc = f"{p}.corrs[{j}]"
            corr_entry = _obj(raw_corr, pc)
            corr = CorrLink(
                id=_str(corr_entry, "id", pc),
                type=_str(corr_entry, "type", pc),
                source=_str(corr_entry, "source", pc),
                target=_str(corr_entry, "target", pc),
            )
            if corr.id in ids:
                raise DocumentError("REFERENCE", f"{pc}.id", f"duplicate element id {corr.id!r}")
            ids.add(corr.id)
            for key, ref in (("source", corr.source), ("target", corr.target)):
                if not pattern.is_node(ref):
                    raise DocumentError("REFERENCE", f"{pc}.{key}", f"unknown element id {ref!r}")
            pattern.add_corr(corr)
            annotations[corr.id] = _enum(corr_entry, "annotation", pc, RuleAnnotation)
        rules.append(TGGRule(name=rule_name, elements=pattern, annotations=annotations))

    grammar = Grammar(name=name, metamodel=metamodel, rules=tuple(rules))
    all_violations = []
    for i, rule in enumerate(grammar.rules):
        violations = validate_rule(rule, metamodel)
        if violations:
            all_violations.extend(violations)
    if all_violations:
        raise ValidationError(
            "ruleset contains invalid rules: " + "; ".join(f"{v.code} {v.element_ids}" for v in all_violations),
            all_violations,
            path=f"{path}.rules",
        )
    return grammar


# ---------------------------------------------------------------------------
# Protocol and session documents
# ---------------------------------------------------------------------------


def _application_payload(app: RuleApplication) -> dict:
    return {
        "appId": app.app_id,
        "rule": app.rule_name,
        "kind": app.kind.value,
        "matchId": app.match.match_id,
        "mapping": {k: app.match.mapping[k] for k in sorted(app.match.mapping)},
        "created": list(app.created_ids),
        "marked": list(app.marked_ids),
    }


def _load_application(entry: dict, path: str, kind: OperationKind, step_index: int) -> RuleApplication:
    app_id = _int(entry, "appId", path)
    rule_name = _str(entry, "rule", path)
    app_kind = _enum(entry, "kind", path, OperationKind)
    if app_kind is not kind:
        raise DocumentError("REFERENCE", f"{path}.kind", f"application kind {app_kind.value} differs from run kind {kind.value}")
    raw_mapping = _obj(_get(entry, "mapping", path), f"{path}.mapping")
    mapping: dict[str, str] = {}
    for key, value in raw_mapping.items():
        if not isinstance(value, str):
            raise DocumentError("SCHEMA", f"{path}.mapping.{key}", "mapping values must be strings")
        mapping[key] = value
    match_id = _str(entry, "matchId", path)
    expected = compute_match_id(rule_name, kind, mapping)
    if match_id != expected:
        raise DocumentError("REFERENCE", f"{path}.matchId", "match id does not digest its rule and mapping")
    created = _list(_get(entry, "created", path), f"{path}.created")
    marked = _list(_get(entry, "marked", path), f"{path}.marked")
    for seq, key in ((created, "created"), (marked, "marked")):
        for value in seq:
            if not isinstance(value, str):
                raise DocumentError("SCHEMA", f"{path}.{key}", "element ids must be strings")
    return RuleApplication(
        app_id=app_id,
        rule_name=rule_name,
        kind=kind,
        match=Match(match_id=match_id, rule_name=rule_name, kind=kind, mapping=mapping),
        created_ids=tuple(created),
        marked_ids=tuple(marked),
        step_index=step_index,
    )


def _protocol_payload(record: ProtocolRecord) -> dict:
    return {
        "kind": record.kind.value,
        "initialTriple": _triple_payload(record.initial),
        "applications": [_application_payload(app) for app in record.applications],
    }


def _load_protocol(payload: dict, path: str) -> ProtocolRecord:
    kind = _enum(payload, "kind", path, OperationKind)
    initial = _load_triple(_obj(_get(payload, "initialTriple", path), f"{path}.initialTriple"), f"{path}.initialTriple")
    applications = []
    for i, raw in enumerate(_list(_get(payload, "applications", path), f"{path}.applications")):
        p = f"{path}.applications[{i}]"
        applications.append(_load_application(_obj(raw, p), p, kind, i))
    return ProtocolRecord(kind=kind, initial=initial, applications=tuple(applications))


def _session_payload(session: Session) -> dict:
    breakpoints = []
    for bp in session.breakpoints:
        entry: dict[str, Any] = {"kind": bp.kind.value}
        if bp.rule is not None:
            entry["rule"] = bp.rule
        if bp.count is not None:
            entry["count"] = bp.count
        entry["enabled"] = bp.enabled
        breakpoints.append(entry)
    return {
        "kind": session.kind.value,
        "mode": session.mode.value,
        "ruleset": _ruleset_payload(session.grammar),
        "initialTriple": _triple_payload(session.initial_triple),
        "applications": [_application_payload(app) for app in session.protocol],
        "everApplicable": {
            status.rule_name: status.ever_applicable for status in session.statuses()
        },
        "breakpoints": breakpoints,
        "rng": {"seed": session.rng.seed, "state": session.rng.state},
        "nextId": session._next_id,
    }


def _load_session(payload: dict, path: str) -> Session:
    kind = _enum(payload, "kind", path, OperationKind)
    mode = _enum(payload, "mode", path, Mode)
    grammar = _load_ruleset(_obj(_get(payload, "ruleset", path), f"{path}.ruleset"), f"{path}.ruleset")
    initial = _load_triple(
        _obj(_get(payload, "initialTriple", path), f"{path}.initialTriple"),
        f"{path}.initialTriple",
        metamodel=grammar.metamodel,
    )
    applications = []
    for i, raw in enumerate(_list(_get(payload, "applications", path), f"{path}.applications")):
        p = f"{path}.applications[{i}]"
        applications.append(_load_application(_obj(raw, p), p, kind, i))
    known_rules = set(grammar.rule_names)
    for app in applications:
        if app.rule_name not in known_rules:
            raise DocumentError(
                "REFERENCE", f"{path}.applications[{app.step_index}].rule", f"unknown rule {app.rule_name!r}"
            )

    ever_raw = _obj(_get(payload, "everApplicable", path), f"{path}.everApplicable")
    ever: dict[str, bool] = {}
    for rule_name, flag in ever_raw.items():
        if rule_name not in known_rules:
            raise DocumentError("REFERENCE", f"{path}.everApplicable.{rule_name}", f"unknown rule {rule_name!r}")
        if not isinstance(flag, bool):
            raise DocumentError("SCHEMA", f"{path}.everApplicable.{rule_name}", "expected a boolean")
        ever[rule_name] = flag

    breakpoints: list[Breakpoint] = []
    for i, raw in enumerate(_list(_get(payload, "breakpoints", path), f"{path}.breakpoints")):
        p = f"{path}.breakpoints[{i}]"
        entry = _obj(raw, p)
        bp = Breakpoint(
            kind=_enum(entry, "kind", p, BreakpointKind),
            rule=_str(entry, "rule", p, required=False),
            count=_int(entry, "count", p, required=False),
            enabled=_bool(entry, "enabled", p, required=False, default=True),
        )
        if bp.kind is not BreakpointKind.STEP_COUNT and (bp.rule is None or bp.rule not in known_rules):
            raise DocumentError("REFERENCE", f"{p}.rule", f"unknown rule {bp.rule!r}")
        if bp.kind is BreakpointKind.STEP_COUNT and (bp.count is None or bp.count < 0):
            raise DocumentError("SCHEMA", f"{p}.count", "STEP_COUNT needs a non-negative count")
        breakpoints.append(bp)

    rng_entry = _obj(_get(payload, "rng", path), f"{path}.rng")
    seed = _int(rng_entry, "seed", f"{path}.rng")
    state = _int(rng_entry, "state", f"{path}.rng")
    next_id = _int(payload, "nextId", path)

    try:
        return Session.restore(
            grammar=grammar,
            kind=kind,
            initial=initial,
            applications=applications,
            ever_applicable=ever,
            breakpoints=breakpoints,
            seed=seed,
            rng_state=state,
            next_id=next_id,
            mode=mode,
        )
    except ArgumentError as exc:
        raise DocumentError("REFERENCE", f"{path}.applications", f"protocol does not replay: {exc}") from None


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def save(obj) -> bytes:
    """Canonical JSON bytes for any supported model object."""
    if isinstance(obj, TripleMetamodel):
        kind, payload = "METAMODEL", _metamodel_payload(obj)
    elif isinstance(obj, Grammar):
        kind, payload = "RULESET", _ruleset_payload(obj)
    elif isinstance(obj, TripleGraph):
        kind, payload = "TRIPLE", _triple_payload(obj)
    elif isinstance(obj, ProtocolRecord):
        kind, payload = "PROTOCOL", _protocol_payload(obj)
    elif isinstance(obj, Session):
        kind, payload = "SESSION", _session_payload(obj)
    else:
        raise ArgumentError(f"cannot serialize {type(obj).__name__}")
    document = {"formatVersion": FORMAT_VERSION, "kind": kind, "payload": payload}
    return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def load(data: bytes | str, expected_kind: str | None = None, metamodel: TripleMetamodel | None = None):
    """Parse and fully validate a document, returning the model object.

    ``metamodel`` makes TRIPLE documents conformance-checked against it.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError("PARSE", "$", f"not valid UTF-8: {exc}") from None
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError("PARSE", "$", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None

    document = _obj(raw, "$")
    version = _str(document, "formatVersion", "$")
    if version != FORMAT_VERSION:
        raise DocumentError("VERSION", "$.formatVersion", f"unsupported format version {version!r}")
    kind = _str(document, "kind", "$")
    if kind not in KINDS:
        raise DocumentError("SCHEMA", "$.kind", f"unknown document kind {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise DocumentError("KIND", "$.kind", f"expected a {expected_kind} document, found {kind}")
    payload = _obj(_get(document, "payload", "$"), "$.payload")

    if kind == "METAMODEL":
        return _load_metamodel(payload, "$.payload")
    if kind == "RULESET":
        return _load_ruleset(payload, "$.payload")
    if kind == "TRIPLE":
        return _load_triple(payload, "$.payload", metamodel=metamodel)
    if kind == "PROTOCOL":
        return _load_protocol(payload, "$.payload")
    return _load_session(payload, "$.payload")


def save_path(obj, path) -> None:
    with open(path, "wb") as handle:
        handle.write(save(obj))


def load_path(path, expected_kind: str | None = None, metamodel: TripleMetamodel | None = None):
    with open(path, "rb") as handle:
        return load(handle.read(), expected_kind=expected_kind, metamodel=metamodel)
