"""Declarative triple rules and their operational forms.

A rule is a triple graph whose elements are annotated either GREEN
(created by the rule) or BLACK (required context).  One declarative rule
yields three operational forms:

* GEN  -- match the BLACK context, create every GREEN element.
* FWD  -- treat GREEN source elements as context that gets *marked*
          (translated), create the GREEN correspondence/target elements.
* BWD  -- the mirror image of FWD.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import ArgumentError, ValidationError
from .graph import (
    CorrLink,
    Domain,
    Edge,
    Metamodel,
    Node,
    TripleGraph,
    TripleMetamodel,
    Violation,
)


class RuleAnnotation(Enum):
    GREEN = "GREEN"
    BLACK = "BLACK"


class OperationKind(Enum):
    GEN = "GEN"
    FWD = "FWD"
    BWD = "BWD"


@dataclass(frozen=True)
class TGGRule:
    """A named rule pattern with one annotation per element."""

    name: str
    elements: TripleGraph
    annotations: Mapping[str, RuleAnnotation]

    def annotation(self, element_id: str) -> RuleAnnotation:
        return self.annotations[element_id]


@dataclass(frozen=True)
class Grammar:
    """A triple metamodel together with the rules that operate on it."""

    name: str
    metamodel: TripleMetamodel
    rules: tuple[TGGRule, ...]

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(names) != len(set(names)):
            raise ArgumentError("rule names must be unique within a grammar")

    def rule(self, name: str) -> TGGRule:
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(f"unknown rule {name!r}")

    @property
    def rule_names(self) -> tuple[str, ...]:
        return tuple(sorted(r.name for r in self.rules))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _structural_violations(rule: TGGRule) -> list[Violation]:
    """Checks that need no metamodel: annotations, closure, effect."""
    violations: list[Violation] = []
    pattern = rule.elements

    for eid in pattern.element_ids():
        if eid not in rule.annotations:
            violations.append(
                Violation("MISSING_ANNOTATION", (eid,), f"rule element {eid!r} carries no annotation")
            )
    for eid in rule.annotations:
        if not pattern.has(eid):
            violations.append(
                Violation("UNKNOWN_ELEMENT", (eid,), f"annotation references unknown element {eid!r}")
            )

    def ann(eid: str) -> RuleAnnotation | None:
        return rule.annotations.get(eid)

    # a BLACK link whose endpoint is GREEN can never be matched as context
    for edge in pattern.edges():
        for end in (edge.source, edge.target):
            if not pattern.has(end):
                violations.append(
                    Violation("DANGLING_EDGE", (edge.id,), f"rule edge {edge.id!r} endpoint {end!r} is missing")
                )
            elif ann(edge.id) is RuleAnnotation.BLACK and ann(end) is RuleAnnotation.GREEN:
                violations.append(
                    Violation(
                        "CONTEXT_CLOSURE",
                        (edge.id, end),
                        f"context edge {edge.id!r} depends on created element {end!r}",
                    )
                )
    for corr in pattern.corrs():
        for end in (corr.source, corr.target):
            if not pattern.has(end):
                violations.append(
                    Violation("DANGLING_CORR", (corr.id,), f"rule correspondence {corr.id!r} endpoint {end!r} is missing")
                )
            elif ann(corr.id) is RuleAnnotation.BLACK and ann(end) is RuleAnnotation.GREEN:
                violations.append(
                    Violation(
                        "CONTEXT_CLOSURE",
                        (corr.id, end),
                        f"context correspondence {corr.id!r} depends on created element {end!r}",
                    )
                )

    if not any(a is RuleAnnotation.GREEN for a in rule.annotations.values()):
        violations.append(Violation("NO_EFFECT", (), f"rule {rule.name!r} creates nothing"))

    return violations


def validate_rule(rule: TGGRule, metamodel: TripleMetamodel) -> list[Violation]:
    """Every way in which the rule breaks its invariants, or an empty list."""
    violations = _structural_violations(rule)
    pattern = rule.elements

    for node in pattern.nodes():
        mm = metamodel.metamodel(pattern.domain_of(node.id))
        if not mm.has_node_type(node.type):
            violations.append(
                Violation("UNKNOWN_TYPE", (node.id,), f"rule node {node.id!r} has undeclared type {node.type!r}")
            )
        elif mm.node_type(node.type).abstract:
            violations.append(
                Violation(
                    "ABSTRACT_TYPE",
                    (node.id,),
                    f"rule node {node.id!r} has abstract type {node.type!r}; rule nodes must be concrete",
                )
            )

    for edge in pattern.edges():
        domain = pattern.domain_of(edge.id)
        mm = metamodel.metamodel(domain)
        if not mm.has_edge_type(edge.type):
            violations.append(
                Violation("UNKNOWN_TYPE", (edge.id,), f"rule edge {edge.id!r} has undeclared type {edge.type!r}")
            )
            continue
        et = mm.edge_type(edge.type)
        for end, declared in ((edge.source, et.source), (edge.target, et.target)):
            if not pattern.is_node(end) or pattern.domain_of(end) is not domain:
                continue  # reported structurally
            end_type = pattern.node(end).type
            if mm.has_node_type(end_type) and not mm.subtype_of(end_type, declared):
                violations.append(
                    Violation(
                        "TYPE_MISMATCH",
                        (edge.id,),
                        f"rule edge {edge.id!r} endpoint {end!r} has type {end_type!r}, expected {declared!r}",
                    )
                )

    for corr in pattern.corrs():
        if not metamodel.has_corr_type(corr.type):
            violations.append(
                Violation("UNKNOWN_TYPE", (corr.id,), f"rule correspondence {corr.id!r} has undeclared type {corr.type!r}")
            )
            continue
        ct = metamodel.corr_type(corr.type)
        for end, declared, mm, domain in (
            (corr.source, ct.source, metamodel.source, Domain.SOURCE),
            (corr.target, ct.target, metamodel.target, Domain.TARGET),
        ):
            if not pattern.is_node(end) or pattern.domain_of(end) is not domain:
                continue
            end_type = pattern.node(end).type
            if mm.has_node_type(end_type) and not mm.subtype_of(end_type, declared):
                violations.append(
                    Violation(
                        "TYPE_MISMATCH",
                        (corr.id,),
                        f"rule correspondence {corr.id!r} endpoint {end!r} has type {end_type!r}, expected {declared!r}",
                    )
                )

    return violations


# ---------------------------------------------------------------------------
# Operationalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperationalRule:
    """One rule compiled for one operation kind.

    ``context_ids`` is the pattern the matcher must find, ``to_mark_ids``
    the context subset an application marks as translated, and
    ``to_create_ids`` the elements an application instantiates fresh.
    ``created_order`` fixes the deterministic order in which fresh ids
    are assigned (and recorded in the protocol).
    """

    name: str
    kind: OperationKind
    rule: TGGRule
    context_ids: frozenset[str]
    to_mark_ids: frozenset[str]
    to_create_ids: frozenset[str]
    created_order: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "created_order", tuple(sorted(self.to_create_ids)))


def operationalize(rule: TGGRule, kind: OperationKind) -> OperationalRule:
    """Compile a declarative rule into its GEN, FWD, or BWD form."""
    structural = _structural_violations(rule)
    if structural:
        raise ValidationError(
            f"rule {rule.name!r} is not operationalizable", structural
        )

    pattern = rule.elements
    green = {eid for eid, a in rule.annotations.items() if a is RuleAnnotation.GREEN}
    black = {eid for eid, a in rule.annotations.items() if a is RuleAnnotation.BLACK}

    if kind is OperationKind.GEN:
        context, mark, create = black, set(), green
    elif kind is OperationKind.FWD:
        green_src = {eid for eid in green if pattern.domain_of(eid) is Domain.SOURCE}
        context = black | green_src
        mark = green_src
        create = green - green_src
    elif kind is OperationKind.BWD:
        green_tgt = {eid for eid in green if pattern.domain_of(eid) is Domain.TARGET}
        context = black | green_tgt
        mark = green_tgt
        create = green - green_tgt
    else:
        raise ArgumentError(f"unknown operation kind {kind!r}")

    return OperationalRule(
        name=rule.name,
        kind=kind,
        rule=rule,
        context_ids=frozenset(context),
        to_mark_ids=frozenset(mark),
        to_create_ids=frozenset(create),
    )
