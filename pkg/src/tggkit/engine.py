"""The transformation engine: sessions, rule application, protocol, replay.

A session owns one triple graph being transformed by one grammar in one
operation kind.  Every state change flows through a rule application,
every application is appended to the protocol, and replaying a protocol
prefix from the initial triple reproduces the intermediate state exactly
-- including the generated element ids.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import ArgumentError, NoMatchError, StaleMatchError, ValidationError
from .graph import CorrLink, Domain, Edge, Node, TripleGraph, check_conformance
from .matching import Match, MarkingState, find_matches
from .rng import SplitMix64
from .rules import Grammar, OperationalRule, OperationKind, operationalize, validate_rule


class Mode(Enum):
    BACKGROUND = "BACKGROUND"
    DEBUG = "DEBUG"


class HaltReason(Enum):
    EXHAUSTED = "EXHAUSTED"
    BREAKPOINT = "BREAKPOINT"
    MAX_STEPS = "MAX_STEPS"


class BreakpointKind(Enum):
    RULE_FIRST_APPLICABLE = "RULE_FIRST_APPLICABLE"
    RULE_ABOUT_TO_APPLY = "RULE_ABOUT_TO_APPLY"
    STEP_COUNT = "STEP_COUNT"


@dataclass(frozen=True)
class Breakpoint:
    kind: BreakpointKind
    rule: str | None = None
    count: int | None = None
    enabled: bool = True

    def key(self) -> tuple:
        return (self.kind, self.rule, self.count)


@dataclass(frozen=True)
class RuleApplication:
    """One executed rule application, as recorded in the protocol."""

    app_id: int
    rule_name: str
    kind: OperationKind
    match: Match
    created_ids: tuple[str, ...]
    marked_ids: tuple[str, ...]
    step_index: int


@dataclass(frozen=True)
class RuleStatus:
    rule_name: str
    current_match_count: int
    applied_count: int
    ever_applicable: bool


@dataclass(frozen=True)
class DataPackage:
    """A self-contained snapshot of everything a debugger front end shows."""

    last_application: RuleApplication | None
    statuses: tuple[RuleStatus, ...]
    available_matches: Mapping[str, tuple[Match, ...]]
    protocol_length: int
    mode: Mode
    halt_reason: HaltReason | None = None
    warnings: tuple[str, ...] = ()


_ENGINE_ID = re.compile(r"^e(\d+)$")


def _instantiate(
    op: OperationalRule,
    mapping: Mapping[str, str],
    created_ids: Sequence[str],
    triple: TripleGraph,
    marking: MarkingState,
) -> tuple[str, ...]:
    """Create the rule's fresh elements and mark its translated context.

    ``created_ids`` must align with ``op.created_order``.  Mutates
    ``triple`` and ``marking``; returns the marked host ids in
    deterministic (sorted pattern id) order.
    """
    pattern = op.rule.elements
    image = dict(mapping)
    for rule_id, fresh_id in zip(op.created_order, created_ids):
        image[rule_id] = fresh_id

    for rule_id, fresh_id in zip(op.created_order, created_ids):
        if pattern.is_node(rule_id):
            template = pattern.node(rule_id)
            triple.add_node(Node(fresh_id, template.type, template.label), pattern.domain_of(rule_id))
    for rule_id, fresh_id in zip(op.created_order, created_ids):
        if pattern.is_edge(rule_id):
            template = pattern.edge(rule_id)
            triple.add_edge(
                Edge(fresh_id, template.type, image[template.source], image[template.target]),
                pattern.domain_of(rule_id),
            )
        elif pattern.is_corr(rule_id):
            template = pattern.corr(rule_id)
            triple.add_corr(CorrLink(fresh_id, template.type, image[template.source], image[template.target]))

    marked: list[str] = []
    if op.to_mark_ids:
        marked_set = marking.for_domain(Domain.SOURCE if op.kind is OperationKind.FWD else Domain.TARGET)
        for rule_id in sorted(op.to_mark_ids):
            host_id = mapping[rule_id]
            assert host_id not in marked_set, f"element {host_id!r} marked twice"
            marked_set.add(host_id)
            marked.append(host_id)
    return tuple(marked)


def replay(
    grammar: Grammar,
    kind: OperationKind,
    initial: TripleGraph,
    applications: Sequence[RuleApplication],
    upto: int | None = None,
) -> tuple[TripleGraph, MarkingState]:
    """Re-execute a protocol prefix from the initial triple.

    ``upto`` is the prefix length (number of applications); ``None``
    replays everything.  Ids are reproduced exactly as recorded.
    """
    if upto is None:
        upto = len(applications)
    if not 0 <= upto <= len(applications):
        raise ArgumentError(f"prefix length {upto} out of range 0..{len(applications)}")
    ops = {rule.name: operationalize(rule, kind) for rule in grammar.rules}
    triple = initial.copy()
    marking = MarkingState.empty()
    for app in applications[:upto]:
        if app.rule_name not in ops:
            raise ArgumentError(f"protocol references unknown rule {app.rule_name!r}")
        op = ops[app.rule_name]
        if len(app.created_ids) != len(op.created_order):
            raise ArgumentError(
                f"application {app.app_id} records {len(app.created_ids)} created ids,"
                f" rule {app.rule_name!r} creates {len(op.created_order)}"
            )
        if not op.context_ids <= app.match.mapping.keys():
            raise ArgumentError(f"application {app.app_id} does not map the full rule context")
        _instantiate(op, app.match.mapping, app.created_ids, triple, marking)
    return triple, marking


class Session:
    """One interactive transformation run.

    All mutation goes through :meth:`apply_match` (directly or via the
    random/background drivers), so the protocol is always a faithful,
    replayable account of how the current triple came to be.
    """

    def __init__(self):
        raise TypeError("use Session.create() or Session.restore()")

    @classmethod
    def create(cls, grammar: Grammar, kind: OperationKind, input_triple: TripleGraph, seed: int) -> Session:
        for rule in grammar.rules:
            violations = validate_rule(rule, grammar.metamodel)
            if violations:
                raise ValidationError(f"rule {rule.name!r} is invalid", violations)

        if kind is OperationKind.GEN:
            if not input_triple.is_empty:
                raise ArgumentError("generation starts from the empty triple")
        elif kind is OperationKind.FWD:
            if next(input_triple.nodes(Domain.TARGET), None) is not None or next(
                input_triple.edges(Domain.TARGET), None
            ) is not None or next(input_triple.corrs(), None) is not None:
                raise ArgumentError("forward transformation input must have empty target and correspondence domains")
        elif kind is OperationKind.BWD:
            if next(input_triple.nodes(Domain.SOURCE), None) is not None or next(
                input_triple.edges(Domain.SOURCE), None
            ) is not None or next(input_triple.corrs(), None) is not None:
                raise ArgumentError("backward transformation input must have empty source and correspondence domains")
        else:
            raise ArgumentError(f"unknown operation kind {kind!r}")

        violations = check_conformance(input_triple, grammar.metamodel)
        if violations:
            raise ValidationError("input triple does not conform to the metamodel", violations)

        session = object.__new__(cls)
        session._init(grammar, kind, input_triple, seed)
        return session

    def _init(self, grammar: Grammar, kind: OperationKind, input_triple: TripleGraph, seed: int) -> None:
        self.grammar = grammar
        self.kind = kind
        self.initial_triple = input_triple.copy()
        self.triple = input_triple.copy()
        self.marking = MarkingState.empty()
        self.protocol: list[RuleApplication] = []
        self.mode = Mode.DEBUG
        self.breakpoints: list[Breakpoint] = []
        self.rng = SplitMix64(seed)
        self._ops: dict[str, OperationalRule] = {
            rule.name: operationalize(rule, kind) for rule in grammar.rules
        }
        self._applied: dict[str, int] = {name: 0 for name in self._ops}
        self._ever: dict[str, bool] = {name: False for name in self._ops}
        self._available: dict[str, list[Match]] = {}
        self._next_id = 1 + max(
            (int(m.group(1)) for eid in input_triple.element_ids() if (m := _ENGINE_ID.match(eid))),
            default=0,
        )
        self._recompute()

    # -- bookkeeping ---------------------------------------------------------

    def _recompute(self) -> None:
        mm = self.grammar.metamodel
        self._available = {
            name: find_matches(op, self.triple, self.marking, mm) for name, op in sorted(self._ops.items())
        }
        for name, matches in self._available.items():
            if matches:
                self._ever[name] = True

    def _fresh_id(self) -> str:
        fresh = f"e{self._next_id}"
        self._next_id += 1
        return fresh

    def statuses(self) -> tuple[RuleStatus, ...]:
        return tuple(
            RuleStatus(name, len(self._available[name]), self._applied[name], self._ever[name])
            for name in sorted(self._ops)
        )

    def package(self, halt_reason: HaltReason | None = None, warnings: tuple[str, ...] = ()) -> DataPackage:
        return DataPackage(
            last_application=self.protocol[-1] if self.protocol else None,
            statuses=self.statuses(),
            available_matches={name: tuple(matches) for name, matches in self._available.items()},
            protocol_length=len(self.protocol),
            mode=self.mode,
            halt_reason=halt_reason,
            warnings=warnings,
        )

    def untranslated_element_ids(self) -> tuple[str, ...]:
        """Input-domain elements not yet marked (empty for GEN)."""
        if self.kind is OperationKind.FWD:
            domain, marked = Domain.SOURCE, self.marking.source
        elif self.kind is OperationKind.BWD:
            domain, marked = Domain.TARGET, self.marking.target
        else:
            return ()
        return tuple(sorted(eid for eid in self.triple.element_ids(domain) if eid not in marked))

    # -- commands ------------------------------------------------------------

    def apply_match(self, match_id: str) -> DataPackage:
        self._apply(match_id)
        return self.package()

    def _apply(self, match_id: str) -> RuleApplication:
        found: Match | None = None
        for matches in self._available.values():
            for match in matches:
                if match.match_id == match_id:
                    found = match
                    break
            if found:
                break
        if found is None:
            raise StaleMatchError(f"match {match_id!r} is not available in the current state")

        op = self._ops[found.rule_name]
        created = tuple(self._fresh_id() for _ in op.created_order)
        marked = _instantiate(op, found.mapping, created, self.triple, self.marking)
        app = RuleApplication(
            app_id=len(self.protocol) + 1,
            rule_name=found.rule_name,
            kind=self.kind,
            match=found,
            created_ids=created,
            marked_ids=marked,
            step_index=len(self.protocol),
        )
        self.protocol.append(app)
        self._applied[found.rule_name] += 1
        self._recompute()
        return app

    def _pick_random(self, rule_name: str | None) -> Match:
        if rule_name is not None:
            if rule_name not in self._ops:
                raise ArgumentError(f"unknown rule {rule_name!r}")
            pool = self._available[rule_name]
            if not pool:
                raise NoMatchError(f"rule {rule_name!r} has no match in the current state")
        else:
            pool = [m for name in sorted(self._available) for m in self._available[name]]
            if not pool:
                raise NoMatchError("no rule has a match in the current state")
        return pool[self.rng.below(len(pool))]

    def apply_random_match(self, rule_name: str | None = None) -> DataPackage:
        match = self._pick_random(rule_name)
        self._apply(match.match_id)
        return self.package()

    def run_background(self, max_steps: int) -> DataPackage:
        """Apply random matches until exhaustion, a breakpoint, or the step cap."""
        if max_steps < 0:
            raise ArgumentError("max_steps must be non-negative")
        self.mode = Mode.BACKGROUND
        steps_done = 0
        halt: HaltReason
        while True:
            if any(
                bp.enabled and bp.kind is BreakpointKind.STEP_COUNT and bp.count == steps_done
                for bp in self.breakpoints
            ):
                halt = HaltReason.BREAKPOINT
                break
            if steps_done >= max_steps:
                halt = HaltReason.MAX_STEPS
                break
            flat = [m for name in sorted(self._available) for m in self._available[name]]
            if not flat:
                halt = HaltReason.EXHAUSTED
                break
            match = flat[self.rng.below(len(flat))]
            if any(
                bp.enabled and bp.kind is BreakpointKind.RULE_ABOUT_TO_APPLY and bp.rule == match.rule_name
                for bp in self.breakpoints
            ):
                halt = HaltReason.BREAKPOINT
                break
            watched = {
                bp.rule
                for bp in self.breakpoints
                if bp.enabled and bp.kind is BreakpointKind.RULE_FIRST_APPLICABLE and not self._ever.get(bp.rule, True)
            }
            self._apply(match.match_id)
            steps_done += 1
            if any(self._ever[name] for name in watched):
                halt = HaltReason.BREAKPOINT
                break

        self.mode = Mode.DEBUG
        warnings: tuple[str, ...] = ()
        if halt is HaltReason.EXHAUSTED:
            left = self.untranslated_element_ids()
            if left:
                warnings = (
                    f"INCOMPLETE: {len(left)} input element(s) untranslated: {', '.join(left)}",
                )
        return self.package(halt_reason=halt, warnings=warnings)

    # -- breakpoints ---------------------------------------------------------

    def _check_breakpoint(self, bp: Breakpoint) -> None:
        if bp.kind in (BreakpointKind.RULE_FIRST_APPLICABLE, BreakpointKind.RULE_ABOUT_TO_APPLY):
            if bp.rule is None or bp.rule not in self._ops:
                raise ArgumentError(f"breakpoint names unknown rule {bp.rule!r}")
        elif bp.kind is BreakpointKind.STEP_COUNT:
            if bp.count is None or bp.count < 0:
                raise ArgumentError("STEP_COUNT breakpoint needs a non-negative count")

    def set_breakpoint(self, bp: Breakpoint) -> None:
        self._check_breakpoint(bp)
        self.breakpoints = [b for b in self.breakpoints if b.key() != bp.key()]
        self.breakpoints.append(bp)

    def clear_breakpoint(self, bp: Breakpoint) -> None:
        self._check_breakpoint(bp)
        self.breakpoints = [b for b in self.breakpoints if b.key() != bp.key()]

    # -- snapshots ------------------------------------------------------------

    def save_snapshot(self) -> bytes:
        from . import documents

        return documents.save(self)

    @classmethod
    def load_snapshot(cls, data: bytes | str) -> Session:
        from . import documents

        session = documents.load(data, expected_kind="SESSION")
        if not isinstance(session, Session):
            raise ArgumentError("document did not contain a session")
        return session

    @classmethod
    def restore(
        cls,
        grammar: Grammar,
        kind: OperationKind,
        initial: TripleGraph,
        applications: Sequence[RuleApplication],
        ever_applicable: Mapping[str, bool],
        breakpoints: Iterable[Breakpoint],
        seed: int,
        rng_state: int,
        next_id: int,
        mode: Mode,
    ) -> Session:
        """Rebuild a session from snapshot data (trusting the protocol)."""
        session = object.__new__(cls)
        session._init(grammar, kind, initial, seed)
        triple, marking = replay(grammar, kind, initial, applications)
        violations = check_conformance(triple, grammar.metamodel)
        if violations:
            raise ArgumentError(
                f"replayed protocol leaves a nonconformant triple ({violations[0].code})"
            )
        session.triple = triple
        session.marking = marking
        session.protocol = list(applications)
        for app in applications:
            session._applied[app.rule_name] += 1
        session.breakpoints = list(breakpoints)
        session.rng.restore(rng_state)
        session._next_id = next_id
        session.mode = mode
        session._recompute()
        for name, flag in ever_applicable.items():
            if name in session._ever and flag:
                session._ever[name] = True
        return session
