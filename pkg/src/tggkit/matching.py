"""Injective pattern matching for operational rules.

The matcher enumerates every injective, type-conformant embedding of an
operational rule's context pattern into a host triple, honoring the
marking discipline of the rule's kind and refusing embeddings whose
application would overflow an upper bound.  Match ids are stable content
hashes, so re-running a search reproduces identical ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping

from .graph import CorrLink, Domain, Edge, Node, TripleGraph, TripleMetamodel, UpperBound
from .rules import OperationalRule, OperationKind


@dataclass
class MarkingState:
    """Which source/target elements have been translated so far."""

    source: set[str] = field(default_factory=set)
    target: set[str] = field(default_factory=set)

    @classmethod
    def empty(cls) -> MarkingState:
        return cls(set(), set())

    def copy(self) -> MarkingState:
        return MarkingState(set(self.source), set(self.target))

    def for_domain(self, domain: Domain) -> set[str]:
        if domain is Domain.SOURCE:
            return self.source
        if domain is Domain.TARGET:
            return self.target
        raise KeyError("correspondence elements are never marked")


@dataclass(frozen=True, eq=True)
class Match:
    """One embedding of a rule's context pattern into a host triple."""

    match_id: str
    rule_name: str
    kind: OperationKind
    mapping: Mapping[str, str]  # rule element id -> host element id

    def __hash__(self):  # identity by match_id, which digests the mapping
        return hash(self.match_id)


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """The 64-bit FNV-1a hash of ``data``."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


def compute_match_id(rule_name: str, kind: OperationKind, mapping: Mapping[str, str]) -> str:
    """Stable id of a match: rule name plus a digest of the sorted mapping."""
    canonical = ",".join(f"{k}={mapping[k]}" for k in sorted(mapping))
    digest = fnv1a64(f"{rule_name}|{kind.value}|{canonical}".encode("utf-8"))
    return f"{rule_name}#{digest:016x}"


# ---------------------------------------------------------------------------
# Search plan
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Plan:
    """Static search order for one operational rule's context pattern."""

    node_order: tuple[Node, ...]
    node_domains: tuple[Domain, ...]
    # per node position: pattern links to already-placed nodes, as
    # (link kind, link element, placed position, outgoing?) tuples
    anchors: tuple[tuple[tuple[str, object, int, bool], ...], ...]
    ctx_edges: tuple[Edge, ...]
    edge_domains: tuple[Domain, ...]
    ctx_corrs: tuple[CorrLink, ...]
    sorted_context_ids: tuple[str, ...]
    created_nodes: tuple[tuple[Node, Domain], ...]
    created_edges: tuple[tuple[Edge, Domain], ...]
    created_corrs: tuple[CorrLink, ...]


@lru_cache(maxsize=None)
def _plan(op: OperationalRule) -> _Plan:
    pattern = op.rule.elements
    ctx_nodes = sorted(
        (pattern.node(eid) for eid in op.context_ids if pattern.is_node(eid)),
        key=lambda n: n.id,
    )
    ctx_edges = sorted(
        (pattern.edge(eid) for eid in op.context_ids if pattern.is_edge(eid)),
        key=lambda e: e.id,
    )
    ctx_corrs = sorted(
        (pattern.corr(eid) for eid in op.context_ids if pattern.is_corr(eid)),
        key=lambda c: c.id,
    )

    degree: dict[str, int] = {n.id: 0 for n in ctx_nodes}
    for edge in ctx_edges:
        for end in (edge.source, edge.target):
            if end in degree:
                degree[end] += 1
    for corr in ctx_corrs:
        for end in (corr.source, corr.target):
            if end in degree:
                degree[end] += 1

    # most-constrained-first, then keep the frontier connected
    remaining = list(ctx_nodes)
    order: list[Node] = []
    placed: set[str] = set()

    def placed_links(node_id: str) -> int:
        count = 0
        for edge in ctx_edges:
            if edge.source == node_id and edge.target in placed:
                count += 1
            if edge.target == node_id and edge.source in placed:
                count += 1
        for corr in ctx_corrs:
            if corr.source == node_id and corr.target in placed:
                count += 1
            if corr.target == node_id and corr.source in placed:
                count += 1
        return count

    while remaining:
        best = max(remaining, key=lambda n: (placed_links(n.id), degree[n.id], n.id))
        remaining.remove(best)
        order.append(best)
        placed.add(best.id)

    position = {n.id: i for i, n in enumerate(order)}
    anchors: list[tuple[tuple[str, object, int, bool], ...]] = []
    for i, node in enumerate(order):
        links: list[tuple[str, object, int, bool]] = []
        for edge in ctx_edges:
            if edge.source == node.id and position.get(edge.target, i) < i:
                links.append(("edge", edge, position[edge.target], True))
            elif edge.target == node.id and position.get(edge.source, i) < i:
                links.append(("edge", edge, position[edge.source], False))
        for corr in ctx_corrs:
            if corr.source == node.id and position.get(corr.target, i) < i:
                links.append(("corr", corr, position[corr.target], True))
            elif corr.target == node.id and position.get(corr.source, i) < i:
                links.append(("corr", corr, position[corr.source], False))
        anchors.append(tuple(links))

    pattern_domain = pattern.domain_of
    return _Plan(
        node_order=tuple(order),
        node_domains=tuple(pattern_domain(n.id) for n in order),
        anchors=tuple(anchors),
        ctx_edges=tuple(ctx_edges),
        edge_domains=tuple(pattern_domain(e.id) for e in ctx_edges),
        ctx_corrs=tuple(ctx_corrs),
        sorted_context_ids=tuple(sorted(op.context_ids)),
        created_nodes=tuple(
            (pattern.node(eid), pattern_domain(eid))
            for eid in op.created_order
            if pattern.is_node(eid)
        ),
        created_edges=tuple(
            (pattern.edge(eid), pattern_domain(eid))
            for eid in op.created_order
            if pattern.is_edge(eid)
        ),
        created_corrs=tuple(pattern.corr(eid) for eid in op.created_order if pattern.is_corr(eid)),
    )


# ---------------------------------------------------------------------------
# Marking discipline
# ---------------------------------------------------------------------------


def _marked_domain(kind: OperationKind) -> Domain | None:
    if kind is OperationKind.FWD:
        return Domain.SOURCE
    if kind is OperationKind.BWD:
        return Domain.TARGET
    return None


def _marking_ok(
    op: OperationalRule,
    element_id: str,
    element_domain: Domain,
    host_id: str,
    marking: MarkingState,
) -> bool:
    """GEN ignores marking; FWD/BWD require to-mark images unmarked and
    context images of the marked domain already marked."""
    domain = _marked_domain(op.kind)
    if domain is None or element_domain is not domain:
        return True
    marked = marking.for_domain(domain)
    if element_id in op.to_mark_ids:
        return host_id not in marked
    return host_id in marked


# ---------------------------------------------------------------------------
# Feasibility: creating must not overflow an upper bound
# ---------------------------------------------------------------------------


def _feasible(
    op: OperationalRule,
    plan: _Plan,
    host: TripleGraph,
    metamodel: TripleMetamodel,
    node_image: Mapping[str, str],
) -> bool:
    budget: dict[tuple[str, str], int] = {}
    for edge, domain in plan.created_edges:
        mm = metamodel.metamodel(domain)
        if mm.edge_type(edge.type).upper_bound is not UpperBound.ONE:
            continue
        source_image = node_image.get(edge.source)
        if source_image is None:
            key = (edge.source, edge.type)  # source node is created fresh
            existing = 0
        else:
            key = (source_image, edge.type)
            existing = len(host.out_edge_ids(source_image, edge.type))
        budget[key] = budget.get(key, existing) + 1
        if budget[key] > 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


def _node_candidates(
    plan: _Plan,
    position: int,
    host: TripleGraph,
    metamodel: TripleMetamodel,
    images: list[str | None],
) -> Iterator[str]:
    node = plan.node_order[position]
    domain = plan.node_domains[position]
    anchors = plan.anchors[position]
    if anchors:
        kind, link, placed_pos, outgoing = anchors[0]
        other = images[placed_pos]
        assert other is not None
        if kind == "edge":
            if outgoing:  # pattern edge leaves this node towards the placed one
                edge_ids = host.in_edge_ids(other, link.type)
                candidates = [host.edge(eid).source for eid in edge_ids]
            else:
                edge_ids = host.out_edge_ids(other, link.type)
                candidates = [host.edge(eid).target for eid in edge_ids]
        else:
            if outgoing:  # this node is the corr's source side
                corr_ids = host.corr_ids_by_target(other)
                candidates = [host.corr(cid).source for cid in corr_ids if host.corr(cid).type == link.type]
            else:
                corr_ids = host.corr_ids_by_source(other)
                candidates = [host.corr(cid).target for cid in corr_ids if host.corr(cid).type == link.type]
    else:
        mm = metamodel.metamodel(domain)
        candidates = []
        for type_name in mm.assignable_types(node.type):
            candidates.extend(host.nodes_of_type(domain, type_name))

    mm = metamodel.metamodel(domain)
    seen: set[str] = set()
    for candidate in candidates:
        if candidate in seen:
            continue
        seen.add(candidate)
        if not host.is_node(candidate) or host.domain_of(candidate) is not domain:
            continue
        if not mm.subtype_of(host.node(candidate).type, node.type):
            continue
        yield candidate


def _assign_links(
    op: OperationalRule,
    plan: _Plan,
    host: TripleGraph,
    marking: MarkingState,
    node_image: dict[str, str],
) -> Iterator[dict[str, str]]:
    """Extend a complete node mapping by injective edge and corr images."""

    def edge_step(index: int, mapping: dict[str, str], used: set[str]) -> Iterator[dict[str, str]]:
        if index == len(plan.ctx_edges):
            yield from corr_step(0, mapping, set())
            return
        edge = plan.ctx_edges[index]
        domain = plan.edge_domains[index]
        source_image = node_image[edge.source]
        target_image = node_image[edge.target]
        for eid in host.out_edge_ids(source_image, edge.type):
            if eid in used or host.edge(eid).target != target_image:
                continue
            if host.domain_of(eid) is not domain:
                continue
            if not _marking_ok(op, edge.id, domain, eid, marking):
                continue
            mapping[edge.id] = eid
            used.add(eid)
            yield from edge_step(index + 1, mapping, used)
            used.discard(eid)
            del mapping[edge.id]

    def corr_step(index: int, mapping: dict[str, str], used: set[str]) -> Iterator[dict[str, str]]:
        if index == len(plan.ctx_corrs):
            yield mapping
            return
        corr = plan.ctx_corrs[index]
        source_image = node_image[corr.source]
        target_image = node_image[corr.target]
        for cid in host.corr_ids_by_source(source_image):
            host_corr = host.corr(cid)
            if cid in used or host_corr.type != corr.type or host_corr.target != target_image:
                continue
            mapping[corr.id] = cid
            used.add(cid)
            yield from corr_step(index + 1, mapping, used)
            used.discard(cid)
            del mapping[corr.id]

    yield from edge_step(0, dict(node_image), set())


def find_matches(
    op: OperationalRule,
    host: TripleGraph,
    marking: MarkingState,
    metamodel: TripleMetamodel,
) -> list[Match]:
    """Every valid match of ``op`` in ``host``, deterministically ordered.

    The order is by the sequence of host ids assigned to the pattern's
    elements in sorted-pattern-id order, so equal inputs always produce
    the identical list (and identical match ids).
    """
    plan = _plan(op)
    results: list[Match] = []
    images: list[str | None] = [None] * len(plan.node_order)
    used_nodes: set[str] = set()

    def place(position: int) -> None:
        if position == len(plan.node_order):
            node_image = {plan.node_order[i].id: images[i] for i in range(len(images))}
            if not _feasible(op, plan, host, metamodel, node_image):
                return
            for full in _assign_links(op, plan, host, marking, node_image):
                mapping = dict(full)
                results.append(
                    Match(
                        match_id=compute_match_id(op.name, op.kind, mapping),
                        rule_name=op.name,
                        kind=op.kind,
                        mapping=mapping,
                    )
                )
            return
        node = plan.node_order[position]
        domain = plan.node_domains[position]
        for candidate in _node_candidates(plan, position, host, metamodel, images):
            if candidate in used_nodes:
                continue
            # remaining anchor links must already be satisfiable on nodes
            ok = True
            for kind, link, placed_pos, outgoing in plan.anchors[position][1:]:
                other = images[placed_pos]
                if kind == "edge":
                    pool = (
                        host.out_edge_ids(candidate, link.type)
                        if outgoing
                        else host.out_edge_ids(other, link.type)
                    )
                    want = other if outgoing else candidate
                    if not any(host.edge(eid).target == want for eid in pool):
                        ok = False
                        break
                else:
                    pool = host.corr_ids_by_source(candidate if outgoing else other)
                    want = other if outgoing else candidate
                    if not any(
                        host.corr(cid).target == want and host.corr(cid).type == link.type
                        for cid in pool
                    ):
                        ok = False
                        break
            if not ok:
                continue
            if not _marking_ok(op, node.id, domain, candidate, marking):
                continue
            images[position] = candidate
            used_nodes.add(candidate)
            place(position + 1)
            used_nodes.discard(candidate)
            images[position] = None

    place(0)
    results.sort(key=lambda m: tuple(m.mapping[k] for k in plan.sorted_context_ids))
    return results


def is_still_valid(
    match: Match,
    op: OperationalRule,
    host: TripleGraph,
    marking: MarkingState,
    metamodel: TripleMetamodel,
) -> bool:
    """True iff ``find_matches`` would still produce this exact match."""
    plan = _plan(op)
    mapping = match.mapping
    if set(mapping) != set(plan.sorted_context_ids):
        return False

    node_image: dict[str, str] = {}
    seen_nodes: set[str] = set()
    for node, domain in zip(plan.node_order, plan.node_domains):
        host_id = mapping.get(node.id)
        if host_id is None or not host.is_node(host_id) or host.domain_of(host_id) is not domain:
            return False
        if host_id in seen_nodes:
            return False
        seen_nodes.add(host_id)
        mm = metamodel.metamodel(domain)
        if not mm.subtype_of(host.node(host_id).type, node.type):
            return False
        if not _marking_ok(op, node.id, domain, host_id, marking):
            return False
        node_image[node.id] = host_id

    seen_edges: set[str] = set()
    for edge, domain in zip(plan.ctx_edges, plan.edge_domains):
        host_id = mapping.get(edge.id)
        if host_id is None or not host.is_edge(host_id) or host.domain_of(host_id) is not domain:
            return False
        if host_id in seen_edges:
            return False
        seen_edges.add(host_id)
        host_edge = host.edge(host_id)
        if host_edge.type != edge.type:
            return False
        if host_edge.source != node_image[edge.source] or host_edge.target != node_image[edge.target]:
            return False
        if not _marking_ok(op, edge.id, domain, host_id, marking):
            return False

    seen_corrs: set[str] = set()
    for corr in plan.ctx_corrs:
        host_id = mapping.get(corr.id)
        if host_id is None or not host.is_corr(host_id):
            return False
        if host_id in seen_corrs:
            return False
        seen_corrs.add(host_id)
        host_corr = host.corr(host_id)
        if host_corr.type != corr.type:
            return False
        if host_corr.source != node_image[corr.source] or host_corr.target != node_image[corr.target]:
            return False

    if not _feasible(op, plan, host, metamodel, node_image):
        return False
    return compute_match_id(op.name, op.kind, mapping) == match.match_id
