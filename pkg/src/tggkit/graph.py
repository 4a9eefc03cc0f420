"""Typed graphs coupled into triples by correspondence links.

A triple graph holds a source graph and a target graph plus explicit
correspondence links between their nodes.  Metamodels declare node types
(single inheritance, optional ``abstract`` flag), edge types (with an
upper bound on outgoing edges per source node), and correspondence types
spanning the two metamodels.

Graphs are treated as values: once a triple has been handed out it must
not be mutated any further.  The ``add_*`` methods exist so that the
owning engine session can grow its private copy cheaply; everybody else
uses :meth:`TripleGraph.copy` first.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import ArgumentError


class Domain(Enum):
    SOURCE = "SOURCE"
    CORRESPONDENCE = "CORRESPONDENCE"
    TARGET = "TARGET"


class UpperBound(Enum):
    ONE = "ONE"
    MANY = "MANY"


# ---------------------------------------------------------------------------
# Metamodel layer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodeType:
    name: str
    abstract: bool = False
    supertype: str | None = None


@dataclass(frozen=True)
class EdgeType:
    name: str
    source: str
    target: str
    upper_bound: UpperBound = UpperBound.MANY


@dataclass(frozen=True)
class CorrType:
    """A correspondence type between a source and a target node type."""

    name: str
    source: str
    target: str


class Metamodel:
    """Node and edge types for one graph domain."""

    def __init__(self, name: str, node_types: Iterable[NodeType], edge_types: Iterable[EdgeType]):
        self.name = name
        self._node_types: dict[str, NodeType] = {}
        self._edge_types: dict[str, EdgeType] = {}
        for nt in node_types:
            if nt.name in self._node_types:
                raise ArgumentError(f"duplicate node type {nt.name!r} in metamodel {name!r}")
            self._node_types[nt.name] = nt
        for et in edge_types:
            if et.name in self._edge_types:
                raise ArgumentError(f"duplicate edge type {et.name!r} in metamodel {name!r}")
            self._edge_types[et.name] = et
        for nt in self._node_types.values():
            if nt.supertype is not None and nt.supertype not in self._node_types:
                raise ArgumentError(f"node type {nt.name!r} names unknown supertype {nt.supertype!r}")
        for et in self._edge_types.values():
            for ref in (et.source, et.target):
                if ref not in self._node_types:
                    raise ArgumentError(f"edge type {et.name!r} names unknown node type {ref!r}")
        # supertype chains, checked for cycles once here
        self._supertypes: dict[str, tuple[str, ...]] = {}
        for nt in self._node_types.values():
            chain = [nt.name]
            seen = {nt.name}
            cur = nt
            while cur.supertype is not None:
                if cur.supertype in seen:
                    raise ArgumentError(f"supertype cycle through {nt.name!r}")
                seen.add(cur.supertype)
                chain.append(cur.supertype)
                cur = self._node_types[cur.supertype]
            self._supertypes[nt.name] = tuple(chain)
        # reverse direction: every type that conforms to a given type
        self._assignable: dict[str, tuple[str, ...]] = {
            name: tuple(sorted(t for t, chain in self._supertypes.items() if name in chain))
            for name in self._node_types
        }

    def node_type(self, name: str) -> NodeType:
        if name not in self._node_types:
            raise KeyError(f"unknown node type {name!r} in metamodel {self.name!r}")
        return self._node_types[name]

    def edge_type(self, name: str) -> EdgeType:
        if name not in self._edge_types:
            raise KeyError(f"unknown edge type {name!r} in metamodel {self.name!r}")
        return self._edge_types[name]

    def has_node_type(self, name: str) -> bool:
        return name in self._node_types

    def has_edge_type(self, name: str) -> bool:
        return name in self._edge_types

    @property
    def node_types(self) -> tuple[NodeType, ...]:
        return tuple(self._node_types.values())

    @property
    def edge_types(self) -> tuple[EdgeType, ...]:
        return tuple(self._edge_types.values())

    def subtype_of(self, sub: str, sup: str) -> bool:
        """True iff ``sub`` equals ``sup`` or transitively inherits from it."""
        if sup not in self._node_types:
            raise KeyError(f"unknown node type {sup!r} in metamodel {self.name!r}")
        if sub not in self._supertypes:
            raise KeyError(f"unknown node type {sub!r} in metamodel {self.name!r}")
        return sup in self._supertypes[sub]

    def assignable_types(self, name: str) -> tuple[str, ...]:
        """All type names whose instances conform to ``name`` (including itself)."""
        if name not in self._assignable:
            raise KeyError(f"unknown node type {name!r} in metamodel {self.name!r}")
        return self._assignable[name]


class TripleMetamodel:
    """Source metamodel, target metamodel, and the correspondence types."""

    def __init__(self, name: str, source: Metamodel, target: Metamodel, corr_types: Iterable[CorrType]):
        self.name = name
        self.source = source
        self.target = target
        self._corr_types: dict[str, CorrType] = {}
        for ct in corr_types:
            if ct.name in self._corr_types:
                raise ArgumentError(f"duplicate correspondence type {ct.name!r}")
            if not source.has_node_type(ct.source):
                raise ArgumentError(f"correspondence type {ct.name!r} names unknown source type {ct.source!r}")
            if not target.has_node_type(ct.target):
                raise ArgumentError(f"correspondence type {ct.name!r} names unknown target type {ct.target!r}")
            self._corr_types[ct.name] = ct

    def corr_type(self, name: str) -> CorrType:
        if name not in self._corr_types:
            raise KeyError(f"unknown correspondence type {name!r}")
        return self._corr_types[name]

    def has_corr_type(self, name: str) -> bool:
        return name in self._corr_types

    @property
    def corr_types(self) -> tuple[CorrType, ...]:
        return tuple(self._corr_types.values())

    def metamodel(self, domain: Domain) -> Metamodel:
        if domain is Domain.SOURCE:
            return self.source
        if domain is Domain.TARGET:
            return self.target
        raise ArgumentError("correspondence domain has no metamodel of its own")


def subtype_of(metamodel: Metamodel, sub: str, sup: str) -> bool:
    return metamodel.subtype_of(sub, sup)


# ---------------------------------------------------------------------------
# Instance layer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    id: str
    type: str
    label: str = ""


@dataclass(frozen=True)
class Edge:
    id: str
    type: str
    source: str
    target: str


@dataclass(frozen=True)
class CorrLink:
    """A correspondence link from a source-graph node to a target-graph node."""

    id: str
    type: str
    source: str
    target: str


@dataclass(frozen=True)
class Violation:
    """One broken consistency constraint.  Violations are data, not errors."""

    code: str
    element_ids: tuple[str, ...]
    message: str


class TripleGraph:
    """A source graph and a target graph glued together by correspondence links.

    Element ids are unique across the whole triple; uniqueness is enforced
    at insertion time.  Edges may dangle (reference missing endpoints) so
    that :func:`check_conformance` can report them instead of the
    constructor crashing.
    """

    def __init__(self) -> None:
        self._nodes: dict[str, Node] = {}
        self._edges: dict[str, Edge] = {}
        self._corrs: dict[str, CorrLink] = {}
        self._domain: dict[str, Domain] = {}
        # indexes, maintained incrementally
        self._nodes_by_type: dict[tuple[Domain, str], list[str]] = {}
        self._out: dict[tuple[str, str], list[str]] = {}
        self._in: dict[tuple[str, str], list[str]] = {}
        self._corr_by_source: dict[str, list[str]] = {}
        self._corr_by_target: dict[str, list[str]] = {}
        self._adj: dict[str, list[tuple[str, str]]] = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def empty(cls) -> TripleGraph:
        return cls()

    @classmethod
    def build(
        cls,
        nodes: Iterable[tuple[Node, Domain]] = (),
        edges: Iterable[tuple[Edge, Domain]] = (),
        corrs: Iterable[CorrLink] = (),
    ) -> TripleGraph:
        g = cls()
        for node, domain in nodes:
            g.add_node(node, domain)
        for edge, domain in edges:
            g.add_edge(edge, domain)
        for corr in corrs:
            g.add_corr(corr)
        return g

    def _claim_id(self, element_id: str, domain: Domain) -> None:
        if element_id in self._domain:
            raise ArgumentError(f"duplicate element id {element_id!r}")
        self._domain[element_id] = domain

    def add_node(self, node: Node, domain: Domain) -> None:
        if domain is Domain.CORRESPONDENCE:
            raise ArgumentError("nodes live in the SOURCE or TARGET domain")
        self._claim_id(node.id, domain)
        self._nodes[node.id] = node
        self._nodes_by_type.setdefault((domain, node.type), []).append(node.id)
        self._adj.setdefault(node.id, [])

    def add_edge(self, edge: Edge, domain: Domain) -> None:
        if domain is Domain.CORRESPONDENCE:
            raise ArgumentError("edges live in the SOURCE or TARGET domain")
        self._claim_id(edge.id, domain)
        self._edges[edge.id] = edge
        self._out.setdefault((edge.source, edge.type), []).append(edge.id)
        self._in.setdefault((edge.target, edge.type), []).append(edge.id)
        if edge.source in self._nodes:
            self._adj[edge.source].append((edge.id, edge.target))
        if edge.target in self._nodes:
            self._adj[edge.target].append((edge.id, edge.source))

    def add_corr(self, corr: CorrLink) -> None:
        self._claim_id(corr.id, Domain.CORRESPONDENCE)
        self._corrs[corr.id] = corr
        self._corr_by_source.setdefault(corr.source, []).append(corr.id)
        self._corr_by_target.setdefault(corr.target, []).append(corr.id)
        if corr.source in self._nodes:
            self._adj[corr.source].append((corr.id, corr.target))
        if corr.target in self._nodes:
            self._adj[corr.target].append((corr.id, corr.source))

    def copy(self) -> TripleGraph:
        g = TripleGraph()
        g._nodes = dict(self._nodes)
        g._edges = dict(self._edges)
        g._corrs = dict(self._corrs)
        g._domain = dict(self._domain)
        g._nodes_by_type = {k: list(v) for k, v in self._nodes_by_type.items()}
        g._out = {k: list(v) for k, v in self._out.items()}
        g._in = {k: list(v) for k, v in self._in.items()}
        g._corr_by_source = {k: list(v) for k, v in self._corr_by_source.items()}
        g._corr_by_target = {k: list(v) for k, v in self._corr_by_target.items()}
        g._adj = {k: list(v) for k, v in self._adj.items()}
        return g

    def without(self, element_ids: Iterable[str]) -> TripleGraph:
        """A new triple with the given elements removed.

        Removing a node also removes its incident edges and correspondence
        links, so the result never dangles more than the original did.
        """
        gone = set(element_ids)
        for eid in gone:
            if eid not in self._domain:
                raise ArgumentError(f"unknown element id {eid!r}")
        dead_nodes = {eid for eid in gone if eid in self._nodes}
        g = TripleGraph()
        for node in self._nodes.values():
            if node.id not in gone:
                g.add_node(node, self._domain[node.id])
        for edge in self._edges.values():
            if edge.id in gone or edge.source in dead_nodes or edge.target in dead_nodes:
                continue
            g.add_edge(edge, self._domain[edge.id])
        for corr in self._corrs.values():
            if corr.id in gone or corr.source in dead_nodes or corr.target in dead_nodes:
                continue
            g.add_corr(corr)
        return g

    # -- access -------------------------------------------------------------

    def has(self, element_id: str) -> bool:
        return element_id in self._domain

    def node(self, node_id: str) -> Node:
        return self._nodes[node_id]

    def edge(self, edge_id: str) -> Edge:
        return self._edges[edge_id]

    def corr(self, corr_id: str) -> CorrLink:
        return self._corrs[corr_id]

    def domain_of(self, element_id: str) -> Domain:
        return self._domain[element_id]

    def is_node(self, element_id: str) -> bool:
        return element_id in self._nodes

    def is_edge(self, element_id: str) -> bool:
        return element_id in self._edges

    def is_corr(self, element_id: str) -> bool:
        return element_id in self._corrs

    def nodes(self, domain: Domain | None = None) -> Iterator[Node]:
        for node in self._nodes.values():
            if domain is None or self._domain[node.id] is domain:
                yield node

    def edges(self, domain: Domain | None = None) -> Iterator[Edge]:
        for edge in self._edges.values():
            if domain is None or self._domain[edge.id] is domain:
                yield edge

    def corrs(self) -> Iterator[CorrLink]:
        yield from self._corrs.values()

    def element_ids(self, domain: Domain | None = None) -> Iterator[str]:
        for eid, dom in self._domain.items():
            if domain is None or dom is domain:
                yield eid

    def counts(self) -> tuple[int, int, int]:
        return len(self._nodes), len(self._edges), len(self._corrs)

    @property
    def is_empty(self) -> bool:
        return not self._domain

    def nodes_of_type(self, domain: Domain, type_name: str) -> tuple[str, ...]:
        return tuple(self._nodes_by_type.get((domain, type_name), ()))

    def out_edge_ids(self, node_id: str, type_name: str) -> tuple[str, ...]:
        return tuple(self._out.get((node_id, type_name), ()))

    def in_edge_ids(self, node_id: str, type_name: str) -> tuple[str, ...]:
        return tuple(self._in.get((node_id, type_name), ()))

    def corr_ids_by_source(self, node_id: str) -> tuple[str, ...]:
        return tuple(self._corr_by_source.get(node_id, ()))

    def corr_ids_by_target(self, node_id: str) -> tuple[str, ...]:
        return tuple(self._corr_by_target.get(node_id, ()))

    def neighbors(self, node_id: str) -> tuple[tuple[str, str], ...]:
        """Incident links of a node as ``(link id, other node id)`` pairs."""
        return tuple(self._adj.get(node_id, ()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TripleGraph):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and self._edges == other._edges
            and self._corrs == other._corrs
            and self._domain == other._domain
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        n, e, c = self.counts()
        return f"<TripleGraph nodes={n} edges={e} corrs={c}>"


# ---------------------------------------------------------------------------
# Conformance
# ---------------------------------------------------------------------------


def check_conformance(triple: TripleGraph, metamodel: TripleMetamodel) -> list[Violation]:
    """All ways in which ``triple`` breaks the metamodel's constraints.

    Returns the empty list iff the triple conforms.  The result order is
    deterministic: nodes first, then edges, then correspondence links,
    then upper-bound groups.
    """
    violations: list[Violation] = []

    for node in triple.nodes():
        mm = metamodel.metamodel(triple.domain_of(node.id))
        if not mm.has_node_type(node.type):
            violations.append(
                Violation("UNKNOWN_TYPE", (node.id,), f"node {node.id!r} has undeclared type {node.type!r}")
            )
            continue
        if mm.node_type(node.type).abstract:
            violations.append(
                Violation("ABSTRACT_TYPE", (node.id,), f"node {node.id!r} instantiates abstract type {node.type!r}")
            )

    for edge in triple.edges():
        domain = triple.domain_of(edge.id)
        mm = metamodel.metamodel(domain)
        if not mm.has_edge_type(edge.type):
            violations.append(
                Violation("UNKNOWN_TYPE", (edge.id,), f"edge {edge.id!r} has undeclared type {edge.type!r}")
            )
            continue
        et = mm.edge_type(edge.type)
        ok = True
        for end, declared in ((edge.source, et.source), (edge.target, et.target)):
            if not triple.is_node(end) or triple.domain_of(end) is not domain:
                violations.append(
                    Violation("DANGLING_EDGE", (edge.id,), f"edge {edge.id!r} endpoint {end!r} is missing from its domain")
                )
                ok = False
        if not ok:
            continue
        for end, declared in ((edge.source, et.source), (edge.target, et.target)):
            node_type = triple.node(end).type
            if not mm.has_node_type(node_type) or not mm.subtype_of(node_type, declared):
                violations.append(
                    Violation(
                        "TYPE_MISMATCH",
                        (edge.id,),
                        f"edge {edge.id!r} endpoint {end!r} has type {node_type!r}, expected {declared!r}",
                    )
                )

    for corr in triple.corrs():
        if not metamodel.has_corr_type(corr.type):
            violations.append(
                Violation("UNKNOWN_TYPE", (corr.id,), f"correspondence {corr.id!r} has undeclared type {corr.type!r}")
            )
            continue
        ct = metamodel.corr_type(corr.type)
        ok = True
        for end, domain in ((corr.source, Domain.SOURCE), (corr.target, Domain.TARGET)):
            if not triple.is_node(end) or triple.domain_of(end) is not domain:
                violations.append(
                    Violation(
                        "DANGLING_CORR",
                        (corr.id,),
                        f"correspondence {corr.id!r} endpoint {end!r} is missing from the {domain.value} domain",
                    )
                )
                ok = False
        if not ok:
            continue
        for end, declared, mm in (
            (corr.source, ct.source, metamodel.source),
            (corr.target, ct.target, metamodel.target),
        ):
            node_type = triple.node(end).type
            if not mm.has_node_type(node_type) or not mm.subtype_of(node_type, declared):
                violations.append(
                    Violation(
                        "TYPE_MISMATCH",
                        (corr.id,),
                        f"correspondence {corr.id!r} endpoint {end!r} has type {node_type!r}, expected {declared!r}",
                    )
                )

    # upper bounds: at most one outgoing edge per ONE-bounded type and node
    bounded: dict[tuple[str, str], list[str]] = {}
    for edge in triple.edges():
        domain = triple.domain_of(edge.id)
        mm = metamodel.metamodel(domain)
        if not mm.has_edge_type(edge.type):
            continue
        if mm.edge_type(edge.type).upper_bound is UpperBound.ONE:
            bounded.setdefault((edge.source, edge.type), []).append(edge.id)
    for (source_id, type_name), edge_ids in sorted(bounded.items()):
        if len(edge_ids) > 1:
            violations.append(
                Violation(
                    "UPPER_BOUND",
                    tuple(sorted(edge_ids)),
                    f"node {source_id!r} has {len(edge_ids)} outgoing {type_name!r} edges, at most one allowed",
                )
            )

    return violations


# ---------------------------------------------------------------------------
# Neighborhoods
# ---------------------------------------------------------------------------


def k_neighborhood(triple: TripleGraph, seeds: Iterable[str], k: int) -> set[str]:
    """Element ids within ``k`` undirected hops of the seed nodes.

    Edges and correspondence links count as single hops and are included
    exactly when both their endpoints are included (induced subgraph).
    ``k`` must lie in ``[0, 3]``; seeds must be existing node ids.
    """
    if not isinstance(k, int) or isinstance(k, bool) or not 0 <= k <= 3:
        raise ArgumentError(f"neighborhood radius must be an integer in [0, 3], got {k!r}")
    seed_ids = list(seeds)
    for seed in seed_ids:
        if not triple.is_node(seed):
            raise ArgumentError(f"seed {seed!r} is not a node of the triple")

    dist: dict[str, int] = {s: 0 for s in seed_ids}
    frontier = deque(seed_ids)
    while frontier:
        current = frontier.popleft()
        if dist[current] == k:
            continue
        for _, other in triple.neighbors(current):
            if other not in dist and triple.is_node(other):
                dist[other] = dist[current] + 1
                frontier.append(other)

    included: set[str] = set(dist)
    for edge in triple.edges():
        if edge.source in dist and edge.target in dist:
            included.add(edge.id)
    for corr in triple.corrs():
        if corr.source in dist and corr.target in dist:
            included.add(corr.id)
    return included
