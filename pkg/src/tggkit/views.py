"""View models and diagram rendering for rules, matches, and protocol steps.

Views are plain data: a set of display nodes, edges, and correspondence
entries plus optional match links, every endpoint internal to the view.
Rendering turns a view into deterministic PlantUML (or DOT) text --
equal views yield byte-identical documents.

Color scheme: source elements on a peach background, target elements on
rose, created elements outlined green, correspondences drawn as dashed
black connectors, match links dashed purple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import ArgumentError, StaleMatchError
from .graph import Domain, TripleGraph, k_neighborhood
from .matching import Match
from .rules import Grammar, OperationKind, RuleAnnotation, TGGRule

SOURCE_FILL = "#FFDAB9"
TARGET_FILL = "#FFE4E1"
CORR_FILL = "#FFFFFF"
CREATED_OUTLINE = "#2E7D32"
PLAIN_OUTLINE = "#000000"
MATCH_LINK_COLOR = "#800080"


class LabelMode(Enum):
    FULL = "FULL"
    ABBREV = "ABBREV"
    NONE = "NONE"


class Emphasis(Enum):
    CREATED = "CREATED"
    CONTEXT = "CONTEXT"
    PLAIN = "PLAIN"


@dataclass(frozen=True)
class DisplayOptions:
    show_source: bool = True
    show_target: bool = True
    show_correspondence: bool = True
    context_only: bool = False
    label_mode: LabelMode = LabelMode.FULL
    neighborhood_k: int = 1

    def __post_init__(self):
        if not isinstance(self.neighborhood_k, int) or isinstance(self.neighborhood_k, bool):
            raise ArgumentError("neighborhood_k must be an integer in [0, 3]")
        if not 0 <= self.neighborhood_k <= 3:
            raise ArgumentError(f"neighborhood_k must be in [0, 3], got {self.neighborhood_k}")

    @classmethod
    def from_dict(cls, data: Mapping) -> DisplayOptions:
        if not isinstance(data, Mapping):
            raise ArgumentError("display options must be an object")
        known = {
            "showSource": "show_source",
            "showTarget": "show_target",
            "showCorrespondence": "show_correspondence",
            "contextOnly": "context_only",
            "labelMode": "label_mode",
            "neighborhoodK": "neighborhood_k",
        }
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ArgumentError(f"unknown display option {key!r}")
            if key == "labelMode":
                try:
                    value = LabelMode(value)
                except ValueError:
                    raise ArgumentError(f"unknown label mode {value!r}") from None
            elif key == "neighborhoodK":
                if not isinstance(value, int) or isinstance(value, bool):
                    raise ArgumentError("neighborhoodK must be an integer in [0, 3]")
            elif not isinstance(value, bool):
                raise ArgumentError(f"display option {key!r} must be a boolean")
            kwargs[known[key]] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "showSource": self.show_source,
            "showTarget": self.show_target,
            "showCorrespondence": self.show_correspondence,
            "contextOnly": self.context_only,
            "labelMode": self.label_mode.value,
            "neighborhoodK": self.neighborhood_k,
        }

    def shows(self, domain: Domain) -> bool:
        if domain is Domain.SOURCE:
            return self.show_source
        if domain is Domain.TARGET:
            return self.show_target
        return self.show_correspondence


@dataclass(frozen=True)
class ViewNode:
    id: str
    label: str
    domain: Domain
    emphasis: Emphasis


@dataclass(frozen=True)
class ViewEdge:
    id: str
    source: str
    target: str
    label: str
    domain: Domain
    emphasis: Emphasis


@dataclass(frozen=True)
class ViewCorr:
    id: str
    source: str
    target: str
    label: str
    emphasis: Emphasis


@dataclass(frozen=True)
class MatchLink:
    rule_element: str
    host_element: str


@dataclass(frozen=True)
class ViewModel:
    nodes: tuple[ViewNode, ...] = ()
    edges: tuple[ViewEdge, ...] = ()
    corrs: tuple[ViewCorr, ...] = ()
    match_links: tuple[MatchLink, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not (self.nodes or self.edges or self.corrs or self.match_links)

    def element_ids(self) -> set[str]:
        ids = {n.id for n in self.nodes}
        ids.update(e.id for e in self.edges)
        ids.update(c.id for c in self.corrs)
        return ids


def abbreviate_label(label: str, mode: LabelMode) -> str:
    """FULL passes through, NONE blanks, ABBREV keeps three letters per end."""
    if mode is LabelMode.FULL:
        return label
    if mode is LabelMode.NONE:
        return ""
    if mode is LabelMode.ABBREV:
        if len(label) <= 6:
            return label
        return f"{label[:3]}...{label[-3:]}"
    raise ArgumentError(f"unknown label mode {mode!r}")


def _element_label(name: str, type_name: str, mode: LabelMode) -> str:
    if mode is LabelMode.NONE:
        return ""
    return f"{abbreviate_label(name, mode)}: {abbreviate_label(type_name, mode)}"


def _link_label(type_name: str, mode: LabelMode) -> str:
    if mode is LabelMode.NONE:
        return ""
    return abbreviate_label(type_name, mode)


# ---------------------------------------------------------------------------
# View builders
# ---------------------------------------------------------------------------


def _graph_view(
    triple: TripleGraph,
    include: set[str] | None,
    opts: DisplayOptions,
    emphasis_of,
    id_prefix: str = "",
) -> ViewModel:
    """Project a triple onto a view: filter by inclusion set and hidden
    domains, keep only links with both endpoints visible."""
    mode = opts.label_mode
    nodes: list[ViewNode] = []
    visible: set[str] = set()
    for node in triple.nodes():
        if include is not None and node.id not in include:
            continue
        domain = triple.domain_of(node.id)
        if not opts.shows(domain):
            continue
        visible.add(node.id)
        nodes.append(
            ViewNode(
                id=id_prefix + node.id,
                label=_element_label(node.label or node.id, node.type, mode),
                domain=domain,
                emphasis=emphasis_of(node.id),
            )
        )
    edges: list[ViewEdge] = []
    for edge in triple.edges():
        if include is not None and edge.id not in include:
            continue
        if edge.source not in visible or edge.target not in visible:
            continue
        edges.append(
            ViewEdge(
                id=id_prefix + edge.id,
                source=id_prefix + edge.source,
                target=id_prefix + edge.target,
                label=_link_label(edge.type, mode),
                domain=triple.domain_of(edge.id),
                emphasis=emphasis_of(edge.id),
            )
        )
    corrs: list[ViewCorr] = []
    if opts.show_correspondence:
        for corr in triple.corrs():
            if include is not None and corr.id not in include:
                continue
            if corr.source not in visible or corr.target not in visible:
                continue
            corrs.append(
                ViewCorr(
                    id=id_prefix + corr.id,
                    source=id_prefix + corr.source,
                    target=id_prefix + corr.target,
                    label=_element_label(corr.id, corr.type, mode),
                    emphasis=emphasis_of(corr.id),
                )
            )
    return ViewModel(nodes=tuple(nodes), edges=tuple(edges), corrs=tuple(corrs))


def build_rule_view(rule: TGGRule, opts: DisplayOptions) -> ViewModel:
    """The rule pattern itself: created elements emphasized, context plain."""

    def emphasis_of(eid: str) -> Emphasis:
        return Emphasis.CREATED if rule.annotations[eid] is RuleAnnotation.GREEN else Emphasis.CONTEXT

    include = set(rule.elements.element_ids())
    if opts.context_only:
        include = {eid for eid in include if rule.annotations[eid] is RuleAnnotation.BLACK}
    return _graph_view(rule.elements, include, opts, emphasis_of)


def build_match_view(match: Match, rule: TGGRule, host: TripleGraph, opts: DisplayOptions) -> ViewModel:
    """Rule pattern next to the matched host region, joined by match links."""
    for rule_id, host_id in match.mapping.items():
        if not rule.elements.has(rule_id) or not host.has(host_id):
            raise StaleMatchError(f"match {match.match_id!r} no longer fits the host triple")

    rule_view = _graph_view(
        rule.elements,
        None
        if not opts.context_only
        else {eid for eid in rule.elements.element_ids() if rule.annotations[eid] is RuleAnnotation.BLACK},
        opts,
        lambda eid: Emphasis.CREATED if rule.annotations[eid] is RuleAnnotation.GREEN else Emphasis.CONTEXT,
        id_prefix="rule:",
    )

    matched_nodes = [hid for rid, hid in match.mapping.items() if host.is_node(hid)]
    region = k_neighborhood(host, sorted(set(matched_nodes)), opts.neighborhood_k)
    host_view = _graph_view(host, region, opts, lambda eid: Emphasis.PLAIN, id_prefix="host:")

    rule_ids = rule_view.element_ids()
    host_ids = host_view.element_ids()
    links: list[MatchLink] = []
    for rule_id in sorted(match.mapping):
        host_id = match.mapping[rule_id]
        if rule.elements.is_edge(rule_id):
            continue  # edges are identified by their endpoints
        if f"rule:{rule_id}" in rule_ids and f"host:{host_id}" in host_ids:
            links.append(MatchLink(rule_element=f"rule:{rule_id}", host_element=f"host:{host_id}"))

    return ViewModel(
        nodes=rule_view.nodes + host_view.nodes,
        edges=rule_view.edges + host_view.edges,
        corrs=rule_view.corrs + host_view.corrs,
        match_links=tuple(links),
    )


def build_protocol_view(
    grammar: Grammar,
    kind: OperationKind,
    initial: TripleGraph,
    applications: Sequence,
    selection: Iterable[int],
    opts: DisplayOptions,
) -> ViewModel:
    """The triple as of the newest selected step, clipped to the selection's
    neighborhood, with the selected steps' creations emphasized."""
    from .engine import replay  # deferred: engine imports views' sibling modules

    steps = sorted(set(selection))
    if not steps:
        raise ArgumentError("selection must name at least one protocol step")
    if steps[0] < 0 or steps[-1] >= len(applications):
        raise ArgumentError(f"selection out of range 0..{len(applications) - 1}")

    triple, _ = replay(grammar, kind, initial, applications, upto=steps[-1] + 1)

    created: set[str] = set()
    seeds: set[str] = set()
    for index in steps:
        app = applications[index]
        created.update(app.created_ids)
        seeds.update(cid for cid in app.created_ids if triple.is_node(cid))
        seeds.update(hid for hid in app.match.mapping.values() if triple.is_node(hid))

    region = k_neighborhood(triple, sorted(seeds), opts.neighborhood_k)
    return _graph_view(
        triple,
        region,
        opts,
        lambda eid: Emphasis.CREATED if eid in created else Emphasis.PLAIN,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_DOMAIN_ORDER = {Domain.SOURCE: 0, Domain.CORRESPONDENCE: 1, Domain.TARGET: 2}


def _aliases(view: ViewModel) -> dict[str, str]:
    """Deterministic, collision-free diagram aliases for view elements."""
    alias: dict[str, str] = {}
    taken: set[str] = set()
    ordered = [n.id for n in sorted(view.nodes, key=lambda n: (_DOMAIN_ORDER[n.domain], n.id))]
    ordered += [c.id for c in sorted(view.corrs, key=lambda c: c.id)]
    for vid in ordered:
        base = "".join(ch if ch.isalnum() else "_" for ch in vid) or "el"
        candidate = base
        serial = 2
        while candidate in taken:
            candidate = f"{base}_{serial}"
            serial += 1
        alias[vid] = candidate
        taken.add(candidate)
    return alias


def _outline(emphasis: Emphasis) -> str:
    return CREATED_OUTLINE if emphasis is Emphasis.CREATED else PLAIN_OUTLINE


def _fill(domain: Domain) -> str:
    return SOURCE_FILL if domain is Domain.SOURCE else TARGET_FILL


def render_diagram(view: ViewModel, fmt: str = "puml") -> str:
    """Deterministic diagram text for a view; PlantUML by default."""
    if fmt == "puml":
        return _render_puml(view)
    if fmt == "dot":
        return _render_dot(view)
    raise ArgumentError(f"unknown diagram format {fmt!r}")


def _quote(label: str) -> str:
    return label.replace('"', "'")


def _render_puml(view: ViewModel) -> str:
    lines = ["@startuml"]
    alias = _aliases(view)
    for node in sorted(view.nodes, key=lambda n: (_DOMAIN_ORDER[n.domain], n.id)):
        lines.append(
            f'object "{_quote(node.label)}" as {alias[node.id]} {_fill(node.domain)};line:{_outline(node.emphasis)}'
        )
    for corr in sorted(view.corrs, key=lambda c: c.id):
        lines.append(f'object "{_quote(corr.label)}" as {alias[corr.id]} {CORR_FILL};line:{_outline(corr.emphasis)}')
    for edge in sorted(view.edges, key=lambda e: (_DOMAIN_ORDER[e.domain], e.id)):
        suffix = f" : {_quote(edge.label)}" if edge.label else ""
        lines.append(f"{alias[edge.source]} -[{_outline(edge.emphasis)}]-> {alias[edge.target]}{suffix}")
    for corr in sorted(view.corrs, key=lambda c: c.id):
        lines.append(f"{alias[corr.id]} -[{PLAIN_OUTLINE},dashed]- {alias[corr.source]}")
        lines.append(f"{alias[corr.id]} -[{PLAIN_OUTLINE},dashed]- {alias[corr.target]}")
    for link in sorted(view.match_links, key=lambda l: (l.rule_element, l.host_element)):
        lines.append(f"{alias[link.rule_element]} -[{MATCH_LINK_COLOR},dashed]- {alias[link.host_element]}")
    lines.append("@enduml")
    return "\n".join(lines) + "\n"


def _render_dot(view: ViewModel) -> str:
    lines = ["digraph view {", "  rankdir=LR;"]
    alias = _aliases(view)
    for node in sorted(view.nodes, key=lambda n: (_DOMAIN_ORDER[n.domain], n.id)):
        lines.append(
            f'  {alias[node.id]} [label="{_quote(node.label)}", shape=box, style=filled,'
            f' fillcolor="{_fill(node.domain)}", color="{_outline(node.emphasis)}"];'
        )
    for corr in sorted(view.corrs, key=lambda c: c.id):
        lines.append(
            f'  {alias[corr.id]} [label="{_quote(corr.label)}", shape=diamond, style=filled,'
            f' fillcolor="{CORR_FILL}", color="{_outline(corr.emphasis)}"];'
        )
    for edge in sorted(view.edges, key=lambda e: (_DOMAIN_ORDER[e.domain], e.id)):
        lines.append(
            f'  {alias[edge.source]} -> {alias[edge.target]} [label="{_quote(edge.label)}",'
            f' color="{_outline(edge.emphasis)}"];'
        )
    for corr in sorted(view.corrs, key=lambda c: c.id):
        for end in (corr.source, corr.target):
            lines.append(f'  {alias[corr.id]} -> {alias[end]} [dir=none, style=dashed, color="{PLAIN_OUTLINE}"];')
    for link in sorted(view.match_links, key=lambda l: (l.rule_element, l.host_element)):
        lines.append(
            f'  {alias[link.rule_element]} -> {alias[link.host_element]}'
            f' [dir=none, style=dashed, color="{MATCH_LINK_COLOR}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
