"""Triple graph grammar engine with an interactive transformation debugger."""

from .engine import (
    Breakpoint,
    BreakpointKind,
    DataPackage,
    HaltReason,
    Mode,
    RuleApplication,
    RuleStatus,
    Session,
    replay,
)
from .errors import (
    ArgumentError,
    DocumentError,
    NoMatchError,
    StaleMatchError,
    TggError,
    ValidationError,
)
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
    Violation,
    check_conformance,
    k_neighborhood,
    subtype_of,
)
from .matching import Match, MarkingState, compute_match_id, find_matches, is_still_valid
from .rules import (
    Grammar,
    OperationKind,
    OperationalRule,
    RuleAnnotation,
    TGGRule,
    operationalize,
    validate_rule,
)
from .views import (
    DisplayOptions,
    Emphasis,
    LabelMode,
    MatchLink,
    ViewCorr,
    ViewEdge,
    ViewModel,
    ViewNode,
    abbreviate_label,
    build_match_view,
    build_protocol_view,
    build_rule_view,
    render_diagram,
)

__version__ = "0.1.0"
