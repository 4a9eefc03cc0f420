/**
 * Wire-level types for the debug server protocol (newline-delimited JSON).
 *
 * Shapes here mirror what the server actually sends, field for field; the
 * client never derives or recomputes any of this locally.
 */

export interface WireRequest {
  id: number;
  type: string;
  params: Record<string, unknown>;
}

export interface WireError {
  code: string;
  message: string;
}

export type WireResponse =
  | { id: number | null; ok: true; body: unknown }
  | { id: number | null; ok: false; error: WireError };

export interface DataPackageEvent {
  event: "dataPackage";
  body: DataPackage;
}

export type WireMessage = WireResponse | DataPackageEvent;

export function isDataPackageEvent(msg: WireMessage): msg is DataPackageEvent {
  return "event" in msg && msg.event === "dataPackage";
}

// -- session state ----------------------------------------------------------

export type Mode = "DEBUG" | "BACKGROUND";

export interface RuleStatus {
  rule: string;
  currentMatchCount: number;
  appliedCount: number;
  everApplicable: boolean;
}

export interface MatchEntry {
  matchId: string;
  rule: string;
  kind: string;
  mapping: Record<string, string>;
}

export interface Application {
  appId: number;
  rule: string;
  kind: string;
  matchId: string;
  mapping: Record<string, string>;
  created: string[];
  marked: string[];
  stepIndex: number;
}

/** Broadcast after every state change, and returned by `overview`. */
export interface DataPackage {
  statuses: RuleStatus[];
  availableMatches: Record<string, MatchEntry[]>;
  protocolLength: number;
  lastApplication: Application | null;
  mode: Mode;
  haltReason: string | null;
  warnings: string[];
}

export interface HelloBody {
  protocolVersion: string;
  operation: string;
  ruleNames: string[];
}

export interface ProtocolBody {
  kind: string;
  applications: Application[];
}

export interface MatchesBody {
  rule: string;
  matches: MatchEntry[];
}

// -- diagrams ---------------------------------------------------------------

export type Domain = "SOURCE" | "TARGET";
export type Emphasis = "CREATED" | "CONTEXT" | "PLAIN";

export interface ViewNode {
  id: string;
  label: string;
  domain: Domain;
  emphasis: Emphasis;
}

export interface ViewEdge {
  id: string;
  source: string;
  target: string;
  label: string;
  domain: Domain;
  emphasis: Emphasis;
}

export interface ViewCorr {
  id: string;
  source: string;
  target: string;
  label: string;
  emphasis: Emphasis;
}

export interface MatchLink {
  ruleElement: string;
  hostElement: string;
}

export interface ViewModel {
  nodes: ViewNode[];
  edges: ViewEdge[];
  corrs: ViewCorr[];
  matchLinks: MatchLink[];
}

/** Response body of ruleDiagram / matchDiagram / state. */
export interface DiagramBody {
  viewModel: ViewModel;
  puml: string;
  dot: string;
}

export type LabelMode = "FULL" | "ABBREVIATED" | "NONE";

export interface DisplayOptions {
  showSource: boolean;
  showTarget: boolean;
  showCorrespondence: boolean;
  contextOnly: boolean;
  labelMode: LabelMode;
  neighborhoodK: number;
}

export const DEFAULT_OPTIONS: DisplayOptions = {
  showSource: true,
  showTarget: true,
  showCorrespondence: true,
  contextOnly: false,
  labelMode: "FULL",
  neighborhoodK: 1,
};

// -- breakpoints ------------------------------------------------------------

export type BreakpointKind =
  | "RULE_FIRST_APPLICABLE"
  | "RULE_ABOUT_TO_APPLY"
  | "STEP_COUNT";

/** Entry shape used in breakpoint.set/clear responses and session documents. */
export interface BreakpointEntry {
  kind: BreakpointKind;
  rule?: string;
  count?: number;
  enabled: boolean;
}

export interface BreakpointsBody {
  breakpoints: BreakpointEntry[];
}

export interface SnapshotSaveBody {
  document: Record<string, unknown>;
}

/**
 * Request params for breakpoint.set/clear. The wire spells the step count
 * `n` on the way in and `count` on the way out.
 */
export function breakpointParams(entry: {
  kind: BreakpointKind;
  rule?: string;
  count?: number;
}): Record<string, unknown> {
  const params: Record<string, unknown> = { kind: entry.kind };
  if (entry.rule !== undefined) params.rule = entry.rule;
  if (entry.count !== undefined) params.n = entry.count;
  return params;
}

/** Request types that advance or replace session state. */
export const MUTATING_TYPES: ReadonlySet<string> = new Set([
  "apply",
  "applyRandom",
  "resume",
  "snapshot.load",
  "breakpoint.set",
  "breakpoint.clear",
]);
