/**
 * Pure pane models. Each builder maps UiState to exactly what gets drawn;
 * every count shown comes verbatim from the last DataPackage.
 */

import { UiState } from "./store.js";

export interface MatchRow {
  matchId: string;
  /** "admin → a1, ceo → ceo1, …" with pattern names sorted. */
  summary: string;
  selected: boolean;
}

export interface RuleRow {
  rule: string;
  matchCount: number;
  appliedCount: number;
  /** Dark-grey row: currently no matches. */
  dimmed: boolean;
  /** Struck through: never been applicable in this session. */
  crossedOut: boolean;
  selected: boolean;
  expanded: boolean;
  matches: MatchRow[];
}

export function ruleListRows(state: UiState): RuleRow[] {
  const pkg = state.pkg;
  if (!pkg) return [];
  return pkg.statuses.map((status) => {
    const selected = state.selectedRule === status.rule;
    const available = pkg.availableMatches[status.rule] ?? [];
    return {
      rule: status.rule,
      matchCount: status.currentMatchCount,
      appliedCount: status.appliedCount,
      dimmed: status.currentMatchCount === 0,
      crossedOut: !status.everApplicable,
      selected,
      expanded: selected && available.length > 0,
      matches: selected
        ? available.map((m) => ({
            matchId: m.matchId,
            summary: matchSummary(m.mapping),
            selected: state.selectedMatchId === m.matchId,
          }))
        : [],
    };
  });
}

export function matchSummary(mapping: Record<string, string>): string {
  return Object.keys(mapping)
    .sort()
    .map((k) => `${k} → ${mapping[k]}`)
    .join(", ");
}

export interface ProtocolRow {
  stepIndex: number;
  appId: number;
  rule: string;
  createdCount: number;
  selected: boolean;
}

export function protocolRows(state: UiState): ProtocolRow[] {
  const selected = new Set(state.selectedSteps);
  return state.protocol.map((app) => ({
    stepIndex: app.stepIndex,
    appId: app.appId,
    rule: app.rule,
    createdCount: app.created.length,
    selected: selected.has(app.stepIndex),
  }));
}

export interface ControlBarModel {
  connected: boolean;
  busy: boolean;
  mode: string;
  haltReason: string | null;
  warnings: string[];
  applyEnabled: boolean;
  applyRandomEnabled: boolean;
  resumeEnabled: boolean;
  saveSnapshotEnabled: boolean;
  loadSnapshotEnabled: boolean;
  breakpointEditorEnabled: boolean;
}

export function controlBar(state: UiState): ControlBarModel {
  const connected = state.connection === "connected";
  const idle = connected && !state.busy;
  const pkg = state.pkg;
  const anyMatch = pkg ? pkg.statuses.some((s) => s.currentMatchCount > 0) : false;
  const selectedRuleMatches = state.selectedRule
    ? (pkg?.statuses.find((s) => s.rule === state.selectedRule)?.currentMatchCount ?? 0) > 0
    : anyMatch;
  return {
    connected,
    busy: state.busy,
    mode: pkg?.mode ?? "—",
    haltReason: pkg?.haltReason ?? null,
    warnings: pkg?.warnings ?? [],
    applyEnabled: idle && state.selectedMatchId !== null,
    applyRandomEnabled: idle && selectedRuleMatches,
    resumeEnabled: idle,
    saveSnapshotEnabled: idle,
    loadSnapshotEnabled: idle,
    breakpointEditorEnabled: idle,
  };
}
