/**
 * Thin DOM layer: renders the pane models into containers and forwards
 * interactions to the controller. No session logic lives here.
 */

import { filterViewModel, layoutViewModel } from "./layout.js";
import { ControlBarModel, ProtocolRow, RuleRow } from "./panes.js";
import { BreakpointEntry } from "./protocol.js";
import { UiState } from "./store.js";
import { renderSvg } from "./svg.js";

export interface PaneHandlers {
  onSelectRule(rule: string): void;
  onRuleDoubleClick(rule: string): void;
  onSelectMatch(rule: string, matchId: string): void;
  onToggleStep(stepIndex: number): void;
  onDismissToast(index: number): void;
  onClearBreakpoint(entry: BreakpointEntry): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderRules(container: HTMLElement, rows: RuleRow[], handlers: PaneHandlers): void {
  container.replaceChildren();
  const list = el("ul", "rule-list");
  for (const row of rows) {
    const item = el("li", "rule-row");
    if (row.dimmed) item.classList.add("dimmed");
    if (row.selected) item.classList.add("selected");
    const name = el("span", "rule-name", row.rule);
    if (row.crossedOut) name.classList.add("crossed");
    const counts = el("span", "rule-counts", `${row.matchCount} matches · applied ${row.appliedCount}`);
    item.append(name, counts);
    item.addEventListener("click", () => handlers.onSelectRule(row.rule));
    item.addEventListener("dblclick", () => handlers.onRuleDoubleClick(row.rule));
    list.append(item);
    if (row.expanded) {
      const sub = el("ul", "match-list");
      for (const match of row.matches) {
        const entry = el("li", "match-row", match.summary);
        if (match.selected) entry.classList.add("selected");
        entry.title = match.matchId;
        entry.addEventListener("click", (ev) => {
          ev.stopPropagation();
          handlers.onSelectMatch(row.rule, match.matchId);
        });
        sub.append(entry);
      }
      list.append(sub);
    }
  }
  container.append(list);
}

export function renderProtocol(container: HTMLElement, rows: ProtocolRow[], handlers: PaneHandlers): void {
  container.replaceChildren();
  if (rows.length === 0) {
    container.append(el("p", "placeholder", "no applications yet"));
    return;
  }
  const list = el("ol", "protocol-list");
  for (const row of rows) {
    const item = el(
      "li",
      "protocol-row",
      `#${row.stepIndex} ${row.rule} (+${row.createdCount} created, app ${row.appId})`,
    );
    if (row.selected) item.classList.add("selected");
    item.addEventListener("click", () => handlers.onToggleStep(row.stepIndex));
    list.append(item);
  }
  container.append(list);
}

export function renderDiagram(container: HTMLElement, state: UiState): void {
  container.replaceChildren();
  if (!state.diagram) {
    container.append(el("p", "placeholder", "select a rule, a match, or protocol steps"));
    return;
  }
  const visible = filterViewModel(state.diagram.viewModel, state.options);
  const holder = el("div", "diagram-svg");
  holder.innerHTML = renderSvg(layoutViewModel(visible));
  container.append(holder);
}

export function renderStatus(container: HTMLElement, state: UiState): void {
  container.replaceChildren();
  const connection = el("span", `badge conn-${state.connection}`, state.connection);
  container.append(connection);
  if (state.hello) {
    container.append(el("span", "badge", state.hello.operation));
  }
  if (state.pkg) {
    container.append(el("span", "badge mode", state.pkg.mode));
    if (state.pkg.haltReason) {
      container.append(el("span", "badge halt", `halted: ${state.pkg.haltReason}`));
    }
    container.append(el("span", "badge", `protocol ${state.pkg.protocolLength}`));
    for (const warning of state.pkg.warnings) {
      container.append(el("span", "badge warning", warning));
    }
  }
  if (state.closeReason) {
    container.append(el("span", "badge warning", state.closeReason));
  }
}

export function renderBreakpoints(
  container: HTMLElement,
  breakpoints: BreakpointEntry[],
  handlers: PaneHandlers,
): void {
  container.replaceChildren();
  if (breakpoints.length === 0) {
    container.append(el("p", "placeholder", "no breakpoints"));
    return;
  }
  const list = el("ul", "breakpoint-list");
  for (const bp of breakpoints) {
    const item = el("li", "breakpoint-row");
    const detail = bp.rule ?? (bp.count !== undefined ? `n=${bp.count}` : "");
    item.append(el("span", bp.enabled ? "" : "dimmed", `${bp.kind} ${detail}`.trim()));
    const clear = el("button", "small", "clear");
    clear.addEventListener("click", () => handlers.onClearBreakpoint(bp));
    item.append(clear);
    list.append(item);
  }
  container.append(list);
}

export function renderToasts(container: HTMLElement, toasts: string[], handlers: PaneHandlers): void {
  container.replaceChildren();
  toasts.forEach((message, index) => {
    const toast = el("div", "toast", message);
    toast.addEventListener("click", () => handlers.onDismissToast(index));
    container.append(toast);
  });
}

export interface ControlRefs {
  apply: HTMLButtonElement;
  applyRandom: HTMLButtonElement;
  resume: HTMLButtonElement;
  saveSnapshot: HTMLButtonElement;
  loadSnapshot: HTMLButtonElement;
  setBreakpoint: HTMLButtonElement;
  copyPuml: HTMLButtonElement;
  copyDot: HTMLButtonElement;
}

export function syncControls(refs: ControlRefs, model: ControlBarModel, hasDiagram: boolean): void {
  refs.apply.disabled = !model.applyEnabled;
  refs.applyRandom.disabled = !model.applyRandomEnabled;
  refs.resume.disabled = !model.resumeEnabled;
  refs.saveSnapshot.disabled = !model.saveSnapshotEnabled;
  refs.loadSnapshot.disabled = !model.loadSnapshotEnabled;
  refs.setBreakpoint.disabled = !model.breakpointEditorEnabled;
  refs.copyPuml.disabled = !hasDiagram;
  refs.copyDot.disabled = !hasDiagram;
}

export function downloadText(filename: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}
