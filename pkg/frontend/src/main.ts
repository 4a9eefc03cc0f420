/**
 * Application entry point: builds the static chrome, connects to a debug
 * server, and re-renders the panes whenever the session state changes.
 */

import { WireClient } from "./client.js";
import {
  ControlRefs,
  PaneHandlers,
  downloadText,
  renderBreakpoints,
  renderDiagram,
  renderProtocol,
  renderRules,
  renderStatus,
  renderToasts,
  syncControls,
} from "./dom.js";
import { controlBar, protocolRows, ruleListRows } from "./panes.js";
import { BreakpointKind, LabelMode } from "./protocol.js";
import { SessionController, describeError } from "./store.js";
import { WebSocketTransport } from "./transport.js";

function must<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function buildChrome(root: HTMLElement): void {
  root.innerHTML = `
    <header>
      <form id="connect-form">
        <input id="server-url" type="text" value="ws://127.0.0.1:8023" spellcheck="false"/>
        <button id="connect" type="submit">Connect</button>
      </form>
      <div id="status"></div>
    </header>
    <nav id="controls">
      <button id="apply" disabled>Apply</button>
      <button id="apply-random" disabled>Apply Random</button>
      <button id="resume" disabled>Resume</button>
      <label>max steps <input id="max-steps" type="number" value="1000" min="0"/></label>
      <button id="save-snapshot" disabled>Save Snapshot</button>
      <button id="load-snapshot" disabled>Load Snapshot</button>
      <input id="snapshot-file" type="file" accept=".json" hidden/>
      <span class="sep"></span>
      <select id="bp-kind">
        <option value="RULE_FIRST_APPLICABLE">rule first applicable</option>
        <option value="RULE_ABOUT_TO_APPLY">rule about to apply</option>
        <option value="STEP_COUNT">step count</option>
      </select>
      <select id="bp-rule"></select>
      <input id="bp-n" type="number" value="1" min="0" hidden/>
      <button id="set-breakpoint" disabled>Set breakpoint</button>
    </nav>
    <main>
      <section id="rules-pane"><h2>Rules</h2><div id="rules"></div>
        <h2>Breakpoints</h2><div id="breakpoints"></div></section>
      <section id="diagram-pane">
        <h2>Diagram</h2>
        <div id="diagram-options">
          <label><input type="checkbox" id="opt-source" checked/>source</label>
          <label><input type="checkbox" id="opt-target" checked/>target</label>
          <label><input type="checkbox" id="opt-corr" checked/>correspondence</label>
          <label><input type="checkbox" id="opt-context"/>context only</label>
          <select id="opt-labels">
            <option value="FULL">full labels</option>
            <option value="ABBREVIATED">abbreviated</option>
            <option value="NONE">no labels</option>
          </select>
          <label>k <input id="opt-k" type="number" value="1" min="0" max="10"/></label>
          <button id="copy-puml" disabled>Copy PlantUML</button>
          <button id="copy-dot" disabled>Copy DOT</button>
        </div>
        <div id="diagram"></div>
      </section>
      <section id="protocol-pane"><h2>Protocol</h2><div id="protocol"></div></section>
    </main>
    <div id="toasts"></div>`;
}

function start(): void {
  const root = must<HTMLElement>("app");
  buildChrome(root);

  let controller: SessionController | null = null;

  const refs: ControlRefs = {
    apply: must<HTMLButtonElement>("apply"),
    applyRandom: must<HTMLButtonElement>("apply-random"),
    resume: must<HTMLButtonElement>("resume"),
    saveSnapshot: must<HTMLButtonElement>("save-snapshot"),
    loadSnapshot: must<HTMLButtonElement>("load-snapshot"),
    setBreakpoint: must<HTMLButtonElement>("set-breakpoint"),
    copyPuml: must<HTMLButtonElement>("copy-puml"),
    copyDot: must<HTMLButtonElement>("copy-dot"),
  };

  const handlers: PaneHandlers = {
    onSelectRule: (rule) => void controller?.selectRule(rule),
    onRuleDoubleClick: (rule) => void controller?.applyRandom(rule).catch(() => undefined),
    onSelectMatch: (rule, matchId) => void controller?.selectMatch(rule, matchId),
    onToggleStep: (stepIndex) => void controller?.toggleStep(stepIndex),
    onDismissToast: (index) => controller?.dismissToast(index),
    onClearBreakpoint: (bp) =>
      void controller?.clearBreakpoint({ kind: bp.kind, rule: bp.rule, count: bp.count }).catch(() => undefined),
  };

  const render = (): void => {
    if (!controller) return;
    const state = controller.state;
    renderStatus(must("status"), state);
    renderRules(must("rules"), ruleListRows(state), handlers);
    renderProtocol(must("protocol"), protocolRows(state), handlers);
    renderDiagram(must("diagram"), state);
    renderBreakpoints(must("breakpoints"), state.breakpoints, handlers);
    renderToasts(must("toasts"), state.toasts, handlers);
    syncControls(refs, controlBar(state), state.diagram !== null);
  };

  must<HTMLFormElement>("connect-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const url = must<HTMLInputElement>("server-url").value.trim();
    try {
      const transport = WebSocketTransport.connect(url);
      controller = new SessionController(new WireClient(transport));
      controller.subscribe(render);
      void controller.connect().catch((err) => controller?.toast(describeError(err)));
    } catch (err) {
      alert(describeError(err));
    }
  });

  refs.apply.addEventListener("click", () => void controller?.applySelected().catch(() => undefined));
  refs.applyRandom.addEventListener("click", () => {
    const rule = controller?.state.selectedRule ?? undefined;
    void controller?.applyRandom(rule).catch(() => undefined);
  });
  refs.resume.addEventListener("click", () => {
    const maxSteps = Number(must<HTMLInputElement>("max-steps").value) || 0;
    void controller?.resume(maxSteps).catch(() => undefined);
  });

  refs.saveSnapshot.addEventListener("click", () => {
    void controller
      ?.saveSnapshot()
      .then((doc) => downloadText("debug.session.json", JSON.stringify(doc, null, 2) + "\n"))
      .catch((err) => controller?.toast(describeError(err)));
  });
  refs.loadSnapshot.addEventListener("click", () => must<HTMLInputElement>("snapshot-file").click());
  must<HTMLInputElement>("snapshot-file").addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    input.value = "";
    if (!file || !controller) return;
    void file
      .text()
      .then((text) => controller?.loadSnapshot(JSON.parse(text)))
      .catch((err) => controller?.toast(describeError(err)));
  });

  const bpKind = must<HTMLSelectElement>("bp-kind");
  const bpRule = must<HTMLSelectElement>("bp-rule");
  const bpN = must<HTMLInputElement>("bp-n");
  const syncBreakpointInputs = (): void => {
    const stepCount = bpKind.value === "STEP_COUNT";
    bpRule.hidden = stepCount;
    bpN.hidden = !stepCount;
    bpRule.replaceChildren(
      ...(controller?.state.hello?.ruleNames ?? []).map((name) => new Option(name, name)),
    );
  };
  bpKind.addEventListener("change", syncBreakpointInputs);
  refs.setBreakpoint.addEventListener("click", () => {
    syncBreakpointInputs();
    const kind = bpKind.value as BreakpointKind;
    const entry =
      kind === "STEP_COUNT"
        ? { kind, count: Number(bpN.value) || 0 }
        : { kind, rule: bpRule.value };
    void controller?.setBreakpoint(entry).catch(() => undefined);
  });

  const optionInputs = {
    showSource: must<HTMLInputElement>("opt-source"),
    showTarget: must<HTMLInputElement>("opt-target"),
    showCorrespondence: must<HTMLInputElement>("opt-corr"),
    contextOnly: must<HTMLInputElement>("opt-context"),
  };
  for (const [key, input] of Object.entries(optionInputs)) {
    input.addEventListener("change", () => void controller?.setOptions({ [key]: input.checked }));
  }
  must<HTMLSelectElement>("opt-labels").addEventListener("change", (ev) => {
    void controller?.setOptions({ labelMode: (ev.target as HTMLSelectElement).value as LabelMode });
  });
  must<HTMLInputElement>("opt-k").addEventListener("change", (ev) => {
    void controller?.setOptions({ neighborhoodK: Number((ev.target as HTMLInputElement).value) });
  });

  refs.copyPuml.addEventListener("click", () => {
    const text = controller?.state.diagram?.puml;
    if (text) void navigator.clipboard.writeText(text);
  });
  refs.copyDot.addEventListener("click", () => {
    const text = controller?.state.diagram?.dot;
    if (text) void navigator.clipboard.writeText(text);
  });
}

document.addEventListener("DOMContentLoaded", start);
