/**
 * Session state and the actions the panes dispatch.
 *
 * The server is the single source of truth: every pane renders from the last
 * DataPackage (plus the protocol/diagram fetches it triggers), and nothing a
 * package carries is ever recomputed locally. A user action maps to exactly
 * one state-changing request; buttons stay disabled until it settles.
 */

import { RequestError, WireClient } from "./client.js";
import {
  Application,
  BreakpointEntry,
  BreakpointKind,
  BreakpointsBody,
  DataPackage,
  DEFAULT_OPTIONS,
  DiagramBody,
  DisplayOptions,
  HelloBody,
  ProtocolBody,
  SnapshotSaveBody,
  breakpointParams,
} from "./protocol.js";

export type ConnectionState = "connecting" | "connected" | "closed";

/** Which selection the diagram pane is currently showing. */
export type DiagramFocus = "rule" | "match" | "steps" | null;

export interface UiState {
  connection: ConnectionState;
  closeReason: string | null;
  hello: HelloBody | null;
  /** Last DataPackage, verbatim from the server. */
  pkg: DataPackage | null;
  /** Last fetched protocol listing. */
  protocol: Application[];
  selectedRule: string | null;
  selectedMatchId: string | null;
  selectedSteps: number[];
  diagramFocus: DiagramFocus;
  diagram: DiagramBody | null;
  options: DisplayOptions;
  breakpoints: BreakpointEntry[];
  /** True while a state-changing request is in flight. */
  busy: boolean;
  toasts: string[];
}

const MAX_TOASTS = 5;

function initialState(): UiState {
  return {
    connection: "connecting",
    closeReason: null,
    hello: null,
    pkg: null,
    protocol: [],
    selectedRule: null,
    selectedMatchId: null,
    selectedSteps: [],
    diagramFocus: null,
    diagram: null,
    options: { ...DEFAULT_OPTIONS },
    breakpoints: [],
    busy: false,
    toasts: [],
  };
}

export class SessionController {
  readonly state: UiState = initialState();

  private listeners: Array<() => void> = [];
  private backgroundFetches: Array<Promise<void>> = [];
  private lastPackageFingerprint: string | null = null;
  /** Protocol length the listing has been (or is being) synced to. */
  private protocolSyncedTo = -1;

  constructor(private client: WireClient) {
    client.onEvent((pkg) => this.ingestPackage(pkg));
    client.onClose((reason) => {
      this.state.connection = "closed";
      this.state.closeReason = reason;
      this.notify();
    });
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  /** Resolves once all background fetches kicked off so far have landed. */
  async settled(): Promise<void> {
    while (this.backgroundFetches.length > 0) {
      const batch = this.backgroundFetches.splice(0);
      await Promise.all(batch);
    }
  }

  // -- lifecycle -------------------------------------------------------------

  async connect(): Promise<void> {
    this.state.hello = await this.client.request<HelloBody>("hello");
    this.state.connection = "connected";
    this.notify();
    this.ingestPackage(await this.client.request<DataPackage>("overview"));
    await this.settled();
  }

  // -- selections ------------------------------------------------------------

  async selectRule(rule: string): Promise<void> {
    if (!this.state.pkg?.statuses.some((s) => s.rule === rule)) return;
    this.state.selectedRule = rule;
    this.state.selectedMatchId = null;
    this.state.diagramFocus = "rule";
    this.notify();
    await this.refreshDiagram();
  }

  async selectMatch(rule: string, matchId: string): Promise<void> {
    const available = this.state.pkg?.availableMatches[rule] ?? [];
    if (!available.some((m) => m.matchId === matchId)) return;
    this.state.selectedRule = rule;
    this.state.selectedMatchId = matchId;
    this.state.diagramFocus = "match";
    this.notify();
    await this.refreshDiagram();
  }

  async toggleStep(stepIndex: number): Promise<void> {
    const length = this.state.pkg?.protocolLength ?? 0;
    if (stepIndex < 0 || stepIndex >= length) return;
    const steps = new Set(this.state.selectedSteps);
    if (steps.has(stepIndex)) steps.delete(stepIndex);
    else steps.add(stepIndex);
    this.state.selectedSteps = [...steps].sort((a, b) => a - b);
    this.state.diagramFocus = this.state.selectedSteps.length > 0 ? "steps" : null;
    this.notify();
    await this.refreshDiagram();
  }

  // -- options ---------------------------------------------------------------

  /**
   * Visibility toggles are a pure client-side filter over the cached view
   * model; content-shaping options are validated by the server and force a
   * diagram refetch.
   */
  async setOptions(patch: Partial<DisplayOptions>): Promise<void> {
    const merged = { ...this.state.options, ...patch };
    const contentKeys: Array<keyof DisplayOptions> = ["contextOnly", "labelMode", "neighborhoodK"];
    const contentChanged = contentKeys.some((k) => merged[k] !== this.state.options[k]);
    if (!contentChanged) {
      this.state.options = merged;
      this.notify();
      return;
    }
    try {
      const body = await this.client.request<{ options: DisplayOptions }>("options.validate", {
        options: this.diagramOptions(merged),
      });
      this.state.options = { ...merged, ...pickVisibility(merged), ...pickContent(body.options) };
    } catch (err) {
      this.toast(describeError(err));
      return;
    }
    this.notify();
    await this.refreshDiagram();
  }

  /** Options sent with diagram fetches: full content, visibility filtered locally. */
  private diagramOptions(opts: DisplayOptions): Record<string, unknown> {
    return {
      showSource: true,
      showTarget: true,
      showCorrespondence: true,
      contextOnly: opts.contextOnly,
      labelMode: opts.labelMode,
      neighborhoodK: opts.neighborhoodK,
    };
  }

  // -- state-changing actions --------------------------------------------------

  async applySelected(): Promise<DataPackage | null> {
    const { selectedRule, selectedMatchId } = this.state;
    if (!selectedRule || !selectedMatchId) {
      throw new Error("apply requires a selected match");
    }
    try {
      const pkg = await this.mutate("apply", { rule: selectedRule, matchId: selectedMatchId });
      this.ingestPackage(pkg);
      await this.settled();
      return pkg;
    } catch (err) {
      if (err instanceof RequestError && err.code === "STALE_MATCH") {
        this.toast(`stale match: ${err.message}`);
        await this.refreshOverview();
        return null;
      }
      this.toast(describeError(err));
      throw err;
    }
  }

  async applyRandom(rule?: string): Promise<DataPackage | null> {
    try {
      const pkg = await this.mutate("applyRandom", rule ? { rule } : {});
      this.ingestPackage(pkg);
      await this.settled();
      return pkg;
    } catch (err) {
      if (err instanceof RequestError && err.code === "NO_MATCH") {
        this.toast(`nothing to apply: ${err.message}`);
        return null;
      }
      this.toast(describeError(err));
      throw err;
    }
  }

  async resume(maxSteps: number): Promise<DataPackage> {
    const pkg = await this.mutate("resume", { maxSteps });
    this.ingestPackage(pkg);
    await this.settled();
    return pkg;
  }

  async setBreakpoint(entry: { kind: BreakpointKind; rule?: string; count?: number }): Promise<void> {
    await this.editBreakpoint("breakpoint.set", entry);
  }

  async clearBreakpoint(entry: { kind: BreakpointKind; rule?: string; count?: number }): Promise<void> {
    await this.editBreakpoint("breakpoint.clear", entry);
  }

  private async editBreakpoint(
    type: "breakpoint.set" | "breakpoint.clear",
    entry: { kind: BreakpointKind; rule?: string; count?: number },
  ): Promise<void> {
    try {
      const body = (await this.mutate(type, breakpointParams(entry))) as unknown as BreakpointsBody;
      this.state.breakpoints = body.breakpoints;
      this.notify();
    } catch (err) {
      this.toast(describeError(err));
      throw err;
    }
  }

  /** Fetch the session document; the caller decides what to do with it. */
  async saveSnapshot(): Promise<Record<string, unknown>> {
    const body = await this.client.request<SnapshotSaveBody>("snapshot.save");
    return body.document;
  }

  async loadSnapshot(document: unknown): Promise<void> {
    try {
      const pkg = await this.mutate("snapshot.load", { document });
      this.ingestPackage(pkg);
      this.state.breakpoints = breakpointsFromDocument(document);
      this.notify();
      await this.settled();
    } catch (err) {
      this.toast(describeError(err));
      throw err;
    }
  }

  async refreshOverview(): Promise<void> {
    this.ingestPackage(await this.client.request<DataPackage>("overview"));
    await this.settled();
  }

  // -- internals ---------------------------------------------------------------

  private async mutate(type: string, params: Record<string, unknown>): Promise<DataPackage> {
    this.state.busy = true;
    this.notify();
    try {
      return await this.client.request<DataPackage>(type, params);
    } finally {
      this.state.busy = false;
      this.notify();
    }
  }

  /**
   * Fold a DataPackage into the state. Identical packages (the broadcast
   * twin of a response we already processed) are skipped outright.
   */
  private ingestPackage(pkg: DataPackage): void {
    const fingerprint = JSON.stringify(pkg);
    if (fingerprint === this.lastPackageFingerprint) return;
    this.lastPackageFingerprint = fingerprint;
    this.state.pkg = pkg;

    // selections must keep referencing entities the package still knows
    if (this.state.selectedRule && !pkg.statuses.some((s) => s.rule === this.state.selectedRule)) {
      this.state.selectedRule = null;
      this.state.selectedMatchId = null;
    }
    if (this.state.selectedMatchId && this.state.selectedRule) {
      const available = pkg.availableMatches[this.state.selectedRule] ?? [];
      if (!available.some((m) => m.matchId === this.state.selectedMatchId)) {
        this.state.selectedMatchId = null;
        if (this.state.diagramFocus === "match") {
          this.state.diagramFocus = null;
          this.state.diagram = null;
        }
      }
    }
    const pruned = this.state.selectedSteps.filter((i) => i < pkg.protocolLength);
    if (pruned.length !== this.state.selectedSteps.length) {
      this.state.selectedSteps = pruned;
      if (this.state.diagramFocus === "steps" && pruned.length === 0) {
        this.state.diagramFocus = null;
        this.state.diagram = null;
      }
    }

    if (pkg.protocolLength !== this.protocolSyncedTo) {
      this.protocolSyncedTo = pkg.protocolLength;
      this.track(this.refreshProtocol());
      if (this.state.diagramFocus === "match" || this.state.diagramFocus === "steps") {
        this.track(this.refreshDiagram());
      }
    }
    this.notify();
  }

  private async refreshProtocol(): Promise<void> {
    const body = await this.client.request<ProtocolBody>("protocol");
    this.state.protocol = body.applications;
    this.notify();
  }

  private async refreshDiagram(): Promise<void> {
    const request = this.diagramRequest();
    if (!request) {
      this.state.diagram = null;
      this.notify();
      return;
    }
    try {
      this.state.diagram = await this.client.request<DiagramBody>(request.type, request.params);
    } catch (err) {
      if (err instanceof RequestError && err.code === "STALE_MATCH") {
        this.toast(`stale match: ${err.message}`);
        await this.refreshOverview();
        return;
      }
      this.toast(describeError(err));
      return;
    }
    this.notify();
  }

  private diagramRequest(): { type: string; params: Record<string, unknown> } | null {
    const options = this.diagramOptions(this.state.options);
    const { diagramFocus, selectedRule, selectedMatchId, selectedSteps } = this.state;
    if (diagramFocus === "match" && selectedRule && selectedMatchId) {
      return { type: "matchDiagram", params: { rule: selectedRule, matchId: selectedMatchId, options } };
    }
    if (diagramFocus === "steps" && selectedSteps.length > 0) {
      return { type: "state", params: { select: selectedSteps, options } };
    }
    if (diagramFocus === "rule" && selectedRule) {
      return { type: "ruleDiagram", params: { rule: selectedRule, options } };
    }
    return null;
  }

  private track(work: Promise<void>): void {
    this.backgroundFetches.push(
      work.catch((err) => {
        this.toast(describeError(err));
      }),
    );
  }

  toast(message: string): void {
    this.state.toasts = [...this.state.toasts, message].slice(-MAX_TOASTS);
    this.notify();
  }

  dismissToast(index: number): void {
    this.state.toasts = this.state.toasts.filter((_, i) => i !== index);
    this.notify();
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }
}

function pickVisibility(opts: DisplayOptions) {
  return {
    showSource: opts.showSource,
    showTarget: opts.showTarget,
    showCorrespondence: opts.showCorrespondence,
  };
}

function pickContent(opts: DisplayOptions) {
  return {
    contextOnly: opts.contextOnly,
    labelMode: opts.labelMode,
    neighborhoodK: opts.neighborhoodK,
  };
}

function breakpointsFromDocument(document: unknown): BreakpointEntry[] {
  if (typeof document === "string") {
    try {
      document = JSON.parse(document);
    } catch {
      return [];
    }
  }
  const payload = (document as { payload?: { breakpoints?: unknown } } | null)?.payload;
  const raw = payload?.breakpoints;
  if (!Array.isArray(raw)) return [];
  return raw.filter(
    (entry): entry is BreakpointEntry =>
      typeof entry === "object" && entry !== null && typeof (entry as BreakpointEntry).kind === "string",
  );
}

export function describeError(err: unknown): string {
  if (err instanceof RequestError) return `${err.code}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}
