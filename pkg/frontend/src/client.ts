/**
 * Request/response correlation over a line transport.
 *
 * Two invariants live here: every request gets exactly one response matched
 * by id, and at most one state-changing request is ever in flight. Read-only
 * requests may overlap freely.
 */

import {
  DataPackage,
  MUTATING_TYPES,
  WireMessage,
  isDataPackageEvent,
} from "./protocol.js";
import { Transport } from "./transport.js";

export class RequestError extends Error {
  constructor(readonly code: string, message: string) {
    super(message);
    this.name = "RequestError";
  }
}

interface Pending {
  resolve: (body: unknown) => void;
  reject: (err: Error) => void;
}

export class WireClient {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private eventHandlers: Array<(pkg: DataPackage) => void> = [];
  private closeHandlers: Array<(reason: string) => void> = [];
  private protocolErrors: string[] = [];
  private mutationPending = false;
  private closedReason: string | null = null;

  constructor(private transport: Transport) {
    transport.onLine((line) => this.ingest(line));
    transport.onClose((reason) => this.handleClose(reason));
  }

  /** True while a state-changing request awaits its response. */
  get mutationInFlight(): boolean {
    return this.mutationPending;
  }

  /** Lines the server sent that made no sense; kept for diagnostics. */
  get protocolErrorLog(): readonly string[] {
    return this.protocolErrors;
  }

  onEvent(handler: (pkg: DataPackage) => void): void {
    this.eventHandlers.push(handler);
  }

  onClose(handler: (reason: string) => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.transport.close();
    this.handleClose("closed locally");
  }

  request<T = unknown>(type: string, params: Record<string, unknown> = {}): Promise<T> {
    if (this.closedReason !== null) {
      return Promise.reject(new RequestError("CONNECTION", this.closedReason));
    }
    const mutating = MUTATING_TYPES.has(type);
    if (mutating && this.mutationPending) {
      return Promise.reject(
        new RequestError("BUSY", `a state-changing request is already in flight (${type})`),
      );
    }
    const id = this.nextId++;
    const promise = new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve: resolve as (body: unknown) => void, reject });
    });
    if (mutating) this.mutationPending = true;
    const settle = mutating
      ? () => {
          this.mutationPending = false;
        }
      : () => {};
    try {
      this.transport.send(JSON.stringify({ id, type, params }));
    } catch (err) {
      this.pending.delete(id);
      settle();
      return Promise.reject(err instanceof Error ? err : new Error(String(err)));
    }
    return promise.finally(settle);
  }

  private ingest(line: string): void {
    let msg: WireMessage;
    try {
      msg = JSON.parse(line) as WireMessage;
    } catch {
      this.protocolErrors.push(`unparseable line: ${line.slice(0, 120)}`);
      return;
    }
    if (isDataPackageEvent(msg)) {
      for (const handler of this.eventHandlers) handler(msg.body);
      return;
    }
    if (typeof msg !== "object" || msg === null || typeof msg.id !== "number") {
      this.protocolErrors.push(`response without a usable id: ${line.slice(0, 120)}`);
      return;
    }
    const entry = this.pending.get(msg.id);
    if (!entry) {
      this.protocolErrors.push(`response for unknown request ${msg.id}`);
      return;
    }
    this.pending.delete(msg.id);
    if (msg.ok) {
      entry.resolve(msg.body);
    } else {
      entry.reject(new RequestError(msg.error.code, msg.error.message));
    }
  }

  private handleClose(reason: string): void {
    if (this.closedReason !== null) return;
    this.closedReason = reason;
    const orphans = [...this.pending.values()];
    this.pending.clear();
    this.mutationPending = false;
    for (const entry of orphans) {
      entry.reject(new RequestError("CONNECTION", `connection closed: ${reason}`));
    }
    for (const handler of this.closeHandlers) handler(reason);
  }
}
