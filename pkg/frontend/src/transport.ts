/**
 * Transports deliver whole protocol lines in both directions. The browser
 * uses a WebSocket; tests plug in a TCP socket or a scripted fake. The
 * client above this seam neither knows nor cares which.
 */

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: (reason: string) => void): void;
  close(): void;
}

/** Reassembles newline-delimited messages from arbitrary chunk boundaries. */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const parts = this.buffer.split("\n");
    this.buffer = parts.pop() ?? "";
    const lines: string[] = [];
    for (let part of parts) {
      if (part.endsWith("\r")) part = part.slice(0, -1);
      if (part.length > 0) lines.push(part);
    }
    return lines;
  }

  /** Whatever arrived after the last newline (useful on close). */
  get pending(): string {
    return this.buffer;
  }
}

/** The slice of the WebSocket API the transport needs; injectable in tests. */
export interface WebSocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  addEventListener(type: "open", handler: () => void): void;
  addEventListener(type: "message", handler: (ev: { data: unknown }) => void): void;
  addEventListener(type: "close", handler: (ev: { code?: number; reason?: string }) => void): void;
  addEventListener(type: "error", handler: () => void): void;
}

const WS_OPEN = 1;

export class WebSocketTransport implements Transport {
  private lineHandlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<(reason: string) => void> = [];
  private sendQueue: string[] = [];
  private closed = false;
  private splitter = new LineSplitter();

  constructor(private socket: WebSocketLike) {
    socket.addEventListener("open", () => this.flush());
    socket.addEventListener("message", (ev) => {
      if (typeof ev.data !== "string") return;
      // one websocket message may carry several protocol lines
      for (const line of this.splitter.push(ev.data + "\n")) {
        for (const handler of this.lineHandlers) handler(line);
      }
    });
    socket.addEventListener("close", (ev) => this.fireClose(ev.reason || `closed (${ev.code ?? "?"})`));
    socket.addEventListener("error", () => this.fireClose("socket error"));
  }

  /** Connect with the environment's own WebSocket implementation. */
  static connect(url: string): WebSocketTransport {
    const ctor = (globalThis as { WebSocket?: new (url: string) => WebSocketLike }).WebSocket;
    if (!ctor) throw new Error("no WebSocket implementation available");
    return new WebSocketTransport(new ctor(url));
  }

  send(line: string): void {
    if (this.closed) throw new Error("transport is closed");
    if (this.socket.readyState === WS_OPEN) {
      this.socket.send(line + "\n");
    } else {
      // not open yet: hold the line until the open event fires
      this.sendQueue.push(line);
    }
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandlers.push(handler);
  }

  onClose(handler: (reason: string) => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.socket.close();
  }

  private flush(): void {
    const queued = this.sendQueue.splice(0);
    for (const line of queued) this.socket.send(line + "\n");
  }

  private fireClose(reason: string): void {
    if (this.closed) return;
    this.closed = true;
    for (const handler of this.closeHandlers) handler(reason);
  }
}
