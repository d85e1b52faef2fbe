// Server-sent-event subscription with reconnect.
//
// The connection is fetch-based (works in browsers and node tests alike):
// chunks feed an incremental SSE parser, each `data:` payload is parsed
// as JSON and handed to the callback. On any error or EOF the client
// reconnects with exponential backoff, resetting after a healthy spell.

import { reconnectDelayMs } from "./backoff.js";

export interface SSEEvent {
  id: string | null;
  event: string | null;
  data: string;
}

/** Incremental SSE frame parser; feed() returns completed events. */
export class SSEParser {
  private buffer = "";

  feed(chunk: string): SSEEvent[] {
    this.buffer += chunk.replace(/\r\n/g, "\n");
    const events: SSEEvent[] = [];
    let sep: number;
    while ((sep = this.buffer.indexOf("\n\n")) >= 0) {
      const block = this.buffer.slice(0, sep);
      this.buffer = this.buffer.slice(sep + 2);
      const ev: SSEEvent = { id: null, event: null, data: "" };
      const dataLines: string[] = [];
      for (const line of block.split("\n")) {
        if (line.startsWith(":")) continue; // keepalive comment
        const colon = line.indexOf(":");
        if (colon < 0) continue;
        const field = line.slice(0, colon);
        const value = line.slice(colon + 1).replace(/^ /, "");
        if (field === "data") dataLines.push(value);
        else if (field === "id") ev.id = value;
        else if (field === "event") ev.event = value;
      }
      if (dataLines.length > 0) {
        ev.data = dataLines.join("\n");
        events.push(ev);
      }
    }
    return events;
  }
}

export interface StreamClientOptions {
  onRecord: (record: unknown) => void;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
  fetchImpl?: typeof fetch;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class StreamClient {
  private stopped = false;
  private attempt = 0;

  constructor(private url: string, private options: StreamClientOptions) {}

  async run(): Promise<void> {
    const fetchImpl = this.options.fetchImpl ?? fetch;
    const sleep = this.options.sleep ?? defaultSleep;
    while (!this.stopped) {
      this.options.onStatus?.("connecting");
      try {
        const response = await fetchImpl(this.url, {
          headers: { Accept: "text/event-stream" },
        });
        if (!response.ok || response.body === null) {
          throw new Error(`stream returned HTTP ${response.status}`);
        }
        this.options.onStatus?.("open");
        this.attempt = 0;
        await this.consume(response.body);
      } catch (err) {
        if (!this.stopped) console.warn("stream error:", err);
      }
      this.options.onStatus?.("closed");
      if (this.stopped) return;
      this.attempt += 1;
      await sleep(reconnectDelayMs(this.attempt));
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    const parser = new SSEParser();
    try {
      while (!this.stopped) {
        const { done, value } = await reader.read();
        if (done) return;
        for (const ev of parser.feed(decoder.decode(value, { stream: true }))) {
          let parsed: unknown;
          try {
            parsed = JSON.parse(ev.data);
          } catch {
            console.warn("stream: skipping non-JSON event", ev.data);
            continue;
          }
          this.options.onRecord(parsed);
        }
      }
    } finally {
      reader.cancel().catch(() => undefined);
    }
  }

  stop(): void {
    this.stopped = true;
  }
}
