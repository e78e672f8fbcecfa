import { describe, expect, it } from "vitest";

import { ServerError, SessionClient, WebSocketLike } from "../src/protocol.js";

class FakeSocket implements WebSocketLike {
  sent: string[] = [];
  onopen: ((ev?: unknown) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  replyWith: (msg: Record<string, unknown>) => Record<string, unknown> | null = () => null;

  send(data: string): void {
    this.sent.push(data);
    const msg = JSON.parse(data);
    const reply = this.replyWith(msg);
    if (reply) queueMicrotask(() => this.onmessage?.({ data: JSON.stringify(reply) }));
  }

  close(): void {
    this.onclose?.();
  }
}

function connected(): Promise<[SessionClient, FakeSocket]> {
  const sock = new FakeSocket();
  const client = new SessionClient("ws://test", () => sock);
  const opened = client.open().then(() => [client, sock] as [SessionClient, FakeSocket]);
  sock.onopen?.();
  return opened;
}

describe("protocol client", () => {
  it("echoes rids and resolves with the data payload", async () => {
    const [client, sock] = await connected();
    sock.replyWith = (msg) => ({
      type: "result",
      rid: msg.rid,
      data: { engine: "flatpack x", protocol: 1 },
    });
    const hello = await client.hello();
    expect(hello.protocol).toBe(1);
    expect(JSON.parse(sock.sent[0]).rid).toBe(1);
  });

  it("surfaces server errors with their machine-readable code", async () => {
    const [client, sock] = await connected();
    sock.replyWith = (msg) => ({
      type: "error",
      rid: msg.rid,
      code: "unknown_model",
      message: "no such model",
    });
    await expect(client.make({ model: "ghost" })).rejects.toMatchObject({
      code: "unknown_model",
    });
    await expect(client.make({ model: "ghost" })).rejects.toBeInstanceOf(ServerError);
  });

  it("matches replies to requests by rid even out of order", async () => {
    const [client, sock] = await connected();
    const buffered: Record<string, unknown>[] = [];
    sock.replyWith = (msg) => {
      buffered.push({ type: "result", rid: msg.rid, data: { echo: msg.type } });
      if (buffered.length === 2) {
        const [first, second] = buffered;
        queueMicrotask(() => sock.onmessage?.({ data: JSON.stringify(second) }));
        queueMicrotask(() => sock.onmessage?.({ data: JSON.stringify(first) }));
      }
      return null;
    };
    const a = client.rpc("hello");
    const b = client.rpc("list_models");
    const [ra, rb] = await Promise.all([a, b]);
    expect(ra.echo).toBe("hello");
    expect(rb.echo).toBe("list_models");
  });

  it("rejects all pending requests when the socket closes", async () => {
    const [client, sock] = await connected();
    sock.replyWith = () => null;
    const pending = client.rpc("hello");
    sock.close();
    await expect(pending).rejects.toThrow(/closed/);
  });

  it("reports open failure for unreachable servers", async () => {
    const sock = new FakeSocket();
    const client = new SessionClient("ws://nowhere", () => sock);
    const opened = client.open();
    sock.onerror?.();
    await expect(opened).rejects.toThrow(/nowhere/);
  });
});
