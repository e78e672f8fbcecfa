// Wire protocol client. One JSON message per frame; every request carries an
// integer rid and receives exactly one reply echoing it.

export type Vec3Wire = [number, number, number];
export type QuatWire = [number, number, number, number];

export interface ShapeDoc {
  kind: "box" | "sphere";
  half_extents?: Vec3Wire;
  radius?: number;
  pos: Vec3Wire;
  quat: QuatWire;
}

export interface ConnectorDoc {
  id: string;
  size: number;
  pos: Vec3Wire;
  quat: QuatWire;
  mate: string;
  symmetry_order: number;
}

export interface PartDoc {
  id: string;
  shapes: ShapeDoc[];
  connectors: ConnectorDoc[];
}

export interface ModelDoc {
  name: string;
  version: number;
  parts: PartDoc[];
  thresholds?: { distance: number; up: number; forward: number };
}

export interface PartObs {
  id: string;
  pos: Vec3Wire;
  quat: QuatWire;
  root: string;
}

export interface Observation {
  parts: PartObs[];
  cursors: { pos: Vec3Wire; held: string | null }[];
  attachable: { pair: string; distance: number; up_sim: number; forward_sim: number }[];
  connected_count: number;
  step: number;
}

export interface StepData {
  obs: Observation;
  reward: number;
  done: boolean;
  info: { events: Record<string, unknown>[]; success: boolean };
}

export class ServerError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

// The browser supplies WebSocket; node tests inject the `ws` implementation.
export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => WebSocketLike;

interface Pending {
  resolve: (data: Record<string, unknown>) => void;
  reject: (err: Error) => void;
}

export class SessionClient {
  private ws: WebSocketLike | null = null;
  private rid = 0;
  private pending = new Map<number, Pending>();
  onDisconnect: ((reason: string) => void) | null = null;

  constructor(private url: string, private factory: SocketFactory) {}

  open(): Promise<void> {
    return new Promise((resolve, reject) => {
      const ws = this.factory(this.url);
      this.ws = ws;
      ws.onopen = () => resolve();
      ws.onerror = () => reject(new Error(`cannot reach ${this.url}`));
      ws.onclose = () => {
        const err = new Error("connection closed");
        for (const p of this.pending.values()) p.reject(err);
        this.pending.clear();
        this.onDisconnect?.("connection closed");
      };
      ws.onmessage = (ev) => this.handleFrame(String(ev.data));
    });
  }

  private handleFrame(raw: string): void {
    let msg: { type?: string; rid?: number; data?: Record<string, unknown>; code?: string; message?: string };
    try {
      msg = JSON.parse(raw);
    } catch {
      return; // server never sends invalid JSON; ignore rather than crash
    }
    const entry = typeof msg.rid === "number" ? this.pending.get(msg.rid) : undefined;
    if (!entry) return;
    this.pending.delete(msg.rid!);
    if (msg.type === "result") {
      entry.resolve(msg.data ?? {});
    } else {
      entry.reject(new ServerError(msg.code ?? "unknown", msg.message ?? "server error"));
    }
  }

  rpc(type: string, payload: Record<string, unknown> = {}): Promise<Record<string, unknown>> {
    if (!this.ws) return Promise.reject(new Error("not connected"));
    const rid = ++this.rid;
    const frame = JSON.stringify({ type, rid, ...payload });
    return new Promise((resolve, reject) => {
      this.pending.set(rid, { resolve, reject });
      this.ws!.send(frame);
    });
  }

  close(): void {
    this.ws?.close();
  }

  // Typed conveniences for the handful of calls the UI makes.

  async hello(): Promise<{ engine: string; protocol: number }> {
    return (await this.rpc("hello")) as unknown as { engine: string; protocol: number };
  }

  async listModels(): Promise<{ name: string; parts: number; connectors: number }[]> {
    const data = await this.rpc("list_models");
    return data.models as { name: string; parts: number; connectors: number }[];
  }

  async make(config: Record<string, unknown>): Promise<{ session_id: string; model: ModelDoc }> {
    return (await this.rpc("make", { config })) as unknown as {
      session_id: string;
      model: ModelDoc;
    };
  }

  async reset(session: string, seed: number): Promise<Observation> {
    const data = await this.rpc("reset", { session, seed });
    return data.obs as unknown as Observation;
  }

  async step(session: string, action: number[]): Promise<StepData> {
    return (await this.rpc("step", { session, action })) as unknown as StepData;
  }

  async recordStart(session: string, path: string): Promise<void> {
    await this.rpc("record_start", { session, path });
  }

  async recordStop(session: string): Promise<{ path: string | null; steps: number }> {
    return (await this.rpc("record_stop", { session })) as unknown as {
      path: string | null;
      steps: number;
    };
  }
}
