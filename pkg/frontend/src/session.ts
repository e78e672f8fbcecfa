// A live teleoperation session: protocol client + scene + input, one tick at
// a time. main.ts drives it from a timer and DOM events; tests drive it with
// synthetic key events and awaited ticks.

import { InputState } from "./input.js";
import { Observation, SessionClient, SocketFactory, StepData } from "./protocol.js";
import { SceneModel } from "./scene.js";
import { HudState, hudStateFrom } from "./hud.js";

export interface TeleopOptions {
  url: string;
  model: string;
  seed: number;
  factory: SocketFactory;
  config?: Record<string, unknown>;
  recordPath?: () => string;
}

export class TeleopSession {
  readonly input = new InputState();
  scene!: SceneModel;
  totalReturn = 0;
  recording = false;
  recordedPath: string | null = null;
  done = false;
  success = false;

  private constructor(
    readonly client: SessionClient,
    readonly sessionId: string,
    private opts: TeleopOptions
  ) {}

  /** hello/make/reset against the server, then build the scene. */
  static async connect(opts: TeleopOptions): Promise<TeleopSession> {
    const client = new SessionClient(opts.url, opts.factory);
    await client.open();
    await client.hello();
    const made = await client.make({ model: opts.model, ...(opts.config ?? {}) });
    const session = new TeleopSession(client, made.session_id, opts);
    session.scene = new SceneModel(made.model);
    const obs = await client.reset(made.session_id, opts.seed);
    session.scene.update(obs);
    return session;
  }

  private syncHolds(obs: Observation): void {
    // Connects can release a cursor server-side; keep the toggles truthful.
    obs.cursors.forEach((c, i) => this.input.syncHeld(i as 0 | 1, c.held !== null));
  }

  /**
   * One client tick: service a pending record toggle, then send at most one
   * action. Idle frames send nothing; after the episode ends input is locked.
   */
  async tick(): Promise<StepData | null> {
    if (this.input.takeRecordToggle()) {
      await this.toggleRecording();
    }
    if (this.done) return null;
    const action = this.input.tick();
    if (action === null) return null;
    const data = await this.client.step(this.sessionId, action);
    this.scene.update(data.obs);
    this.syncHolds(data.obs);
    this.totalReturn += data.reward;
    this.done = data.done;
    this.success = data.info.success;
    return data;
  }

  async toggleRecording(): Promise<void> {
    if (this.recording) {
      const stopped = await this.client.recordStop(this.sessionId);
      this.recordedPath = stopped.path;
      this.recording = false;
    } else {
      const path = this.opts.recordPath
        ? this.opts.recordPath()
        : `teleop_${this.opts.model}_${this.opts.seed}_${Date.now()}.traj.jsonl`;
      await this.client.recordStart(this.sessionId, path);
      this.recordedPath = path;
      this.recording = true;
    }
  }

  hud(): HudState {
    return hudStateFrom(this.scene, this.totalReturn, this.recording, this.done, this.success);
  }

  close(): void {
    this.client.close();
  }
}
