// Keyboard state -> 15-real continuous actions, one per client tick.
//
// Movement and rotation keys contribute +/-1 on their channel while held.
// Space/Enter toggle each cursor's hold client-side: the toggle edge sends
// one action with the hold channel at +/-1, and between edges the channel
// stays 0, which the server treats as "leave the grip alone". C arms the
// connect channel for exactly one action. An idle frame produces null and
// the client sends nothing, keeping recordings compact.

export const KEY_HELP: [string, string][] = [
  ["W/A/S/D, Q/E", "move cursor 0 (+y/-x/-y/+x, +z/-z)"],
  ["Arrows, PgUp/PgDn", "move cursor 1"],
  ["I/K, J/L, U/O", "rotate held part (+x/-x, +y/-y, +z/-z)"],
  ["Tab", "switch which cursor the rotation keys drive"],
  ["Space", "toggle hold, cursor 0"],
  ["Enter", "toggle hold, cursor 1"],
  ["C", "connect"],
  ["R", "toggle recording"],
];

const MOVE_KEYS: Record<string, { cursor: 0 | 1; axis: 0 | 1 | 2; sign: 1 | -1 }> = {
  KeyD: { cursor: 0, axis: 0, sign: 1 },
  KeyA: { cursor: 0, axis: 0, sign: -1 },
  KeyW: { cursor: 0, axis: 1, sign: 1 },
  KeyS: { cursor: 0, axis: 1, sign: -1 },
  KeyQ: { cursor: 0, axis: 2, sign: 1 },
  KeyE: { cursor: 0, axis: 2, sign: -1 },
  ArrowRight: { cursor: 1, axis: 0, sign: 1 },
  ArrowLeft: { cursor: 1, axis: 0, sign: -1 },
  ArrowUp: { cursor: 1, axis: 1, sign: 1 },
  ArrowDown: { cursor: 1, axis: 1, sign: -1 },
  PageUp: { cursor: 1, axis: 2, sign: 1 },
  PageDown: { cursor: 1, axis: 2, sign: -1 },
};

const ROT_KEYS: Record<string, { axis: 0 | 1 | 2; sign: 1 | -1 }> = {
  KeyI: { axis: 0, sign: 1 },
  KeyK: { axis: 0, sign: -1 },
  KeyJ: { axis: 1, sign: 1 },
  KeyL: { axis: 1, sign: -1 },
  KeyU: { axis: 2, sign: 1 },
  KeyO: { axis: 2, sign: -1 },
};

const MOVE_OFFSET: [number, number] = [0, 7];
const ROT_OFFSET: [number, number] = [3, 10];
const HOLD_OFFSET: [number, number] = [6, 13];
const CONNECT_INDEX = 14;

export class InputState {
  private pressed = new Set<string>();
  private holdEngaged: [boolean, boolean] = [false, false];
  private pendingHoldEdge: [number, number] = [0, 0];
  private pendingConnect = false;
  pendingRecordToggle = false;
  rotCursor: 0 | 1 = 0;

  keydown(code: string): void {
    if (this.pressed.has(code)) return; // ignore auto-repeat
    this.pressed.add(code);
    if (code === "Space" || code === "Enter") {
      const cursor = code === "Space" ? 0 : 1;
      this.holdEngaged[cursor] = !this.holdEngaged[cursor];
      this.pendingHoldEdge[cursor] = this.holdEngaged[cursor] ? 1 : -1;
    } else if (code === "KeyC") {
      this.pendingConnect = true;
    } else if (code === "KeyR") {
      this.pendingRecordToggle = true;
    } else if (code === "Tab") {
      this.rotCursor = this.rotCursor === 0 ? 1 : 0;
    }
  }

  keyup(code: string): void {
    this.pressed.delete(code);
  }

  holding(cursor: 0 | 1): boolean {
    return this.holdEngaged[cursor];
  }

  /** The server reported a hold change the client did not initiate. */
  syncHeld(cursor: 0 | 1, held: boolean): void {
    this.holdEngaged[cursor] = held;
  }

  takeRecordToggle(): boolean {
    const t = this.pendingRecordToggle;
    this.pendingRecordToggle = false;
    return t;
  }

  /** Build this tick's action, or null when there is nothing to say. */
  tick(): number[] | null {
    const action = new Array<number>(15).fill(0);
    let live = false;
    for (const code of this.pressed) {
      const move = MOVE_KEYS[code];
      if (move) {
        action[MOVE_OFFSET[move.cursor] + move.axis] = move.sign;
        live = true;
        continue;
      }
      const rot = ROT_KEYS[code];
      if (rot) {
        action[ROT_OFFSET[this.rotCursor] + rot.axis] = rot.sign;
        live = true;
      }
    }
    for (const cursor of [0, 1] as const) {
      if (this.pendingHoldEdge[cursor] !== 0) {
        action[HOLD_OFFSET[cursor]] = this.pendingHoldEdge[cursor];
        this.pendingHoldEdge[cursor] = 0;
        live = true;
      }
    }
    if (this.pendingConnect) {
      action[CONNECT_INDEX] = 1;
      this.pendingConnect = false;
      live = true;
    }
    return live ? action : null;
  }
}
