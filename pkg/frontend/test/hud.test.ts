import { describe, expect, it } from "vitest";

import { hudModel } from "../src/hud.js";

const BASE = {
  step: 12,
  totalReturn: 1.0,
  connected: 1,
  totalPairs: 4,
  attachablePairs: [] as string[],
  recording: false,
  done: false,
  success: false,
};

describe("hud view model", () => {
  it("shows return and progress after a connection", () => {
    const m = hudModel({ ...BASE });
    expect(m.lines).toContain("return 1.00");
    expect(m.lines).toContain("connected 1/4");
    expect(m.banner).toBeNull();
    expect(m.inputLocked).toBe(false);
  });

  it("highlights attachable pairs", () => {
    const m = hudModel({ ...BASE, attachablePairs: ["board.c1|leg1.peg"] });
    expect(m.attachableHighlight).toBe(true);
    expect(m.lines.join("\n")).toContain("board.c1|leg1.peg");
  });

  it("success banner locks input", () => {
    const m = hudModel({ ...BASE, done: true, success: true });
    expect(m.banner).toMatch(/success/);
    expect(m.inputLocked).toBe(true);
  });

  it("step-limit end is distinguished from success", () => {
    const m = hudModel({ ...BASE, done: true, success: false });
    expect(m.banner).not.toMatch(/success/);
    expect(m.inputLocked).toBe(true);
  });

  it("recording indicator follows the flag", () => {
    expect(hudModel({ ...BASE, recording: true }).recordingIndicator).toBe(true);
    expect(hudModel(BASE).recordingIndicator).toBe(false);
  });
});
