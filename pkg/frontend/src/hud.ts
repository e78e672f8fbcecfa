// Heads-up display: a pure view-model plus a thin DOM writer, so tests can
// assert on the model without a browser.

import { SceneModel } from "./scene.js";

export interface HudState {
  step: number;
  totalReturn: number;
  connected: number;
  totalPairs: number;
  attachablePairs: string[];
  recording: boolean;
  done: boolean;
  success: boolean;
}

export interface HudModel {
  lines: string[];
  attachableHighlight: boolean;
  recordingIndicator: boolean;
  banner: string | null;
  inputLocked: boolean;
}

export function hudModel(s: HudState): HudModel {
  const lines = [
    `step ${s.step}`,
    `return ${s.totalReturn.toFixed(2)}`,
    `connected ${s.connected}/${s.totalPairs}`,
    s.attachablePairs.length
      ? `attachable: ${s.attachablePairs.join(", ")}`
      : "attachable: none",
    s.recording ? "recording" : "not recording",
  ];
  let banner: string | null = null;
  if (s.done) {
    banner = s.success ? "assembled - success!" : "episode over (step limit)";
  }
  return {
    lines,
    attachableHighlight: s.attachablePairs.length > 0,
    recordingIndicator: s.recording,
    banner,
    inputLocked: s.done,
  };
}

export function hudStateFrom(
  scene: SceneModel,
  totalReturn: number,
  recording: boolean,
  done: boolean,
  success: boolean
): HudState {
  return {
    step: scene.step,
    totalReturn,
    connected: scene.connectedCount,
    totalPairs: scene.totalPairs(),
    attachablePairs: [...scene.attachable].sort(),
    recording,
    done,
    success,
  };
}

export function renderHud(root: HTMLElement, model: HudModel): void {
  const text = root.querySelector<HTMLElement>(".hud-lines");
  if (text) text.textContent = model.lines.join("\n");
  const banner = root.querySelector<HTMLElement>(".hud-banner");
  if (banner) {
    banner.textContent = model.banner ?? "";
    banner.style.display = model.banner ? "block" : "none";
    banner.classList.toggle("success", model.banner?.includes("success") ?? false);
  }
  const rec = root.querySelector<HTMLElement>(".hud-recording");
  if (rec) rec.style.display = model.recordingIndicator ? "inline-block" : "none";
}
