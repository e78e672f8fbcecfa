import { describe, expect, it } from "vitest";

import { SceneModel, partColor } from "../src/scene.js";
import { ModelDoc, Observation } from "../src/protocol.js";

const MODEL: ModelDoc = {
  name: "block",
  version: 1,
  parts: [
    {
      id: "block_a",
      shapes: [{ kind: "box", half_extents: [0.05, 0.05, 0.05], pos: [0, 0, 0], quat: [1, 0, 0, 0] }],
      connectors: [
        { id: "top", size: 0.02, pos: [0, 0, 0.05], quat: [1, 0, 0, 0], mate: "block_b.bottom", symmetry_order: 1 },
      ],
    },
    {
      id: "block_b",
      shapes: [{ kind: "box", half_extents: [0.05, 0.05, 0.05], pos: [0, 0, 0], quat: [1, 0, 0, 0] }],
      connectors: [
        { id: "bottom", size: 0.02, pos: [0, 0, -0.05], quat: [1, 0, 0, 0], mate: "block_a.top", symmetry_order: 1 },
      ],
    },
  ],
};

function randomObs(step: number, rng: () => number): Observation {
  const quat = (): [number, number, number, number] => {
    let q = [rng() - 0.5, rng() - 0.5, rng() - 0.5, rng() - 0.5];
    const n = Math.hypot(...q) || 1;
    q = q.map((v) => v / n);
    if (q[0] < 0) q = q.map((v) => -v);
    return q as [number, number, number, number];
  };
  return {
    parts: ["block_a", "block_b"].map((id) => ({
      id,
      pos: [rng() * 2 - 1, rng() * 2 - 1, rng()] as [number, number, number],
      quat: quat(),
      root: id,
    })),
    cursors: [
      { pos: [rng(), rng(), rng()] as [number, number, number], held: null },
      { pos: [rng(), rng(), rng()] as [number, number, number], held: rng() > 0.5 ? "block_a" : null },
    ],
    attachable: [],
    connected_count: 0,
    step,
  };
}

describe("scene model", () => {
  it("renders poses exactly equal to the last observation, 100 random steps", () => {
    const scene = new SceneModel(MODEL);
    let x = 42;
    const rng = () => {
      // xorshift-ish, deterministic
      x ^= x << 13; x ^= x >> 17; x ^= x << 5; x |= 0;
      return (x >>> 0) / 2 ** 32;
    };
    for (let step = 0; step < 100; step++) {
      const obs = randomObs(step, rng);
      scene.update(obs);
      for (const po of obs.parts) {
        const part = scene.part(po.id);
        expect(part.pos).toEqual(po.pos);
        expect(part.quat).toEqual(po.quat);
        for (let i = 0; i < 3; i++) expect(part.pos[i]).toBe(po.pos[i]);
        for (let i = 0; i < 4; i++) expect(part.quat[i]).toBe(po.quat[i]);
      }
      obs.cursors.forEach((c, i) => {
        expect(scene.cursors[i].pos).toEqual(c.pos);
        expect(scene.cursors[i].held).toBe(c.held);
      });
      expect(scene.step).toBe(step);
    }
  });

  it("marks attachable connectors from the pair ids", () => {
    const scene = new SceneModel(MODEL);
    const obs = randomObs(0, () => 0.5);
    obs.attachable = [
      { pair: "block_a.top|block_b.bottom", distance: 0.01, up_sim: 1, forward_sim: 1 },
    ];
    scene.update(obs);
    expect(scene.attachable.has("block_a.top|block_b.bottom")).toBe(true);
    expect(scene.attachableConnectors.has("block_a.top")).toBe(true);
    expect(scene.attachableConnectors.has("block_b.bottom")).toBe(true);
  });

  it("counts goal pairs once per mate pair", () => {
    expect(new SceneModel(MODEL).totalPairs()).toBe(1);
  });

  it("assigns each part a distinct hue", () => {
    const colors = MODEL.parts.map((_, i) => partColor(i, MODEL.parts.length));
    expect(new Set(colors).size).toBe(MODEL.parts.length);
  });

  it("drops parts missing from the observation (subset spawns)", () => {
    const scene = new SceneModel(MODEL);
    const obs = randomObs(0, () => 0.25);
    obs.parts = obs.parts.slice(0, 1);
    scene.update(obs);
    expect(scene.parts.map((p) => p.id)).toEqual(["block_a"]);
  });
});
