// Client-side scene model: the geometry comes from the model document once,
// the poses come verbatim from the last server observation. No prediction,
// no smoothing; what the server said is what the screen shows.

import { ModelDoc, Observation, PartDoc } from "./protocol.js";
import { Quat, Vec3 } from "./math.js";

export interface ScenePart {
  id: string;
  doc: PartDoc;
  color: string;
  pos: Vec3;
  quat: Quat;
  root: string;
}

export interface SceneCursor {
  pos: Vec3;
  held: string | null;
}

export interface CameraState {
  azimuth: number; // radians about +z
  elevation: number; // radians above the horizon
  distance: number; // meters from the target point
  target: Vec3;
}

export function partColor(index: number, total: number): string {
  const hue = Math.round((360 * index) / Math.max(1, total));
  return `hsl(${hue}, 70%, 55%)`;
}

export class SceneModel {
  parts: ScenePart[] = [];
  cursors: SceneCursor[] = [];
  attachable = new Set<string>();
  attachableConnectors = new Set<string>(); // qualified ids, for marker color
  connectedCount = 0;
  step = 0;
  camera: CameraState = { azimuth: 0.8, elevation: 0.5, distance: 2.4, target: [0, 0, 0.15] };

  constructor(public model: ModelDoc) {
    const total = model.parts.length;
    this.parts = model.parts.map((doc, i) => ({
      id: doc.id,
      doc,
      color: partColor(i, total),
      pos: [0, 0, 0] as Vec3,
      quat: [1, 0, 0, 0] as Quat,
      root: doc.id,
    }));
  }

  part(id: string): ScenePart {
    const found = this.parts.find((p) => p.id === id);
    if (!found) throw new Error(`no part ${id} in scene`);
    return found;
  }

  /** Adopt an observation wholesale; poses are taken exactly as sent. */
  update(obs: Observation): void {
    const present = new Set(obs.parts.map((p) => p.id));
    this.parts = this.parts.filter((p) => present.has(p.id));
    for (const po of obs.parts) {
      const part = this.part(po.id);
      part.pos = po.pos;
      part.quat = po.quat;
      part.root = po.root;
    }
    this.cursors = obs.cursors.map((c) => ({ pos: c.pos, held: c.held }));
    this.attachable = new Set(obs.attachable.map((a) => a.pair));
    this.attachableConnectors = new Set(
      obs.attachable.flatMap((a) => a.pair.split("|"))
    );
    this.connectedCount = obs.connected_count;
    this.step = obs.step;
  }

  totalPairs(): number {
    const pairs = new Set<string>();
    for (const part of this.model.parts) {
      for (const conn of part.connectors) {
        pairs.add([`${part.id}.${conn.id}`, conn.mate].sort().join("|"));
      }
    }
    return pairs.size;
  }
}
