// Schematic 3-D rendering of convex primitives onto a 2-D canvas: orbit
// camera, painter-sorted box faces, spheres as discs, connector markers with
// up/forward glyphs, wireframe cursor cubes, and a floor grid.

import { Quat, Vec3, add, quatMul, quatRotate, sub } from "./math.js";
import { SceneModel, ScenePart } from "./scene.js";
import { ShapeDoc } from "./protocol.js";

export interface Theme {
  name: string;
  background: string;
  floor: string;
  grid: string;
}

export const THEMES: Theme[] = [
  { name: "studio", background: "#20242b", floor: "#2b313b", grid: "#3c4454", },
  { name: "workshop", background: "#2b2420", floor: "#3a3029", grid: "#55473c" },
  { name: "blueprint", background: "#102040", floor: "#14284e", grid: "#2a4a80" },
];

interface Projected {
  x: number;
  y: number;
  depth: number;
}

export class Renderer {
  theme: Theme = THEMES[0];

  constructor(private canvas: HTMLCanvasElement) {}

  private viewBasis(scene: SceneModel) {
    const { azimuth, elevation, distance, target } = scene.camera;
    const ce = Math.cos(elevation);
    const eye: Vec3 = [
      target[0] + distance * ce * Math.cos(azimuth),
      target[1] + distance * ce * Math.sin(azimuth),
      target[2] + distance * Math.sin(elevation),
    ];
    const fwd = normalize(sub(target, eye));
    const right = normalize(cross(fwd, [0, 0, 1]));
    const up = cross(right, fwd);
    return { eye, fwd, right, up };
  }

  private project(scene: SceneModel, p: Vec3): Projected {
    const { eye, fwd, right, up } = this.viewBasis(scene);
    const rel = sub(p, eye);
    const depth = dot(rel, fwd);
    const f = (0.9 * this.canvas.height) / Math.max(depth, 0.05);
    return {
      x: this.canvas.width / 2 + f * dot(rel, right),
      y: this.canvas.height / 2 - f * dot(rel, up),
      depth,
    };
  }

  draw(scene: SceneModel): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.fillStyle = this.theme.background;
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    this.drawFloor(ctx, scene);

    // Painter's order across parts by world depth of their origins.
    const byDepth = [...scene.parts].sort(
      (a, b) => this.project(scene, b.pos).depth - this.project(scene, a.pos).depth
    );
    for (const part of byDepth) {
      for (const shape of part.doc.shapes) {
        this.drawShape(ctx, scene, part, shape);
      }
      for (const conn of part.doc.connectors) {
        const qid = `${part.id}.${conn.id}`;
        this.drawConnector(ctx, scene, part, conn.pos, conn.quat, qid);
      }
    }
    scene.cursors.forEach((cursor, i) => {
      this.drawCursorCube(ctx, scene, cursor.pos, 0.06, i === 0 ? "#5ab4ff" : "#ff7ad9");
    });
  }

  private drawFloor(ctx: CanvasRenderingContext2D, scene: SceneModel): void {
    ctx.strokeStyle = this.theme.grid;
    ctx.lineWidth = 1;
    const extent = 1.25;
    for (let i = -5; i <= 5; i++) {
      const t = (i / 5) * extent;
      this.polyline(ctx, scene, [
        [t, -extent, 0],
        [t, extent, 0],
      ]);
      this.polyline(ctx, scene, [
        [-extent, t, 0],
        [extent, t, 0],
      ]);
    }
  }

  private drawShape(
    ctx: CanvasRenderingContext2D,
    scene: SceneModel,
    part: ScenePart,
    shape: ShapeDoc
  ): void {
    const worldPos = add(part.pos, quatRotate(part.quat, shape.pos));
    const worldQuat = quatMul(part.quat, shape.quat);
    if (shape.kind === "sphere") {
      const c = this.project(scene, worldPos);
      const edge = this.project(scene, add(worldPos, [shape.radius ?? 0.05, 0, 0]));
      const r = Math.max(2, Math.hypot(edge.x - c.x, edge.y - c.y));
      ctx.fillStyle = part.color;
      ctx.globalAlpha = 0.8;
      ctx.beginPath();
      ctx.arc(c.x, c.y, r, 0, 2 * Math.PI);
      ctx.fill();
      ctx.globalAlpha = 1;
      return;
    }
    const h = shape.half_extents ?? [0.05, 0.05, 0.05];
    const corners: Vec3[] = [];
    for (const sx of [-1, 1]) {
      for (const sy of [-1, 1]) {
        for (const sz of [-1, 1]) {
          corners.push(
            add(worldPos, quatRotate(worldQuat, [h[0] * sx, h[1] * sy, h[2] * sz]))
          );
        }
      }
    }
    const faces = [
      [0, 1, 3, 2], [4, 5, 7, 6], [0, 1, 5, 4], [2, 3, 7, 6], [0, 2, 6, 4], [1, 3, 7, 5],
    ];
    const projected = corners.map((c) => this.project(scene, c));
    const ordered = faces
      .map((f) => ({ f, depth: f.reduce((s, i) => s + projected[i].depth, 0) / 4 }))
      .sort((a, b) => b.depth - a.depth);
    for (const { f } of ordered) {
      ctx.beginPath();
      f.forEach((idx, i) =>
        i === 0 ? ctx.moveTo(projected[idx].x, projected[idx].y)
                : ctx.lineTo(projected[idx].x, projected[idx].y)
      );
      ctx.closePath();
      ctx.fillStyle = part.color;
      ctx.globalAlpha = 0.55;
      ctx.fill();
      ctx.globalAlpha = 1;
      ctx.strokeStyle = "#00000055";
      ctx.stroke();
    }
  }

  private drawConnector(
    ctx: CanvasRenderingContext2D,
    scene: SceneModel,
    part: ScenePart,
    localPos: Vec3,
    localQuat: Quat,
    qid: string
  ): void {
    const pos = add(part.pos, quatRotate(part.quat, localPos));
    const quat = quatMul(part.quat, localQuat);
    const hot = scene.attachableConnectors.has(qid);
    const color = hot ? "#3dff7a" : "#ffd34d";
    const p = this.project(scene, pos);
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(p.x, p.y, hot ? 5 : 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = color;
    ctx.lineWidth = hot ? 2 : 1;
    this.polyline(ctx, scene, [pos, add(pos, quatRotate(quat, [0, 0, 0.04]))]); // up
    this.polyline(ctx, scene, [pos, add(pos, quatRotate(quat, [0.04, 0, 0]))]); // forward
    ctx.lineWidth = 1;
  }

  private drawCursorCube(
    ctx: CanvasRenderingContext2D,
    scene: SceneModel,
    pos: Vec3,
    half: number,
    color: string
  ): void {
    const corners: Vec3[] = [];
    for (const sx of [-1, 1])
      for (const sy of [-1, 1])
        for (const sz of [-1, 1]) corners.push(add(pos, [half * sx, half * sy, half * sz]));
    const edges = [
      [0, 1], [2, 3], [4, 5], [6, 7],
      [0, 2], [1, 3], [4, 6], [5, 7],
      [0, 4], [1, 5], [2, 6], [3, 7],
    ];
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    for (const [a, b] of edges) this.polyline(ctx, scene, [corners[a], corners[b]]);
    ctx.lineWidth = 1;
  }

  private polyline(ctx: CanvasRenderingContext2D, scene: SceneModel, pts: Vec3[]): void {
    ctx.beginPath();
    pts.forEach((p, i) => {
      const q = this.project(scene, p);
      i === 0 ? ctx.moveTo(q.x, q.y) : ctx.lineTo(q.x, q.y);
    });
    ctx.stroke();
  }
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}

function normalize(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]) || 1;
  return [v[0] / n, v[1] / n, v[2] / n];
}
