// Browser entry point: connection form, canvas, keyboard capture, 20 Hz tick.

import { KEY_HELP } from "./input.js";
import { Renderer, THEMES } from "./render.js";
import { TeleopSession } from "./session.js";
import { hudModel, renderHud } from "./hud.js";

const TICK_MS = 50; // 20 Hz

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function defaultUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host || "127.0.0.1:8765"}`;
}

async function start(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("scene");
  const renderer = new Renderer(canvas);
  const banner = el<HTMLElement>("banner");
  const hudRoot = el<HTMLElement>("hud");
  const urlInput = el<HTMLInputElement>("server-url");
  const modelInput = el<HTMLInputElement>("model-name");
  const seedInput = el<HTMLInputElement>("seed");
  const themeSelect = el<HTMLSelectElement>("theme");
  urlInput.value = defaultUrl();

  for (const theme of THEMES) {
    const opt = document.createElement("option");
    opt.value = theme.name;
    opt.textContent = theme.name;
    themeSelect.appendChild(opt);
  }
  themeSelect.onchange = () => {
    renderer.theme = THEMES.find((t) => t.name === themeSelect.value) ?? THEMES[0];
  };

  el<HTMLElement>("key-help").textContent = KEY_HELP.map(
    ([keys, what]) => `${keys}  -  ${what}`
  ).join("\n");

  let session: TeleopSession | null = null;
  let timer: ReturnType<typeof setInterval> | null = null;

  async function connect(): Promise<void> {
    banner.textContent = "connecting...";
    banner.className = "";
    session?.close();
    if (timer) clearInterval(timer);
    try {
      session = await TeleopSession.connect({
        url: urlInput.value,
        model: modelInput.value,
        seed: parseInt(seedInput.value, 10) || 0,
        factory: (url) => new WebSocket(url) as never,
      });
    } catch (err) {
      banner.textContent = `connection failed: ${
        err instanceof Error ? err.message : String(err)
      } - check the server and retry`;
      banner.className = "error";
      return;
    }
    banner.textContent = "";
    session.client.onDisconnect = () => {
      banner.textContent = "connection lost - press Connect to retry";
      banner.className = "error";
    };
    let busy = false;
    timer = setInterval(async () => {
      if (!session || busy) return;
      busy = true;
      try {
        await session.tick();
      } catch (err) {
        banner.textContent = `server error: ${err instanceof Error ? err.message : err}`;
        banner.className = "error";
      } finally {
        busy = false;
      }
      renderer.draw(session.scene);
      renderHud(hudRoot, hudModel(session.hud()));
    }, TICK_MS);
  }

  el<HTMLButtonElement>("connect").onclick = () => void connect();

  const swallow = new Set([
    "Tab", "Space", "Enter", "ArrowUp", "ArrowDown", "ArrowLeft", "ArrowRight",
    "PageUp", "PageDown",
  ]);
  window.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement) return;
    if (swallow.has(ev.code)) ev.preventDefault();
    session?.input.keydown(ev.code);
  });
  window.addEventListener("keyup", (ev) => {
    if (ev.target instanceof HTMLInputElement) return;
    session?.input.keyup(ev.code);
  });

  // Drag to orbit, wheel to zoom.
  let dragging = false;
  let last: [number, number] = [0, 0];
  canvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    last = [ev.clientX, ev.clientY];
  });
  window.addEventListener("mouseup", () => (dragging = false));
  window.addEventListener("mousemove", (ev) => {
    if (!dragging || !session) return;
    const cam = session.scene.camera;
    cam.azimuth -= (ev.clientX - last[0]) * 0.01;
    cam.elevation = Math.min(
      1.5,
      Math.max(0.05, cam.elevation + (ev.clientY - last[1]) * 0.01)
    );
    last = [ev.clientX, ev.clientY];
  });
  canvas.addEventListener("wheel", (ev) => {
    if (!session) return;
    ev.preventDefault();
    const cam = session.scene.camera;
    cam.distance = Math.min(6, Math.max(0.5, cam.distance * (ev.deltaY > 0 ? 1.1 : 0.9)));
  });
}

void start();
