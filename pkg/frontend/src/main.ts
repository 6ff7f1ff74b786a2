// Operator console wiring: vertical strip with flapper + source markers,
// scrolling J and m charts, transport buttons, reconnect banner. All
// protocol, throttling, and chart logic lives in the DOM-free modules.

import { ScrollingSeries } from "./charts.js";
import { SOCKET_OPEN, SocketLike, TelemetryClient } from "./connection.js";
import { SourceDrag, StripGeometry, mmToPx } from "./drag.js";
import { Frame } from "./protocol.js";

const CHART_CAPACITY = 600; // ~30 s at 20 Hz render sampling
const STRIP_TOP_MM = 1000;
const STRIP_BOTTOM_MM = 0;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function drawSeries(canvas: HTMLCanvasElement, series: ScrollingSeries, color: string): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pts = series.points();
  if (pts.length < 2) return;
  const { min, max } = series.range();
  const t0 = pts[0].t;
  const t1 = pts[pts.length - 1].t;
  const span = Math.max(t1 - t0, 1e-9);
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  pts.forEach((p, i) => {
    const x = ((p.t - t0) / span) * canvas.width;
    const y = canvas.height - ((p.v - min) / (max - min)) * canvas.height;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

function main(): void {
  const strip = el<HTMLDivElement>("strip");
  const flapperMarker = el<HTMLDivElement>("flapper-marker");
  const sourceMarker = el<HTMLDivElement>("source-marker");
  const banner = el<HTMLDivElement>("banner");
  const statusLine = el<HTMLSpanElement>("status-line");
  const jCanvas = el<HTMLCanvasElement>("chart-j");
  const mCanvas = el<HTMLCanvasElement>("chart-m");

  const jSeries = new ScrollingSeries(CHART_CAPACITY);
  const mSeries = new ScrollingSeries(CHART_CAPACITY);

  const geometry = (): StripGeometry => ({
    topPx: 0,
    heightPx: strip.clientHeight,
    topMm: STRIP_TOP_MM,
    bottomMm: STRIP_BOTTOM_MM,
  });

  const url = `ws://${location.hostname}:${location.port || "8765"}`;
  const client = new TelemetryClient(
    url,
    {
      onFrame: (frame: Frame) => {
        jSeries.push(frame.t, frame.J);
        mSeries.push(frame.t, frame.m);
      },
      onStatus: (status) => {
        statusLine.textContent = `${status.scenario} — ${status.running ? "running" : "paused"}`;
      },
      onErrorRecord: (err) => {
        // divergence and protocol errors are shown verbatim
        banner.textContent = err.reason;
        banner.classList.add("visible", "error");
      },
      onConnectionChange: (connected) => {
        if (connected) {
          banner.classList.remove("visible", "error");
        } else {
          banner.textContent = "connection lost — reconnecting…";
          banner.classList.add("visible");
        }
      },
    },
    (u) => new WebSocket(u) as unknown as SocketLike,
  );
  client.connect();

  const drag = new SourceDrag(geometry(), (zMm) => client.setSource(zMm));
  sourceMarker.addEventListener("pointerdown", (ev) => {
    sourceMarker.setPointerCapture(ev.pointerId);
    drag.setGeometry(geometry());
    drag.start(ev.clientY - strip.getBoundingClientRect().top);
  });
  sourceMarker.addEventListener("pointermove", (ev) => {
    drag.move(ev.clientY - strip.getBoundingClientRect().top);
  });
  sourceMarker.addEventListener("pointerup", (ev) => {
    drag.end(ev.clientY - strip.getBoundingClientRect().top);
  });

  el<HTMLButtonElement>("btn-pause").addEventListener("click", () =>
    client.send({ type: "pause" }),
  );
  el<HTMLButtonElement>("btn-resume").addEventListener("click", () =>
    client.send({ type: "resume" }),
  );
  el<HTMLButtonElement>("btn-reset").addEventListener("click", () => {
    jSeries.clear();
    mSeries.clear();
    client.send({ type: "reset" });
  });

  // render at display rate from the last known frame; never blocks on the socket
  const render = () => {
    const frame = client.lastFrame;
    if (frame) {
      const geo = geometry();
      flapperMarker.style.top = `${mmToPx(frame.z, geo)}px`;
      // while dragging, the marker follows the pointer, not stale frames
      const src = drag.dragging && drag.lastSent !== null ? drag.lastSent : frame.z_src;
      sourceMarker.style.top = `${mmToPx(src, geo)}px`;
      drawSeries(jCanvas, jSeries, "#d9822b");
      drawSeries(mCanvas, mSeries, "#2b6cd9");
    }
    requestAnimationFrame(render);
  };
  requestAnimationFrame(render);

  // expose the socket constant so a bundler does not tree-shake the check
  void SOCKET_OPEN;
}

window.addEventListener("load", main);
