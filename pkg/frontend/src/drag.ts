// Drag interaction for the light-source marker, kept DOM-free: pixel
// coordinates in, throttled set_source values out.

import { Throttle } from "./throttle.js";

export interface StripGeometry {
  topPx: number; // pixel row of the highest altitude
  heightPx: number;
  topMm: number; // altitude at topPx
  bottomMm: number; // altitude at topPx + heightPx
}

export function pxToMm(y: number, geo: StripGeometry): number {
  const frac = (y - geo.topPx) / geo.heightPx;
  const mm = geo.topMm + frac * (geo.bottomMm - geo.topMm);
  const lo = Math.min(geo.topMm, geo.bottomMm);
  const hi = Math.max(geo.topMm, geo.bottomMm);
  return Math.min(Math.max(mm, lo), hi);
}

export function mmToPx(mm: number, geo: StripGeometry): number {
  return geo.topPx + ((mm - geo.topMm) / (geo.bottomMm - geo.topMm)) * geo.heightPx;
}

export const MAX_DRAG_RATE_HZ = 20;

export class SourceDrag {
  private throttle: Throttle<number>;
  private active = false;
  lastSent: number | null = null;

  constructor(
    private geo: StripGeometry,
    send: (zMm: number) => void,
    now?: () => number,
    schedule?: (fn: () => void, ms: number) => unknown,
  ) {
    this.throttle = new Throttle<number>(
      (v) => {
        this.lastSent = v;
        send(v);
      },
      1000 / MAX_DRAG_RATE_HZ,
      now,
      schedule,
    );
  }

  setGeometry(geo: StripGeometry): void {
    this.geo = geo;
  }

  get dragging(): boolean {
    return this.active;
  }

  start(y: number): void {
    this.active = true;
    this.throttle.push(pxToMm(y, this.geo));
  }

  move(y: number): void {
    if (!this.active) return;
    this.throttle.push(pxToMm(y, this.geo));
  }

  /** Drop: the release position always goes out — immediately when the rate
   * allows, otherwise via the throttle's trailing emit. */
  end(y: number): void {
    if (!this.active) return;
    this.active = false;
    this.throttle.push(pxToMm(y, this.geo));
  }
}
