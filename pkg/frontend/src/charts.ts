// Fixed-capacity scrolling series for the strip charts. Pure data; the DOM
// layer turns points into canvas strokes.

export interface Point {
  t: number;
  v: number;
}

export class ScrollingSeries {
  private buf: Point[];
  private head = 0;
  private count = 0;

  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
    this.buf = new Array(capacity);
  }

  push(t: number, v: number): void {
    this.buf[(this.head + this.count) % this.capacity] = { t, v };
    if (this.count < this.capacity) {
      this.count += 1;
    } else {
      this.head = (this.head + 1) % this.capacity;
    }
  }

  get length(): number {
    return this.count;
  }

  /** Oldest-to-newest snapshot. */
  points(): Point[] {
    const out: Point[] = [];
    for (let i = 0; i < this.count; i++) {
      out.push(this.buf[(this.head + i) % this.capacity]);
    }
    return out;
  }

  /** Value range padded so a flat series still has height. */
  range(): { min: number; max: number } {
    if (this.count === 0) return { min: 0, max: 1 };
    let min = Infinity;
    let max = -Infinity;
    for (const p of this.points()) {
      if (p.v < min) min = p.v;
      if (p.v > max) max = p.v;
    }
    if (max - min < 1e-9) {
      min -= 0.5;
      max += 0.5;
    }
    return { min, max };
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
  }

  /** Mean of the last n values; NaN when empty. */
  tailMean(n: number): number {
    if (this.count === 0) return NaN;
    const pts = this.points();
    const take = Math.min(n, pts.length);
    let sum = 0;
    for (let i = pts.length - take; i < pts.length; i++) sum += pts[i].v;
    return sum / take;
  }
}
