// Rate limiter for continuous drag input: emits immediately when idle,
// otherwise holds the latest value and flushes it when the interval elapses,
// so the final drop position is always sent.

export type Clock = () => number;
export type Scheduler = (fn: () => void, ms: number) => unknown;

export class Throttle<T> {
  private lastEmit = -Infinity;
  private pending: T | undefined;
  private timerActive = false;

  constructor(
    private readonly emit: (value: T) => void,
    private readonly minIntervalMs: number,
    private readonly now: Clock = () => Date.now(),
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {}

  push(value: T): void {
    const t = this.now();
    const elapsed = t - this.lastEmit;
    if (elapsed >= this.minIntervalMs) {
      this.lastEmit = t;
      this.emit(value);
      return;
    }
    this.pending = value;
    if (!this.timerActive) {
      this.timerActive = true;
      this.schedule(() => this.flush(), this.minIntervalMs - elapsed);
    }
  }

  /** Emit the held value, if any. */
  flush(): void {
    this.timerActive = false;
    if (this.pending !== undefined) {
      this.lastEmit = this.now();
      const v = this.pending;
      this.pending = undefined;
      this.emit(v);
    }
  }
}
