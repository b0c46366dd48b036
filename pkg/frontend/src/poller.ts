/** Injectable timer so tests can drive the loop by hand. */
export interface Scheduler {
  set(fn: () => void, delayMs: number): unknown;
  clear(handle: unknown): void;
}

const realScheduler: Scheduler = {
  set: (fn, delayMs) => setTimeout(fn, delayMs),
  clear: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export interface PollerOptions {
  intervalMs?: number;
  maxBackoffMs?: number;
  scheduler?: Scheduler;
}

/**
 * Repeatedly runs an async tick, backing off while the gateway is
 * unreachable. Ticks never overlap: the next one is scheduled only
 * after the current one settles.
 *
 * Any tick rejection counts as a connectivity problem. That overshoots
 * for server-side errors, but erring toward "disconnected" keeps the
 * console fail-closed: action buttons stay disabled until a poll
 * succeeds again.
 */
export class Poller {
  private readonly intervalMs: number;
  private readonly maxBackoffMs: number;
  private readonly scheduler: Scheduler;
  private handle: unknown = null;
  private running = false;
  private delayMs: number;
  private connectedState = true;
  private listeners: ((connected: boolean) => void)[] = [];

  constructor(
    private readonly tick: () => Promise<void>,
    options: PollerOptions = {},
  ) {
    this.intervalMs = options.intervalMs ?? 1000;
    this.maxBackoffMs = options.maxBackoffMs ?? 15_000;
    this.scheduler = options.scheduler ?? realScheduler;
    this.delayMs = this.intervalMs;
  }

  get connected(): boolean {
    return this.connectedState;
  }

  onConnectivityChange(listener: (connected: boolean) => void): void {
    this.listeners.push(listener);
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    void this.runOnce();
  }

  stop(): void {
    this.running = false;
    if (this.handle !== null) {
      this.scheduler.clear(this.handle);
      this.handle = null;
    }
  }

  /** Run one tick immediately (page load, manual refresh button). */
  async runOnce(): Promise<void> {
    try {
      await this.tick();
      this.delayMs = this.intervalMs;
      this.setConnected(true);
    } catch {
      this.delayMs = Math.min(
        this.maxBackoffMs,
        Math.max(this.delayMs, this.intervalMs) * 2,
      );
      this.setConnected(false);
    }
    if (this.running) {
      this.handle = this.scheduler.set(() => void this.runOnce(), this.delayMs);
    }
  }

  private setConnected(value: boolean): void {
    if (value === this.connectedState) return;
    this.connectedState = value;
    for (const listener of this.listeners) listener(value);
  }
}
