/** Interval-driven refresh. Visibility in the tool is pull-based: clients
 * poll for lexicon and progress changes (default every 5 seconds). */

export const DEFAULT_POLL_INTERVAL_MS = 5000;

export class Poller {
  private handle: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly tick: () => void | Promise<void>,
    private readonly intervalMs: number = DEFAULT_POLL_INTERVAL_MS,
  ) {}

  start(): void {
    if (this.handle !== null) return;
    this.handle = setInterval(() => {
      void this.tick();
    }, this.intervalMs);
  }

  stop(): void {
    if (this.handle !== null) {
      clearInterval(this.handle);
      this.handle = null;
    }
  }
}
