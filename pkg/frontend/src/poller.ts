/** Polling loop for the live panels.
 *
 * One cycle fetches the four read endpoints together; a cycle only
 * updates the app when every fetch succeeds, so rendered counts always
 * reflect one coherent payload. Cycles never overlap: if the previous
 * one is still in flight when the timer fires, the tick is skipped.
 */

import type {
  ApiClient,
  AttendanceSnapshot,
  Distribution,
  SessionSummary,
  Timeseries,
} from "./api.js";

/** Matches the capture cadence of the detection sources. */
export const POLL_INTERVAL_MS = 2000;

/** Consecutive failed cycles before the connection counts as lost. */
export const LOST_AFTER_FAILURES = 2;

export type PollStatus = "idle" | "live" | "stale" | "lost";

export interface PollSnapshot {
  attendance: AttendanceSnapshot;
  distribution: Distribution;
  timeseries: Timeseries;
  summary: SessionSummary;
}

export class Poller {
  status: PollStatus = "idle";
  private failures = 0;
  private inFlight = false;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly onSnapshot: (snapshot: PollSnapshot) => void,
    private readonly onStatus: (status: PollStatus) => void = () => {},
    private readonly intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  start(sessionId: string): void {
    this.stop();
    void this.poll(sessionId);
    this.timer = setInterval(() => void this.poll(sessionId), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    this.failures = 0;
    this.setStatus("idle");
  }

  /** Run one cycle; exposed so tests can drive the loop deterministically. */
  async poll(sessionId: string): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      const [attendance, distribution, timeseries, summary] = await Promise.all([
        this.client.attendance(sessionId),
        this.client.distribution(sessionId),
        this.client.timeseries(sessionId),
        this.client.summary(sessionId),
      ]);
      this.failures = 0;
      this.setStatus("live");
      this.onSnapshot({ attendance, distribution, timeseries, summary });
    } catch {
      this.failures += 1;
      this.setStatus(this.failures >= LOST_AFTER_FAILURES ? "lost" : "stale");
    } finally {
      this.inFlight = false;
    }
  }

  private setStatus(status: PollStatus): void {
    if (status !== this.status) {
      this.status = status;
      this.onStatus(status);
    }
  }
}
