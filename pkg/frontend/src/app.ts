/** Dashboard controller: owns the view model and the DOM regions.
 *
 * All rendering goes through the pure view functions; this class only
 * moves payloads into state and state into innerHTML. Writes happen
 * solely through the documented POST endpoints via the API client.
 */

import {
  ApiClient,
  ApiError,
  type SessionInfo,
  type StudentProfile,
} from "./api.js";
import { Poller, type PollSnapshot, type PollStatus } from "./poller.js";
import {
  attendanceView,
  bannerView,
  distributionView,
  profileView,
  sessionOptions,
  summaryView,
  trendsView,
} from "./views.js";

export interface ViewModel {
  sessions: SessionInfo[];
  selectedSessionId: string | null;
  snapshot: PollSnapshot | null;
  drilldown: {
    studentId: string | null;
    profile: StudentProfile | null;
    error: string | null;
  };
  pollStatus: PollStatus;
  notice: string | null;
}

function freshViewModel(): ViewModel {
  return {
    sessions: [],
    selectedSessionId: null,
    snapshot: null,
    drilldown: { studentId: null, profile: null, error: null },
    pollStatus: "idle",
    notice: null,
  };
}

export class App {
  readonly vm: ViewModel = freshViewModel();
  private readonly poller: Poller;
  private profileInFlight = false;

  constructor(
    private readonly doc: Document,
    private readonly client: ApiClient = new ApiClient(),
  ) {
    this.poller = new Poller(
      client,
      (snapshot) => this.applySnapshot(snapshot),
      (status) => this.applyStatus(status),
    );
  }

  async init(): Promise<void> {
    this.bindControls();
    await this.refreshSessions();
    const active = this.vm.sessions.find((s) => s.status === "active");
    if (active) {
      this.selectSession(active.session_id);
    }
    this.render();
  }

  private element(id: string): HTMLElement {
    const el = this.doc.getElementById(id);
    if (el === null) throw new Error(`missing dashboard element #${id}`);
    return el;
  }

  private bindControls(): void {
    this.element("start-button").addEventListener("click", () => {
      const input = this.element("course-input") as HTMLInputElement;
      void this.startSession(input.value.trim() || "Untitled course");
    });
    this.element("end-button").addEventListener("click", () => {
      void this.endCurrentSession();
    });
    this.element("session-select").addEventListener("change", (event) => {
      const select = event.target as HTMLSelectElement;
      if (select.value) this.selectSession(select.value);
    });
    // One handler for every attendance row, present and future.
    this.element("attendance-panel").addEventListener("click", (event) => {
      const row = (event.target as HTMLElement).closest(".attendance-row");
      const studentId = row?.getAttribute("data-student-id");
      if (studentId) void this.selectStudent(studentId);
    });
  }

  async refreshSessions(): Promise<void> {
    try {
      this.vm.sessions = await this.client.listSessions();
      this.vm.notice = null;
    } catch (error) {
      this.vm.notice = describeError(error);
    }
    this.render();
  }

  async startSession(courseLabel: string): Promise<void> {
    try {
      const session = await this.client.startSession(courseLabel);
      this.vm.notice = null;
      await this.refreshSessions();
      this.selectSession(session.session_id);
    } catch (error) {
      this.vm.notice = describeError(error);
      this.render();
    }
  }

  async endCurrentSession(): Promise<void> {
    const sessionId = this.vm.selectedSessionId;
    if (sessionId === null) return;
    try {
      await this.client.endSession(sessionId);
      this.vm.notice = null;
      this.poller.stop();
      // Leave the final snapshot on screen; the summary panel takes focus.
      const summary = await this.client.summary(sessionId);
      if (this.vm.snapshot) this.vm.snapshot.summary = summary;
      this.doc.body.classList.remove("live");
      this.doc.body.classList.add("ended");
      await this.refreshSessions();
    } catch (error) {
      this.vm.notice = describeError(error);
      this.render();
    }
  }

  selectSession(sessionId: string): void {
    this.vm.selectedSessionId = sessionId;
    this.vm.snapshot = null;
    this.vm.drilldown = { studentId: null, profile: null, error: null };
    this.doc.body.classList.add("live");
    this.doc.body.classList.remove("ended");
    this.poller.start(sessionId);
    this.render();
  }

  async selectStudent(studentId: string): Promise<void> {
    this.vm.drilldown = { studentId, profile: null, error: null };
    await this.refreshProfile();
  }

  private async refreshProfile(): Promise<void> {
    const { studentId } = this.vm.drilldown;
    const sessionId = this.vm.selectedSessionId;
    if (studentId === null || sessionId === null || this.profileInFlight) return;
    this.profileInFlight = true;
    try {
      const profile = await this.client.studentProfile(sessionId, studentId);
      this.vm.drilldown = { studentId, profile, error: null };
    } catch (error) {
      this.vm.drilldown = { studentId, profile: null, error: describeError(error) };
    } finally {
      this.profileInFlight = false;
    }
    this.render();
  }

  applySnapshot(snapshot: PollSnapshot): void {
    this.vm.snapshot = snapshot;
    // Keep the open drill-down moving with the session.
    if (this.vm.drilldown.studentId !== null) void this.refreshProfile();
    this.render();
  }

  applyStatus(status: PollStatus): void {
    this.vm.pollStatus = status;
    this.render();
  }

  render(): void {
    const { snapshot, drilldown } = this.vm;
    this.element("session-select").innerHTML = sessionOptions(
      this.vm.sessions,
      this.vm.selectedSessionId,
    );
    this.element("banner").innerHTML = bannerView(this.vm.pollStatus);
    this.element("notice").textContent = this.vm.notice ?? "";
    this.element("attendance-panel").innerHTML = attendanceView(
      snapshot?.attendance ?? null,
    );
    this.element("distribution-panel").innerHTML = distributionView(
      snapshot?.distribution ?? null,
    );
    this.element("trends-panel").innerHTML = trendsView(snapshot?.timeseries ?? null);
    this.element("profile-panel").innerHTML = profileView(
      drilldown.profile,
      drilldown.error,
    );
    this.element("summary-panel").innerHTML = summaryView(snapshot?.summary ?? null);
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.detail}`;
  return "Request failed; is the monitoring service running?";
}
