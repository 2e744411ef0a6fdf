/** Typed client for the monitoring service's HTTP API.
 *
 * Every dashboard read and write goes through this module; nothing else
 * in the app touches the network. The fetch implementation is injectable
 * so tests can run without a server.
 */

export interface SessionInfo {
  session_id: string;
  course_label: string;
  started_at: number;
  ended_at: number | null;
  status: string;
  unmatched_count: number;
}

export interface AttendanceRow {
  student_id: string;
  display_name: string;
  timestamp: number;
  confidence: number;
}

export interface AttendanceSnapshot {
  session_id: string;
  records: AttendanceRow[];
  unmatched_count: number;
}

export interface Distribution {
  session_id: string;
  counts: Record<string, number>;
  fractions: Record<string, number>;
  total: number;
  as_of: number;
}

export interface TimeBucket {
  bucket_start: number;
  counts: Record<string, number>;
}

export interface Timeseries {
  session_id: string;
  bucket_width_ms: number;
  buckets: TimeBucket[];
}

export interface ObservationPoint {
  timestamp: number;
  emotion: string;
  confidence: number;
}

export interface StudentProfile {
  session_id: string;
  student_id: string;
  display_name: string;
  attendance: { timestamp: number; confidence: number } | null;
  history: ObservationPoint[];
}

export interface SessionSummary {
  session: SessionInfo;
  present_count: number;
  absent_count: number;
  dominant_emotion: string | null;
  unmatched_count: number;
}

export interface StudentInfo {
  student_id: string;
  display_name: string;
  enrolled_at: number;
}

/** Service-reported failure; `code` is the backend's error class name. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = `HTTP${response.status}`;
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    if (body.error) code = body.error;
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  throw new ApiError(response.status, code, detail);
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    private readonly base: string = "",
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; time: number }> {
    return this.get("/v1/health");
  }

  async listSessions(): Promise<SessionInfo[]> {
    const body = await this.get<{ sessions: SessionInfo[] }>("/v1/sessions");
    return body.sessions;
  }

  startSession(courseLabel: string): Promise<SessionInfo> {
    return this.post("/v1/sessions", { course_label: courseLabel });
  }

  endSession(sessionId: string): Promise<SessionInfo> {
    return this.post(`/v1/sessions/${encodeURIComponent(sessionId)}/end`, {});
  }

  attendance(sessionId: string): Promise<AttendanceSnapshot> {
    return this.get(`/v1/sessions/${encodeURIComponent(sessionId)}/attendance`);
  }

  distribution(sessionId: string): Promise<Distribution> {
    return this.get(
      `/v1/sessions/${encodeURIComponent(sessionId)}/emotions/distribution`,
    );
  }

  timeseries(sessionId: string, bucketMs?: number): Promise<Timeseries> {
    const query = bucketMs === undefined ? "" : `?bucket_ms=${bucketMs}`;
    return this.get(
      `/v1/sessions/${encodeURIComponent(sessionId)}/emotions/timeseries${query}`,
    );
  }

  studentProfile(sessionId: string, studentId: string): Promise<StudentProfile> {
    return this.get(
      `/v1/sessions/${encodeURIComponent(sessionId)}/students/${encodeURIComponent(studentId)}`,
    );
  }

  summary(sessionId: string): Promise<SessionSummary> {
    return this.get(`/v1/sessions/${encodeURIComponent(sessionId)}/summary`);
  }

  async listStudents(): Promise<StudentInfo[]> {
    const body = await this.get<{ students: StudentInfo[] }>("/v1/students");
    return body.students;
  }
}
