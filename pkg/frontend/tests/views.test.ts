import { describe, expect, it } from "vitest";

import type {
  AttendanceSnapshot,
  Distribution,
  SessionSummary,
  StudentProfile,
  Timeseries,
} from "../src/api.js";
import {
  attendanceView,
  bannerView,
  distributionView,
  profileView,
  sessionOptions,
  summaryView,
  trendsView,
} from "../src/views.js";

const attendance: AttendanceSnapshot = {
  session_id: "ses1",
  records: [
    { student_id: "s001", display_name: "Ada Lovelace", timestamp: 4_000, confidence: 0.91 },
    { student_id: "s002", display_name: "Alan Turing", timestamp: 10_000, confidence: 0.87 },
  ],
  unmatched_count: 3,
};

const distribution: Distribution = {
  session_id: "ses1",
  counts: { boredom: 2, confusion: 1, engagement: 5, frustration: 0 },
  fractions: { boredom: 0.25, confusion: 0.125, engagement: 0.625, frustration: 0 },
  total: 8,
  as_of: 12_000,
};

const timeseries: Timeseries = {
  session_id: "ses1",
  bucket_width_ms: 60_000,
  buckets: [
    { bucket_start: 0, counts: { boredom: 1, confusion: 0, engagement: 2, frustration: 0 } },
    { bucket_start: 60_000, counts: { boredom: 1, confusion: 1, engagement: 3, frustration: 0 } },
  ],
};

const profile: StudentProfile = {
  session_id: "ses1",
  student_id: "s001",
  display_name: "Ada Lovelace",
  attendance: { timestamp: 4_000, confidence: 0.91 },
  history: [
    { timestamp: 4_000, emotion: "engagement", confidence: 0.8 },
    { timestamp: 6_000, emotion: "engagement", confidence: 0.75 },
    { timestamp: 8_000, emotion: "confusion", confidence: 0.6 },
    { timestamp: 10_000, emotion: "boredom", confidence: 0.7 },
  ],
};

const summary: SessionSummary = {
  session: {
    session_id: "ses1",
    course_label: "CS101",
    started_at: 0,
    ended_at: 600_000,
    status: "ended",
    unmatched_count: 3,
  },
  present_count: 2,
  absent_count: 1,
  dominant_emotion: "engagement",
  unmatched_count: 3,
};

describe("attendanceView", () => {
  it("lists each present student with name, time, and confidence", () => {
    const html = attendanceView(attendance);
    expect(html).toContain("Ada Lovelace");
    expect(html).toContain("91%");
    expect(html).toContain("00:00:04");
    expect(html).toContain("Alan Turing");
    expect(html).toContain('data-student-id="s002"');
    expect(html).toContain("3 unmatched");
  });

  it("renders an explicit empty state before any marks", () => {
    const html = attendanceView({ session_id: "ses1", records: [], unmatched_count: 0 });
    expect(html).toContain("No students marked present yet");
    expect(html).not.toContain("<table");
  });

  it("escapes hostile display names", () => {
    const html = attendanceView({
      session_id: "ses1",
      records: [
        { student_id: "s1", display_name: "<b>Evil</b>", timestamp: 0, confidence: 1 },
      ],
      unmatched_count: 0,
    });
    expect(html).toContain("&lt;b&gt;Evil&lt;/b&gt;");
    expect(html).not.toContain("<b>Evil</b>");
  });
});

describe("distributionView", () => {
  it("shows the chart plus exact counts straight from the payload", () => {
    const html = distributionView(distribution);
    expect(html).toContain("<svg");
    expect(html).toContain("Engagement: 5");
    expect(html).toContain("Boredom: 2");
    expect(html).toContain("63%"); // 0.625 rounded
  });

  it("has an empty state when nothing was observed", () => {
    const html = distributionView({ ...distribution, counts: {}, fractions: {}, total: 0 });
    expect(html).toContain("No emotion observations yet");
    expect(html).not.toContain("<svg");
  });
});

describe("trendsView", () => {
  it("renders the stacked chart for a live session", () => {
    const html = trendsView(timeseries);
    expect(html).toContain("<svg");
    expect(html).toContain("polygon");
  });

  it("has an empty state without buckets", () => {
    const html = trendsView({ ...timeseries, buckets: [] });
    expect(html).toContain("No emotion observations yet");
  });
});

describe("profileView", () => {
  it("shows presence and one timeline point per observation", () => {
    const html = profileView(profile);
    expect(html).toContain("Ada Lovelace");
    expect(html).toContain("Present since 00:00:04");
    expect((html.match(/timeline-point/g) ?? []).length).toBe(4);
    // ordering matches the payload, no client-side sorting
    expect(html.indexOf("00:00:04")).toBeLessThan(html.indexOf("00:00:10"));
  });

  it("marks a student who never got matched", () => {
    const html = profileView({ ...profile, attendance: null, history: [] });
    expect(html).toContain("Not marked present this session");
    expect(html).toContain("No emotion observations yet");
  });

  it("surfaces an unknown-student error", () => {
    const html = profileView(null, "UnknownStudent: no student ghost");
    expect(html).toContain("UnknownStudent");
  });

  it("prompts for a selection when nothing is chosen", () => {
    expect(profileView(null)).toContain("Select a student");
  });
});

describe("summaryView", () => {
  it("reports the post-session roll-up", () => {
    const html = summaryView(summary);
    expect(html).toContain("CS101");
    expect(html).toContain("<dd>2</dd>");
    expect(html).toContain("<dd>1</dd>");
    expect(html).toContain("Engagement");
  });

  it("handles a session with no observations", () => {
    const html = summaryView({ ...summary, dominant_emotion: null });
    expect(html).toContain("none recorded");
  });
});

describe("bannerView", () => {
  it("is silent while polling is healthy", () => {
    expect(bannerView("idle")).toBe("");
    expect(bannerView("live")).toBe("");
  });

  it("warns on a stale poll and alerts on a lost connection", () => {
    expect(bannerView("stale")).toContain("stale");
    const lost = bannerView("lost");
    expect(lost).toContain("Connection");
    expect(lost).toContain("banner-lost");
  });
});

describe("sessionOptions", () => {
  it("lists sessions and marks the selected one", () => {
    const html = sessionOptions(
      [summary.session, { ...summary.session, session_id: "ses2", status: "active" }],
      "ses2",
    );
    expect(html).toContain('value="ses2" selected');
    expect(html).toContain("(live)");
    expect(html).toContain("(ended)");
  });

  it("renders a placeholder when no sessions exist", () => {
    expect(sessionOptions([], null)).toContain("No sessions yet");
  });
});
