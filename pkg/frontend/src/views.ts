/** View renderers: pure functions from API payloads to HTML strings.
 *
 * The four live panels (attendance, distribution, trends, student
 * profile) plus the session summary, selector options, and the polling
 * banner. Every view has an explicit empty state; nothing renders blank.
 */

import type {
  AttendanceSnapshot,
  Distribution,
  SessionInfo,
  SessionSummary,
  StudentProfile,
  Timeseries,
} from "./api.js";
import { barChart, legend, timeSeriesChart } from "./charts.js";
import {
  LABELS,
  escapeHtml,
  formatClock,
  formatPercent,
  labelTitle,
} from "./format.js";
import type { PollStatus } from "./poller.js";

function emptyState(message: string): string {
  return `<p class="empty-state">${escapeHtml(message)}</p>`;
}

/** Live attendance table: who is present, since when, how confident. */
export function attendanceView(snapshot: AttendanceSnapshot | null): string {
  if (snapshot === null) {
    return emptyState("No session selected.");
  }
  if (snapshot.records.length === 0) {
    return emptyState("No students marked present yet.");
  }
  const rows = snapshot.records
    .map(
      (r) =>
        `<tr class="attendance-row" data-student-id="${escapeHtml(r.student_id)}">` +
        `<td>${escapeHtml(r.display_name)}</td>` +
        `<td>${formatClock(r.timestamp)}</td>` +
        `<td class="confidence">${formatPercent(r.confidence)}</td></tr>`,
    )
    .join("");
  const unmatched =
    snapshot.unmatched_count > 0
      ? `<p class="unmatched-note">${snapshot.unmatched_count} unmatched detection(s)</p>`
      : "";
  return (
    `<table class="attendance-table"><thead><tr>` +
    `<th>Student</th><th>Marked at</th><th>Confidence</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>${unmatched}`
  );
}

/** Current emotion composition as a bar chart with exact counts. */
export function distributionView(dist: Distribution | null): string {
  if (dist === null) {
    return emptyState("No session selected.");
  }
  if (dist.total === 0) {
    return emptyState("No emotion observations yet.");
  }
  const summary = LABELS.map(
    (label) =>
      `<span class="dist-item">${labelTitle(label)}: ${dist.counts[label] ?? 0} ` +
      `(${formatPercent(dist.fractions[label] ?? 0)})</span>`,
  ).join("");
  return `${barChart(dist.counts)}${legend()}<div class="dist-summary">${summary}</div>`;
}

/** Emotion mix over the session timeline as a stacked area chart. */
export function trendsView(series: Timeseries | null): string {
  if (series === null) {
    return emptyState("No session selected.");
  }
  if (series.buckets.length === 0) {
    return emptyState("No emotion observations yet.");
  }
  return `${timeSeriesChart(series.buckets, series.bucket_width_ms)}${legend()}`;
}

/** Per-student drill-down: attendance status plus full emotion history. */
export function profileView(
  profile: StudentProfile | null,
  error: string | null = null,
): string {
  if (error !== null) {
    return `<p class="profile-error">${escapeHtml(error)}</p>`;
  }
  if (profile === null) {
    return emptyState("Select a student from the attendance table.");
  }
  const name = escapeHtml(profile.display_name);
  const attendance =
    profile.attendance === null
      ? `<p class="profile-status absent">Not marked present this session.</p>`
      : `<p class="profile-status present">Present since ` +
        `${formatClock(profile.attendance.timestamp)} ` +
        `(${formatPercent(profile.attendance.confidence)})</p>`;
  const points =
    profile.history.length === 0
      ? emptyState("No emotion observations yet.")
      : `<ol class="timeline">` +
        profile.history
          .map(
            (obs) =>
              `<li class="timeline-point emotion-${escapeHtml(obs.emotion)}">` +
              `<span class="when">${formatClock(obs.timestamp)}</span> ` +
              `<span class="what">${labelTitle(obs.emotion)}</span> ` +
              `<span class="how-sure">${formatPercent(obs.confidence)}</span></li>`,
          )
          .join("") +
        `</ol>`;
  return `<h3>${name}</h3>${attendance}${points}`;
}

/** Post-session roll-up shown after the instructor ends a session. */
export function summaryView(summary: SessionSummary | null): string {
  if (summary === null) {
    return emptyState("No summary yet.");
  }
  const dominant =
    summary.dominant_emotion === null
      ? "none recorded"
      : labelTitle(summary.dominant_emotion);
  return (
    `<dl class="summary">` +
    `<dt>Course</dt><dd>${escapeHtml(summary.session.course_label)}</dd>` +
    `<dt>Present</dt><dd>${summary.present_count}</dd>` +
    `<dt>Absent</dt><dd>${summary.absent_count}</dd>` +
    `<dt>Dominant emotion</dt><dd>${dominant}</dd>` +
    `<dt>Unmatched detections</dt><dd>${summary.unmatched_count}</dd>` +
    `</dl>`
  );
}

/** Connection state banner; empty string while polling is healthy. */
export function bannerView(status: PollStatus): string {
  if (status === "lost") {
    return (
      `<div class="banner banner-lost" role="alert">` +
      `Connection to the monitoring service lost. Retrying...</div>`
    );
  }
  if (status === "stale") {
    return (
      `<div class="banner banner-stale">` +
      `Last update failed; data may be stale.</div>`
    );
  }
  return "";
}

/** Options for the session selector. */
export function sessionOptions(
  sessions: SessionInfo[],
  selectedId: string | null,
): string {
  if (sessions.length === 0) {
    return `<option value="" disabled selected>No sessions yet</option>`;
  }
  const options = sessions.map((s) => {
    const selected = s.session_id === selectedId ? " selected" : "";
    const state = s.status === "active" ? "live" : "ended";
    return (
      `<option value="${escapeHtml(s.session_id)}"${selected}>` +
      `${escapeHtml(s.course_label)} (${state})</option>`
    );
  });
  return options.join("");
}
