/** Chart builders: pure functions from API payloads to SVG markup.
 *
 * No DOM access and no state; identical inputs give identical strings,
 * which keeps the charts trivially testable and the rendered counts in
 * lockstep with the latest payload.
 */

import type { TimeBucket } from "./api.js";
import { LABELS, LABEL_COLORS, formatClock, labelTitle } from "./format.js";

const WIDTH = 480;

function svgOpen(height: number, cssClass: string): string {
  return (
    `<svg class="${cssClass}" viewBox="0 0 ${WIDTH} ${height}" ` +
    `width="100%" role="img" xmlns="http://www.w3.org/2000/svg">`
  );
}

/** Round for stable markup; SVG does not need more precision. */
function px(value: number): string {
  return String(Math.round(value * 100) / 100);
}

export function legend(): string {
  const items = LABELS.map(
    (label) =>
      `<span class="legend-item"><span class="swatch" ` +
      `style="background:${LABEL_COLORS[label]}"></span>${labelTitle(label)}</span>`,
  );
  return `<div class="legend">${items.join("")}</div>`;
}

/** Vertical bar chart of per-emotion counts. */
export function barChart(counts: Record<string, number>): string {
  const height = 180;
  const plotTop = 12;
  const plotBottom = height - 28;
  const plotHeight = plotBottom - plotTop;
  const maxCount = Math.max(1, ...LABELS.map((label) => counts[label] ?? 0));
  const slot = WIDTH / LABELS.length;
  const barWidth = slot * 0.56;

  const parts: string[] = [svgOpen(height, "bar-chart")];
  LABELS.forEach((label, i) => {
    const count = counts[label] ?? 0;
    const barHeight = (count / maxCount) * plotHeight;
    const x = i * slot + (slot - barWidth) / 2;
    const y = plotBottom - barHeight;
    parts.push(
      `<rect x="${px(x)}" y="${px(y)}" width="${px(barWidth)}" ` +
        `height="${px(barHeight)}" fill="${LABEL_COLORS[label]}"></rect>`,
      `<text x="${px(i * slot + slot / 2)}" y="${px(plotBottom + 16)}" ` +
        `text-anchor="middle" class="axis-label">${labelTitle(label)}</text>`,
      `<text x="${px(i * slot + slot / 2)}" y="${px(y - 4)}" ` +
        `text-anchor="middle" class="bar-value">${count}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

/** Stacked area chart of per-bucket emotion counts over time. */
export function timeSeriesChart(buckets: TimeBucket[], bucketWidthMs: number): string {
  const height = 200;
  const plotTop = 12;
  const plotBottom = height - 24;
  const plotHeight = plotBottom - plotTop;

  const totals = buckets.map((bucket) =>
    LABELS.reduce((sum, label) => sum + (bucket.counts[label] ?? 0), 0),
  );
  const maxTotal = Math.max(1, ...totals);
  // One bucket still needs horizontal extent to draw an area.
  const step = buckets.length > 1 ? WIDTH / (buckets.length - 1) : WIDTH;
  const xAt = (i: number) => (buckets.length > 1 ? i * step : WIDTH / 2);
  const yAt = (count: number) => plotBottom - (count / maxTotal) * plotHeight;

  // Cumulative stack per bucket, bottom-up in label order.
  const stacked = buckets.map((bucket) => {
    let running = 0;
    return LABELS.map((label) => {
      const lower = running;
      running += bucket.counts[label] ?? 0;
      return { lower, upper: running };
    });
  });

  const parts: string[] = [svgOpen(height, "time-series-chart")];
  LABELS.forEach((label, li) => {
    const upper = stacked.map((levels, i) => `${px(xAt(i))},${px(yAt(levels[li]!.upper))}`);
    const lower = stacked
      .map((levels, i) => `${px(xAt(i))},${px(yAt(levels[li]!.lower))}`)
      .reverse();
    parts.push(
      `<polygon points="${upper.join(" ")} ${lower.join(" ")}" ` +
        `fill="${LABEL_COLORS[label]}" fill-opacity="0.85"></polygon>`,
    );
  });
  if (buckets.length > 0) {
    const first = buckets[0]!;
    const last = buckets[buckets.length - 1]!;
    parts.push(
      `<text x="0" y="${px(plotBottom + 14)}" class="axis-label">` +
        `${formatClock(first.bucket_start)}</text>`,
      `<text x="${WIDTH}" y="${px(plotBottom + 14)}" text-anchor="end" ` +
        `class="axis-label">${formatClock(last.bucket_start + bucketWidthMs)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
