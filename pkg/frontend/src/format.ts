/** Small display-formatting helpers shared by all views. */

/** Emotion labels in class-code order; payload dicts are keyed by these. */
export const LABELS = ["boredom", "confusion", "engagement", "frustration"] as const;

export const LABEL_COLORS: Record<string, string> = {
  boredom: "#7b8fa6",
  confusion: "#e0a23c",
  engagement: "#3fa45b",
  frustration: "#d4553f",
};

/** 0.91 -> "91%". Values are clamped to [0, 1] before rounding. */
export function formatPercent(fraction: number): string {
  const clamped = Math.min(1, Math.max(0, fraction));
  return `${Math.round(clamped * 100)}%`;
}

/** Epoch milliseconds -> "HH:MM:SS" (UTC, so simulated time reads as elapsed). */
export function formatClock(ms: number): string {
  const date = new Date(ms);
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${pad(date.getUTCHours())}:${pad(date.getUTCMinutes())}:${pad(date.getUTCSeconds())}`;
}

/** "boredom" -> "Boredom". */
export function labelTitle(label: string): string {
  return label.length === 0 ? label : label[0]!.toUpperCase() + label.slice(1);
}

/** Escape text for interpolation into HTML markup. */
export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}
