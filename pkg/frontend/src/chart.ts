/**
 * Dependency-free SVG line chart for the per-round metric series.
 *
 * Renders accuracy plus per-class F1 against the round index, with the
 * cumulative labeled count as the x-axis tick labels. Values are drawn
 * exactly as served; nothing is recomputed client-side.
 */

import type { RoundMetrics } from "./api.js";

const WIDTH = 560;
const HEIGHT = 260;
const MARGIN = { top: 16, right: 12, bottom: 36, left: 44 };

const SERIES: { key: keyof RoundMetrics; label: string; css: string }[] = [
  { key: "accuracy", label: "accuracy", css: "line-accuracy" },
  { key: "f1_related", label: "F1 related", css: "line-f1-related" },
  { key: "f1_unrelated", label: "F1 unrelated", css: "line-f1-unrelated" },
];

function scaleX(index: number, count: number): number {
  const span = WIDTH - MARGIN.left - MARGIN.right;
  if (count <= 1) return MARGIN.left + span / 2;
  return MARGIN.left + (span * index) / (count - 1);
}

function scaleY(value: number): number {
  const span = HEIGHT - MARGIN.top - MARGIN.bottom;
  return MARGIN.top + span * (1 - value);
}

export function renderMetricsChart(metrics: RoundMetrics[]): string {
  const parts: string[] = [
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="metrics by round">`,
  ];
  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    const y = scaleY(tick);
    parts.push(
      `<line class="grid" x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}" y2="${y}"/>`,
      `<text class="axis" x="${MARGIN.left - 6}" y="${y + 4}" text-anchor="end">${tick.toFixed(2)}</text>`,
    );
  }
  metrics.forEach((m, i) => {
    const x = scaleX(i, metrics.length);
    parts.push(
      `<text class="axis" x="${x}" y="${HEIGHT - 14}" text-anchor="middle">${m.labeled_count}</text>`,
    );
  });
  parts.push(
    `<text class="axis" x="${(WIDTH + MARGIN.left) / 2}" y="${HEIGHT - 2}" text-anchor="middle">labeled documents</text>`,
  );
  for (const series of SERIES) {
    const points = metrics
      .map((m, i) => `${scaleX(i, metrics.length)},${scaleY(m[series.key] as number)}`)
      .join(" ");
    parts.push(`<polyline class="${series.css}" fill="none" points="${points}"/>`);
    for (const [i, m] of metrics.entries()) {
      parts.push(
        `<circle class="${series.css}" data-series="${String(series.key)}" data-round="${m.round}" ` +
          `data-value="${m[series.key]}" cx="${scaleX(i, metrics.length)}" ` +
          `cy="${scaleY(m[series.key] as number)}" r="3"/>`,
      );
    }
  }
  SERIES.forEach((series, i) => {
    const x = MARGIN.left + 8 + i * 150;
    parts.push(
      `<line class="${series.css}" x1="${x}" y1="${MARGIN.top}" x2="${x + 18}" y2="${MARGIN.top}"/>`,
      `<text class="legend" x="${x + 22}" y="${MARGIN.top + 4}">${series.label}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}
