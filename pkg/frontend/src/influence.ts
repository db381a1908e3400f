// Influence ranking as a horizontal bar chart (SVG string): bars sorted by
// signed mean relative risk variation, whiskers showing the reported
// standard deviation. Numbers shown are the exact payload fields.

import { exact, escapeHtml } from "./format.js";
import { InfluencePayload, InfluenceVariablePayload } from "./types.js";

export function rankedVariables(payload: InfluencePayload): InfluenceVariablePayload[] {
  return [...payload.variables].sort((a, b) => {
    const av = a.mean_rrv ?? Number.NEGATIVE_INFINITY;
    const bv = b.mean_rrv ?? Number.NEGATIVE_INFINITY;
    return bv - av;
  });
}

export function renderInfluenceChart(payload: InfluencePayload): string {
  const ranked = rankedVariables(payload);
  const rowH = 26;
  const left = 120;
  const width = 640;
  const plotW = width - left - 150;
  const height = ranked.length * rowH + 30;

  let lo = 0;
  let hi = 0;
  for (const v of ranked) {
    if (v.mean_rrv === null) continue;
    const sd = v.std_rrv ?? 0;
    lo = Math.min(lo, v.mean_rrv - sd);
    hi = Math.max(hi, v.mean_rrv + sd);
  }
  if (hi === lo) {
    hi = lo + 1;
  }
  const xOf = (value: number) => left + ((value - lo) / (hi - lo)) * plotW;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" class="influence" font-size="11">`,
  );
  const zeroX = xOf(0);
  parts.push(
    `<line x1="${zeroX}" y1="10" x2="${zeroX}" y2="${height - 10}" class="zero-line" stroke="#999"/>`,
  );
  ranked.forEach((v, i) => {
    const y = 16 + i * rowH;
    const mid = y + rowH / 2 - 4;
    parts.push(
      `<text x="${left - 8}" y="${mid}" text-anchor="end" dominant-baseline="middle" ` +
        `class="bar-label">${escapeHtml(v.variable)}</text>`,
    );
    if (v.mean_rrv === null) {
      parts.push(
        `<text x="${left + 4}" y="${mid}" dominant-baseline="middle" class="bar-na">n/a (all terms skipped)</text>`,
      );
      return;
    }
    const x0 = Math.min(zeroX, xOf(v.mean_rrv));
    const barW = Math.abs(xOf(v.mean_rrv) - zeroX);
    const cls = v.mean_rrv >= 0 ? "bar positive" : "bar negative";
    parts.push(
      `<g class="bar-row" data-variable="${escapeHtml(v.variable)}">`,
      `<title>${escapeHtml(v.variable)}: mean RRV ${exact(v.mean_rrv)}%, std ${exact(v.std_rrv)}, n=${exact(v.count)}</title>`,
      `<rect x="${x0}" y="${y}" width="${Math.max(barW, 0.5)}" height="${rowH - 10}" class="${cls}"/>`,
    );
    if (v.std_rrv !== null) {
      const wx0 = xOf(v.mean_rrv - v.std_rrv);
      const wx1 = xOf(v.mean_rrv + v.std_rrv);
      parts.push(
        `<line x1="${wx0}" y1="${mid}" x2="${wx1}" y2="${mid}" class="whisker" stroke="#333"/>`,
        `<line x1="${wx0}" y1="${mid - 4}" x2="${wx0}" y2="${mid + 4}" class="whisker" stroke="#333"/>`,
        `<line x1="${wx1}" y1="${mid - 4}" x2="${wx1}" y2="${mid + 4}" class="whisker" stroke="#333"/>`,
      );
    }
    parts.push(
      `<text x="${width - 145}" y="${mid}" dominant-baseline="middle" class="bar-value">` +
        `${escapeHtml(exact(v.mean_rrv))}% ± ${escapeHtml(exact(v.std_rrv))}</text>`,
      `</g>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderInfluenceCaption(payload: InfluencePayload): string {
  const skipped = Object.entries(payload.skipped)
    .filter(([, n]) => n > 0)
    .map(([k, n]) => `${escapeHtml(k)}: ${exact(n)}`)
    .join(", ");
  return (
    `<p class="caption">influence on ${escapeHtml(payload.target)} over ` +
    `${exact(payload.n_rows)} positives × ${exact(payload.iterations)} iterations ` +
    `(seed ${exact(payload.seed)})</p>` +
    (skipped ? `<p class="legend">skipped terms - ${skipped}</p>` : "")
  );
}
