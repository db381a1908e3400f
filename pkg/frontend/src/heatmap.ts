// Risk-map heatmap as an SVG string. Pure function of the service payload:
// colors and geometry are presentation, every number shown is the exact
// payload field (see format.exact).

import { exact, escapeHtml } from "./format.js";
import { RiskCellPayload, RiskMapPayload } from "./types.js";

// Diverging ramp anchored at zero; deliberately not red/yellow/green.
const NEUTRAL: [number, number, number] = [0xf5, 0xf5, 0xf5];
const BLUE: [number, number, number] = [0x21, 0x66, 0xac];
const ORANGE: [number, number, number] = [0xe0, 0x82, 0x14];

export function rampColor(value: number, vmax: number): string {
  const t = vmax <= 0 ? 0 : Math.max(-1, Math.min(1, value / vmax));
  const anchor = t < 0 ? BLUE : ORANGE;
  const w = Math.abs(t);
  const rgb = NEUTRAL.map((n, i) => Math.round((1 - w) * n + w * anchor[i]));
  return "#" + rgb.map((c) => c.toString(16).padStart(2, "0")).join("");
}

export function borderWidth(share: number): number {
  return 0.75 + 6 * share;
}

const VERDICT_GLYPH: Record<string, string> = {
  "no-evidence": "=",
  increase: "+",
  decrease: "-",
};

export function cellTooltip(cell: RiskCellPayload): string {
  return [
    `b = ${cell.labels.join(", ")}`,
    `r_hat = ${exact(cell.r_hat)}`,
    `interval = [${exact(cell.lo)}, ${exact(cell.hi)}]`,
    `verdict = ${cell.verdict}`,
    `population share = ${exact(cell.population_share)}`,
  ].join("\n");
}

interface Grid {
  columns: string[];
  rows: string[];
  at: (row: number, col: number) => RiskCellPayload;
}

function gridOf(payload: RiskMapPayload): Grid {
  const columns = payload.axis_states[0];
  const rows = payload.axes.length === 2 ? payload.axis_states[1] : [""];
  const index = new Map<string, RiskCellPayload>();
  for (const cell of payload.cells) {
    const col = cell.states[0];
    const row = cell.states.length === 2 ? cell.states[1] : 0;
    index.set(`${row}:${col}`, cell);
  }
  return {
    columns,
    rows,
    at: (row, col) => {
      const cell = index.get(`${row}:${col}`);
      if (!cell) throw new Error(`missing cell ${row}:${col}`);
      return cell;
    },
  };
}

export function renderHeatmap(payload: RiskMapPayload): string {
  const grid = gridOf(payload);
  const cw = 168;
  const ch = 84;
  const left = 120;
  const top = 48;
  const width = left + grid.columns.length * cw + 14;
  const height = top + grid.rows.length * ch + 14;
  const vmax = Math.max(...payload.cells.map((c) => Math.abs(c.r_hat)), 0);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" class="riskmap" font-size="11">`,
  );
  grid.columns.forEach((label, j) => {
    parts.push(
      `<text x="${left + j * cw + cw / 2}" y="${top - 10}" text-anchor="middle" ` +
        `class="axis-label">${escapeHtml(label)}</text>`,
    );
  });
  grid.rows.forEach((label, i) => {
    parts.push(
      `<text x="${left - 8}" y="${top + i * ch + ch / 2}" text-anchor="end" ` +
        `dominant-baseline="middle" class="axis-label">${escapeHtml(label)}</text>`,
    );
  });
  grid.rows.forEach((_, i) => {
    grid.columns.forEach((_, j) => {
      const cell = grid.at(i, j);
      const x = left + j * cw;
      const y = top + i * ch;
      const fill = rampColor(cell.r_hat, vmax);
      const stroke = borderWidth(cell.population_share);
      const glyph = VERDICT_GLYPH[cell.verdict] ?? "?";
      const flag = cell.flagged ? " !" : "";
      parts.push(
        `<g class="cell" data-states="${cell.states.join(",")}">`,
        `<title>${escapeHtml(cellTooltip(cell))}</title>`,
        `<rect x="${x}" y="${y}" width="${cw}" height="${ch}" fill="${fill}" ` +
          `stroke="#333" stroke-width="${stroke}"/>`,
        `<text x="${x + cw / 2}" y="${y + ch / 2 - 12}" text-anchor="middle" class="cell-r">` +
          `${escapeHtml(exact(cell.r_hat))} (${glyph})${flag}</text>`,
        `<text x="${x + cw / 2}" y="${y + ch / 2 + 6}" text-anchor="middle" class="cell-interval">` +
          `[${escapeHtml(exact(cell.lo))}, ${escapeHtml(exact(cell.hi))}]</text>`,
        `<text x="${x + cw / 2}" y="${y + ch / 2 + 24}" text-anchor="middle" class="cell-share">` +
          `pop ${escapeHtml(exact(cell.population_share))}</text>`,
        `</g>`,
      );
    });
  });
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderMapCaption(payload: RiskMapPayload): string {
  const cond = Object.entries(payload.condition)
    .map(([k, v]) => `${escapeHtml(k)}=${exact(v)}`)
    .join(", ");
  return (
    `<p class="caption">risk of <strong>${escapeHtml(payload.target)}=` +
    `${escapeHtml(payload.target_state_label)}</strong>` +
    ` given ${cond || "no condition"} | level ${exact(payload.level)} | ` +
    `${exact(payload.n_param_samples)} draws | seed ${exact(payload.seed)}</p>` +
    `<p class="legend">verdicts: + increase, - decrease, = no evidence; ` +
    `border thickness tracks population share; ! marks a point estimate outside its interval</p>`
  );
}
