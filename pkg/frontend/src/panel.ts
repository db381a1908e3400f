// Evidence panel: one control per schema variable plus target, axis, and
// sampling settings, rendered as an HTML string and wired up by the app via
// event delegation on data-* attributes.

import { escapeHtml } from "./format.js";
import { EvidencePanelState } from "./state.js";
import { VariableInfo } from "./types.js";

export const UNSET = "(unset)";

export function renderEvidencePanel(
  variables: VariableInfo[],
  state: EvidencePanelState,
): string {
  const rows = variables
    .map((v) => {
      const isTarget = v.name === state.target;
      const isAxis = state.axes.includes(v.name);
      const chosen = state.evidence[v.name];
      const disabled = isTarget || isAxis ? "disabled" : "";
      const note = isTarget ? "target" : isAxis ? "axis" : "";
      const options = [
        `<option value="" ${chosen === undefined ? "selected" : ""}>${UNSET}</option>`,
        ...v.states.map(
          (s) =>
            `<option value="${escapeHtml(s)}" ${chosen === s ? "selected" : ""}>${escapeHtml(s)}</option>`,
        ),
      ].join("");
      const axisChecked = isAxis ? "checked" : "";
      const axisDisabled = isTarget ? "disabled" : "";
      return (
        `<tr data-variable="${escapeHtml(v.name)}">` +
        `<th>${escapeHtml(v.name)}<span class="note">${note}</span></th>` +
        `<td><select class="evidence-select" data-variable="${escapeHtml(v.name)}" ${disabled}>${options}</select></td>` +
        `<td><input type="checkbox" class="axis-toggle" data-variable="${escapeHtml(v.name)}" ${axisChecked} ${axisDisabled}></td>` +
        `</tr>`
      );
    })
    .join("\n");

  const targetVar = variables.find((v) => v.name === state.target);
  const targetStates = (targetVar ? targetVar.states : [])
    .map(
      (s) =>
        `<option value="${escapeHtml(s)}" ${s === state.targetState ? "selected" : ""}>${escapeHtml(s)}</option>`,
    )
    .join("");
  const targetOptions = variables
    .map(
      (v) =>
        `<option value="${escapeHtml(v.name)}" ${v.name === state.target ? "selected" : ""}>${escapeHtml(v.name)}</option>`,
    )
    .join("");

  return `
<div class="panel-settings">
  <label>target
    <select id="target-variable">${targetOptions}</select>
  </label>
  <label>state
    <select id="target-state">${targetStates}</select>
  </label>
  <label>draws <input id="samples" type="number" min="1" value="${state.samples}"></label>
  <label>level <input id="level" type="number" min="0.01" max="0.99" step="0.01" value="${state.level}"></label>
  <label>seed <input id="seed" type="number" step="1" value="${state.seed}"></label>
</div>
<table class="evidence-table">
  <thead><tr><th>variable</th><th>evidence</th><th>axis</th></tr></thead>
  <tbody>
${rows}
  </tbody>
</table>`;
}
