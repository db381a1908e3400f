// Application wiring: fetch the model, keep the evidence-panel state, and
// swap in rendered heatmaps / influence charts. All markup comes from the
// pure render functions; this module only touches the DOM.

import { ApiClient, ServiceError } from "./api.js";
import { renderHeatmap, renderMapCaption } from "./heatmap.js";
import { renderInfluenceChart, renderInfluenceCaption } from "./influence.js";
import { renderEvidencePanel } from "./panel.js";
import {
  EvidencePanelState,
  defaultState,
  toRiskMapRequest,
  validateState,
} from "./state.js";
import { ModelInfo } from "./types.js";

const api = new ApiClient("");

let model: ModelInfo | null = null;
let state: EvidencePanelState | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function banner(message: string, kind: "error" | "info" | "" = "") {
  const box = el("banner");
  box.textContent = message;
  box.className = kind ? `banner ${kind}` : "banner hidden";
}

function redrawPanel() {
  if (!model || !state) return;
  el("panel").innerHTML = renderEvidencePanel(model.schema.variables, state);
}

function readSettings() {
  if (!state) return;
  state.samples = Number((el("samples") as HTMLInputElement).value);
  state.level = Number((el("level") as HTMLInputElement).value);
  state.seed = Number((el("seed") as HTMLInputElement).value);
}

function onPanelChange(event: Event) {
  if (!model || !state) return;
  const target = event.target as HTMLElement;
  if (target.id === "target-variable") {
    const name = (target as HTMLSelectElement).value;
    const variable = model.schema.variables.find((v) => v.name === name);
    if (!variable) return;
    state.target = name;
    state.targetState = variable.states[0];
    state.axes = state.axes.filter((a) => a !== name);
    delete state.evidence[name];
    redrawPanel();
    return;
  }
  if (target.id === "target-state") {
    state.targetState = (target as HTMLSelectElement).value;
    return;
  }
  if (target.classList.contains("evidence-select")) {
    const name = target.dataset.variable!;
    const value = (target as HTMLSelectElement).value;
    if (value === "") {
      delete state.evidence[name];
    } else {
      state.evidence[name] = value;
    }
    return;
  }
  if (target.classList.contains("axis-toggle")) {
    const name = target.dataset.variable!;
    const checked = (target as HTMLInputElement).checked;
    if (checked) {
      state.axes.push(name);
      delete state.evidence[name]; // the axis control disables its evidence
      while (state.axes.length > 2) {
        state.axes.shift();
      }
    } else {
      state.axes = state.axes.filter((a) => a !== name);
    }
    redrawPanel();
  }
}

async function runWhatIf() {
  if (!model || !state) return;
  readSettings();
  const problems = validateState(model.schema.variables, state);
  if (problems.length) {
    banner(problems.join("; "), "error");
    return;
  }
  banner("computing risk map...", "info");
  try {
    const payload = await api.riskmap(toRiskMapRequest(state));
    el("map").innerHTML = renderMapCaption(payload) + renderHeatmap(payload);
    banner("");
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") {
      return; // superseded by a newer request
    }
    if (err instanceof ServiceError && err.status === 422) {
      banner(`impossible evidence: ${err.detail}`, "error");
      return;
    }
    banner(String(err), "error");
  }
}

async function runInfluence() {
  if (!model || !state) return;
  readSettings();
  const iterations = Number((el("iterations") as HTMLInputElement).value);
  banner("computing influence ranking...", "info");
  try {
    const payload = await api.influence(
      {
        target: state.target,
        target_state: state.targetState,
        iterations,
        seed: state.seed,
      },
      500,
      (status) => banner(status, "info"),
    );
    el("chart").innerHTML = renderInfluenceCaption(payload) + renderInfluenceChart(payload);
    banner("");
  } catch (err) {
    banner(`influence job failed: ${String(err)}`, "error");
  }
}

async function init() {
  banner("loading model...", "info");
  try {
    model = await api.getModel();
  } catch (err) {
    banner(`service unreachable: ${String(err)}`, "error");
    el("retry").classList.remove("hidden");
    return;
  }
  el("retry").classList.add("hidden");
  state = defaultState(model.schema.variables);
  el("model-info").textContent =
    `${model.schema.variables.length} variables | alpha ${model.alpha} | ${model.model_id}`;
  redrawPanel();
  banner("");
}

export function mount() {
  el("panel").addEventListener("change", onPanelChange);
  el("run").addEventListener("click", () => void runWhatIf());
  el("run-influence").addEventListener("click", () => void runInfluence());
  el("retry").addEventListener("click", () => void init());
  void init();
}

mount();
