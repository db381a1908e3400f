// Evidence-panel state and its mapping onto /riskmap requests.
//
// The mapping is a bijection on valid states: toRiskMapRequest and
// fromRiskMapRequest round-trip exactly, so a request fully reconstructs the
// panel that produced it (tested in test/state.test.ts).

import { RiskMapRequest, VariableInfo } from "./types.js";

export interface EvidencePanelState {
  // variable -> chosen state label; unset variables are absent
  evidence: Record<string, string>;
  target: string;
  targetState: string;
  axes: string[]; // 1 or 2 variables
  samples: number;
  level: number;
  seed: number;
}

export function defaultState(variables: VariableInfo[]): EvidencePanelState {
  const target = variables[variables.length - 1];
  const axis = variables.find((v) => v.name !== target.name);
  return {
    evidence: {},
    target: target.name,
    targetState: target.states[0],
    axes: axis ? [axis.name] : [],
    samples: 300,
    level: 0.9,
    seed: 1,
  };
}

/** Violations of the panel invariants; an empty list means the state is valid. */
export function validateState(
  variables: VariableInfo[],
  state: EvidencePanelState,
): string[] {
  const problems: string[] = [];
  const byName = new Map(variables.map((v) => [v.name, v]));
  const tv = byName.get(state.target);
  if (!tv) {
    problems.push(`unknown target variable ${state.target}`);
  } else if (!tv.states.includes(state.targetState)) {
    problems.push(`unknown target state ${state.targetState}`);
  }
  if (state.axes.length < 1 || state.axes.length > 2) {
    problems.push("choose one or two axis variables");
  }
  if (new Set(state.axes).size !== state.axes.length) {
    problems.push("duplicate axis variable");
  }
  for (const axis of state.axes) {
    if (!byName.has(axis)) {
      problems.push(`unknown axis variable ${axis}`);
    }
    if (axis === state.target) {
      problems.push("the target cannot be an axis");
    }
    if (axis in state.evidence) {
      problems.push(`axis ${axis} also has evidence set`);
    }
  }
  if (state.target in state.evidence) {
    problems.push("the target cannot carry evidence");
  }
  for (const [name, label] of Object.entries(state.evidence)) {
    const v = byName.get(name);
    if (!v) {
      problems.push(`unknown evidence variable ${name}`);
    } else if (!v.states.includes(label)) {
      problems.push(`unknown state ${label} for ${name}`);
    }
  }
  if (!(state.samples >= 1)) {
    problems.push("samples must be at least 1");
  }
  if (!(state.level > 0 && state.level < 1)) {
    problems.push("level must lie in (0, 1)");
  }
  if (!Number.isInteger(state.seed)) {
    problems.push("seed must be an integer");
  }
  return problems;
}

export function toRiskMapRequest(state: EvidencePanelState): RiskMapRequest {
  return {
    target: state.target,
    target_state: state.targetState,
    condition: { ...state.evidence },
    axes: [...state.axes],
    n_param_samples: state.samples,
    level: state.level,
    seed: state.seed,
  };
}

export function fromRiskMapRequest(req: RiskMapRequest): EvidencePanelState {
  return {
    evidence: { ...req.condition },
    target: req.target,
    targetState: req.target_state,
    axes: [...req.axes],
    samples: req.n_param_samples,
    level: req.level,
    seed: req.seed,
  };
}
