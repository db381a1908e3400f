import { describe, expect, it } from "vitest";

import {
  EvidencePanelState,
  defaultState,
  fromRiskMapRequest,
  toRiskMapRequest,
  validateState,
} from "../src/state.js";
import { VariableInfo } from "../src/types.js";

const VARIABLES: VariableInfo[] = [
  { name: "v_sex", states: ["female", "male"] },
  { name: "v_age", states: ["(24,34]", "(34,44]", "(44,54]", "(54,64]"] },
  { name: "v_SD", states: ["short", "normal", "excessive"] },
  { name: "v_alc", states: ["low", "high"] },
  { name: "v_BMI", states: ["underweight", "normal", "overweight", "obese"] },
  { name: "v_CRC", states: ["yes", "no"] },
];

// deterministic PRNG so the 100 random states are reproducible
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomValidState(rand: () => number): EvidencePanelState {
  const pick = <T>(xs: T[]): T => xs[Math.floor(rand() * xs.length)];
  const target = pick(VARIABLES);
  const others = VARIABLES.filter((v) => v.name !== target.name);
  const axisCount = rand() < 0.5 ? 1 : 2;
  const shuffled = [...others].sort(() => rand() - 0.5);
  const axes = shuffled.slice(0, axisCount).map((v) => v.name);
  const evidence: Record<string, string> = {};
  for (const v of shuffled.slice(axisCount)) {
    if (rand() < 0.5) {
      evidence[v.name] = pick(v.states);
    }
  }
  return {
    evidence,
    target: target.name,
    targetState: pick(target.states),
    axes,
    samples: 1 + Math.floor(rand() * 2000),
    level: Math.round((0.5 + rand() * 0.49) * 100) / 100,
    seed: Math.floor(rand() * 1e6),
  };
}

describe("evidence panel state", () => {
  it("round-trips through the riskmap request on 100 random valid states", () => {
    const rand = mulberry32(12345);
    for (let i = 0; i < 100; i++) {
      const state = randomValidState(rand);
      expect(validateState(VARIABLES, state)).toEqual([]);
      const roundTripped = fromRiskMapRequest(toRiskMapRequest(state));
      expect(roundTripped).toEqual(state);
      // and the mapping is stable: a second pass changes nothing
      expect(toRiskMapRequest(roundTripped)).toEqual(toRiskMapRequest(state));
    }
  });

  it("request mirrors the panel fields verbatim", () => {
    const state: EvidencePanelState = {
      evidence: { v_sex: "female", v_alc: "high" },
      target: "v_CRC",
      targetState: "yes",
      axes: ["v_SD", "v_age"],
      samples: 250,
      level: 0.9,
      seed: 42,
    };
    expect(toRiskMapRequest(state)).toEqual({
      target: "v_CRC",
      target_state: "yes",
      condition: { v_sex: "female", v_alc: "high" },
      axes: ["v_SD", "v_age"],
      n_param_samples: 250,
      level: 0.9,
      seed: 42,
    });
  });

  it("flags axis/evidence overlap", () => {
    const state = defaultState(VARIABLES);
    state.axes = ["v_SD"];
    state.evidence["v_SD"] = "short";
    expect(validateState(VARIABLES, state).join(" ")).toContain("axis v_SD");
  });

  it("flags the target used as an axis", () => {
    const state = defaultState(VARIABLES);
    state.axes = [state.target];
    expect(validateState(VARIABLES, state).join(" ")).toContain("target");
  });

  it("flags evidence on the target", () => {
    const state = defaultState(VARIABLES);
    state.evidence[state.target] = "yes";
    expect(validateState(VARIABLES, state).join(" ")).toContain("target");
  });

  it("flags more than two axes and duplicates", () => {
    const state = defaultState(VARIABLES);
    state.axes = ["v_SD", "v_age", "v_alc"];
    expect(validateState(VARIABLES, state).length).toBeGreaterThan(0);
    state.axes = ["v_SD", "v_SD"];
    expect(validateState(VARIABLES, state).join(" ")).toContain("duplicate");
  });

  it("flags unknown states", () => {
    const state = defaultState(VARIABLES);
    state.evidence["v_sex"] = "neither";
    expect(validateState(VARIABLES, state).join(" ")).toContain("unknown state");
  });
});
