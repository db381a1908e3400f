// The no-client-math contract: for scripted panel states, every risk number
// that reaches the rendered markup equals the corresponding service JSON
// field exactly (String(field), character for character).

import { describe, expect, it } from "vitest";

import { exact } from "../src/format.js";
import { cellTooltip, renderHeatmap, renderMapCaption } from "../src/heatmap.js";
import { renderInfluenceChart } from "../src/influence.js";
import { EvidencePanelState, toRiskMapRequest } from "../src/state.js";
import { InfluencePayload, RiskCellPayload, RiskMapPayload } from "../src/types.js";

function cell(
  states: number[],
  labels: string[],
  r: number,
  lo: number,
  hi: number,
  share: number,
): RiskCellPayload {
  const verdict = lo > 0 ? "increase" : hi < 0 ? "decrease" : "no-evidence";
  return {
    states,
    labels,
    r_hat: r,
    lo,
    hi,
    mc_median: (lo + hi) / 2,
    verdict,
    population_share: share,
    flagged: false,
  };
}

function payloadFor(state: EvidencePanelState, cells: RiskCellPayload[], axisStates: string[][]): RiskMapPayload {
  const req = toRiskMapRequest(state);
  return {
    format: "bnrisk-riskmap",
    format_version: "1.0",
    target: req.target,
    target_state: 0,
    target_state_label: req.target_state,
    condition: Object.fromEntries(Object.keys(req.condition).map((k, i) => [k, i])),
    axes: req.axes,
    axis_states: axisStates,
    level: req.level,
    n_param_samples: req.n_param_samples,
    seed: req.seed,
    cells,
  };
}

// three scripted panel states with deliberately awkward float values
const SCRIPTED: { state: EvidencePanelState; axisStates: string[][]; cells: RiskCellPayload[] }[] = [
  {
    state: {
      evidence: { v_sex: "female" },
      target: "v_CRC",
      targetState: "yes",
      axes: ["v_SD"],
      samples: 1000,
      level: 0.9,
      seed: 7,
    },
    axisStates: [["short", "normal", "excessive"]],
    cells: [
      cell([0], ["short"], -0.003483920116, -0.041523339927, 0.02774407701, 0.110083711),
      cell([1], ["normal"], 0.0005207518335, -0.0034, 0.005149398, 0.888566),
      cell([2], ["excessive"], -0.06076413386602829, -0.354, 0.16071123, 0.00134992277),
    ],
  },
  {
    state: {
      evidence: {},
      target: "v_CRC",
      targetState: "yes",
      axes: ["v_age", "v_BMI"],
      samples: 500,
      level: 0.9,
      seed: 3,
    },
    axisStates: [
      ["(24,34]", "(34,44]"],
      ["normal", "obese"],
    ],
    cells: [
      cell([0, 0], ["(24,34]", "normal"], -0.52103991, -0.701, -0.39944218, 0.21),
      cell([0, 1], ["(24,34]", "obese"], -0.3333333333333333, -0.52, -0.1891, 0.0925),
      cell([1, 0], ["(34,44]", "normal"], 0.17182818284590452, 0.021, 0.3302010101, 0.41),
      cell([1, 1], ["(34,44]", "obese"], 0.9999999999999999, 0.7, 1.2875, 0.2875),
    ],
  },
  {
    state: {
      evidence: { v_sex: "male", v_alc: "high" },
      target: "v_CRC",
      targetState: "yes",
      axes: ["v_alc_free"],
      samples: 64,
      level: 0.8,
      seed: 123456789,
    },
    axisStates: [["a", "b"]],
    cells: [
      cell([0], ["a"], 1e-12, -0.1, 0.1, 0.5),
      cell([1], ["b"], 123.456789012345, 120.0001, 130.9999, 0.5),
    ],
  },
];

describe("no client math", () => {
  it.each(SCRIPTED.map((s, i) => [i, s] as const))(
    "scripted state %d renders every risk number exactly as the payload field",
    (_i, scripted) => {
      const payload = payloadFor(scripted.state, scripted.cells, scripted.axisStates);
      const svg = renderHeatmap(payload);
      for (const c of payload.cells) {
        expect(svg).toContain(`${exact(c.r_hat)} (`);
        expect(svg).toContain(`[${exact(c.lo)}, ${exact(c.hi)}]`);
        expect(svg).toContain(`pop ${exact(c.population_share)}`);
        // tooltip carries the same exact strings
        const tip = cellTooltip(c);
        expect(tip).toContain(`r_hat = ${String(c.r_hat)}`);
        expect(tip).toContain(`interval = [${String(c.lo)}, ${String(c.hi)}]`);
        expect(tip).toContain(`population share = ${String(c.population_share)}`);
        expect(tip).toContain(`verdict = ${c.verdict}`);
      }
      const caption = renderMapCaption(payload);
      expect(caption).toContain(`level ${String(payload.level)}`);
      expect(caption).toContain(`${String(payload.n_param_samples)} draws`);
      expect(caption).toContain(`seed ${String(payload.seed)}`);
    },
  );

  it("String() is the identity transport for JSON numbers", () => {
    // JSON -> JS number -> String round-trips the wire text for doubles
    const wire = ["-0.003483920116", "0.9999999999999999", "1e-12", "123.456789012345"];
    for (const text of wire) {
      expect(String(JSON.parse(text))).toBe(text);
    }
  });

  it("influence chart shows the exact payload numbers", () => {
    const payload: InfluencePayload = {
      format: "bnrisk-influence",
      format_version: "1.0",
      target: "v_CRC",
      target_state: 0,
      iterations: 50,
      seed: 9,
      n_rows: 500,
      skipped: { unit_probability_denominator: 0, zero_probability: 0 },
      variables: [
        {
          variable: "v_age",
          mean_rrv: 7.912345678901234,
          mean_abs_rrv: 8.1,
          std_rrv: 9.400000000000001,
          count: 25000,
          per_state: [],
        },
        {
          variable: "v_SD",
          mean_rrv: -0.0001823,
          mean_abs_rrv: 0.01,
          std_rrv: 0.04,
          count: 25000,
          per_state: [],
        },
      ],
    };
    const svg = renderInfluenceChart(payload);
    for (const v of payload.variables) {
      expect(svg).toContain(`${String(v.mean_rrv)}%`);
      expect(svg).toContain(String(v.std_rrv));
    }
    expect(svg).toContain("7.912345678901234%");
    expect(svg).toContain("-0.0001823%");
  });
});
