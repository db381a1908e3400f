import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ServiceError } from "../src/api.js";
import { InfluencePayload, RiskMapRequest } from "../src/types.js";

const REQUEST: RiskMapRequest = {
  target: "v_CRC",
  target_state: "yes",
  condition: {},
  axes: ["v_SD"],
  n_param_samples: 10,
  level: 0.9,
  seed: 1,
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("aborts the in-flight riskmap request when a newer one starts", async () => {
    const seenSignals: AbortSignal[] = [];
    vi.stubGlobal(
      "fetch",
      vi.fn(async (_url: string, init?: RequestInit) => {
        seenSignals.push(init!.signal as AbortSignal);
        return jsonResponse({ cells: [] });
      }),
    );
    const client = new ApiClient("");
    await client.riskmap(REQUEST);
    await client.riskmap(REQUEST);
    expect(seenSignals).toHaveLength(2);
    expect(seenSignals[0].aborted).toBe(true);
    expect(seenSignals[1].aborted).toBe(false);
  });

  it("raises ServiceError with the detail for error statuses", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ detail: "impossible evidence" }, 422)),
    );
    const client = new ApiClient("");
    await expect(client.riskmap(REQUEST)).rejects.toMatchObject({
      status: 422,
      detail: "impossible evidence",
    });
    await expect(client.riskmap(REQUEST)).rejects.toBeInstanceOf(ServiceError);
  });

  it("polls 202 influence jobs until the report arrives", async () => {
    const report: Partial<InfluencePayload> = { format: "bnrisk-influence", variables: [] };
    let polls = 0;
    vi.stubGlobal(
      "fetch",
      vi.fn(async (url: string) => {
        if (String(url).endsWith("/influence")) {
          return jsonResponse({ job: "t1", status: "running", poll: "/influence/jobs/t1" }, 202);
        }
        polls += 1;
        return polls < 3 ? jsonResponse({ status: "running" }, 202) : jsonResponse(report);
      }),
    );
    const client = new ApiClient("");
    const statuses: string[] = [];
    const result = await client.influence(
      { target: "v_CRC", target_state: "yes", iterations: 5, seed: 1 },
      1,
      (s) => statuses.push(s),
    );
    expect(result).toEqual(report);
    expect(polls).toBe(3);
    expect(statuses.length).toBeGreaterThan(0);
  });
});
