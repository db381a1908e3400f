// Thin service client. Risk-map requests are latest-wins: issuing a new one
// aborts the in-flight request. Influence runs may come back as a 202 job
// ticket, which pollInfluence resolves by polling.

import {
  InfluencePayload,
  InfluenceRequest,
  JobTicket,
  ModelInfo,
  RiskMapPayload,
  RiskMapRequest,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`service ${status}: ${detail}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok && response.status !== 202) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      // keep the status text
    }
    throw new ServiceError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  private riskmapController: AbortController | null = null;

  constructor(private base: string = "") {}

  async getModel(): Promise<ModelInfo> {
    return asJson(await fetch(`${this.base}/model`));
  }

  /** Latest-wins: any in-flight risk-map request is aborted. */
  async riskmap(request: RiskMapRequest): Promise<RiskMapPayload> {
    if (this.riskmapController) {
      this.riskmapController.abort();
    }
    this.riskmapController = new AbortController();
    const response = await fetch(`${this.base}/riskmap`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal: this.riskmapController.signal,
    });
    return asJson(await Promise.resolve(response));
  }

  async influence(
    request: InfluenceRequest,
    pollIntervalMs = 500,
    onProgress?: (status: string) => void,
  ): Promise<InfluencePayload> {
    const response = await fetch(`${this.base}/influence`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (response.status !== 202) {
      return asJson(response);
    }
    const ticket = (await response.json()) as JobTicket;
    onProgress?.(`job ${ticket.job} running`);
    for (;;) {
      await new Promise((resolve) => setTimeout(resolve, pollIntervalMs));
      const poll = await fetch(`${this.base}${ticket.poll}`);
      if (poll.status === 202) {
        onProgress?.(`job ${ticket.job} running`);
        continue;
      }
      return asJson(poll);
    }
  }
}
