// Mirrors of the service JSON schemas (docs/schemas.md). The UI consumes
// these verbatim and never derives numbers from them.

export interface VariableInfo {
  name: string;
  states: string[];
}

export interface ModelInfo {
  model_id: string;
  schema: { variables: VariableInfo[] };
  dag: { nodes: string[]; arcs: [string, string][] };
  alpha: number;
  provenance: string[];
  positives_rows: number;
}

export type Verdict = "no-evidence" | "increase" | "decrease";

export interface RiskCellPayload {
  states: number[];
  labels: string[];
  r_hat: number;
  lo: number;
  hi: number;
  mc_median: number;
  verdict: Verdict;
  population_share: number;
  flagged: boolean;
}

export interface RiskMapPayload {
  format: string;
  format_version: string;
  target: string;
  target_state: number;
  target_state_label: string;
  condition: Record<string, number>;
  axes: string[];
  axis_states: string[][];
  level: number;
  n_param_samples: number;
  seed: number;
  cells: RiskCellPayload[];
}

export interface RiskMapRequest {
  target: string;
  target_state: string;
  condition: Record<string, string>;
  axes: string[];
  n_param_samples: number;
  level: number;
  seed: number;
}

export interface InfluenceVariablePayload {
  variable: string;
  mean_rrv: number | null;
  mean_abs_rrv: number | null;
  std_rrv: number | null;
  count: number;
  per_state: { state: string; mean_rrv: number | null; count: number }[];
}

export interface InfluencePayload {
  format: string;
  format_version: string;
  target: string;
  target_state: number;
  iterations: number;
  seed: number;
  n_rows: number;
  skipped: Record<string, number>;
  variables: InfluenceVariablePayload[];
}

export interface InfluenceRequest {
  target: string;
  target_state: string;
  iterations: number;
  seed: number;
}

export interface JobTicket {
  job: string;
  status: string;
  poll: string;
}
