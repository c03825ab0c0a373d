// Payload shapes as served by the session API.

export interface Meta {
  coverage: {
    hazard_years: [number, number] | null;
    hazard_types: string[];
    population_years: [number, number] | null;
    scoreable_years: [number, number] | null;
    n_regions: number;
    indicators: string[];
  };
  version: string;
  score_kinds: string[];
}

export interface FilterRequest {
  years: [number, number];
  hazard_types?: string[] | null;
  regions?: string[] | null;
  region_prefixes?: string[];
  aggregation?: 'per-year' | 'whole-window';
  pooled?: boolean;
  damage_note?: string;
}

export interface FilterResponse {
  state: string;
  rows: number;
  excluded_region_years: number;
  regions: number;
  score_stats: Record<string, { min: number; max: number; mean: number }>;
  layer_urls: Record<string, string>;
  missing_geometry: string[];
}

export interface CorrelationResponse {
  names: string[];
  matrix: number[][];
  retained: string[];
  removed: Removal[];
}

export interface Removal {
  name: string;
  reason: string;
  trigger: string | null;
  r: number | null;
}

export interface PruneRequest {
  mode: 'manual' | 'threshold';
  threshold?: number;
  names?: string[];
}

export interface PruneResponse {
  removed: Removal[];
  retained: string[];
  mode: string;
  threshold: number | null;
}

export interface TrainRequest {
  families: string[];
  targets: string[];
  split_fraction: number;
  seed: number;
  cv_folds?: number;
  run_causal?: boolean;
  causal_b?: number;
}

export interface MetricsEntry {
  family: string;
  display_name: string;
  hyperparams: Record<string, unknown>;
  mse: number;
  rmse: number;
  mae: number;
  note?: string;
}

export interface ExplanationPayload {
  target: string;
  family: string;
  kind: 'coefficient' | 'importance';
  entries: { feature: string; value: number; kind: string }[];
}

export interface DagPayload {
  nodes: string[];
  arcs: { from: string; to: string; confidence: number; sign?: string }[];
  undirected: [string, string][];
  score_node: string;
  parents: { name: string; coefficient: number; sign: string }[];
}

export interface ResultsResponse {
  status: 'complete';
  job_id: string;
  metrics: {
    targets: Record<string, MetricsEntry[]>;
    n_train: number;
    n_test: number;
    split_fraction: number;
    seed: number;
  };
  metrics_text: string;
  explanations: Record<string, ExplanationPayload>;
  dags: Record<string, DagPayload>;
  manifest: Record<string, unknown>;
}

export interface LayerDoc {
  type: 'FeatureCollection';
  metadata: {
    layer: string;
    classes: Record<string, string>;
    value_field: string;
    class_field: string;
  };
  features: LayerFeature[];
}

export interface LayerFeature {
  type: 'Feature';
  geometry: { type: string; coordinates: unknown } | null;
  properties: Record<string, string | number> & {
    UniqueCode: string;
    name: string;
    vulnerability: number;
    adaptability: number;
    resilience: number;
    v_class: number;
    a_class: number;
    r_class: number;
    color: string;
  };
}
