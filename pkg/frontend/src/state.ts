import type {
  CorrelationResponse,
  FilterResponse,
  PruneResponse,
  ResultsResponse,
} from './types.js';

// The four sequential steps: 1 filter/score, 2 map, 3 correlation, 4 train.
export type Step = 1 | 2 | 3 | 4;

export interface TrainConfig {
  families: string[];
  targets: string[];
  split: number;
  seed: number;
  runCausal: boolean;
}

export interface WorkflowState {
  sessionId: string | null;
  filterResponse: FilterResponse | null;
  correlationResponse: CorrelationResponse | null;
  pruneResponse: PruneResponse | null;
  trainJobId: string | null;
  results: ResultsResponse | null;
  layerVisibility: Record<string, boolean>;
  pendingEliminations: string[];
  trainConfig: TrainConfig;
}

export function initialState(): WorkflowState {
  return {
    sessionId: null,
    filterResponse: null,
    correlationResponse: null,
    pruneResponse: null,
    trainJobId: null,
    results: null,
    layerVisibility: {},
    pendingEliminations: [],
    trainConfig: {
      families: ['linear'],
      targets: ['all'],
      split: 0.8,
      seed: 42,
      runCausal: false,
    },
  };
}

export function currentStep(s: WorkflowState): Step {
  if (s.filterResponse === null) return 1;
  if (s.correlationResponse === null) return 2;
  if (s.pruneResponse === null && s.trainJobId === null) return 3;
  return 4;
}

// Step N controls stay disabled until step N-1's response is cached.
export function canSubmitFilter(s: WorkflowState): boolean {
  return s.sessionId !== null;
}

export function canViewMap(s: WorkflowState): boolean {
  return s.filterResponse !== null;
}

export function canFetchCorrelation(s: WorkflowState): boolean {
  return s.filterResponse !== null;
}

export function canSubmitPrune(s: WorkflowState): boolean {
  return s.correlationResponse !== null;
}

export function canSubmitTrain(s: WorkflowState): boolean {
  // pruning is optional: training opens once scores exist
  return s.filterResponse !== null;
}

export function canPollResults(s: WorkflowState): boolean {
  return s.trainJobId !== null;
}

// Mirror of the server-side invalidation: re-running a step clears later caches.
export function applyFilterResponse(
  s: WorkflowState,
  resp: FilterResponse,
): WorkflowState {
  const visibility: Record<string, boolean> = {};
  for (const kind of Object.keys(resp.layer_urls)) visibility[kind] = false;
  return {
    ...s,
    filterResponse: resp,
    correlationResponse: null,
    pruneResponse: null,
    trainJobId: null,
    results: null,
    layerVisibility: visibility, // layers start hidden
    pendingEliminations: [],
  };
}

export function applyCorrelationResponse(
  s: WorkflowState,
  resp: CorrelationResponse,
): WorkflowState {
  return { ...s, correlationResponse: resp };
}

export function applyPruneResponse(
  s: WorkflowState,
  resp: PruneResponse,
): WorkflowState {
  return { ...s, pruneResponse: resp, trainJobId: null, results: null };
}

export function applyTrainSubmitted(s: WorkflowState, jobId: string): WorkflowState {
  return { ...s, trainJobId: jobId, results: null };
}

export function applyResults(s: WorkflowState, results: ResultsResponse): WorkflowState {
  return { ...s, results };
}

export function toggleLayer(s: WorkflowState, kind: string): WorkflowState {
  return {
    ...s,
    layerVisibility: { ...s.layerVisibility, [kind]: !s.layerVisibility[kind] },
  };
}

export function toggleElimination(s: WorkflowState, name: string): WorkflowState {
  const staged = s.pendingEliminations.includes(name)
    ? s.pendingEliminations.filter((n) => n !== name)
    : [...s.pendingEliminations, name];
  return { ...s, pendingEliminations: staged };
}

// ---------------------------------------------------------------------------
// Server-side state machine mirror, used by tests to prove that no enabled
// control can produce a 409.

export type ServerState = 'created' | 'scored' | 'pruned' | 'trained';
export type Action = 'filter' | 'layers' | 'correlation' | 'prune' | 'train' | 'results';

export function serverAllows(
  state: ServerState,
  action: Action,
  trainSubmitted: boolean,
): boolean {
  switch (action) {
    case 'filter':
      return true;
    case 'layers':
    case 'correlation':
    case 'prune':
    case 'train':
      return state !== 'created';
    case 'results':
      return trainSubmitted;
  }
}

/** The server state implied by the client's cached responses. */
export function impliedServerState(s: WorkflowState): ServerState {
  if (s.trainJobId !== null && s.results !== null) return 'trained';
  if (s.pruneResponse !== null) return 'pruned';
  if (s.filterResponse !== null) return 'scored';
  return 'created';
}
