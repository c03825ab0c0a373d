import type {
  CorrelationResponse,
  FilterRequest,
  FilterResponse,
  LayerDoc,
  Meta,
  PruneRequest,
  PruneResponse,
  ResultsResponse,
  TrainRequest,
} from './types.js';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (typeof body.detail === 'string') detail = body.detail;
    else if (Array.isArray(body.detail)) {
      detail = body.detail.map((d: { msg?: string }) => d.msg ?? '').join('; ');
    }
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(resp.status, detail);
}

/** Thin typed wrapper over the session endpoints. */
export class Client {
  constructor(
    private base = '',
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  meta(): Promise<Meta> {
    return this.request<Meta>('/meta');
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>('/sessions', {
      method: 'POST',
    });
    return body.session_id;
  }

  filter(sid: string, body: FilterRequest): Promise<FilterResponse> {
    return this.post(`/sessions/${sid}/filter`, body);
  }

  layer(url: string): Promise<LayerDoc> {
    return this.request<LayerDoc>(url);
  }

  correlation(sid: string): Promise<CorrelationResponse> {
    return this.request(`/sessions/${sid}/correlation`);
  }

  prune(sid: string, body: PruneRequest): Promise<PruneResponse> {
    return this.post(`/sessions/${sid}/prune`, body);
  }

  train(sid: string, body: TrainRequest): Promise<{ job_id: string; status: string }> {
    return this.post(`/sessions/${sid}/train`, body);
  }

  /** One poll; resolves to null while the job is still running (202). */
  async resultsOnce(sid: string): Promise<ResultsResponse | null> {
    const resp = await this.fetchFn(`${this.base}/sessions/${sid}/results`);
    if (resp.status === 202) return null;
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as ResultsResponse;
  }

  async pollResults(
    sid: string,
    intervalMs = 500,
    onTick?: (polls: number) => void,
  ): Promise<ResultsResponse> {
    for (let polls = 1; ; polls++) {
      const results = await this.resultsOnce(sid);
      if (results !== null) return results;
      onTick?.(polls);
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
