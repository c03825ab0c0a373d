import { ApiError, Client } from './api.js';
import { renderCorrelation } from './correlation.js';
import { renderMap } from './map.js';
import { renderResults } from './results.js';
import {
  WorkflowState,
  applyCorrelationResponse,
  applyFilterResponse,
  applyPruneResponse,
  applyResults,
  applyTrainSubmitted,
  canFetchCorrelation,
  canSubmitFilter,
  canSubmitPrune,
  canSubmitTrain,
  initialState,
} from './state.js';
import type { LayerDoc, Meta } from './types.js';

const FAMILIES = ['linear', 'ridge', 'lasso', 'polynomial', 'random_forest',
                  'gradient_boosted_trees'];

export interface App {
  state: () => WorkflowState;
  ready: Promise<void>;
}

/** Wire the four sequential interfaces into `root`. */
export function initApp(root: HTMLElement, client: Client): App {
  let state = initialState();
  let meta: Meta | null = null;

  root.innerHTML = `
    <div class="banner" data-role="error-banner" style="display:none">
      <span data-role="error-text"></span>
      <button data-role="retry">Retry</button>
    </div>
    <section data-step="1">
      <h2>1. Filter disaster data</h2>
      <form data-role="filter-form">
        <label>Years <input name="year-start" type="number"> :
          <input name="year-end" type="number"></label>
        <label>Hazard types <select name="hazards" multiple></select></label>
        <label>Aggregation <select name="aggregation">
          <option value="per-year">per-year</option>
          <option value="whole-window">whole-window</option>
        </select></label>
        <button type="submit" data-role="submit-filter" disabled>
          Compute scores</button>
      </form>
      <p data-role="filter-summary"></p>
    </section>
    <section data-step="2">
      <h2>2. Score map</h2>
      <div data-role="map"></div>
    </section>
    <section data-step="3">
      <h2>3. Correlation matrix</h2>
      <button data-role="load-correlation" disabled>Load correlation</button>
      <div data-role="correlation"></div>
    </section>
    <section data-step="4">
      <h2>4. Train &amp; results</h2>
      <form data-role="train-form">
        <fieldset data-role="family-set">
          ${FAMILIES.map((f) =>
            `<label><input type="checkbox" name="family" value="${f}"
              ${f === 'linear' ? 'checked' : ''}> ${f}</label>`).join('')}
        </fieldset>
        <label>Split <input name="split" type="number" step="0.05" value="0.8"></label>
        <label>Seed <input name="seed" type="number" value="42"></label>
        <label><input name="causal" type="checkbox"> learn DAG</label>
        <button type="submit" data-role="submit-train" disabled>Train</button>
      </form>
      <p data-role="progress" style="display:none">Training&hellip;</p>
      <div data-role="results"></div>
    </section>
  `;

  const el = <T extends HTMLElement>(selector: string): T => {
    const found = root.querySelector<T>(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found;
  };
  const banner = el<HTMLElement>('[data-role=error-banner]');
  let lastAction: (() => Promise<void>) | null = null;

  function showError(err: unknown): void {
    const text = err instanceof ApiError ? `${err.status}: ${err.message}`
      : String(err);
    el<HTMLElement>('[data-role=error-text]').textContent = text;
    banner.style.display = '';
  }

  async function guard(action: () => Promise<void>): Promise<void> {
    lastAction = action;
    banner.style.display = 'none';
    try {
      await action();
    } catch (err) {
      showError(err); // state preserved; banner offers retry
    }
  }

  el<HTMLButtonElement>('[data-role=retry]').addEventListener('click', () => {
    if (lastAction) void guard(lastAction);
  });

  function syncGates(): void {
    el<HTMLButtonElement>('[data-role=submit-filter]').disabled =
      !canSubmitFilter(state);
    el<HTMLButtonElement>('[data-role=load-correlation]').disabled =
      !canFetchCorrelation(state);
    el<HTMLButtonElement>('[data-role=submit-train]').disabled =
      !canSubmitTrain(state);
    const pruneButton = root.querySelector<HTMLButtonElement>(
      '[data-role=submit-prune]');
    if (pruneButton) pruneButton.disabled = !canSubmitPrune(state);
  }

  async function submitFilter(): Promise<void> {
    const form = el<HTMLFormElement>('[data-role=filter-form]');
    const years: [number, number] = [
      Number((form.elements.namedItem('year-start') as HTMLInputElement).value),
      Number((form.elements.namedItem('year-end') as HTMLInputElement).value),
    ];
    const hazardSelect = form.elements.namedItem('hazards') as HTMLSelectElement;
    const chosen = [...hazardSelect.selectedOptions].map((o) => o.value);
    const aggregation = (form.elements.namedItem('aggregation') as
      HTMLSelectElement).value as 'per-year' | 'whole-window';
    const resp = await client.filter(state.sessionId!, {
      years,
      hazard_types: chosen.length ? chosen : null,
      aggregation,
    });
    state = applyFilterResponse(state, resp);
    el<HTMLElement>('[data-role=filter-summary]').textContent =
      `${resp.rows} region-year rows over ${resp.regions} regions ` +
      `(${resp.excluded_region_years} excluded)`;
    el<HTMLElement>('[data-role=results]').innerHTML = '';
    el<HTMLElement>('[data-role=correlation]').innerHTML = '';

    const layers: Record<string, LayerDoc> = {};
    for (const [kind, url] of Object.entries(resp.layer_urls)) {
      layers[kind] = await client.layer(url);
    }
    renderMap(el('[data-role=map]'), layers);
    syncGates();
  }

  async function loadCorrelation(): Promise<void> {
    const resp = await client.correlation(state.sessionId!);
    state = applyCorrelationResponse(state, resp);
    renderCorrelation(el('[data-role=correlation]'), resp, {
      onSubmit: (threshold, staged) => void guard(async () => {
        const pruneResp = staged.length
          ? await client.prune(state.sessionId!, {
              mode: 'threshold', threshold, names: staged })
          : await client.prune(state.sessionId!, {
              mode: 'threshold', threshold });
        state = applyPruneResponse(state, pruneResp);
        syncGates();
      }),
    });
    syncGates();
  }

  async function submitTrain(): Promise<void> {
    const form = el<HTMLFormElement>('[data-role=train-form]');
    const families = [...form.querySelectorAll<HTMLInputElement>(
      'input[name=family]:checked')].map((box) => box.value);
    const split = Number((form.elements.namedItem('split') as
      HTMLInputElement).value);
    const seed = Number((form.elements.namedItem('seed') as
      HTMLInputElement).value);
    const causal = (form.elements.namedItem('causal') as
      HTMLInputElement).checked;
    const job = await client.train(state.sessionId!, {
      families, targets: ['all'], split_fraction: split, seed,
      run_causal: causal,
    });
    state = applyTrainSubmitted(state, job.job_id);
    const progress = el<HTMLElement>('[data-role=progress]');
    progress.style.display = '';
    const results = await client.pollResults(state.sessionId!, 400);
    progress.style.display = 'none';
    state = applyResults(state, results);
    renderResults(el('[data-role=results]'), results);
    syncGates();
  }

  el<HTMLFormElement>('[data-role=filter-form]').addEventListener(
    'submit', (event) => {
      event.preventDefault();
      void guard(submitFilter);
    });
  el<HTMLButtonElement>('[data-role=load-correlation]').addEventListener(
    'click', () => void guard(loadCorrelation));
  el<HTMLFormElement>('[data-role=train-form]').addEventListener(
    'submit', (event) => {
      event.preventDefault();
      void guard(submitTrain);
    });

  const ready = guard(async () => {
    meta = await client.meta();
    const [minYear, maxYear] = meta.coverage.scoreable_years ?? [2000, 2020];
    const form = el<HTMLFormElement>('[data-role=filter-form]');
    (form.elements.namedItem('year-start') as HTMLInputElement).value =
      String(minYear);
    (form.elements.namedItem('year-end') as HTMLInputElement).value =
      String(maxYear);
    const hazardSelect = form.elements.namedItem('hazards') as HTMLSelectElement;
    for (const hazard of meta.coverage.hazard_types) {
      const option = document.createElement('option');
      option.value = hazard;
      option.textContent = hazard;
      hazardSelect.appendChild(option);
    }
    state = { ...state, sessionId: await client.createSession() };
    syncGates();
  });

  syncGates();
  return { state: () => state, ready };
}

declare global {
  interface Window { __primeApp?: App }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  window.__primeApp = initApp(document.getElementById('app')!, new Client());
}
