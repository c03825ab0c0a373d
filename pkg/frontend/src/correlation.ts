import { previewPrune } from './pruning.js';
import type { CorrelationResponse } from './types.js';

function cellColor(r: number): string {
  // blue (-1) -> white (0) -> red (+1); presentation only
  const t = Math.max(-1, Math.min(1, r));
  const other = Math.round(255 * (1 - Math.abs(t)));
  return t >= 0
    ? `rgb(255,${other},${other})`
    : `rgb(${other},${other},255)`;
}

export interface CorrelationView {
  root: HTMLElement;
  stagedEliminations(): string[];
  threshold(): number;
}

/**
 * Heatmap plus elimination controls.  Clicking a variable header stages it
 * for manual removal; the threshold slider previews the |r|-rule outcome via
 * the same scan the server runs.
 */
export function renderCorrelation(
  container: HTMLElement,
  data: CorrelationResponse,
  options: {
    initialThreshold?: number;
    staged?: string[];
    onStageChange?: (staged: string[]) => void;
    onSubmit?: (threshold: number, staged: string[]) => void;
  } = {},
): CorrelationView {
  container.innerHTML = '';
  let staged = [...(options.staged ?? [])];
  let threshold = options.initialThreshold ?? 0.7;

  const table = document.createElement('table');
  table.className = 'corr-table';
  const head = table.insertRow();
  head.appendChild(document.createElement('th'));
  for (const name of data.names) {
    const th = document.createElement('th');
    th.textContent = name;
    th.dataset.variable = name;
    th.addEventListener('click', () => {
      staged = staged.includes(name)
        ? staged.filter((n) => n !== name)
        : [...staged, name];
      refresh();
      options.onStageChange?.(staged);
    });
    head.appendChild(th);
  }
  for (let i = 0; i < data.names.length; i++) {
    const row = table.insertRow();
    const th = document.createElement('th');
    th.textContent = data.names[i];
    row.appendChild(th);
    for (let j = 0; j < data.names.length; j++) {
      const td = row.insertCell();
      const r = data.matrix[i][j];
      td.style.backgroundColor = cellColor(r);
      td.title = `${data.names[i]} / ${data.names[j]}: ${String(r)}`;
      td.textContent = r.toFixed(2);
    }
  }
  container.appendChild(table);

  const controls = document.createElement('div');
  controls.className = 'prune-controls';
  const slider = document.createElement('input');
  slider.type = 'range';
  slider.min = '0.1';
  slider.max = '1.0';
  slider.step = '0.05';
  slider.value = String(threshold);
  slider.dataset.role = 'threshold';
  const sliderLabel = document.createElement('span');
  const previewBox = document.createElement('div');
  previewBox.className = 'prune-preview';
  const submit = document.createElement('button');
  submit.textContent = 'Apply elimination';
  submit.dataset.role = 'submit-prune';
  submit.addEventListener('click', () => options.onSubmit?.(threshold, staged));

  controls.appendChild(slider);
  controls.appendChild(sliderLabel);
  controls.appendChild(submit);
  container.appendChild(controls);
  container.appendChild(previewBox);

  slider.addEventListener('input', () => {
    threshold = Number(slider.value);
    refresh();
  });

  function refresh(): void {
    sliderLabel.textContent = ` |r| > ${threshold}`;
    for (const th of table.querySelectorAll<HTMLElement>('th[data-variable]')) {
      th.classList.toggle('staged', staged.includes(th.dataset.variable!));
    }
    const preview = previewPrune(data.names, data.matrix, threshold, staged);
    previewBox.innerHTML = '';
    const title = document.createElement('p');
    title.textContent =
      `Preview: ${preview.removed.length} removed, ${preview.retained.length} retained`;
    previewBox.appendChild(title);
    const list = document.createElement('ul');
    for (const removal of preview.removed) {
      const item = document.createElement('li');
      item.dataset.removed = removal.name;
      item.textContent = `${removal.name} (${removal.reason})`;
      list.appendChild(item);
    }
    previewBox.appendChild(list);
  }

  refresh();
  return {
    root: container,
    stagedEliminations: () => [...staged],
    threshold: () => threshold,
  };
}
