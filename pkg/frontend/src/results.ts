import type { DagPayload, ExplanationPayload, ResultsResponse } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const TARGET_ORDER = ['vulnerability', 'adaptability', 'resilience'];

/** Metric table grouped by target; every figure echoes the payload verbatim. */
export function renderMetricsTable(
  container: HTMLElement,
  metrics: ResultsResponse['metrics'],
): void {
  container.innerHTML = '';
  for (const target of TARGET_ORDER) {
    const entries = metrics.targets[target];
    if (!entries) continue;
    const heading = document.createElement('h3');
    heading.textContent = `${target[0].toUpperCase()}${target.slice(1)} Score`;
    container.appendChild(heading);
    const table = document.createElement('table');
    table.className = 'metrics-table';
    table.dataset.target = target;
    const head = table.insertRow();
    for (const column of ['Machine Learning Regressors', 'Mean Squared Error',
                          'Root Mean Squared Error', 'Mean Absolute Error']) {
      const th = document.createElement('th');
      th.textContent = column;
      head.appendChild(th);
    }
    for (const entry of entries) {
      const row = table.insertRow();
      row.insertCell().textContent = entry.display_name;
      row.insertCell().textContent = String(entry.mse);
      row.insertCell().textContent = String(entry.rmse);
      row.insertCell().textContent = String(entry.mae);
    }
    container.appendChild(table);
  }
}

/** Horizontal bar chart; signed bars for coefficients, unsigned for importances. */
export function renderExplanationChart(
  container: HTMLElement,
  payload: ExplanationPayload,
): void {
  container.innerHTML = '';
  const heading = document.createElement('h4');
  heading.textContent = `${payload.target} / ${payload.family} (${payload.kind})`;
  container.appendChild(heading);
  const maxAbs = Math.max(...payload.entries.map((e) => Math.abs(e.value)), 1e-12);
  const list = document.createElement('div');
  list.className = 'bar-chart';
  list.dataset.kind = payload.kind;
  for (const entry of payload.entries) {
    const row = document.createElement('div');
    row.className = 'bar-row';
    const label = document.createElement('span');
    label.className = 'bar-label';
    label.textContent = entry.feature;
    const track = document.createElement('div');
    track.className = 'bar-track';
    const bar = document.createElement('div');
    bar.className = entry.value < 0 ? 'bar neg' : 'bar pos';
    const halfWidth = (Math.abs(entry.value) / maxAbs) * 50;
    bar.style.width = `${halfWidth}%`;
    if (payload.kind === 'coefficient') {
      // signed: negative bars extend left of the centre axis
      bar.style.marginLeft = entry.value < 0 ? `${50 - halfWidth}%` : '50%';
    } else {
      bar.style.marginLeft = '0';
      bar.style.width = `${(Math.abs(entry.value) / maxAbs) * 100}%`;
    }
    bar.title = String(entry.value);
    const value = document.createElement('span');
    value.className = 'bar-value';
    value.textContent = String(entry.value);
    track.appendChild(bar);
    row.appendChild(label);
    row.appendChild(track);
    row.appendChild(value);
    list.appendChild(row);
  }
  container.appendChild(list);
}

/**
 * DAG view: nodes on a circle with the score node centered and emphasized,
 * parent arcs highlighted.
 */
export function renderDag(container: HTMLElement, dag: DagPayload): void {
  container.innerHTML = '';
  const size = 640;
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${size} ${size}`);
  svg.classList.add('dag-svg');

  const others = dag.nodes.filter((n) => n !== dag.score_node);
  const center = size / 2;
  const radius = size / 2 - 70;
  const pos = new Map<string, [number, number]>();
  others.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / others.length - Math.PI / 2;
    pos.set(node, [center + radius * Math.cos(angle),
                   center + radius * Math.sin(angle)]);
  });
  pos.set(dag.score_node, [center, center]);

  const parents = new Set(dag.parents.map((p) => p.name));
  const drawEdge = (
    from: string, to: string, directed: boolean, highlight: boolean,
  ) => {
    const [x1, y1] = pos.get(from)!;
    const [x2, y2] = pos.get(to)!;
    const line = document.createElementNS(SVG_NS, 'line');
    line.setAttribute('x1', String(x1));
    line.setAttribute('y1', String(y1));
    line.setAttribute('x2', String(x2));
    line.setAttribute('y2', String(y2));
    line.setAttribute('stroke', highlight ? '#b2182b' : '#888');
    line.setAttribute('stroke-width', highlight ? '3' : '1');
    if (!directed) line.setAttribute('stroke-dasharray', '6 4');
    if (directed) line.setAttribute('marker-end', 'url(#arrow)');
    if (highlight) line.dataset.parentArc = from;
    svg.appendChild(line);
  };

  const defs = document.createElementNS(SVG_NS, 'defs');
  defs.innerHTML =
    '<marker id="arrow" markerWidth="8" markerHeight="8" refX="24" refY="4" ' +
    'orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#555"/></marker>';
  svg.appendChild(defs);

  for (const arc of dag.arcs) {
    drawEdge(arc.from, arc.to, true,
             arc.to === dag.score_node && parents.has(arc.from));
  }
  for (const [a, b] of dag.undirected) drawEdge(a, b, false, false);

  for (const node of dag.nodes) {
    const [x, y] = pos.get(node)!;
    const group = document.createElementNS(SVG_NS, 'g');
    group.dataset.node = node;
    const isScore = node === dag.score_node;
    const isParent = parents.has(node);
    const shape = document.createElementNS(SVG_NS, isScore ? 'rect' : 'circle');
    if (isScore) {
      shape.setAttribute('x', String(x - 55));
      shape.setAttribute('y', String(y - 16));
      shape.setAttribute('width', '110');
      shape.setAttribute('height', '32');
      shape.setAttribute('fill', '#ffd966');
      group.classList.add('score-node');
    } else {
      shape.setAttribute('cx', String(x));
      shape.setAttribute('cy', String(y));
      shape.setAttribute('r', '22');
      shape.setAttribute('fill', isParent ? '#f4a582' : '#dce6f1');
      if (isParent) group.classList.add('parent-node');
    }
    shape.setAttribute('stroke', '#333');
    const text = document.createElementNS(SVG_NS, 'text');
    text.setAttribute('x', String(x));
    text.setAttribute('y', String(y + 4));
    text.setAttribute('text-anchor', 'middle');
    text.setAttribute('font-size', '10');
    text.textContent = node;
    group.appendChild(shape);
    group.appendChild(text);
    svg.appendChild(group);
  }

  container.appendChild(svg);
  if (dag.parents.length) {
    const note = document.createElement('p');
    note.className = 'dag-parents';
    note.textContent = 'Parents of ' + dag.score_node + ': ' +
      dag.parents.map((p) => `${p.name} (${p.sign}${String(Math.abs(p.coefficient))})`)
        .join(', ');
    container.appendChild(note);
  }
}

export function renderResults(container: HTMLElement, results: ResultsResponse): void {
  container.innerHTML = '';
  const metricsHost = document.createElement('div');
  metricsHost.dataset.section = 'metrics';
  renderMetricsTable(metricsHost, results.metrics);
  container.appendChild(metricsHost);

  const charts = document.createElement('div');
  charts.dataset.section = 'explanations';
  for (const payload of Object.values(results.explanations)) {
    const host = document.createElement('div');
    renderExplanationChart(host, payload);
    charts.appendChild(host);
  }
  container.appendChild(charts);

  const dags = document.createElement('div');
  dags.dataset.section = 'dags';
  for (const dag of Object.values(results.dags)) {
    const host = document.createElement('div');
    renderDag(host, dag);
    dags.appendChild(host);
  }
  container.appendChild(dags);
}
