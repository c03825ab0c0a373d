import { featurePath, layerBounds } from './geometry.js';
import type { LayerDoc } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const TOOLTIP_FIELDS = ['resilience', 'adaptability', 'vulnerability'] as const;

export interface MapView {
  root: HTMLElement;
  setVisible(kind: string, visible: boolean): void;
}

/**
 * Interactive choropleth: one toggleable <g> per score layer, all hidden
 * until switched on, with a hover tooltip echoing the feature's name and the
 * three scores exactly as sent by the server.
 */
export function renderMap(
  container: HTMLElement,
  layers: Record<string, LayerDoc>,
  onToggle?: (kind: string, visible: boolean) => void,
): MapView {
  container.innerHTML = '';

  const control = document.createElement('div');
  control.className = 'layer-control';
  container.appendChild(control);

  const tooltip = document.createElement('div');
  tooltip.className = 'map-tooltip';
  tooltip.style.display = 'none';

  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', '0 0 800 800');
  svg.classList.add('map-svg');
  container.appendChild(svg);
  container.appendChild(tooltip);

  const groups: Record<string, SVGGElement> = {};
  for (const [kind, doc] of Object.entries(layers)) {
    const bounds = layerBounds(doc);
    const group = document.createElementNS(SVG_NS, 'g');
    group.dataset.layer = kind;
    group.style.display = 'none'; // layers start hidden
    for (const feature of doc.features) {
      const path = document.createElementNS(SVG_NS, 'path');
      path.setAttribute('d', featurePath(feature, bounds));
      path.setAttribute('fill', feature.properties.color);
      path.setAttribute('stroke', '#555');
      path.setAttribute('stroke-width', '0.5');
      path.addEventListener('mouseenter', () => {
        const lines = [`<strong>${feature.properties.name}</strong>`];
        for (const field of TOOLTIP_FIELDS) {
          lines.push(`${field}: ${String(feature.properties[field])}`);
        }
        tooltip.innerHTML = lines.join('<br>');
        tooltip.style.display = 'block';
      });
      path.addEventListener('mouseleave', () => {
        tooltip.style.display = 'none';
      });
      group.appendChild(path);
    }
    svg.appendChild(group);
    groups[kind] = group;

    const label = document.createElement('label');
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.checked = false;
    box.dataset.layerToggle = kind;
    box.addEventListener('change', () => {
      view.setVisible(kind, box.checked);
      onToggle?.(kind, box.checked);
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(` ${kind}`));
    control.appendChild(label);
  }

  const view: MapView = {
    root: container,
    setVisible(kind, visible) {
      const group = groups[kind];
      if (group) group.style.display = visible ? '' : 'none';
    },
  };
  return view;
}
