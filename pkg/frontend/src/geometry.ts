import type { LayerDoc, LayerFeature } from './types.js';

type Ring = [number, number][];

function rings(feature: LayerFeature): Ring[] {
  const geom = feature.geometry;
  if (!geom) return [];
  if (geom.type === 'Polygon') return geom.coordinates as Ring[];
  if (geom.type === 'MultiPolygon') {
    return (geom.coordinates as Ring[][]).flat();
  }
  return [];
}

export interface Bounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export function layerBounds(doc: LayerDoc): Bounds {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const feature of doc.features) {
    for (const ring of rings(feature)) {
      for (const [x, y] of ring) {
        minX = Math.min(minX, x);
        maxX = Math.max(maxX, x);
        minY = Math.min(minY, y);
        maxY = Math.max(maxY, y);
      }
    }
  }
  return { minX, minY, maxX, maxY };
}

/**
 * SVG path for a feature in a y-flipped unit space scaled to `size`.
 * Equirectangular: fine for choropleth reading, no tile dependency.
 */
export function featurePath(feature: LayerFeature, bounds: Bounds, size = 800): string {
  const spanX = bounds.maxX - bounds.minX || 1;
  const spanY = bounds.maxY - bounds.minY || 1;
  const scale = size / Math.max(spanX, spanY);
  const parts: string[] = [];
  for (const ring of rings(feature)) {
    ring.forEach(([x, y], i) => {
      const px = ((x - bounds.minX) * scale).toFixed(2);
      const py = ((bounds.maxY - y) * scale).toFixed(2);
      parts.push(`${i === 0 ? 'M' : 'L'}${px},${py}`);
    });
    parts.push('Z');
  }
  return parts.join(' ');
}
