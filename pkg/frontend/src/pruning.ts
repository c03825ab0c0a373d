import type { Removal } from './types.js';

export interface PrunePreview {
  retained: string[];
  removed: Removal[];
}

/**
 * Client-side preview of the |r|-magnitude elimination rule.
 *
 * Exact mirror of the server's scan so the preview matches the submitted
 * pruning report: manual removals apply first, then columns are walked in
 * input order and dropped when |r| exceeds the threshold against any
 * already-retained column.
 */
export function previewPrune(
  names: string[],
  matrix: number[][],
  threshold: number,
  manual: string[] = [],
): PrunePreview {
  const idx = new Map(names.map((n, i) => [n, i]));
  const removed: Removal[] = manual
    .filter((m) => idx.has(m))
    .map((m) => ({ name: m, reason: 'manual', trigger: null, r: null }));
  const manualSet = new Set(manual);

  const retained: string[] = [];
  for (const name of names) {
    if (manualSet.has(name)) continue;
    const i = idx.get(name)!;
    let trigger: { prev: string; r: number } | null = null;
    for (const prev of retained) {
      const r = matrix[i][idx.get(prev)!];
      if (Math.abs(r) > threshold) {
        trigger = { prev, r };
        break;
      }
    }
    if (trigger === null) {
      retained.push(name);
    } else {
      removed.push({
        name,
        reason: `|r| > ${threshold} with ${trigger.prev}`,
        trigger: trigger.prev,
        r: trigger.r,
      });
    }
  }
  return { retained, removed };
}
