/** Widget-placement reachability: the same linear-scan rule the command-line
 * `query` subcommand applies, so a marker readout here and a scripted query
 * on the same volume always agree. */

import { FINGER_ORDER, type FingerName, type Volume } from "./formats.js";

export interface WidgetMarker {
  id: string;
  center: [number, number, number];
  radiusMm: number;
  label: string;
}

export interface ReachResult {
  reachable: boolean;
  /** null when no point is in range */
  minCostDeg: number | null;
  fingers: FingerName[];
  pointsInRange: number;
}

export function makeMarker(
  existing: readonly WidgetMarker[],
  id: string,
  center: [number, number, number],
  radiusMm: number,
  label = "",
): WidgetMarker {
  if (!(radiusMm > 0)) throw new RangeError(`marker radius must be > 0 mm, got ${radiusMm}`);
  if (existing.some((m) => m.id === id)) throw new RangeError(`duplicate marker id ${JSON.stringify(id)}`);
  return { id, center: [...center], radiusMm, label };
}

/** A point counts when its distance to the center is <= radius (inclusive,
 * compared in squared form). Contributing fingers come back in canonical
 * order; unlabeled volumes report none. */
export function queryReachable(
  volume: Volume,
  center: readonly [number, number, number],
  radiusMm: number,
): ReachResult {
  if (radiusMm < 0) throw new RangeError(`radius must be >= 0 mm, got ${radiusMm}`);
  const rSq = radiusMm * radiusMm;
  let minCost: number | null = null;
  let n = 0;
  const present = new Set<FingerName>();
  for (const p of volume.points) {
    const dx = p.position[0] - center[0];
    const dy = p.position[1] - center[1];
    const dz = p.position[2] - center[2];
    if (dx * dx + dy * dy + dz * dz <= rSq) {
      n += 1;
      if (p.finger !== undefined) present.add(p.finger);
      if (minCost === null || p.costDeg < minCost) minCost = p.costDeg;
    }
  }
  return {
    reachable: n > 0,
    minCostDeg: minCost,
    fingers: FINGER_ORDER.filter((f) => present.has(f)),
    pointsInRange: n,
  };
}
