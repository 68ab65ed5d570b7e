import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseCsvVolume, type Volume } from "../src/formats.js";
import { makeMarker, queryReachable } from "../src/query.js";

const FIXTURES = join(__dirname, "fixtures");
const read = (name: string) => readFileSync(join(FIXTURES, name), "utf-8");

interface Probe {
  fixture: string;
  center: [number, number, number];
  radius_mm: number;
  expected: {
    reachable: boolean;
    min_cost_deg: number | null;
    fingers: string[];
    points_in_range: number;
  };
}

const probes: Probe[] = JSON.parse(read("queries.json"));
const volumes = new Map<string, Volume>();
for (const p of probes) {
  if (!volumes.has(p.fixture)) {
    volumes.set(p.fixture, parseCsvVolume(read(p.fixture), p.fixture));
  }
}

describe("reachability agrees with the command-line query", () => {
  it.each(probes.map((p) => [
    `${p.fixture} @ (${p.center.join(",")}) r=${p.radius_mm}`, p,
  ] as const))("%s", (_name, probe) => {
    const vol = volumes.get(probe.fixture)!;
    const got = queryReachable(vol, probe.center, probe.radius_mm);
    expect(got.reachable).toBe(probe.expected.reachable);
    expect(got.fingers).toEqual(probe.expected.fingers);
    expect(got.pointsInRange).toBe(probe.expected.points_in_range);
    if (probe.expected.min_cost_deg === null) {
      expect(got.minCostDeg).toBeNull();
    } else {
      expect(got.minCostDeg).not.toBeNull();
      expect(Math.abs(got.minCostDeg! - probe.expected.min_cost_deg))
        .toBeLessThan(1e-3);
    }
  });

  it("covers hits, misses, and multi-finger probes", () => {
    // guard against the fixture table degenerating into one-sided cases
    const hits = probes.filter((p) => p.expected.reachable);
    const misses = probes.filter((p) => !p.expected.reachable);
    expect(hits.length).toBeGreaterThanOrEqual(4);
    expect(misses.length).toBeGreaterThanOrEqual(3);
    expect(hits.some((p) => p.expected.fingers.length > 1)).toBe(true);
    expect(new Set(probes.map((p) => p.fixture)).size).toBe(3);
  });
});

describe("query semantics", () => {
  const arc = () => volumes.get("arc.csv")!;

  it("radius boundary is inclusive", () => {
    // a probe center sitting exactly on a point counts even at radius 0
    const seedPos = arc().points[0].position;
    const hit = queryReachable(arc(), seedPos, 0);
    expect(hit.reachable).toBe(true);
    expect(hit.minCostDeg).toBe(0);
    expect(hit.pointsInRange).toBe(1);
  });

  it("unreachable probes report null cost and no fingers", () => {
    const miss = queryReachable(arc(), [500, 500, 500], 10);
    expect(miss).toEqual({
      reachable: false, minCostDeg: null, fingers: [], pointsInRange: 0,
    });
  });

  it("min cost is the cheapest point in range, not the nearest", () => {
    // two arc points straddle the probe; the cheaper one wins the readout
    const vol = arc();
    const a = vol.points[3];
    const b = vol.points[4];
    const mid: [number, number, number] = [
      (a.position[0] + b.position[0]) / 2,
      (a.position[1] + b.position[1]) / 2,
      (a.position[2] + b.position[2]) / 2,
    ];
    const res = queryReachable(vol, mid, 2.0);
    expect(res.pointsInRange).toBe(2);
    expect(res.minCostDeg).toBe(Math.min(a.costDeg, b.costDeg));
  });

  it("rejects negative radii", () => {
    expect(() => queryReachable(arc(), [0, 0, 0], -1)).toThrow(RangeError);
  });
});

describe("widget markers", () => {
  it("enforces positive radius and unique ids", () => {
    const first = makeMarker([], "w1", [0, 0, 0], 10, "play");
    expect(first.radiusMm).toBe(10);
    expect(() => makeMarker([first], "w1", [1, 1, 1], 5)).toThrow(/duplicate/);
    expect(() => makeMarker([first], "w2", [1, 1, 1], 0)).toThrow(/radius/);
    expect(() => makeMarker([first], "w2", [1, 1, 1], -3)).toThrow(/radius/);
    const second = makeMarker([first], "w2", [1, 1, 1], 5);
    expect(second.label).toBe("");
  });
});
