import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  FormatError,
  costColor,
  parseCsvVolume,
  parseObjMesh,
  parsePlyVolume,
} from "../src/formats.js";

const FIXTURES = join(__dirname, "fixtures");
const read = (name: string) => readFileSync(join(FIXTURES, name), "utf-8");

describe("csv volumes", () => {
  it("parses the single-hinge arc fixture", () => {
    const vol = parseCsvVolume(read("arc.csv"), "arc.csv");
    expect(vol.points).toHaveLength(19);
    expect(vol.maxCostDeg).toBe(90);
    expect(vol.fingers).toEqual(["index"]);
    expect(vol.points[0].position).toEqual([33.75, 0, 195]);
    expect(vol.points[0].costDeg).toBe(0);
    expect(vol.points[0].config).toEqual([0]);
    // cost ramp endpoints: green at the seed, red at the deepest curl
    expect(vol.points[0].color).toEqual([0, 255, 0]);
    const deepest = vol.points.find((p) => p.costDeg === 90)!;
    expect(deepest.color).toEqual([255, 0, 0]);
  });

  it("lists fingers in canonical order regardless of row order", () => {
    const vol = parseCsvVolume(read("multi.csv"), "multi.csv");
    expect(vol.fingers).toEqual(["index", "middle", "thumb"]);
    expect(vol.points.length).toBe(241);
  });

  it("rejects malformed input with the offending line", () => {
    expect(() => parseCsvVolume("bogus\n", "x.csv")).toThrow(/x\.csv line 1/);
    const header = "finger,x_mm,y_mm,z_mm,cost_deg,config\n";
    expect(() => parseCsvVolume(header + "index,1,2\n", "x.csv"))
      .toThrow(/line 2: expected 6 columns/);
    expect(() => parseCsvVolume(header + "pinky,1,2,3,4,0\n", "x.csv"))
      .toThrow(/unknown finger "pinky"/);
    expect(() => parseCsvVolume(header + "index,1,nan?,3,4,0\n", "x.csv"))
      .toThrow(FormatError);
    expect(() => parseCsvVolume(header + "index,1,2,3,4,1;bad\n", "x.csv"))
      .toThrow(/bad config/);
  });

  it("accepts empty config cells (axis-free fingers)", () => {
    const header = "finger,x_mm,y_mm,z_mm,cost_deg,config\n";
    const vol = parseCsvVolume(header + "ring,1,2,3,0,\n");
    expect(vol.points[0].config).toEqual([]);
  });
});

describe("ply volumes", () => {
  it("parses the arc fixture with its embedded colors", () => {
    const vol = parsePlyVolume(read("arc.ply"), "arc.ply");
    expect(vol.points).toHaveLength(19);
    expect(vol.maxCostDeg).toBe(90);
    expect(vol.fingers).toEqual([]); // the format carries no finger labels
    expect(vol.points[0].color).toEqual([0, 255, 0]);
    expect(vol.points[18].color).toEqual([255, 0, 0]);
    expect(vol.points[0].position[0]).toBeCloseTo(33.75, 6);
  });

  it("embedded PLY colors equal the CSV-recomputed ramp", () => {
    const fromPly = parsePlyVolume(read("arc.ply"));
    const fromCsv = parseCsvVolume(read("arc.csv"));
    for (let i = 0; i < fromPly.points.length; i++) {
      expect(fromPly.points[i].color).toEqual(fromCsv.points[i].color);
    }
  });

  it("computes the ramp when a PLY has no color properties", () => {
    const ply = [
      "ply", "format ascii 1.0", "element vertex 2",
      "property float x", "property float y", "property float z",
      "property float cost", "end_header",
      "0 0 0 0", "1 1 1 50",
    ].join("\n");
    const vol = parsePlyVolume(ply);
    expect(vol.points[0].color).toEqual([0, 255, 0]);
    expect(vol.points[1].color).toEqual([255, 0, 0]);
  });

  it("rejects malformed headers and truncated bodies with line numbers", () => {
    expect(() => parsePlyVolume("solid\n", "x.ply")).toThrow(/x\.ply line 1/);
    expect(() => parsePlyVolume("ply\nformat binary_little_endian 1.0\n", "x.ply"))
      .toThrow(/only ascii/);
    expect(() => parsePlyVolume("ply\nformat ascii 1.0\nelement vertex 1\n", "x.ply"))
      .toThrow(/end_header/);
    const truncated = [
      "ply", "format ascii 1.0", "element vertex 3",
      "property float x", "property float y", "property float z",
      "end_header", "0 0 0",
    ].join("\n");
    expect(() => parsePlyVolume(truncated, "x.ply")).toThrow(/line 9.*ends early/);
  });
});

describe("obj meshes", () => {
  it("loads the one-triangle fixture", () => {
    const mesh = parseObjMesh(read("tri.obj"), "tri.obj");
    expect(mesh.vertices).toHaveLength(9);
    expect(Array.from(mesh.triangles)).toEqual([0, 1, 2]);
    expect(mesh.vertices[3]).toBe(50);
  });

  it("fan-triangulates polygons and resolves negative and slashed refs", () => {
    const obj = [
      "v 0 0 0", "v 1 0 0", "v 1 1 0", "v 0 1 0",
      "f 1/1/1 2//2 -2 -1",
    ].join("\n");
    const mesh = parseObjMesh(obj);
    expect(Array.from(mesh.triangles)).toEqual([0, 1, 2, 0, 2, 3]);
  });

  it("rejects garbage with the offending line", () => {
    expect(() => parseObjMesh("v 0 0 0\nf 1 2 9\n", "m.obj"))
      .toThrow(/m\.obj line 2: .*out of range/);
    expect(() => parseObjMesh("v 0 0\n", "m.obj")).toThrow(/line 1/);
    expect(() => parseObjMesh("v 0 0 0\n", "m.obj")).toThrow(/no faces/);
  });
});

describe("cost ramp", () => {
  it("matches the exporter's integer arithmetic", () => {
    expect(costColor(0, 90)).toEqual([0, 255, 0]);
    expect(costColor(90, 90)).toEqual([255, 0, 0]);
    expect(costColor(45, 90)).toEqual([128, 127, 0]);
    expect(costColor(22.5, 90)).toEqual([64, 191, 0]);
    expect(costColor(5, 0)).toEqual([0, 255, 0]); // degenerate max
  });

  it("red and green always sum to 255", () => {
    for (let c = 0; c <= 77; c += 0.7) {
      const [r, g, b] = costColor(c, 77);
      expect(r + g).toBe(255);
      expect(b).toBe(0);
    }
  });
});
