/** Parsers for the volume/mesh interchange formats (ASCII PLY, CSV, OBJ).
 *
 * These mirror the command-line tool's formats byte for byte so a volume
 * renders here exactly as it was exported. Everything in this module is pure
 * (strings in, data out) and runs in a worker or a test without a DOM.
 */

export const FINGER_ORDER = ["index", "middle", "ring", "little", "thumb"] as const;
export type FingerName = (typeof FINGER_ORDER)[number];

const FINGER_SET = new Set<string>(FINGER_ORDER);

export interface VolumePoint {
  position: [number, number, number];
  costDeg: number;
  /** absent for PLY sources: the format carries no finger labels */
  finger?: FingerName;
  config?: number[];
  /** 0..255 each; embedded for PLY, ramp-computed for CSV */
  color: [number, number, number];
}

export interface Volume {
  points: VolumePoint[];
  maxCostDeg: number;
  /** fingers present, in canonical order; empty for unlabeled sources */
  fingers: FingerName[];
}

export interface ParsedMesh {
  vertices: Float32Array; // 3 * nVertices
  /** vertex indices, 3 * nTriangles */
  triangles: Uint32Array;
}

export class FormatError extends Error {}

function fail(where: string, line: number, what: string): never {
  throw new FormatError(`${where} line ${line}: ${what}`);
}

/** Green (cost 0) to red (cost = max); the same integer ramp the exporter
 * bakes into PLY files, so recomputed CSV colors match embedded PLY colors. */
export function costColor(costDeg: number, maxCostDeg: number): [number, number, number] {
  if (maxCostDeg <= 0) return [0, 255, 0];
  const t = Math.min(Math.max(costDeg / maxCostDeg, 0), 1);
  const red = Math.min(255, Math.floor(255 * t + 0.5));
  return [red, 255 - red, 0];
}

const CSV_HEADER = "finger,x_mm,y_mm,z_mm,cost_deg,config";

function parseNumber(raw: string, where: string, line: number): number {
  const v = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(v)) fail(where, line, `bad number ${JSON.stringify(raw)}`);
  return v;
}

export function parseCsvVolume(text: string, name = "volume.csv"): Volume {
  const lines = text.split(/\r?\n/);
  if (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0 || lines[0].trim() !== CSV_HEADER) {
    fail(name, 1, `expected header ${JSON.stringify(CSV_HEADER)}`);
  }
  const points: VolumePoint[] = [];
  const present = new Set<FingerName>();
  let maxCost = 0;
  for (let i = 1; i < lines.length; i++) {
    const row = lines[i];
    if (row.trim() === "") continue;
    const cells = row.split(",");
    if (cells.length !== 6) fail(name, i + 1, `expected 6 columns, got ${cells.length}`);
    const finger = cells[0].trim();
    if (!FINGER_SET.has(finger)) fail(name, i + 1, `unknown finger ${JSON.stringify(finger)}`);
    const x = parseNumber(cells[1], name, i + 1);
    const y = parseNumber(cells[2], name, i + 1);
    const z = parseNumber(cells[3], name, i + 1);
    const cost = parseNumber(cells[4], name, i + 1);
    const configRaw = cells[5].trim();
    let config: number[] = [];
    if (configRaw !== "") {
      config = configRaw.split(";").map((c) => {
        const v = Number(c);
        if (!Number.isInteger(v)) fail(name, i + 1, `bad config ${JSON.stringify(configRaw)}`);
        return v;
      });
    }
    present.add(finger as FingerName);
    maxCost = Math.max(maxCost, cost);
    points.push({
      position: [x, y, z],
      costDeg: cost,
      finger: finger as FingerName,
      config,
      color: [0, 0, 0], // filled below once maxCost is known
    });
  }
  for (const p of points) p.color = costColor(p.costDeg, maxCost);
  return {
    points,
    maxCostDeg: maxCost,
    fingers: FINGER_ORDER.filter((f) => present.has(f)),
  };
}

interface PlyProperty {
  name: string;
  isColor: boolean;
}

/** ASCII PLY point clouds. Properties are located by name, so any column
 * order works; x/y/z are required, red/green/blue and cost are optional
 * (missing colors fall back to the cost ramp, missing cost to 0). */
export function parsePlyVolume(text: string, name = "volume.ply"): Volume {
  const lines = text.split(/\r?\n/);
  if ((lines[0] ?? "").trim() !== "ply") fail(name, 1, "not a PLY file (missing 'ply' magic)");

  let vertexCount = -1;
  const props: PlyProperty[] = [];
  let inVertexElement = false;
  let formatSeen = false;
  let headerEnd = -1;
  for (let i = 1; i < lines.length; i++) {
    const tok = lines[i].trim().split(/\s+/);
    if (tok[0] === "comment" || tok[0] === "") continue;
    if (tok[0] === "format") {
      if (tok[1] !== "ascii") fail(name, i + 1, `only ascii PLY is supported, got ${tok[1]}`);
      formatSeen = true;
    } else if (tok[0] === "element") {
      inVertexElement = tok[1] === "vertex";
      if (inVertexElement) {
        vertexCount = Number(tok[2]);
        if (!Number.isInteger(vertexCount) || vertexCount < 0) {
          fail(name, i + 1, `bad vertex count ${JSON.stringify(tok[2])}`);
        }
      }
    } else if (tok[0] === "property") {
      if (inVertexElement) {
        if (tok.length !== 3) fail(name, i + 1, "expected 'property <type> <name>'");
        props.push({ name: tok[2], isColor: tok[1] === "uchar" });
      }
    } else if (tok[0] === "end_header") {
      headerEnd = i;
      break;
    } else {
      fail(name, i + 1, `unexpected header token ${JSON.stringify(tok[0])}`);
    }
  }
  if (headerEnd < 0) fail(name, lines.length, "missing end_header");
  if (!formatSeen) fail(name, headerEnd + 1, "missing format line");
  if (vertexCount < 0) fail(name, headerEnd + 1, "missing 'element vertex'");

  const col = (n: string) => props.findIndex((p) => p.name === n);
  const ix = col("x"), iy = col("y"), iz = col("z");
  if (ix < 0 || iy < 0 || iz < 0) fail(name, headerEnd + 1, "vertex element needs x, y, z properties");
  const ir = col("red"), ig = col("green"), ib = col("blue"), ic = col("cost");

  const points: VolumePoint[] = [];
  let maxCost = 0;
  for (let k = 0; k < vertexCount; k++) {
    const lineNo = headerEnd + 1 + k;
    const row = (lines[lineNo] ?? "").trim();
    if (row === "") fail(name, lineNo + 1, `expected ${vertexCount} vertex rows, file ends early`);
    const cells = row.split(/\s+/);
    if (cells.length < props.length) {
      fail(name, lineNo + 1, `expected ${props.length} values, got ${cells.length}`);
    }
    const num = (j: number) => parseNumber(cells[j], name, lineNo + 1);
    const cost = ic >= 0 ? num(ic) : 0;
    maxCost = Math.max(maxCost, cost);
    points.push({
      position: [num(ix), num(iy), num(iz)],
      costDeg: cost,
      color: ir >= 0 && ig >= 0 && ib >= 0 ? [num(ir), num(ig), num(ib)] : [0, 0, 0],
    });
  }
  if (ir < 0 || ig < 0 || ib < 0) {
    for (const p of points) p.color = costColor(p.costDeg, maxCost);
  }
  return { points, maxCostDeg: maxCost, fingers: [] };
}

/** Wavefront OBJ meshes: v and f records, everything else ignored. Faces may
 * use v/vt/vn references and negative (relative) indices; polygons are
 * fan-triangulated. */
export function parseObjMesh(text: string, name = "mesh.obj"): ParsedMesh {
  const vertices: number[] = [];
  const triangles: number[] = [];
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) continue;
    const tok = line.split(/\s+/);
    if (tok[0] === "v") {
      if (tok.length < 4) fail(name, i + 1, "vertex needs 3 coordinates");
      vertices.push(
        parseNumber(tok[1], name, i + 1),
        parseNumber(tok[2], name, i + 1),
        parseNumber(tok[3], name, i + 1),
      );
    } else if (tok[0] === "f") {
      if (tok.length < 4) fail(name, i + 1, "face needs at least 3 vertices");
      const nVerts = vertices.length / 3;
      const idx = tok.slice(1).map((t) => {
        const first = t.split("/")[0];
        const v = Number(first);
        if (!Number.isInteger(v) || v === 0) fail(name, i + 1, `bad vertex reference ${JSON.stringify(t)}`);
        const resolved = v > 0 ? v - 1 : nVerts + v;
        if (resolved < 0 || resolved >= nVerts) fail(name, i + 1, `vertex reference ${v} out of range`);
        return resolved;
      });
      for (let k = 1; k + 1 < idx.length; k++) {
        triangles.push(idx[0], idx[k], idx[k + 1]);
      }
    }
  }
  if (triangles.length === 0) fail(name, lines.length, "no faces found");
  return { vertices: new Float32Array(vertices), triangles: new Uint32Array(triangles) };
}
