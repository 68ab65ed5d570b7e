/** Browser viewer: load a volume (CSV/PLY) plus an optional object mesh
 * (OBJ), orbit the cost-coded point cloud, and place spherical reach-probe
 * markers that read back reachability / min cost / contributing fingers.
 *
 * Strictly read-only over the loaded files, and single-threaded: parsing is
 * quick enough to run inline, and every scene mutation happens right here on
 * the UI thread.
 */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";

import {
  FormatError,
  parseCsvVolume,
  parseObjMesh,
  parsePlyVolume,
  type FingerName,
  type Volume,
} from "./formats.js";
import { makeMarker, queryReachable, type WidgetMarker } from "./query.js";

const POINT_SIZE_MM = 2.5;
const MARKER_COLOR_OK = 0x27ae60;
const MARKER_COLOR_MISS = 0xc0392b;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class ViewerApp {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private raycaster = new THREE.Raycaster();

  private volume: Volume | null = null;
  private pointClouds = new Map<string, THREE.Points>(); // keyed by finger ("" = unlabeled)
  private meshObject: THREE.Object3D | null = null;

  private markers: WidgetMarker[] = [];
  private markerMeshes = new Map<string, THREE.Mesh>();
  private selectedId: string | null = null;
  private nextMarkerNum = 1;
  private dragging: { id: string; plane: THREE.Plane } | null = null;

  constructor(private container: HTMLElement) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    container.appendChild(this.renderer.domElement);

    this.scene.background = new THREE.Color(0x14161a);
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.1, 5000);
    this.camera.position.set(180, 120, 320);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.set(0, 0, 150);

    this.scene.add(new THREE.HemisphereLight(0xffffff, 0x404060, 1.4));
    const grid = new THREE.GridHelper(400, 20, 0x333a45, 0x23272e);
    grid.position.y = -80;
    this.scene.add(grid);
    this.scene.add(new THREE.AxesHelper(40));

    window.addEventListener("resize", () => this.resize());
    this.resize();

    const canvas = this.renderer.domElement;
    canvas.addEventListener("dblclick", (ev: MouseEvent) => this.placeMarkerAt(ev));
    canvas.addEventListener("pointerdown", (ev: PointerEvent) => this.beginDrag(ev));
    canvas.addEventListener("pointermove", (ev: PointerEvent) => this.moveDrag(ev));
    canvas.addEventListener("pointerup", () => (this.dragging = null));

    this.renderer.setAnimationLoop(() => {
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    });
  }

  private resize(): void {
    const w = this.container.clientWidth;
    const h = this.container.clientHeight;
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(w, h);
  }

  // ---- loading ----------------------------------------------------------

  loadVolumeText(text: string, fileName: string): void {
    const vol = fileName.toLowerCase().endsWith(".ply")
      ? parsePlyVolume(text, fileName)
      : parseCsvVolume(text, fileName);
    for (const cloud of this.pointClouds.values()) this.scene.remove(cloud);
    this.pointClouds.clear();
    this.volume = vol;

    const groups = new Map<string, Volume["points"]>();
    for (const p of vol.points) {
      const key = p.finger ?? "";
      let bucket = groups.get(key);
      if (!bucket) groups.set(key, (bucket = []));
      bucket.push(p);
    }
    for (const [key, pts] of groups) {
      const positions = new Float32Array(pts.length * 3);
      const colors = new Float32Array(pts.length * 3);
      pts.forEach((p, i) => {
        positions.set(p.position, i * 3);
        colors.set([p.color[0] / 255, p.color[1] / 255, p.color[2] / 255], i * 3);
      });
      const geom = new THREE.BufferGeometry();
      geom.setAttribute("position", new THREE.BufferAttribute(positions, 3));
      geom.setAttribute("color", new THREE.BufferAttribute(colors, 3));
      const cloud = new THREE.Points(geom, new THREE.PointsMaterial({
        size: POINT_SIZE_MM, vertexColors: true, sizeAttenuation: true,
      }));
      this.scene.add(cloud);
      this.pointClouds.set(key, cloud);
    }

    this.frameContent();
    this.refreshFingerToggles();
    this.refreshLegend();
    this.refreshAllMarkers();
    setStatus(`${fileName}: ${vol.points.length} points` +
      (vol.fingers.length ? ` (${vol.fingers.join(", ")})` : ""));
  }

  loadMeshText(text: string, fileName: string): void {
    const parsed = parseObjMesh(text, fileName);
    if (this.meshObject) this.scene.remove(this.meshObject);
    const geom = new THREE.BufferGeometry();
    geom.setAttribute("position", new THREE.BufferAttribute(parsed.vertices, 3));
    geom.setIndex(new THREE.BufferAttribute(parsed.triangles, 1));
    geom.computeVertexNormals();
    const solid = new THREE.Mesh(geom, new THREE.MeshLambertMaterial({
      color: 0x7f9bb8, transparent: true, opacity: 0.35,
      side: THREE.DoubleSide, depthWrite: false,
    }));
    const wire = new THREE.LineSegments(
      new THREE.WireframeGeometry(geom),
      new THREE.LineBasicMaterial({ color: 0x46586c, transparent: true, opacity: 0.4 }),
    );
    this.meshObject = new THREE.Group().add(solid, wire);
    this.scene.add(this.meshObject);
    this.frameContent();
    setStatus(`${fileName}: ${parsed.triangles.length / 3} triangles`);
  }

  private frameContent(): void {
    const box = new THREE.Box3();
    for (const cloud of this.pointClouds.values()) box.expandByObject(cloud);
    if (this.meshObject) box.expandByObject(this.meshObject);
    if (box.isEmpty()) return;
    const center = box.getCenter(new THREE.Vector3());
    const size = box.getSize(new THREE.Vector3()).length();
    const dist = Math.max(size * 1.4, 80);
    this.controls.target.copy(center);
    this.camera.position.copy(center.clone().add(
      new THREE.Vector3(0.55, 0.4, 1).normalize().multiplyScalar(dist)));
    this.camera.near = dist / 100;
    this.camera.far = dist * 20;
    this.camera.updateProjectionMatrix();
  }

  setFingerVisible(finger: string, visible: boolean): void {
    const cloud = this.pointClouds.get(finger);
    if (cloud) cloud.visible = visible;
  }

  // ---- markers ----------------------------------------------------------

  private pointerRay(ev: PointerEvent | MouseEvent): THREE.Raycaster {
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((ev.clientX - rect.left) / rect.width) * 2 - 1,
      -((ev.clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    this.raycaster.params.Points.threshold = POINT_SIZE_MM * 2;
    return this.raycaster;
  }

  private placeMarkerAt(ev: MouseEvent): void {
    if (!this.volume) {
      setBanner("load a volume before placing markers");
      return;
    }
    const ray = this.pointerRay(ev);
    const visible = [...this.pointClouds.values()].filter((c) => c.visible);
    const hits = ray.intersectObjects(visible, false);
    let at: THREE.Vector3;
    if (hits.length > 0) {
      at = hits[0].point;
    } else {
      // no point under the cursor: drop onto the camera-parallel plane
      // through the current orbit target
      const plane = new THREE.Plane().setFromNormalAndCoplanarPoint(
        this.camera.getWorldDirection(new THREE.Vector3()), this.controls.target);
      const p = new THREE.Vector3();
      if (!ray.ray.intersectPlane(plane, p)) return;
      at = p;
    }
    const radius = Number((el<HTMLInputElement>("marker-radius")).value) || 10;
    const label = (el<HTMLInputElement>("marker-label")).value;
    try {
      const marker = makeMarker(this.markers, `w${this.nextMarkerNum}`,
        [at.x, at.y, at.z], radius, label);
      this.nextMarkerNum += 1;
      this.markers.push(marker);
      this.selectedId = marker.id;
      this.addMarkerMesh(marker);
      this.refreshMarkerPanel();
    } catch (err) {
      setBanner(String(err instanceof Error ? err.message : err));
    }
  }

  private addMarkerMesh(marker: WidgetMarker): void {
    const mesh = new THREE.Mesh(
      new THREE.SphereGeometry(1, 24, 16),
      new THREE.MeshBasicMaterial({ transparent: true, opacity: 0.3, depthWrite: false }),
    );
    mesh.scale.setScalar(marker.radiusMm);
    mesh.position.set(...marker.center);
    this.scene.add(mesh);
    this.markerMeshes.set(marker.id, mesh);
    this.refreshMarker(marker);
  }

  private refreshMarker(marker: WidgetMarker): void {
    const mesh = this.markerMeshes.get(marker.id);
    if (!mesh || !this.volume) return;
    const res = queryReachable(this.volume, marker.center, marker.radiusMm);
    (mesh.material as THREE.MeshBasicMaterial).color.setHex(
      res.reachable ? MARKER_COLOR_OK : MARKER_COLOR_MISS);
    mesh.position.set(...marker.center);
    mesh.scale.setScalar(marker.radiusMm);
  }

  private refreshAllMarkers(): void {
    for (const m of this.markers) this.refreshMarker(m);
    this.refreshMarkerPanel();
  }

  private beginDrag(ev: PointerEvent): void {
    if (ev.button !== 0 || this.markers.length === 0) return;
    const ray = this.pointerRay(ev);
    const meshes = [...this.markerMeshes.entries()];
    const hit = ray.intersectObjects(meshes.map(([, m]) => m), false)[0];
    if (!hit) return;
    const id = meshes.find(([, m]) => m === hit.object)?.[0];
    if (!id) return;
    const marker = this.markers.find((m) => m.id === id)!;
    const plane = new THREE.Plane().setFromNormalAndCoplanarPoint(
      this.camera.getWorldDirection(new THREE.Vector3()),
      new THREE.Vector3(...marker.center));
    this.dragging = { id, plane };
    this.selectedId = id;
    this.controls.enabled = false;
  }

  private moveDrag(ev: PointerEvent): void {
    if (!this.dragging) return;
    const marker = this.markers.find((m) => m.id === this.dragging!.id);
    if (!marker) return;
    const ray = this.pointerRay(ev);
    const p = new THREE.Vector3();
    if (ray.ray.intersectPlane(this.dragging.plane, p)) {
      marker.center = [p.x, p.y, p.z];
      this.refreshMarker(marker); // live readout while dragging
      this.refreshMarkerPanel();
    }
    if (ev.type === "pointerup" || ev.buttons === 0) {
      this.dragging = null;
      this.controls.enabled = true;
    }
  }

  removeMarker(id: string): void {
    this.markers = this.markers.filter((m) => m.id !== id);
    const mesh = this.markerMeshes.get(id);
    if (mesh) this.scene.remove(mesh);
    this.markerMeshes.delete(id);
    if (this.selectedId === id) this.selectedId = null;
    this.refreshMarkerPanel();
  }

  // ---- panels -----------------------------------------------------------

  private refreshFingerToggles(): void {
    const host = el<HTMLDivElement>("finger-toggles");
    host.innerHTML = "";
    if (!this.volume || this.volume.fingers.length === 0) {
      host.textContent = this.volume
        ? "no finger labels in this format" : "";
      return;
    }
    for (const finger of this.volume.fingers) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = true;
      box.addEventListener("change", () =>
        this.setFingerVisible(finger, box.checked));
      label.append(box, ` ${finger}`);
      host.appendChild(label);
    }
  }

  private refreshLegend(): void {
    const legend = el<HTMLDivElement>("legend");
    if (!this.volume) {
      legend.hidden = true;
      return;
    }
    legend.hidden = false;
    el<HTMLSpanElement>("legend-min").textContent = "0.0°";
    el<HTMLSpanElement>("legend-max").textContent =
      `${this.volume.maxCostDeg.toFixed(1)}°`;
  }

  private refreshMarkerPanel(): void {
    const host = el<HTMLDivElement>("marker-list");
    host.innerHTML = "";
    if (!this.volume) return;
    for (const marker of this.markers) {
      const res = queryReachable(this.volume, marker.center, marker.radiusMm);
      const row = document.createElement("div");
      row.className = "marker-row" + (marker.id === this.selectedId ? " selected" : "");
      const title = marker.label ? `${marker.label} (${marker.id})` : marker.id;
      row.innerHTML =
        `<div class="marker-head"><b>${title}</b>` +
        `<button data-id="${marker.id}" title="remove">✕</button></div>` +
        `<div>center (${marker.center.map((c) => c.toFixed(1)).join(", ")}) mm, ` +
        `r ${marker.radiusMm.toFixed(1)} mm</div>` +
        `<div class="${res.reachable ? "ok" : "miss"}">` +
        (res.reachable
          ? `reachable — min cost ${res.minCostDeg!.toFixed(1)}°, ` +
            `${res.fingers.length ? res.fingers.join(", ") : "unlabeled"}, ` +
            `${res.pointsInRange} pts`
          : "unreachable") + `</div>`;
      row.querySelector("button")!.addEventListener("click", (ev) => {
        ev.stopPropagation();
        this.removeMarker(marker.id);
      });
      row.addEventListener("click", () => {
        this.selectedId = marker.id;
        this.refreshMarkerPanel();
      });
      host.appendChild(row);
    }
  }
}

// ---- page wiring ---------------------------------------------------------

function setBanner(message: string | null): void {
  const banner = el<HTMLDivElement>("banner");
  banner.hidden = message === null;
  banner.textContent = message ?? "";
}

function setStatus(message: string): void {
  el<HTMLDivElement>("status").textContent = message;
  setBanner(null);
}

function hookFileInput(id: string, handler: (text: string, name: string) => void): void {
  el<HTMLInputElement>(id).addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    file.text().then((text) => {
      try {
        handler(text, file.name);
      } catch (err) {
        setBanner(err instanceof FormatError
          ? err.message
          : `unexpected error: ${err instanceof Error ? err.message : err}`);
      }
    });
    input.value = ""; // allow re-loading the same file
  });
}

const app = new ViewerApp(el("viewport"));
hookFileInput("volume-input", (text, name) => app.loadVolumeText(text, name));
hookFileInput("mesh-input", (text, name) => app.loadMeshText(text, name));
