"""Batch dataset generation driven by a JSON manifest.

The manifest lists scene files (or object/grasp label pairs resolved against
a scene directory); each job simulates one scene and writes the requested
export formats to the output directory under the `<object>_grasp<NN>` stem.
Jobs are isolated: one failure never stops the others. Reruns are idempotent:
a job already `done` whose input bytes are unchanged is skipped.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import GravError, ParseError, SchemaError
from .io import EXPORT_FORMATS, load_scene, write_exports
from .simulator import simulate

DEFAULT_FORMATS = ("csv", "ply")


def default_jobs() -> int:
    """Parallelism when no --jobs flag is given: $GRAVKIT_JOBS, else 1."""
    env = os.environ.get("GRAVKIT_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SchemaError(f"GRAVKIT_JOBS must be an integer, got {env!r}") from None
        if n < 1:
            raise SchemaError(f"GRAVKIT_JOBS must be >= 1, got {n}")
        return n
    return 1


@dataclass
class _Job:
    index: int
    scene_path: Path
    stem: str
    entry: Dict


def _sha256_file(path: Path) -> bytes:
    return hashlib.sha256(path.read_bytes()).digest()


def input_digest(scene_path: Path) -> str:
    """sha256 over the scene file bytes and the referenced mesh bytes."""
    h = hashlib.sha256()
    raw = scene_path.read_bytes()
    h.update(raw)
    try:
        doc = json.loads(raw.decode("utf-8"))
        mesh_rel = (doc.get("object") or {}).get("mesh_path")
    except (UnicodeDecodeError, json.JSONDecodeError):
        mesh_rel = None
    if isinstance(mesh_rel, str) and mesh_rel:
        mesh_path = (scene_path.parent / mesh_rel).resolve()
        if mesh_path.is_file():
            h.update(b"\x00")
            h.update(mesh_path.read_bytes())
    return h.hexdigest()


def _peek_stem(scene_path: Path) -> str:
    """Output stem from the scene labels without running full validation."""
    try:
        doc = json.loads(scene_path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError):
        return f"{scene_path.stem}_grasp00"
    labels = doc.get("labels") if isinstance(doc, dict) else None
    labels = labels if isinstance(labels, dict) else {}
    name = labels.get("object_name") or scene_path.stem
    gid = labels.get("grasp_id")
    gid = gid if isinstance(gid, int) and not isinstance(gid, bool) else 0
    return f"{name}_grasp{gid:02d}"


def load_manifest(path) -> Dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path.name}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("jobs"), list):
        raise SchemaError(f"{path.name}: manifest must be an object with a 'jobs' array")
    formats = doc.get("formats", list(DEFAULT_FORMATS))
    if (not isinstance(formats, list) or not formats
            or any(f not in EXPORT_FORMATS for f in formats)):
        raise SchemaError(f"{path.name}: formats must be a non-empty subset of "
                          f"{list(EXPORT_FORMATS)}")
    if not isinstance(doc.get("out_dir", "out"), str):
        raise SchemaError(f"{path.name}: out_dir must be a string")
    return doc


def _resolve_jobs(doc: Dict, manifest_path: Path) -> List[_Job]:
    scene_dir = doc.get("scene_dir", ".")
    jobs: List[_Job] = []
    stems = set()
    for i, entry in enumerate(doc["jobs"]):
        if not isinstance(entry, dict):
            raise SchemaError(f"jobs[{i}] must be an object")
        if "scene" in entry:
            scene_path = (manifest_path.parent / entry["scene"]).resolve()
        elif "object" in entry and "grasp_id" in entry:
            name = f"{entry['object']}_grasp{int(entry['grasp_id']):02d}.json"
            scene_path = (manifest_path.parent / scene_dir / name).resolve()
        else:
            raise SchemaError(f"jobs[{i}] needs 'scene' or 'object'+'grasp_id'")
        stem = _peek_stem(scene_path) if scene_path.is_file() else scene_path.stem
        if stem in stems:
            raise SchemaError(f"jobs[{i}]: duplicate output label {stem!r}")
        stems.add(stem)
        jobs.append(_Job(index=i, scene_path=scene_path, stem=stem, entry=entry))
    return jobs


def _write_manifest(path: Path, doc: Dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    tmp.replace(path)


def _run_one(scene_path_str: str, out_dir_str: str, stem: str,
             formats: Sequence[str]) -> Dict:
    """Worker body: simulate one scene and write its exports."""
    try:
        scene = load_scene(scene_path_str)
        if scene.output_stem != stem:
            return {"status": "failed",
                    "reason": f"SchemaError: scene labels produce stem "
                              f"{scene.output_stem!r}, manifest expects {stem!r}"}
        volume = simulate(scene)
        enabled = [f.value for f in scene.settings.fingers]
        if volume.metadata.get("seed_failures") == enabled:
            return {"status": "failed",
                    "reason": "InvalidSeed: every enabled finger has an invalid seed"}
        written = write_exports(volume, out_dir_str, stem, formats)
        outputs = {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in written}
        return {"status": "done", "outputs": outputs,
                "points": len(volume.points),
                "warnings": volume.metadata.get("warnings", [])}
    except GravError as exc:
        return {"status": "failed", "reason": f"{type(exc).__name__}: {exc}"}
    except Exception as exc:  # defensive: a crash must not look like success
        return {"status": "failed", "reason": f"{type(exc).__name__}: {exc}"}


def run_batch(manifest_path, jobs: Optional[int] = None, echo=print) -> int:
    """Execute a manifest; returns the process exit code (0 = all jobs good).

    Job statuses move pending -> done|failed and are persisted back to the
    manifest after every completion; `done` jobs with unchanged input hashes
    are skipped on rerun, failed jobs are retried.
    """
    manifest_path = Path(manifest_path)
    doc = load_manifest(manifest_path)
    n_workers = jobs if jobs is not None else default_jobs()
    if n_workers < 1:
        raise SchemaError(f"jobs must be >= 1, got {n_workers}")
    out_dir = (manifest_path.parent / doc.get("out_dir", "out")).resolve()
    formats = doc.get("formats", list(DEFAULT_FORMATS))
    resolved = _resolve_jobs(doc, manifest_path)

    to_run: List[Tuple[_Job, str]] = []
    skipped = 0
    for job in resolved:
        entry = job.entry
        if not job.scene_path.is_file():
            entry["status"] = "failed"
            entry["reason"] = f"ParseError: scene file not found: {job.scene_path}"
            echo(f"job {job.stem}: failed ({entry['reason']})")
            continue
        digest = input_digest(job.scene_path)
        if entry.get("status") == "done" and entry.get("inputs_sha256") == digest:
            skipped += 1
            echo(f"job {job.stem}: skipped (done, inputs unchanged)")
            continue
        entry["status"] = "pending"
        entry.pop("reason", None)
        to_run.append((job, digest))

    def finish(job: _Job, digest: str, result: Dict) -> None:
        entry = job.entry
        entry["status"] = result["status"]
        entry["inputs_sha256"] = digest
        if result["status"] == "done":
            entry["outputs"] = result["outputs"]
            entry.pop("reason", None)
            echo(f"job {job.stem}: done ({result['points']} points, "
                 f"{len(result['outputs'])} files)")
            for w in result.get("warnings", []):
                echo(f"job {job.stem}: warning: {w}")
        else:
            entry["reason"] = result["reason"]
            entry.pop("outputs", None)
            echo(f"job {job.stem}: failed ({result['reason']})")
        _write_manifest(manifest_path, doc)

    if n_workers == 1 or len(to_run) <= 1:
        for job, digest in to_run:
            finish(job, digest, _run_one(str(job.scene_path), str(out_dir), job.stem,
                                         formats))
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = {pool.submit(_run_one, str(job.scene_path), str(out_dir),
                                   job.stem, formats): (job, digest)
                       for job, digest in to_run}
            pending = set(futures)
            while pending:
                finished, pending = wait(pending, return_when=FIRST_COMPLETED)
                for fut in finished:
                    job, digest = futures[fut]
                    finish(job, digest, fut.result())

    _write_manifest(manifest_path, doc)
    statuses = [j.entry.get("status") for j in resolved]
    n_done = sum(1 for s in statuses if s == "done")
    n_failed = sum(1 for s in statuses if s == "failed")
    echo(f"summary: {n_done} done, {n_failed} failed, {skipped} skipped, "
         f"{len(to_run)} executed")
    return 1 if n_failed else 0
