"""End-to-end orchestration: files in, pruning plan out.

``run_pipeline`` reads a features directory (``bundle.ktvf`` plus one
``frame_{index:06d}.ktvf`` per frame), selects keyframes, scores only the
selected frames' tokens (the other frame files are never opened), ranks
keyframes against the question embedding when one is supplied, resolves
budgets, and emits a result document.

The result document serializes to canonical JSON — fixed key order, floats
printed with 9 significant digits — so determinism is testable byte for
byte. Stage timings go to a separate ``<output>.timings.json`` sidecar and
never into the document itself.
"""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .budget import PRESETS, BudgetSchedule, build_plan, relevance_ranking
from .clustering import kmeans, select_from_model
from .container import (
    read_bundle,
    read_question,
    read_token_frame,
    token_frame_filename,
    write_bundle,
    write_question,
    write_token_frame,
)
from .errors import InternalError, MissingInputError, ValidationError
from .scoring import score_tokens
from .synthetic import SyntheticSpec, SyntheticVideo


@dataclass(frozen=True)
class PipelineConfig:
    features_dir: str
    question_embedding_path: str | None = None
    m: int = 6
    alpha: float = 0.8
    schedule: BudgetSchedule | str = "normal"
    seed: int = 0
    max_iterations: int = 100
    tolerance: float = 1e-4
    workers: int | None = None
    output_path: str | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("bad_value", "m must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("bad_value", f"alpha must be in [0, 1], got {self.alpha}")
        if isinstance(self.schedule, str):
            if self.schedule not in PRESETS:
                raise ValidationError(
                    "bad_value",
                    f"unknown preset {self.schedule!r}; expected one of {sorted(PRESETS)}",
                )
        elif not isinstance(self.schedule, BudgetSchedule):
            raise ValidationError("bad_value", "schedule must be a preset name or BudgetSchedule")
        if self.max_iterations < 1:
            raise ValidationError("bad_value", "max_iterations must be >= 1")
        if not self.tolerance >= 0:
            raise ValidationError("bad_value", "tolerance must be >= 0")
        if self.workers is not None and self.workers < 1:
            raise ValidationError("bad_value", "workers must be >= 1")

    def resolved_schedule(self) -> BudgetSchedule:
        if isinstance(self.schedule, str):
            return BudgetSchedule.preset(self.schedule)
        return self.schedule


@dataclass(frozen=True)
class ResultDocument:
    """Pipeline output: ``document`` is a dict with a fixed, documented key
    order; ``timings_ms`` holds per-stage wall-clock milliseconds."""

    document: dict
    timings_ms: dict

    def to_json(self) -> str:
        return canonical_json(self.document)


def canonical_json(value) -> str:
    """Deterministic JSON: dict insertion order kept, floats with 9
    significant digits, no whitespace."""
    parts: list[str] = []
    _write_json(value, parts)
    return "".join(parts)


def _write_json(value, parts: list[str]) -> None:
    import json

    if value is None:
        parts.append("null")
    elif value is True:
        parts.append("true")
    elif value is False:
        parts.append("false")
    elif isinstance(value, str):
        parts.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (int, np.integer)):
        parts.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        v = float(value)
        if not np.isfinite(v):
            raise InternalError("non-finite value in result document")
        parts.append(format(v, ".9g"))
    elif isinstance(value, dict):
        parts.append("{")
        for i, (key, item) in enumerate(value.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(":")
            _write_json(item, parts)
        parts.append("}")
    elif isinstance(value, (list, tuple, np.ndarray)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _write_json(item, parts)
        parts.append("]")
    else:
        raise InternalError(f"cannot serialize {type(value).__name__}")


def _atomic_write(path: str, data: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


class _CountingLoader:
    """Opens token files on demand and counts how many were touched."""

    def __init__(self, features_dir: Path):
        self._dir = features_dir
        self._lock = threading.Lock()
        self.opened = 0

    def load(self, frame_index: int):
        path = self._dir / token_frame_filename(frame_index)
        if not path.is_file():
            raise MissingInputError(
                f"token file for frame {frame_index} not found: {path}"
            )
        with self._lock:
            self.opened += 1
        record = read_token_frame(path)
        if record.frame_index != frame_index:
            raise ValidationError(
                "bad_value",
                f"{path} declares frame_index {record.frame_index}, "
                f"expected {frame_index}",
            )
        return record


def _schedule_echo(schedule: BudgetSchedule) -> dict:
    return {
        "preset": schedule.preset_name,
        "mode": schedule.mode,
        "values": list(schedule.values),
    }


def run_pipeline(config: PipelineConfig) -> ResultDocument:
    """Run both stages over a features directory.

    Output is byte-identical for identical inputs and config, independent
    of the worker-pool size. When ``config.output_path`` is set, the
    document is written atomically (never a partial file) and timings go
    to ``<output_path>.timings.json``.
    """
    timings: dict[str, float] = {}
    features_dir = Path(config.features_dir)
    bundle_path = features_dir / "bundle.ktvf"
    if not bundle_path.is_file():
        raise MissingInputError(f"bundle not found: {bundle_path}")

    t0 = time.perf_counter()
    bundle = read_bundle(bundle_path)
    question = None
    if config.question_embedding_path is not None:
        qpath = Path(config.question_embedding_path)
        if not qpath.is_file():
            raise MissingInputError(f"question embedding not found: {qpath}")
        question = read_question(qpath)
        if bundle.relevance_embeddings is None:
            raise ValidationError(
                "bad_value",
                "a question was supplied but the bundle has no relevance_embeddings",
            )
    timings["read_inputs_ms"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    model = kmeans(
        bundle.cluster_embeddings, config.m, seed=config.seed,
        max_iterations=config.max_iterations, tolerance=config.tolerance,
    )
    selection = select_from_model(model, bundle.cluster_embeddings)
    timings["select_keyframes_ms"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    loader = _CountingLoader(features_dir)

    def load_and_score(frame_index: int):
        record = loader.load(int(frame_index))
        return record, score_tokens(record, config.alpha)

    workers = config.workers if config.workers is not None else (os.cpu_count() or 1)
    indices = [int(i) for i in selection.keyframe_indices]
    if workers == 1:
        scored = [load_and_score(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(load_and_score, indices))
    records = [r for r, _ in scored]
    scores = [s for _, s in scored]
    token_counts = {r.token_count for r in records}
    if len(token_counts) > 1:
        raise ValidationError(
            "bad_value",
            f"keyframe token files disagree on token count: {sorted(token_counts)}",
        )
    tokens_per_frame = token_counts.pop()
    timings["score_tokens_ms"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    ranking = None
    if question is not None:
        ranking = relevance_ranking(
            bundle.relevance_embeddings[selection.keyframe_indices], question
        )
    plan = build_plan(
        selection, scores, ranking, config.resolved_schedule(), tokens_per_frame
    )
    timings["build_plan_ms"] = (time.perf_counter() - t0) * 1e3

    document = _build_document(
        config, bundle, model, selection, plan, ranking, scores,
        tokens_per_frame, loader.opened,
    )
    result = ResultDocument(document=document, timings_ms=timings)
    if config.output_path is not None:
        t0 = time.perf_counter()
        _atomic_write(config.output_path, result.to_json().encode("utf-8"))
        timings["write_ms"] = (time.perf_counter() - t0) * 1e3
        sidecar = canonical_json({k: round(v, 3) for k, v in timings.items()})
        _atomic_write(f"{config.output_path}.timings.json", sidecar.encode("utf-8"))
    return result


def _build_document(
    config: PipelineConfig,
    bundle,
    model,
    selection,
    plan,
    ranking,
    scores,
    tokens_per_frame: int,
    token_files_opened: int,
) -> dict:
    keyframes = []
    for pos, entry in enumerate(plan.entries):
        similarity = None
        if ranking is not None:
            similarity = float(ranking.similarity[pos])
        retained = entry.retained_token_indices
        keyframes.append(
            {
                "frame_index": entry.frame_index,
                "cluster": entry.cluster,
                "relevance_similarity": similarity,
                "relevance_rank": entry.relevance_rank,
                "budget": entry.budget,
                "retained_token_indices": [int(i) for i in retained],
                "retained_importance": [float(v) for v in scores[pos].importance[retained]],
                "retained_redundancy": [float(v) for v in scores[pos].redundancy[retained]],
                "retained_combined": [float(v) for v in scores[pos].combined[retained]],
            }
        )
    document = {
        "video_id": bundle.video_id,
        "config": {
            "features_dir": str(config.features_dir),
            "question_embedding_path": (
                None
                if config.question_embedding_path is None
                else str(config.question_embedding_path)
            ),
            "m": config.m,
            "alpha": float(config.alpha),
            "schedule": _schedule_echo(config.resolved_schedule()),
            "seed": config.seed,
            "max_iterations": config.max_iterations,
            "tolerance": float(config.tolerance),
        },
        "frame_count": bundle.frame_count,
        "keyframes": keyframes,
        "summary": {
            "effective_m": selection.effective_m,
            "tokens_per_frame": tokens_per_frame,
            "total_retained": plan.total_retained,
            "kmeans_iterations": model.iterations_run,
            "kmeans_converged": model.converged,
            "kmeans_sse": float(model.sse),
            "token_files_opened": token_files_opened,
        },
    }
    return document


def generate_fixture(spec: SyntheticSpec, out_dir) -> None:
    """Write a complete synthetic features directory: bundle, one token
    file per frame, question embedding, and a ground-truth sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    video = SyntheticVideo(spec)
    write_bundle(video.bundle, out / "bundle.ktvf")
    for i in range(spec.frame_count):
        write_token_frame(video.token_frame(i), out / token_frame_filename(i))
    write_question(video.question, out / "question.ktvf")
    truth = {
        "video_id": video.bundle.video_id,
        "spec": {
            "frame_count": spec.frame_count,
            "cluster_count": spec.cluster_count,
            "blob_separation": float(spec.blob_separation),
            "token_count": spec.token_count,
            "token_dim": spec.token_dim,
            "frame_dim": spec.frame_dim,
            "relevance_dim": spec.relevance_dim,
            "planted_salient_tokens": spec.planted_salient_tokens,
            "seed": spec.seed,
        },
        "frame_labels": [int(v) for v in video.truth.frame_labels],
        "salient_tokens": [list(s) for s in video.truth.salient_tokens],
        "question_blob": video.truth.question_blob,
    }
    _atomic_write(str(out / "ground_truth.json"), canonical_json(truth).encode("utf-8"))


def visualize(result, grid_rows: int, grid_cols: int, out_dir) -> None:
    """One binary PGM (P5) mask per keyframe: retained token cells 255,
    pruned cells 64, tokens mapped row-major onto the grid."""
    document = result.document if isinstance(result, ResultDocument) else result
    if grid_rows < 1 or grid_cols < 1:
        raise ValidationError("bad_value", "grid dimensions must be >= 1")
    tokens_per_frame = document["summary"]["tokens_per_frame"]
    if grid_rows * grid_cols != tokens_per_frame:
        raise ValidationError(
            "bad_value",
            f"grid mismatch: {grid_rows}x{grid_cols} != {tokens_per_frame} tokens",
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for entry in document["keyframes"]:
        cells = np.full(tokens_per_frame, 64, dtype=np.uint8)
        cells[np.asarray(entry["retained_token_indices"], dtype=np.int64)] = 255
        header = f"P5\n{grid_cols} {grid_rows}\n255\n".encode("ascii")
        name = f"mask_frame_{entry['frame_index']:06d}.pgm"
        _atomic_write(str(out / name), header + cells.tobytes())
