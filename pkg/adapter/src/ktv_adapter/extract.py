"""Turn a video (plus optional question text) into a KTVF feature directory.

The output layout is exactly what the core pipeline consumes:

    out_dir/
      bundle.ktvf          cluster_embeddings [T x d_f],
                           relevance_embeddings [T x d_q]
      frame_000000.ktvf    token_features [L x d_t] + attention inputs
      ...
      question.ktvf        question_embedding [d_q]        (optional)

All features for a video are computed and shape-checked before the
first byte is written: an inconsistent extraction writes nothing.
"""

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoders import (
    resolve_frame_encoder,
    resolve_relevance_encoder,
    resolve_vision_tower,
)
from .errors import ConfigError, ShapeError
from .ktvf import write_ktvf
from .video import sample_frames

ATTENTION_VARIANTS = ("qk", "logits")


@dataclass(frozen=True)
class ExtractionConfig:
    video_path: str
    out_dir: str
    fps: float = 3.0
    cluster_encoder: str = "offline/patch-stats"
    relevance_encoder: str = "offline/color-words"
    vision_tower: str = "offline/patch-tokens"
    attention_layer: int = -2
    attention_variant: str = "qk"
    token_grid: int = 8
    device: str = "cpu"
    question: str | None = None

    def __post_init__(self):
        if not self.fps > 0:
            raise ConfigError("fps must be > 0")
        if self.attention_variant not in ATTENTION_VARIANTS:
            raise ConfigError(
                f"attention_variant must be one of {ATTENTION_VARIANTS}"
            )
        if self.token_grid < 1:
            raise ConfigError("token_grid must be >= 1")


def _video_id(path) -> str:
    return Path(path).stem


def extract(config: ExtractionConfig) -> Path:
    """Run the full export; returns the feature directory path."""
    frame_encoder = resolve_frame_encoder(config.cluster_encoder)
    relevance_encoder = resolve_relevance_encoder(config.relevance_encoder)
    tower = resolve_vision_tower(config.vision_tower, grid=config.token_grid)

    frames, native_fps = sample_frames(config.video_path, config.fps)
    video_id = _video_id(config.video_path)

    cluster_embeddings = frame_encoder.embed_frames(frames)
    relevance_embeddings = relevance_encoder.embed_frames(frames)
    token_outputs = [tower.tokenize(frame) for frame in frames]

    T = len(frames)
    if cluster_embeddings.shape != (T, frame_encoder.dim):
        raise ShapeError("cluster embeddings do not match frame count")
    if relevance_embeddings.shape != (T, relevance_encoder.dim):
        raise ShapeError("relevance embeddings do not match frame count")
    for features, query, keys in token_outputs:
        if features.shape != keys.shape or query.shape != (features.shape[1],):
            raise ShapeError("token features / attention inputs disagree")
    if not all(np.all(np.isfinite(f)) for f, _, _ in token_outputs):
        raise ShapeError("non-finite token features")

    out = Path(config.out_dir)
    os.makedirs(out, exist_ok=True)

    common_meta = {
        "source_video": Path(config.video_path).name,
        "native_fps": native_fps,
        "cluster_encoder": config.cluster_encoder,
        "relevance_encoder": config.relevance_encoder,
        "vision_tower": config.vision_tower,
        "attention_layer": config.attention_layer,
        "device": config.device,
    }
    write_ktvf(
        out / "bundle.ktvf",
        video_id,
        [
            ("cluster_embeddings", cluster_embeddings),
            ("relevance_embeddings", relevance_embeddings),
        ],
        {"fps_hint": config.fps, **common_meta},
    )
    for index, (features, query, keys) in enumerate(token_outputs):
        if config.attention_variant == "qk":
            tensors = [
                ("token_features", features),
                ("cls_query", query),
                ("token_keys", keys),
            ]
        else:
            logits = keys @ query / np.sqrt(features.shape[1])
            tensors = [("token_features", features), ("importance_logits", logits)]
        write_ktvf(
            out / f"frame_{index:06d}.ktvf",
            video_id,
            tensors,
            {"frame_index": index, "attention_variant": config.attention_variant},
        )

    if config.question is not None:
        embed_question(
            config.question,
            config.relevance_encoder,
            out / "question.ktvf",
            video_id=video_id,
        )
    return out


def embed_question(text: str, encoder_id: str, out_path, video_id: str = "question"):
    """Embed question text into the relevance space and write question.ktvf."""
    if not text or not text.strip():
        raise ConfigError("question text is empty")
    encoder = resolve_relevance_encoder(encoder_id)
    vector = encoder.embed_text(text)
    write_ktvf(
        out_path,
        video_id,
        [("question_embedding", vector)],
        {"question_text": text, "relevance_encoder": encoder_id},
    )
    return Path(out_path)
