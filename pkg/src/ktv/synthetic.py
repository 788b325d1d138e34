"""Seeded synthetic feature generator used by tests and demos.

Frame embeddings are planted Gaussian blobs; token matrices get a handful
of "salient" tokens per frame (boosted attention logits, mutually distinct
directions) on top of a redundant background (all background tokens share
one near-common direction). The planted structure is returned alongside
the data so tests can score recovery exactly.

All randomness comes from :class:`ktv.rng.CounterRng` streams keyed off
``spec.seed``, so outputs are bit-identical across runs and platforms, and
each frame's token matrix can be regenerated on its own without touching
the others (per-frame streams).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .container import FeatureBundle, QuestionEmbedding, TokenFrameRecord
from .errors import ValidationError
from .rng import CounterRng

# stream ids; per-frame streams are (tag << 32) | frame_index
_S_CENTERS = 1
_S_FRAME_NOISE = 2
_S_REL_DIRS = 3
_S_REL_NOISE = 4
_S_QUESTION = 5
_S_TOKEN_NOISE = 6
_S_SALIENT_PICK = 7
_S_LOGITS = 8
_S_BACKGROUND_DIR = 9
_S_SALIENT_DIRS = 10

_BLOB_SIGMA = 1.0
_SALIENT_LOGIT_BOOST = 6.0
_LOGIT_JITTER = 0.25


@dataclass(frozen=True)
class SyntheticSpec:
    frame_count: int
    cluster_count: int = 3
    blob_separation: float = 50.0
    token_count: int = 64
    token_dim: int = 16
    frame_dim: int = 32
    relevance_dim: int = 16
    planted_salient_tokens: int = 8
    seed: int = 0

    def __post_init__(self):
        counts = {
            "frame_count": self.frame_count,
            "cluster_count": self.cluster_count,
            "token_count": self.token_count,
            "token_dim": self.token_dim,
            "frame_dim": self.frame_dim,
            "relevance_dim": self.relevance_dim,
            "planted_salient_tokens": self.planted_salient_tokens,
        }
        for name, value in counts.items():
            if not isinstance(value, int) or value < 1:
                raise ValidationError("bad_value", f"{name} must be an integer >= 1")
        if self.planted_salient_tokens > self.token_count:
            raise ValidationError(
                "bad_value",
                "planted_salient_tokens exceeds token_count "
                f"({self.planted_salient_tokens} > {self.token_count})",
            )
        if self.cluster_count > self.frame_count:
            raise ValidationError(
                "bad_value",
                "cluster_count exceeds frame_count "
                f"({self.cluster_count} > {self.frame_count})",
            )
        if not np.isfinite(self.blob_separation) or self.blob_separation < 0:
            raise ValidationError("bad_value", "blob_separation must be >= 0")
        if self.seed < 0:
            raise ValidationError("bad_value", "seed must be non-negative")


@dataclass(frozen=True)
class SyntheticTruth:
    """Planted structure: blob label per frame, salient-token set per frame,
    and which blob the question embedding points at."""

    frame_labels: np.ndarray
    salient_tokens: tuple[tuple[int, ...], ...]
    question_blob: int


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _blob_centers(spec: SyntheticSpec) -> np.ndarray:
    """cluster_count points whose minimum pairwise distance equals
    blob_separation * sigma."""
    rng = CounterRng(spec.seed, _S_CENTERS)
    raw = rng.normals(spec.cluster_count * spec.frame_dim).reshape(
        spec.cluster_count, spec.frame_dim
    )
    if spec.cluster_count == 1:
        return raw
    diffs = raw[:, None, :] - raw[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=2))
    min_dist = dist[np.triu_indices(spec.cluster_count, k=1)].min()
    if min_dist == 0.0:
        # astronomically unlikely with continuous draws, but keep it defined
        raise ValidationError("bad_value", "degenerate center draw; change seed")
    return raw * (spec.blob_separation * _BLOB_SIGMA / min_dist)


def _frame_labels(frame_count: int, cluster_count: int) -> np.ndarray:
    # contiguous, as-equal-as-possible blocks: frame i -> (i*k) // T
    idx = np.arange(frame_count, dtype=np.int64)
    return (idx * cluster_count) // frame_count


class SyntheticVideo:
    """Lazy view over one synthetic video.

    The frame-level bundle, question, and ground truth are precomputed;
    token matrices are generated per frame on demand, so a 10800-frame
    fixture never holds 10800 token matrices at once.
    """

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec
        centers = _blob_centers(spec)
        labels = _frame_labels(spec.frame_count, spec.cluster_count)

        noise = CounterRng(spec.seed, _S_FRAME_NOISE).normals(
            spec.frame_count * spec.frame_dim
        )
        cluster_embeddings = centers[labels] + _BLOB_SIGMA * noise.reshape(
            spec.frame_count, spec.frame_dim
        )

        rel_dirs = _unit_rows(
            CounterRng(spec.seed, _S_REL_DIRS)
            .normals(spec.cluster_count * spec.relevance_dim)
            .reshape(spec.cluster_count, spec.relevance_dim)
        )
        rel_noise = CounterRng(spec.seed, _S_REL_NOISE).normals(
            spec.frame_count * spec.relevance_dim
        )
        relevance_embeddings = rel_dirs[labels] + 0.1 * rel_noise.reshape(
            spec.frame_count, spec.relevance_dim
        )

        self.bundle = FeatureBundle(
            video_id=f"synthetic-{spec.seed}",
            cluster_embeddings=cluster_embeddings,
            relevance_embeddings=relevance_embeddings,
        )

        q_noise = CounterRng(spec.seed, _S_QUESTION).normals(spec.relevance_dim)
        self.question = QuestionEmbedding(
            vector=rel_dirs[0] + 0.05 * q_noise,
            question_text=f"synthetic question about blob 0 (seed {spec.seed})",
        )

        salient = tuple(
            tuple(
                sorted(
                    CounterRng(
                        spec.seed, (_S_SALIENT_PICK << 32) | i
                    ).sample_without_replacement(
                        spec.token_count, spec.planted_salient_tokens
                    )
                )
            )
            for i in range(spec.frame_count)
        )
        self.truth = SyntheticTruth(
            frame_labels=labels, salient_tokens=salient, question_blob=0
        )

    def token_frame(self, index: int) -> TokenFrameRecord:
        spec = self.spec
        if not 0 <= index < spec.frame_count:
            raise ValidationError("bad_value", f"frame index {index} out of range")
        L, d = spec.token_count, spec.token_dim
        salient = self.truth.salient_tokens[index]

        background = _unit_rows(
            CounterRng(spec.seed, (_S_BACKGROUND_DIR << 32) | index)
            .normals(d)
            .reshape(1, d)
        )
        features = np.repeat(background, L, axis=0)
        if salient:
            features[list(salient)] = _unit_rows(
                CounterRng(spec.seed, (_S_SALIENT_DIRS << 32) | index)
                .normals(len(salient) * d)
                .reshape(len(salient), d)
            )
        features += 0.05 * (
            CounterRng(spec.seed, (_S_TOKEN_NOISE << 32) | index)
            .normals(L * d)
            .reshape(L, d)
        )

        logits = _LOGIT_JITTER * CounterRng(spec.seed, (_S_LOGITS << 32) | index).normals(L)
        logits[list(salient)] += _SALIENT_LOGIT_BOOST

        return TokenFrameRecord(
            frame_index=index, token_features=features, importance_logits=logits
        )

    @property
    def token_frames(self) -> Sequence[TokenFrameRecord]:
        return _FrameSequence(self)


class _FrameSequence(Sequence):
    def __init__(self, video: SyntheticVideo):
        self._video = video

    def __len__(self) -> int:
        return self._video.spec.frame_count

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        return self._video.token_frame(index)


def generate_synthetic(
    spec: SyntheticSpec,
) -> tuple[FeatureBundle, Sequence[TokenFrameRecord], QuestionEmbedding, SyntheticTruth]:
    """Planted-structure synthetic video; deterministic for a fixed spec."""
    video = SyntheticVideo(spec)
    return video.bundle, video.token_frames, video.question, video.truth
