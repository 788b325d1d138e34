"""Per-token scores within one keyframe.

importance  softmax over the frame's CLS-attention logits; when the file
            carries (cls_query, token_keys) instead of logits, the logit of
            token j is dot(cls_query, keys[j]) / sqrt(d_t)
redundancy  mean cosine similarity of each token to the frame's other
            tokens, computed in O(L*d) via sum_{k!=j} cos = u_j . s - 1
            with u the unit-normalized tokens and s = sum_k u_k
combined    minmax-normalize both, then alpha * imp + (1 - alpha) * (1 - red)

All arithmetic in float64, reductions in ascending token order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .container import TokenFrameRecord
from .errors import ValidationError


@dataclass(frozen=True)
class TokenScores:
    importance: np.ndarray
    redundancy: np.ndarray
    importance_norm: np.ndarray
    redundancy_norm: np.ndarray
    combined: np.ndarray
    alpha: float

    @property
    def token_count(self) -> int:
        return self.combined.shape[0]


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def importance_scores(record: TokenFrameRecord) -> np.ndarray:
    """Softmax CLS-attention weight per token."""
    if record.importance_logits is not None:
        logits = record.importance_logits.astype(np.float64)
    else:
        keys = record.token_keys.astype(np.float64)
        query = record.cls_query.astype(np.float64)
        # einsum keeps the reduction single-threaded and order-fixed
        logits = np.einsum("ij,j->i", keys, query) / np.sqrt(keys.shape[1])
    return _softmax(logits)


def redundancy_scores(token_features) -> np.ndarray:
    """Mean cosine similarity of each token to every other token."""
    feats = np.asarray(token_features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] < 1:
        raise ValidationError("bad_shape", "token_features must be [L x d]")
    if not np.all(np.isfinite(feats)):
        raise ValidationError("non_finite", "non-finite value in token_features")
    L = feats.shape[0]
    norms = np.sqrt(np.einsum("ij,ij->i", feats, feats))
    if np.any(norms == 0.0):
        j = int(np.flatnonzero(norms == 0.0)[0])
        raise ValidationError("zero_norm", f"zero-norm token at index {j}")
    if L == 1:
        return np.zeros(1)
    unit = feats / norms[:, None]
    total = unit.sum(axis=0)
    mean_sim = (np.einsum("ij,j->i", unit, total) - 1.0) / (L - 1)
    return np.clip(mean_sim, -1.0, 1.0)


def minmax_normalize(values) -> np.ndarray:
    """(v - min) / (max - min); a constant vector maps to all 0.5."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValidationError("bad_shape", "values must be a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise ValidationError("non_finite", "non-finite value in values")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(v.shape[0], 0.5)
    return (v - lo) / (hi - lo)


def combined_scores(importance, redundancy, alpha: float) -> np.ndarray:
    imp = np.asarray(importance, dtype=np.float64)
    red = np.asarray(redundancy, dtype=np.float64)
    if imp.shape != red.shape:
        raise ValidationError(
            "bad_shape",
            f"length mismatch: importance {imp.shape} vs redundancy {red.shape}",
        )
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("bad_value", f"alpha must be in [0, 1], got {alpha}")
    return minmax_normalize(imp) * alpha + (1.0 - minmax_normalize(red)) * (1.0 - alpha)


def score_tokens(record: TokenFrameRecord, alpha: float) -> TokenScores:
    """Full score set for one frame; intermediates kept for auditability."""
    importance = importance_scores(record)
    redundancy = redundancy_scores(record.token_features)
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("bad_value", f"alpha must be in [0, 1], got {alpha}")
    importance_norm = minmax_normalize(importance)
    redundancy_norm = minmax_normalize(redundancy)
    combined = importance_norm * alpha + (1.0 - redundancy_norm) * (1.0 - alpha)
    return TokenScores(
        importance=importance,
        redundancy=redundancy,
        importance_norm=importance_norm,
        redundancy_norm=redundancy_norm,
        combined=combined,
        alpha=float(alpha),
    )
