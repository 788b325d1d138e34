"""Relevance ranking, budget resolution, and per-frame top-k retention.

Keyframes are ranked by cosine similarity to the question embedding
(rank 0 = most relevant, ties to the earlier frame). A descending schedule
— integer counts or fractions of the frame's token count — is resolved
into one integer budget per rank; each keyframe then keeps its
highest-combined-score tokens, reported in spatial (ascending index)
order.

Presets ``sparse`` / ``normal`` / ``dense`` are descending count schedules
for six keyframes totalling 504, 936, and 1872 tokens. The totals are the
contract; the per-rank split is this artifact's default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import QuestionEmbedding
from .errors import InternalError, ValidationError

PRESETS: dict[str, list[int]] = {
    "sparse": [144, 108, 84, 72, 60, 36],
    "normal": [216, 180, 162, 144, 126, 108],
    "dense": [432, 360, 324, 288, 252, 216],
}


@dataclass(frozen=True)
class BudgetSchedule:
    """Descending per-rank token quotas.

    ``mode`` is ``"counts"`` (integer budgets, used as-is) or
    ``"fractions"`` (each entry is the fraction of the frame's tokens kept
    at that rank).
    """

    mode: str
    values: tuple = ()
    preset_name: str | None = None

    def __post_init__(self):
        if self.mode not in ("counts", "fractions"):
            raise ValidationError("bad_value", f"unknown schedule mode {self.mode!r}")
        if self.preset_name is not None and self.preset_name not in (
            "sparse", "normal", "dense", "custom",
        ):
            raise ValidationError(
                "bad_value", f"unknown preset name {self.preset_name!r}"
            )
        values = tuple(self.values)
        if len(values) < 1:
            raise ValidationError("bad_value", "schedule must not be empty")
        if self.mode == "counts":
            for v in values:
                if not isinstance(v, (int, np.integer)) or v < 1:
                    raise ValidationError(
                        "bad_value", f"count schedule entries must be integers >= 1, got {v!r}"
                    )
            values = tuple(int(v) for v in values)
        else:
            for v in values:
                if not (isinstance(v, (int, float, np.floating)) and 0.0 < float(v) <= 1.0):
                    raise ValidationError(
                        "bad_value", f"fraction schedule entries must lie in (0, 1], got {v!r}"
                    )
            values = tuple(float(v) for v in values)
        if any(values[i] < values[i + 1] for i in range(len(values) - 1)):
            raise ValidationError("bad_value", "schedule values must be non-increasing")
        object.__setattr__(self, "values", values)

    @classmethod
    def preset(cls, name: str) -> "BudgetSchedule":
        if name not in PRESETS:
            raise ValidationError(
                "bad_value",
                f"unknown preset {name!r}; expected one of {sorted(PRESETS)}",
            )
        return cls(mode="counts", values=tuple(PRESETS[name]), preset_name=name)


@dataclass(frozen=True)
class RelevanceRanking:
    similarity: np.ndarray  # [m'] cosine to the question
    rank_of_keyframe: np.ndarray  # [m'] 0 = most relevant


@dataclass(frozen=True)
class PlanEntry:
    frame_index: int
    cluster: int
    relevance_rank: int
    budget: int
    retained_token_indices: np.ndarray  # [k] ascending
    retained_scores: np.ndarray  # [k] combined score per retained token


@dataclass(frozen=True)
class PruningPlan:
    entries: tuple[PlanEntry, ...] = field(default_factory=tuple)

    @property
    def total_retained(self) -> int:
        return sum(e.budget for e in self.entries)


def relevance_ranking(
    keyframe_relevance_embeddings, question: QuestionEmbedding
) -> RelevanceRanking:
    """Cosine similarity per keyframe; descending rank, ties to the
    earlier keyframe."""
    embs = np.asarray(keyframe_relevance_embeddings, dtype=np.float64)
    if embs.ndim != 2 or embs.shape[0] < 1:
        raise ValidationError("bad_shape", "embeddings must be [m' x d_q]")
    if not np.all(np.isfinite(embs)):
        raise ValidationError("non_finite", "non-finite value in embeddings")
    qvec = question.vector.astype(np.float64)
    if embs.shape[1] != qvec.shape[0]:
        raise ValidationError(
            "bad_shape",
            f"dimension mismatch: embeddings are {embs.shape[1]}-dim, "
            f"question is {qvec.shape[0]}-dim",
        )
    norms = np.sqrt(np.einsum("ij,ij->i", embs, embs))
    if np.any(norms == 0.0):
        j = int(np.flatnonzero(norms == 0.0)[0])
        raise ValidationError("zero_norm", f"zero-norm embedding at keyframe {j}")
    qnorm = float(np.sqrt(qvec @ qvec))
    if qnorm == 0.0:
        raise ValidationError("zero_norm", "zero-norm question embedding")
    similarity = np.clip(np.einsum("ij,j->i", embs, qvec) / (norms * qnorm), -1.0, 1.0)
    # stable sort on the negated scores: equal similarity -> earlier frame
    order = np.argsort(-similarity, kind="stable")
    rank = np.empty(similarity.shape[0], dtype=np.int64)
    rank[order] = np.arange(similarity.shape[0])
    return RelevanceRanking(similarity=similarity, rank_of_keyframe=rank)


def resolve_budgets(schedule: BudgetSchedule, tokens_per_frame: int, m_prime: int) -> np.ndarray:
    """Integer budget per relevance rank.

    Count schedules are used directly, clamped to [1, L]. Fraction
    schedules are apportioned by largest remainder: floor every raw
    ``fraction * L``, then hand the remaining round(sum raw) - sum(floor)
    tokens one each to the largest fractional parts (ties to the more
    relevant rank). Schedules longer than ``m_prime`` are truncated; the
    result is always non-increasing in rank.
    """
    if tokens_per_frame < 1:
        raise ValidationError("bad_value", "tokens_per_frame must be >= 1")
    if m_prime < 1:
        raise ValidationError("bad_value", "m_prime must be >= 1")
    if len(schedule.values) < m_prime:
        raise ValidationError(
            "bad_value",
            f"schedule has {len(schedule.values)} entries but {m_prime} keyframes need budgets",
        )
    values = schedule.values[:m_prime]
    L = tokens_per_frame
    if schedule.mode == "counts":
        budgets = np.array([min(max(v, 1), L) for v in values], dtype=np.int64)
    else:
        raw = np.array(values, dtype=np.float64) * L
        floors = np.floor(raw)
        # half-up rounding of the total, then largest-remainder distribution
        target = int(np.floor(raw.sum() + 0.5))
        leftover = target - int(floors.sum())
        fractional = raw - floors
        budgets = floors.astype(np.int64)
        if leftover > 0:
            recipients = np.argsort(-fractional, kind="stable")[:leftover]
            budgets[recipients] += 1
        np.clip(budgets, 1, L, out=budgets)
    if np.any(budgets[:-1] < budgets[1:]):
        raise InternalError(f"resolved budgets {budgets.tolist()} increase with rank")
    return budgets


def select_topk(combined, k: int) -> np.ndarray:
    """Indices of the k highest scores (ties to the lower index), ascending."""
    scores = np.asarray(combined, dtype=np.float64)
    if scores.ndim != 1 or scores.shape[0] < 1:
        raise ValidationError("bad_shape", "combined must be a non-empty vector")
    if not 1 <= k <= scores.shape[0]:
        raise ValidationError(
            "bad_value", f"k must be in [1, {scores.shape[0]}], got {k}"
        )
    top = np.argsort(-scores, kind="stable")[:k]
    return np.sort(top)


def uniform_budgets(total: int, m_prime: int) -> np.ndarray:
    """Question-free fallback: as equal as possible, remainder to the
    temporally earlier frames."""
    base, remainder = divmod(total, m_prime)
    budgets = np.full(m_prime, base, dtype=np.int64)
    budgets[:remainder] += 1
    return budgets


def build_plan(
    selection,
    scores,
    ranking: RelevanceRanking | None,
    schedule: BudgetSchedule,
    tokens_per_frame: int,
) -> PruningPlan:
    """Assemble the pruning plan: keyframes in temporal order, each keeping
    its top-budget tokens in spatial order.

    With no ranking (no question was supplied), the schedule's total is
    split uniformly and rank follows temporal order.
    """
    m_prime = selection.effective_m
    if len(scores) != m_prime:
        raise ValidationError(
            "bad_value", f"expected {m_prime} score sets, got {len(scores)}"
        )
    for s in scores:
        if s.token_count != tokens_per_frame:
            raise ValidationError(
                "bad_value",
                f"score set has {s.token_count} tokens, expected {tokens_per_frame}",
            )
    by_rank = resolve_budgets(schedule, tokens_per_frame, m_prime)
    if ranking is None:
        ranks = np.arange(m_prime, dtype=np.int64)
        by_rank = uniform_budgets(int(by_rank.sum()), m_prime)
    else:
        ranks = ranking.rank_of_keyframe
        if ranks.shape[0] != m_prime:
            raise ValidationError(
                "bad_value",
                f"ranking covers {ranks.shape[0]} keyframes, expected {m_prime}",
            )
    entries = []
    for pos in range(m_prime):
        budget = int(by_rank[ranks[pos]])
        retained = select_topk(scores[pos].combined, budget)
        entries.append(
            PlanEntry(
                frame_index=int(selection.keyframe_indices[pos]),
                cluster=int(selection.cluster_of_keyframe[pos]),
                relevance_rank=int(ranks[pos]),
                budget=budget,
                retained_token_indices=retained,
                retained_scores=scores[pos].combined[retained],
            )
        )
    return PruningPlan(entries=tuple(entries))
