"""Two-stage visual token budget pruning.

Stage 1 clusters frame embeddings and keeps one representative keyframe
per cluster; stage 2 scores each keyframe's tokens by CLS-attention
importance and mean-cosine redundancy, then retains a per-frame top-k
under a descending, relevance-ranked budget schedule. Everything operates
on KTVF tensor files; no encoder or LLM is involved.
"""

from .budget import (
    PRESETS,
    BudgetSchedule,
    PlanEntry,
    PruningPlan,
    RelevanceRanking,
    build_plan,
    relevance_ranking,
    resolve_budgets,
    select_topk,
    uniform_budgets,
)
from .clustering import (
    ClusterModel,
    KeyframeSelection,
    assign_clusters,
    kmeans,
    nearest_to_centroid,
    select_from_model,
    select_keyframes,
)
from .container import (
    FeatureBundle,
    QuestionEmbedding,
    TokenFrameRecord,
    describe,
    read_bundle,
    read_question,
    read_tensors,
    read_token_frame,
    token_frame_filename,
    write_bundle,
    write_question,
    write_tensors,
    write_token_frame,
)
from .errors import (
    FormatError,
    InternalError,
    KTVError,
    MissingInputError,
    ValidationError,
)
from .pipeline import (
    PipelineConfig,
    ResultDocument,
    canonical_json,
    generate_fixture,
    run_pipeline,
    visualize,
)
from .rng import CounterRng, mix64
from .scoring import (
    TokenScores,
    combined_scores,
    importance_scores,
    minmax_normalize,
    redundancy_scores,
    score_tokens,
)
from .synthetic import SyntheticSpec, SyntheticTruth, SyntheticVideo, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "BudgetSchedule",
    "ClusterModel",
    "CounterRng",
    "FeatureBundle",
    "FormatError",
    "InternalError",
    "KTVError",
    "KeyframeSelection",
    "MissingInputError",
    "PipelineConfig",
    "PlanEntry",
    "PruningPlan",
    "QuestionEmbedding",
    "RelevanceRanking",
    "ResultDocument",
    "SyntheticSpec",
    "SyntheticTruth",
    "SyntheticVideo",
    "TokenFrameRecord",
    "TokenScores",
    "ValidationError",
    "assign_clusters",
    "build_plan",
    "canonical_json",
    "combined_scores",
    "describe",
    "generate_fixture",
    "generate_synthetic",
    "importance_scores",
    "kmeans",
    "minmax_normalize",
    "mix64",
    "nearest_to_centroid",
    "read_bundle",
    "read_question",
    "read_tensors",
    "read_token_frame",
    "redundancy_scores",
    "relevance_ranking",
    "resolve_budgets",
    "run_pipeline",
    "score_tokens",
    "select_from_model",
    "select_keyframes",
    "select_topk",
    "token_frame_filename",
    "uniform_budgets",
    "visualize",
    "write_bundle",
    "write_question",
    "write_tensors",
    "write_token_frame",
]
