"""Keyframe selection: seeded k-means over frame embeddings, one
representative frame per cluster, output in temporal order.

Determinism notes
-----------------
Everything here is plain single-threaded numpy. Distances are evaluated
exactly as ``sum((x - c)^2)`` per centroid (never the expanded
``|x|^2 - 2xc + |c|^2`` form, which hands the reduction to BLAS and makes
results depend on thread count). Reductions over frames always run over
ascending frame index. Ties always resolve to the lowest index — argmin /
argmax first-occurrence semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .container import FeatureBundle
from .errors import InternalError, ValidationError
from .rng import CounterRng


@dataclass(frozen=True)
class ClusterModel:
    """k-means output. ``centroids`` has one row per non-empty cluster;
    every cluster index appears in ``assignments`` at least once."""

    assignments: np.ndarray  # [T] int, cluster index per frame
    centroids: np.ndarray  # [m x d] float64
    sse: float
    iterations_run: int
    converged: bool
    sse_history: tuple[float, ...]

    @property
    def cluster_count(self) -> int:
        return self.centroids.shape[0]


@dataclass(frozen=True)
class KeyframeSelection:
    keyframe_indices: np.ndarray  # [m'] frame indices, strictly increasing
    cluster_of_keyframe: np.ndarray  # [m'] cluster id of each keyframe
    effective_m: int


def _check_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValidationError("bad_shape", "points must be a non-empty [T x d] matrix")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("non_finite", "non-finite value in points")
    return pts


def _distances_to(points: np.ndarray, centroid: np.ndarray) -> np.ndarray:
    diff = points - centroid
    return np.einsum("ij,ij->i", diff, diff)


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Labels (argmin distance, ties -> lowest cluster) and each point's
    squared distance to its own centroid."""
    dist = np.empty((points.shape[0], centroids.shape[0]))
    for i, centroid in enumerate(centroids):
        dist[:, i] = _distances_to(points, centroid)
    labels = np.argmin(dist, axis=1)
    return labels, dist[np.arange(points.shape[0]), labels]


def assign_clusters(points, centroids) -> np.ndarray:
    """Nearest-centroid labels for ``points``, ties to the lowest cluster."""
    pts = _check_points(points)
    cents = np.asarray(centroids, dtype=np.float64)
    if cents.ndim != 2 or cents.shape[1] != pts.shape[1]:
        raise ValidationError("bad_shape", "centroids do not match points")
    return _assign(pts, cents)[0]


_SEED_CANDIDATES = 8


def _init_plusplus(points: np.ndarray, m: int, rng: CounterRng) -> np.ndarray:
    """Greedy k-means++ seeding.

    The first center is uniform over the points. For each later center,
    ``_SEED_CANDIDATES`` candidates are drawn with probability
    proportional to squared distance from the chosen set (inverse-CDF on
    the cumulative weights, ``searchsorted`` side="right"), and the
    candidate that minimizes the resulting total potential wins; ties go
    to the earliest draw. A single greedy sweep makes bad starts -- two
    seeds landing in one tight cluster -- exponentially unlikely in the
    candidate count while staying fully deterministic for a fixed seed.
    Every candidate consumes exactly one uniform, so the RNG stream
    position depends only on (T, m) and the all-covered degenerate case.
    """
    T = points.shape[0]
    centroids = np.empty((m, points.shape[1]))
    centroids[0] = points[rng.below(T)]
    best = _distances_to(points, centroids[0])
    for i in range(1, m):
        total = float(best.sum())
        if total > 0.0:
            cumulative = np.cumsum(best)
            picks = np.searchsorted(
                cumulative, rng.uniforms(_SEED_CANDIDATES) * total, side="right"
            )
            np.clip(picks, 0, T - 1, out=picks)
            chosen = None
            chosen_best = None
            chosen_potential = np.inf
            for pick in picks:
                trial_best = np.minimum(best, _distances_to(points, points[pick]))
                potential = float(trial_best.sum())
                if potential < chosen_potential:
                    chosen = int(pick)
                    chosen_best = trial_best
                    chosen_potential = potential
            centroids[i] = points[chosen]
            best = chosen_best
        else:
            pick = rng.below(T)  # all points already covered exactly
            centroids[i] = points[pick]
            best = np.minimum(best, _distances_to(points, centroids[i]))
    return centroids


def _repair_empties(
    points: np.ndarray, labels: np.ndarray, centroids: np.ndarray, dists: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reseed empty clusters with the point farthest from its centroid,
    then reassign. With duplicate data every candidate can sit at distance
    zero; such clusters stay empty and are dropped by the caller."""
    m = centroids.shape[0]
    for _ in range(m):
        empties = np.flatnonzero(np.bincount(labels, minlength=m) == 0)
        if empties.size == 0:
            break
        farthest = int(np.argmax(dists))  # first occurrence = lowest index
        if dists[farthest] <= 0.0:
            break  # every point sits on a centroid; nothing to relocate
        centroids = centroids.copy()
        centroids[empties[0]] = points[farthest]
        labels, dists = _assign(points, centroids)
    return labels, centroids, dists


def _drop_empty_clusters(
    labels: np.ndarray, centroids: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(labels, minlength=centroids.shape[0])
    keep = np.flatnonzero(counts > 0)
    if keep.size == centroids.shape[0]:
        return labels, centroids
    remap = np.full(centroids.shape[0], -1)
    remap[keep] = np.arange(keep.size)
    return remap[labels], centroids[keep]


def kmeans(
    points,
    m: int,
    seed: int = 0,
    max_iterations: int = 100,
    tolerance: float = 1e-4,
) -> ClusterModel:
    """Lloyd iterations from k-means++ seeding.

    Stops when the relative SSE improvement drops below ``tolerance`` (or
    the SSE stops changing at all), or after ``max_iterations`` assignment
    rounds. With fewer frames than clusters, clusters with min(m, T)
    centers. Deterministic for fixed inputs and seed.
    """
    pts = _check_points(points)
    if m < 1:
        raise ValidationError("bad_value", "m must be >= 1")
    if max_iterations < 1:
        raise ValidationError("bad_value", "max_iterations must be >= 1")
    if not tolerance >= 0:
        raise ValidationError("bad_value", "tolerance must be >= 0")
    m_eff = min(m, pts.shape[0])

    centroids = _init_plusplus(pts, m_eff, CounterRng(seed))
    history: list[float] = []
    converged = False
    prev_sse = np.inf
    labels = np.zeros(pts.shape[0], dtype=np.int64)

    for iteration in range(1, max_iterations + 1):
        labels, dists = _assign(pts, centroids)
        labels, centroids, dists = _repair_empties(pts, labels, centroids, dists)
        sse = float(dists.sum())
        history.append(sse)
        if sse == prev_sse or prev_sse - sse < tolerance * prev_sse:
            converged = True
            break
        prev_sse = sse
        if iteration == max_iterations:
            break
        # means over members in ascending frame order; empty clusters (only
        # possible with duplicate data) keep their previous centroid
        centroids = centroids.copy()
        for i in range(m_eff):
            members = np.flatnonzero(labels == i)
            if members.size:
                centroids[i] = pts[members].sum(axis=0) / members.size

    labels, centroids = _drop_empty_clusters(labels, centroids)
    return ClusterModel(
        assignments=labels,
        centroids=centroids,
        sse=history[-1],
        iterations_run=len(history),
        converged=converged,
        sse_history=tuple(history),
    )


def nearest_to_centroid(model: ClusterModel, points) -> np.ndarray:
    """Per cluster, the member frame closest to the centroid (Euclidean),
    ties to the lowest frame index."""
    pts = _check_points(points)
    if pts.shape[0] != model.assignments.shape[0]:
        raise ValidationError("bad_shape", "points do not match model assignments")
    if pts.shape[1] != model.centroids.shape[1]:
        raise ValidationError("bad_shape", "points do not match model centroids")
    representatives = np.empty(model.cluster_count, dtype=np.int64)
    for i in range(model.cluster_count):
        members = np.flatnonzero(model.assignments == i)
        if members.size == 0:
            raise InternalError(f"cluster {i} has no members")
        d = _distances_to(pts[members], model.centroids[i])
        representatives[i] = members[int(np.argmin(d))]
    return representatives


def select_from_model(model: ClusterModel, points) -> KeyframeSelection:
    """Representatives of an existing cluster model, in temporal order."""
    reps = nearest_to_centroid(model, points)
    if np.unique(reps).size != reps.size:
        # clusters are disjoint member sets, so distinct clusters can never
        # elect the same frame; if they do, the model is inconsistent
        raise InternalError("two clusters elected the same keyframe")
    order = np.argsort(reps)
    return KeyframeSelection(
        keyframe_indices=reps[order],
        cluster_of_keyframe=np.arange(model.cluster_count, dtype=np.int64)[order],
        effective_m=int(reps.size),
    )


def select_keyframes(
    bundle: FeatureBundle,
    m: int,
    seed: int = 0,
    max_iterations: int = 100,
    tolerance: float = 1e-4,
) -> KeyframeSelection:
    """Cluster the bundle's frames and pick one representative per cluster,
    returned in temporal (ascending frame index) order."""
    model = kmeans(
        bundle.cluster_embeddings, m, seed=seed,
        max_iterations=max_iterations, tolerance=tolerance,
    )
    return select_from_model(model, bundle.cluster_embeddings)
