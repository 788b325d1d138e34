"""Acceptance suite.

One test per acceptance criterion; each prints a single PASS/FAIL line
(visible with ``pytest -s`` or on failure) and asserts it. Oracles live in
``oracles.py`` and are deliberately independent implementations.
"""

import time

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from ktv import (
    BudgetSchedule,
    PipelineConfig,
    SyntheticSpec,
    TokenFrameRecord,
    build_plan,
    combined_scores,
    generate_fixture,
    importance_scores,
    kmeans,
    redundancy_scores,
    resolve_budgets,
    run_pipeline,
    select_topk,
    visualize,
)
from ktv.clustering import KeyframeSelection
from ktv.scoring import TokenScores
from ktv.synthetic import SyntheticVideo

from oracles import (
    best_partition_sse,
    redundancy_double_loop,
    scaled_dot_softmax_mp,
    topk_sorted,
)


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" — {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def _fake_scores(rows):
    out = []
    for row in rows:
        row = np.asarray(row, dtype=np.float64)
        out.append(
            TokenScores(
                importance=row, redundancy=row, importance_norm=row,
                redundancy_norm=row, combined=row, alpha=0.8,
            )
        )
    return out


def test_budget_totals():
    """Presets at m=6, L=576 retain exactly 504 / 936 / 1872 tokens."""
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    selection = KeyframeSelection(
        keyframe_indices=np.arange(6) * 7,
        cluster_of_keyframe=np.arange(6),
        effective_m=6,
    )
    totals = {}
    for name in ("sparse", "normal", "dense"):
        plan = build_plan(
            selection,
            _fake_scores(rng.uniform(size=(6, 576))),
            None,
            BudgetSchedule.preset(name),
            tokens_per_frame=576,
        )
        totals[name] = plan.total_retained
    elapsed = time.perf_counter() - start
    ok = totals == {"sparse": 504, "normal": 936, "dense": 1872} and elapsed < 1.0
    _report(
        "budget totals (zero tolerance, < 1 s)", ok,
        f"sparse={totals['sparse']} normal={totals['normal']} "
        f"dense={totals['dense']} in {elapsed:.3f}s",
    )


def test_sixty_minute_claim(tmp_path):
    """10800-frame, 768-dim fixture runs the sparse pipeline to exactly
    504 retained tokens in under 30 s (fixture generation untimed)."""
    spec = SyntheticSpec(
        frame_count=10800, cluster_count=6, blob_separation=50.0,
        token_count=576, token_dim=4, frame_dim=768, relevance_dim=16,
        planted_salient_tokens=8, seed=1,
    )
    fixture = tmp_path / "hour"
    generate_fixture(spec, fixture)

    start = time.perf_counter()
    result = run_pipeline(
        PipelineConfig(
            features_dir=str(fixture),
            question_embedding_path=str(fixture / "question.ktvf"),
            m=6,
            schedule="sparse",
        )
    )
    elapsed = time.perf_counter() - start
    summary = result.document["summary"]
    ok = (
        summary["total_retained"] == 504
        and summary["effective_m"] == 6
        and summary["token_files_opened"] == 6
        and elapsed < 30.0
    )
    _report(
        "60-minute claim (10800 frames -> 504 tokens, < 30 s)", ok,
        f"retained={summary['total_retained']} opened="
        f"{summary['token_files_opened']} in {elapsed:.2f}s",
    )


def test_clustering_oracle():
    """1-D brute-force fixture plus 50 planted-blob fixtures: exact
    recovery (ARI = 1.0) and per-iteration SSE monotonicity."""
    points = np.array([[0.0], [0.1], [10.0], [10.1]])
    oracle_groups, oracle_sse = best_partition_sse(points[:, 0], 2)
    model = kmeans(points, m=2, seed=0)
    groups = frozenset(
        frozenset(np.flatnonzero(model.assignments == c).tolist())
        for c in range(model.cluster_count)
    )
    one_d_ok = groups == oracle_groups and abs(model.sse - oracle_sse) < 1e-12

    failures = []
    for trial in range(50):
        draw = np.random.default_rng(trial)
        T = int(draw.integers(20, 257))
        k = int(draw.integers(2, 7))
        d = int(draw.integers(2, 17))
        video = SyntheticVideo(
            SyntheticSpec(
                frame_count=T, cluster_count=k, blob_separation=20.0,
                token_count=2, token_dim=2, frame_dim=d, relevance_dim=2,
                planted_salient_tokens=1, seed=trial,
            )
        )
        fit = kmeans(video.bundle.cluster_embeddings, m=k, seed=trial)
        ari = adjusted_rand_score(video.truth.frame_labels, fit.assignments)
        monotone = bool(np.all(np.diff(np.array(fit.sse_history)) <= 0.0))
        if ari != 1.0 or not monotone:
            failures.append((trial, T, k, d, ari, monotone))
    ok = one_d_ok and not failures
    _report(
        "clustering oracle (brute force + 50 planted fixtures, ARI = 1.0)", ok,
        f"1-D exact={one_d_ok}, fixture failures={failures or 'none'}",
    )


def test_redundancy_oracle():
    """Fast-path redundancy matches the O(L^2) double loop within 1e-6 on
    200 random matrices; identical tokens give 1.0 everywhere."""
    worst = 0.0
    for trial in range(200):
        draw = np.random.default_rng(trial)
        L = int(draw.integers(2, 65))
        d = int(draw.integers(1, 33))
        feats = draw.normal(size=(L, d))
        fast = redundancy_scores(feats)
        slow = redundancy_double_loop(feats)
        worst = max(worst, float(np.abs(fast - np.array(slow)).max()))
    identical = redundancy_scores(np.tile(np.arange(1.0, 9.0), (12, 1)))
    ident_err = float(np.abs(identical - 1.0).max())
    ok = worst <= 1e-6 and ident_err <= 1e-6
    _report(
        "redundancy oracle (200 matrices vs double loop, 1e-6)", ok,
        f"max|fast-slow|={worst:.2e}, identical-token err={ident_err:.2e}",
    )


def test_importance_oracle():
    """Softmax sums to 1 +/- 1e-6, is logit-shift invariant within 1e-6,
    and the scaled-dot path matches a 50-digit reference within 1e-6."""
    sum_err = shift_err = dot_err = 0.0
    for trial in range(50):
        draw = np.random.default_rng(trial)
        L = int(draw.integers(2, 65))
        d = int(draw.integers(1, 33))
        # logits on the 1/256 grid: records store float32, and grid values
        # survive the cast losslessly (as does the +57 shift), so this
        # measures the softmax itself rather than storage quantization
        logits = draw.integers(-2048, 2049, size=L) / 256.0
        feats = draw.normal(size=(L, d))
        rec = TokenFrameRecord(
            frame_index=0, token_features=feats, importance_logits=logits
        )
        imp = importance_scores(rec)
        sum_err = max(sum_err, abs(float(imp.sum()) - 1.0))
        shifted = TokenFrameRecord(
            frame_index=0, token_features=feats, importance_logits=logits + 57.0
        )
        shift_err = max(
            shift_err, float(np.abs(imp - importance_scores(shifted)).max())
        )
        qk = TokenFrameRecord(
            frame_index=0,
            token_features=feats,
            cls_query=draw.normal(size=d),
            token_keys=draw.normal(size=(L, d)),
        )
        oracle = scaled_dot_softmax_mp(qk.cls_query, qk.token_keys)
        dot_err = max(
            dot_err, float(np.abs(importance_scores(qk) - np.array(oracle)).max())
        )
    ok = sum_err <= 1e-6 and shift_err <= 1e-6 and dot_err <= 1e-6
    _report(
        "importance oracle (sum, shift invariance, extended precision; 1e-6)", ok,
        f"sum_err={sum_err:.2e} shift_err={shift_err:.2e} dot_err={dot_err:.2e}",
    )


def test_fusion_extremes():
    """At alpha = 1 / alpha = 0 the combined argsort equals the
    importance / negated-redundancy argsort exactly, shared tie rule."""
    bad = 0
    for trial in range(200):
        draw = np.random.default_rng(trial)
        L = int(draw.integers(2, 50))
        # coarse grids force ties through the shared stable-sort rule
        imp = draw.integers(0, 6, size=L) / 5.0
        red = draw.integers(0, 6, size=L) / 5.0
        at_one = np.argsort(-combined_scores(imp, red, 1.0), kind="stable")
        at_zero = np.argsort(-combined_scores(imp, red, 0.0), kind="stable")
        want_one = np.argsort(-np.asarray(imp, dtype=float), kind="stable")
        want_zero = np.argsort(np.asarray(red, dtype=float), kind="stable")
        if not (np.array_equal(at_one, want_one) and np.array_equal(at_zero, want_zero)):
            bad += 1
    _report(
        "fusion extremes (200 score pairs, exact argsort)", bad == 0,
        f"mismatching trials={bad}",
    )


def test_topk_oracle():
    """1000 random trials match the full-sort oracle exactly."""
    bad = 0
    for trial in range(1000):
        draw = np.random.default_rng(trial)
        L = int(draw.integers(1, 65))
        scores = draw.integers(0, 7, size=L) / 6.0
        k = int(draw.integers(1, L + 1))
        if select_topk(scores, k).tolist() != topk_sorted(scores, k):
            bad += 1
    _report("top-k oracle (1000 trials, exact)", bad == 0, f"mismatches={bad}")


def test_determinism(tmp_path):
    """Identical fixture + config give byte-identical result JSON and PGM
    masks across 3 repeat runs and worker-pool sizes 1 / 4 / 8."""
    spec = SyntheticSpec(
        frame_count=48, cluster_count=4, blob_separation=50.0, token_count=36,
        token_dim=8, frame_dim=12, relevance_dim=10, planted_salient_tokens=5,
        seed=21,
    )
    fixture = tmp_path / "fix"
    generate_fixture(spec, fixture)

    def one_run(tag: str, workers: int):
        out = tmp_path / f"result_{tag}.json"
        result = run_pipeline(
            PipelineConfig(
                features_dir=str(fixture),
                question_embedding_path=str(fixture / "question.ktvf"),
                m=4,
                schedule=BudgetSchedule(mode="counts", values=(12, 9, 6, 3)),
                workers=workers,
                output_path=str(out),
            )
        )
        masks = tmp_path / f"masks_{tag}"
        visualize(result, 6, 6, masks)
        mask_bytes = b"".join(
            (masks / name).read_bytes() for name in sorted(p.name for p in masks.iterdir())
        )
        return out.read_bytes(), mask_bytes

    runs = [one_run(f"rep{i}", workers=4) for i in range(3)]
    runs += [one_run("w1", workers=1), one_run("w8", workers=8)]
    json_ok = all(r[0] == runs[0][0] for r in runs)
    mask_ok = all(r[1] == runs[0][1] for r in runs)
    _report(
        "determinism (byte-identical JSON + PGM, 3 runs x workers {1,4,8})",
        json_ok and mask_ok,
        f"json_identical={json_ok} masks_identical={mask_ok}",
    )


def test_rounding_conservation():
    """500 random fractional schedules resolve to integer budgets summing
    to round(sum beta_i * L) exactly, non-increasing in rank."""
    bad = []
    for trial in range(500):
        draw = np.random.default_rng(trial)
        m = int(draw.integers(1, 9))
        L = int(draw.integers(64, 601))
        # stay on the documented domain: every beta_i * L >= 1, so the
        # minimum-budget clamp never interferes with conservation
        values = np.sort(draw.uniform(0.02, 1.0, size=m))[::-1]
        budgets = resolve_budgets(
            BudgetSchedule(mode="fractions", values=tuple(values)), L, m
        )
        target = int(np.floor(values.sum() * L + 0.5))
        if budgets.sum() != target or np.any(np.diff(budgets) > 0):
            bad.append(trial)
    _report(
        "rounding conservation (500 fractional schedules)", not bad,
        f"failing trials={bad or 'none'}",
    )
