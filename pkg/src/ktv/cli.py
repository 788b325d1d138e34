"""Command-line entry point.

Subcommands: run, gen-synthetic, keyframes, score, visualize, inspect.
Exit codes: 0 success, 2 validation/format error, 3 I/O error, 4 internal
inconsistency.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .budget import BudgetSchedule
from .clustering import kmeans, select_from_model
from .container import describe, read_bundle, read_token_frame
from .errors import (
    FormatError,
    InternalError,
    MissingInputError,
    ValidationError,
)
from .pipeline import (
    PipelineConfig,
    canonical_json,
    generate_fixture,
    run_pipeline,
    visualize,
)
from .scoring import score_tokens
from .synthetic import SyntheticSpec


def _parse_schedule(value):
    if isinstance(value, str):
        return value
    if isinstance(value, dict):
        if "preset" in value and "mode" not in value:
            return value["preset"]
        return BudgetSchedule(
            mode=value.get("mode", "counts"),
            values=tuple(value.get("values", ())),
            preset_name=value.get("preset"),
        )
    raise ValidationError("bad_value", f"cannot parse schedule {value!r}")


_CONFIG_KEYS = (
    "features_dir", "question_embedding_path", "m", "alpha", "schedule",
    "seed", "max_iterations", "tolerance", "workers", "output_path",
)


def _load_config(args) -> PipelineConfig:
    settings: dict = {}
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise MissingInputError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError("bad_value", f"config file is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ValidationError("bad_value", "config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(_CONFIG_KEYS))
        if unknown:
            raise ValidationError("bad_value", f"unknown config keys: {unknown}")
        settings.update(loaded)
    overrides = {
        "features_dir": args.features_dir,
        "question_embedding_path": args.question,
        "m": args.m,
        "alpha": args.alpha,
        "schedule": args.preset,
        "seed": args.seed,
        "max_iterations": args.max_iterations,
        "tolerance": args.tolerance,
        "workers": args.workers,
        "output_path": args.out,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if "features_dir" not in settings:
        raise ValidationError("bad_value", "features_dir is required (flag or config)")
    if "schedule" in settings:
        settings["schedule"] = _parse_schedule(settings["schedule"])
    return PipelineConfig(**settings)


def _cmd_run(args) -> int:
    config = _load_config(args)
    result = run_pipeline(config)
    if config.output_path is None:
        sys.stdout.write(result.to_json() + "\n")
    else:
        summary = result.document["summary"]
        print(
            f"wrote {config.output_path}: {summary['effective_m']} keyframes, "
            f"{summary['total_retained']} tokens retained"
        )
    return 0


def _cmd_gen_synthetic(args) -> int:
    spec = SyntheticSpec(
        frame_count=args.frames,
        cluster_count=args.clusters,
        blob_separation=args.separation,
        token_count=args.tokens,
        token_dim=args.token_dim,
        frame_dim=args.frame_dim,
        relevance_dim=args.relevance_dim,
        planted_salient_tokens=args.salient,
        seed=args.seed,
    )
    generate_fixture(spec, args.out_dir)
    print(f"wrote synthetic fixture ({args.frames} frames) to {args.out_dir}")
    return 0


def _cmd_keyframes(args) -> int:
    bundle_path = Path(args.features_dir) / "bundle.ktvf"
    if not bundle_path.is_file():
        raise MissingInputError(f"bundle not found: {bundle_path}")
    bundle = read_bundle(bundle_path)
    model = kmeans(
        bundle.cluster_embeddings, args.m, seed=args.seed,
        max_iterations=args.max_iterations, tolerance=args.tolerance,
    )
    selection = select_from_model(model, bundle.cluster_embeddings)
    document = {
        "video_id": bundle.video_id,
        "frame_count": bundle.frame_count,
        "effective_m": selection.effective_m,
        "keyframes": [
            {"frame_index": int(f), "cluster": int(c)}
            for f, c in zip(selection.keyframe_indices, selection.cluster_of_keyframe)
        ],
        "kmeans": {
            "iterations": model.iterations_run,
            "converged": model.converged,
            "sse": float(model.sse),
        },
    }
    sys.stdout.write(canonical_json(document) + "\n")
    return 0


def _cmd_score(args) -> int:
    path = Path(args.frame)
    if not path.is_file():
        raise MissingInputError(f"token frame not found: {path}")
    record = read_token_frame(path)
    scores = score_tokens(record, args.alpha)
    document = {
        "frame_index": record.frame_index,
        "token_count": record.token_count,
        "alpha": float(args.alpha),
        "attention_variant": record.attention_variant,
        "importance": [float(v) for v in scores.importance],
        "redundancy": [float(v) for v in scores.redundancy],
        "combined": [float(v) for v in scores.combined],
    }
    sys.stdout.write(canonical_json(document) + "\n")
    return 0


def _cmd_visualize(args) -> int:
    path = Path(args.result)
    if not path.is_file():
        raise MissingInputError(f"result document not found: {path}")
    try:
        document = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError("bad_value", f"result document is not valid JSON: {exc}")
    visualize(document, args.rows, args.cols, args.out_dir)
    print(f"wrote {len(document['keyframes'])} masks to {args.out_dir}")
    return 0


def _cmd_inspect(args) -> int:
    path = Path(args.path)
    if not path.is_file():
        raise MissingInputError(f"file not found: {path}")
    info = describe(path)
    print(f"{path}: KTVF v{info['version']}, video_id={info['video_id']!r}")
    for entry in info["tensors"]:
        shape = "x".join(str(d) for d in entry["shape"])
        print(f"  {entry['name']}: {entry['dtype']}[{shape}]")
    if info["meta"]:
        print(f"  meta: {json.dumps(info['meta'], sort_keys=True)}")
    for warning in info["warnings"]:
        print(f"  warning: {warning}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktv",
        description="Two-stage visual token budget pruning over KTVF feature files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full two-stage pipeline")
    run.add_argument("--features-dir", help="directory with bundle.ktvf + frame files")
    run.add_argument("--config", help="JSON config file; flags override it")
    run.add_argument("--question", help="question embedding (.ktvf)")
    run.add_argument("--out", help="write the result document here")
    run.add_argument("--m", type=int, help="cluster count (default 6)")
    run.add_argument("--alpha", type=float, help="importance weight in [0,1] (default 0.8)")
    run.add_argument("--preset", choices=["sparse", "normal", "dense"],
                     help="budget preset (default normal)")
    run.add_argument("--seed", type=int, help="clustering seed (default 0)")
    run.add_argument("--workers", type=int, help="scoring worker threads")
    run.add_argument("--max-iterations", type=int, help="k-means iteration cap")
    run.add_argument("--tolerance", type=float, help="k-means relative SSE tolerance")
    run.set_defaults(handler=_cmd_run)

    gen = sub.add_parser("gen-synthetic", help="write a synthetic features directory")
    gen.add_argument("--out-dir", required=True)
    gen.add_argument("--frames", type=int, required=True)
    gen.add_argument("--clusters", type=int, default=3)
    gen.add_argument("--separation", type=float, default=50.0)
    gen.add_argument("--tokens", type=int, default=64)
    gen.add_argument("--token-dim", type=int, default=16)
    gen.add_argument("--frame-dim", type=int, default=32)
    gen.add_argument("--relevance-dim", type=int, default=16)
    gen.add_argument("--salient", type=int, default=8)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(handler=_cmd_gen_synthetic)

    key = sub.add_parser("keyframes", help="stage 1 only: cluster and pick keyframes")
    key.add_argument("--features-dir", required=True)
    key.add_argument("--m", type=int, default=6)
    key.add_argument("--seed", type=int, default=0)
    key.add_argument("--max-iterations", type=int, default=100)
    key.add_argument("--tolerance", type=float, default=1e-4)
    key.set_defaults(handler=_cmd_keyframes)

    score = sub.add_parser("score", help="stage 2 on a single token frame file")
    score.add_argument("--frame", required=True, help="frame_{index:06d}.ktvf file")
    score.add_argument("--alpha", type=float, default=0.8)
    score.set_defaults(handler=_cmd_score)

    vis = sub.add_parser("visualize", help="render PGM masks from a result document")
    vis.add_argument("--result", required=True, help="result JSON from `ktv run`")
    vis.add_argument("--rows", type=int, required=True)
    vis.add_argument("--cols", type=int, required=True)
    vis.add_argument("--out-dir", required=True)
    vis.set_defaults(handler=_cmd_visualize)

    ins = sub.add_parser("inspect", help="validate a KTVF file and list its tensors")
    ins.add_argument("path")
    ins.set_defaults(handler=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValidationError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
