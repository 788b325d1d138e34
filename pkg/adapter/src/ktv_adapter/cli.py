"""`ktv-extract`: command-line front end for the exporter.

Modes:
  * --video + --out-dir            extract a feature directory
  * --question alone + --out-dir   write only question.ktvf
  * --video + --question           both in one pass

Exit codes: 0 success, 2 configuration/validation error, 3 decode or
I/O error.
"""

import argparse
import sys

from .errors import ConfigError, DecodeError, ShapeError
from .extract import ATTENTION_VARIANTS, ExtractionConfig, embed_question, extract


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktv-extract",
        description="Export video features to a KTVF directory",
    )
    parser.add_argument("--video", help="input video file")
    parser.add_argument("--out-dir", required=True, help="feature directory to write")
    parser.add_argument("--fps", type=float, default=3.0,
                        help="sampling rate in frames per second (default 3)")
    parser.add_argument("--cluster-encoder", default="offline/patch-stats")
    parser.add_argument("--relevance-encoder", default="offline/color-words")
    parser.add_argument("--vision-tower", default="offline/patch-tokens")
    parser.add_argument("--attention-layer", type=int, default=-2,
                        help="vision-tower layer for CLS attention "
                             "(default -2, the penultimate; recorded in meta, "
                             "used by model-based towers)")
    parser.add_argument("--attention", choices=ATTENTION_VARIANTS, default="qk",
                        help="export cls_query+token_keys (qk) or "
                             "precomputed importance_logits")
    parser.add_argument("--token-grid", type=int, default=8,
                        help="tokens per frame side (default 8 -> 64 tokens)")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--question", help="question text to embed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.video is None and args.question is None:
            raise ConfigError("nothing to do: pass --video and/or --question")
        if args.video is not None:
            config = ExtractionConfig(
                video_path=args.video,
                out_dir=args.out_dir,
                fps=args.fps,
                cluster_encoder=args.cluster_encoder,
                relevance_encoder=args.relevance_encoder,
                vision_tower=args.vision_tower,
                attention_layer=args.attention_layer,
                attention_variant=args.attention,
                token_grid=args.token_grid,
                device=args.device,
                question=args.question,
            )
            out = extract(config)
            print(f"extracted features to {out}")
        else:
            import os

            os.makedirs(args.out_dir, exist_ok=True)
            path = embed_question(
                args.question, args.relevance_encoder, f"{args.out_dir}/question.ktvf"
            )
            print(f"wrote {path}")
        return 0
    except (ConfigError, ShapeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (DecodeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
