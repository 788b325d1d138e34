"""End to end: feature directory in, pruning plan out.

The pipeline stitches the stages together:

  1. read the bundle, pick keyframes by clustering (question-agnostic);
  2. open token files for the selected keyframes only (lazy I/O);
  3. score tokens, rank keyframes against the question, assign budgets;
  4. emit a canonical-JSON result document plus optional PGM masks.

Run:  python3 demos/05_full_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from ktv import (
    BudgetSchedule,
    PipelineConfig,
    SyntheticSpec,
    generate_fixture,
    run_pipeline,
    visualize,
)

root = Path(tempfile.mkdtemp(prefix="ktv_demo05_"))
fixture = root / "features"

spec = SyntheticSpec(
    frame_count=96,
    cluster_count=4,
    blob_separation=50.0,
    token_count=36,
    token_dim=8,
    frame_dim=16,
    relevance_dim=12,
    planted_salient_tokens=6,
    seed=3,
)
generate_fixture(spec, fixture)
print(f"fixture: {spec.frame_count} frames, {spec.token_count} tokens each, "
      f"at {fixture}")

config = PipelineConfig(
    features_dir=str(fixture),
    question_embedding_path=str(fixture / "question.ktvf"),
    m=4,
    alpha=0.8,
    schedule=BudgetSchedule(mode="counts", values=(16, 12, 8, 4)),
    seed=0,
    output_path=str(root / "result.json"),
)
result = run_pipeline(config)

summary = result.document["summary"]
print()
print("summary:", json.dumps(summary, indent=2))

# Only the 4 keyframes' token files were opened -- the other 92 frames
# never left disk. That is what makes hour-long videos cheap.
print(f"\ntoken files opened: {summary['token_files_opened']} "
      f"of {spec.frame_count}")

print("\nkeyframes (budget follows question-relevance rank):")
for entry in result.document["keyframes"]:
    print(f"  frame {entry['frame_index']:3d}  cluster {entry['cluster']}  "
          f"similarity {entry['relevance_similarity']:+.3f}  "
          f"rank {entry['relevance_rank']}  budget {entry['budget']:2d}")

# Wall-clock timings live in a sidecar, never inside the result itself,
# so the result document stays byte-reproducible.
timings = json.loads((root / "result.json.timings.json").read_text())
print("\ntimings (ms):", timings)

# PGM masks: one grayscale image per keyframe, retained tokens white.
masks = root / "masks"
visualize(result, grid_rows=6, grid_cols=6, out_dir=masks)
print(f"\nmasks written: {sorted(p.name for p in masks.iterdir())}")

# Determinism check: run again, compare bytes.
rerun = root / "rerun.json"
run_pipeline(
    PipelineConfig(**{**config.__dict__, "output_path": str(rerun), "workers": 8})
)
identical = rerun.read_bytes() == (root / "result.json").read_bytes()
print(f"\nrerun with 8 workers byte-identical: {identical}")

print("\nthe CLI drives the same machinery, e.g.:")
print(f"  ktv run --features-dir {fixture} --question {fixture}/question.ktvf "
      f"--m 4 --preset sparse --out result.json")
print(f"  ktv inspect {fixture}/bundle.ktvf")
