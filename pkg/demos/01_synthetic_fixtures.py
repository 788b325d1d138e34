"""Generate a synthetic feature directory and poke at the files.

Everything downstream (keyframe selection, token scoring, the CLI) reads
feature directories in the KTVF container format. The synthetic generator
plants ground truth -- blob membership per frame, salient tokens per
frame -- so tests and demos can check answers instead of eyeballing them.

Run:  python3 demos/01_synthetic_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from ktv import SyntheticSpec, describe, generate_fixture, read_bundle, read_token_frame

out = Path(tempfile.mkdtemp(prefix="ktv_demo01_"))

# A tiny "video": 40 frames drawn from 3 well-separated blobs in feature
# space, 24 tokens per frame, 4 of which are planted as salient.
spec = SyntheticSpec(
    frame_count=40,
    cluster_count=3,
    blob_separation=50.0,
    token_count=24,
    token_dim=8,
    frame_dim=16,
    relevance_dim=12,
    planted_salient_tokens=4,
    seed=11,
)
generate_fixture(spec, out)

print(f"wrote fixture to {out}")
names = sorted(p.name for p in out.iterdir())
print(f"{len(names)} files; first few: {names[:4]} ... last: {names[-1]}")

# Every .ktvf file self-describes: magic, version, named tensors, metadata.
print()
print("describe(bundle.ktvf):")
print(describe(out / "bundle.ktvf"))
print()
print("describe(frame_000007.ktvf):")
print(describe(out / "frame_000007.ktvf"))

# Reading back gives frozen (read-only) float32 arrays.
bundle = read_bundle(out / "bundle.ktvf")
print()
print(f"bundle: video_id={bundle.video_id!r}, frames={bundle.frame_count}, "
      f"cluster feature dim={bundle.cluster_embeddings.shape[1]}, "
      f"relevance dim={bundle.relevance_embeddings.shape[1]}")

record = read_token_frame(out / "frame_000007.ktvf")
print(f"frame 7: {record.token_count} tokens, attention variant = "
      f"{record.attention_variant}")

# Ground truth rides along as plain JSON so any language can check it.
truth = json.loads((out / "ground_truth.json").read_text())
print()
print(f"planted frame labels (first 12): {truth['frame_labels'][:12]}")
print(f"planted salient tokens in frame 7: {truth['salient_tokens'][7]}")

# Determinism is part of the generator's contract: the same spec writes
# byte-identical files, so fixtures can be regenerated anywhere.
again = Path(tempfile.mkdtemp(prefix="ktv_demo01_again_"))
generate_fixture(spec, again)
same = (out / "bundle.ktvf").read_bytes() == (again / "bundle.ktvf").read_bytes()
print()
print(f"regenerated bundle byte-identical: {same}")
