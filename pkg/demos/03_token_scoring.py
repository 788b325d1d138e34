"""Stage 2 scoring: which tokens inside a keyframe earn their seats.

Two signals per token, fused with a weight alpha:

  * importance — softmax attention from the frame's [CLS] summary to each
    token (either stored logits, or computed from a query/key pair);
  * redundancy — mean pairwise cosine similarity to every other token in
    the frame; near-duplicates score high and get pruned first.

Run:  python3 demos/03_token_scoring.py
"""

import numpy as np

from ktv import (
    SyntheticSpec,
    combined_scores,
    importance_scores,
    minmax_normalize,
    redundancy_scores,
    score_tokens,
)
from ktv.synthetic import SyntheticVideo

video = SyntheticVideo(SyntheticSpec(
    frame_count=6, cluster_count=2, blob_separation=50.0,
    token_count=12, token_dim=8, frame_dim=8, relevance_dim=8,
    planted_salient_tokens=3, seed=2,
))
record = video.token_frames[4]
planted = video.truth.salient_tokens[4]
print(f"frame 4 carries {record.token_count} tokens; planted salient: {planted}")

imp = importance_scores(record)
print()
print("importance (softmax over CLS attention logits):")
print(np.array2string(imp, precision=3, suppress_small=True))
print(f"sums to {imp.sum():.6f}; top-3 by importance: "
      f"{np.argsort(-imp, kind='stable')[:3].tolist()}")

red = redundancy_scores(record.token_features)
print()
print("redundancy (mean pairwise cosine):")
print(np.array2string(red, precision=3, suppress_small=True))

# The fused score rescales both signals to [0, 1] first, then blends:
# alpha weights importance, (1 - alpha) weights novelty (low redundancy).
print()
for alpha in (1.0, 0.8, 0.0):
    fused = combined_scores(imp, red, alpha)
    top = np.argsort(-fused, kind="stable")[: len(planted)].tolist()
    print(f"alpha={alpha:3.1f}: top-{len(planted)} tokens {top}")

# At the default alpha=0.8 the planted salient tokens come out on top.
scores = score_tokens(record, alpha=0.8)
top = np.argsort(-scores.combined, kind="stable")[: len(planted)]
print()
print(f"score_tokens(alpha=0.8) top-{len(planted)}: {sorted(top.tolist())} "
      f"(planted: {list(planted)})")

# minmax_normalize is the shared rescaler; constant input maps to 0.5
# so a signal with no spread cannot dominate the blend.
print()
print("minmax_normalize([2, 4, 6])  ->", minmax_normalize([2, 4, 6]))
print("minmax_normalize([5, 5, 5])  ->", minmax_normalize([5, 5, 5]))

# A duplicated token is exactly what redundancy punishes: copy token 0
# eleven times, keep one distinct token, and the distinct one wins at
# any alpha < 1 even with identical importance.
features = np.vstack([np.tile([1.0, 0, 0, 0], (11, 1)), [[0, 1.0, 0, 0]]])
dup_red = redundancy_scores(features)
print()
print("11 copies + 1 distinct -> redundancy:",
      np.array2string(dup_red, precision=3))
fused = combined_scores(np.full(12, 1 / 12), dup_red, alpha=0.5)
print("winner at alpha=0.5:", int(np.argmax(fused)), "(the distinct token)")
