# Budgets and relevance ranking.
#
# Keyframes are ranked by cosine similarity to the question embedding;
# the rank decides how many tokens each keyframe keeps. Schedules are
# either explicit counts or fractions of L, always non-increasing.
#
# Run:  python3 demos/04_budget_schedules.py

import numpy as np

from ktv import (
    PRESETS,
    BudgetSchedule,
    QuestionEmbedding,
    relevance_ranking,
    resolve_budgets,
    select_topk,
)

L = 576

for name, counts in PRESETS.items():
    print(f"{name:7s} {list(counts)}  total={sum(counts)}")

# sparse/normal/dense at L=576 keep 504 / 936 / 1872 tokens across m=6.
sched = BudgetSchedule.preset("normal")
print("\nresolved normal @ L=576:", resolve_budgets(sched, L, 6).tolist())

# Fractions use largest-remainder rounding: budgets sum to
# round(sum(beta_i * L)) exactly, and stay non-increasing.
frac = BudgetSchedule(mode="fractions", values=(0.35, 0.34, 0.31))
print("fractions (.35,.34,.31) @ L=10:", resolve_budgets(frac, 10, 3).tolist())

# A schedule longer than the keyframe count is truncated; budgets are
# clamped to [1, L] so every keyframe keeps at least one token.
print("sparse preset, only 2 keyframes @ L=100:",
      resolve_budgets(BudgetSchedule.preset("sparse"), 100, 2).tolist())

# Relevance ranking: cosine against the question embedding, descending,
# ties to the earlier keyframe.
embs = np.array([
    [1.0, 0.0],
    [0.7, 0.7],
    [0.0, 1.0],
])
question = QuestionEmbedding(vector=[0.6, 0.8], question_text="what happens?")
ranking = relevance_ranking(embs, question)
print("\nsimilarity:", np.round(ranking.similarity, 3).tolist())
print("rank_of_keyframe:", ranking.rank_of_keyframe.tolist())

# Token retention inside a frame: top-k by fused score, stable ties
# (lower index wins), output re-sorted to spatial order.
scores = np.array([0.2, 0.9, 0.4, 0.9, 0.1, 0.4])
print("\ntop-3 of", scores.tolist(), "->", select_topk(scores, 3).tolist())
