# coding: utf-8

# # Stage 1: clustered keyframe selection
#
# Frames that look alike cluster together in feature space. Stage 1 groups
# frame embeddings with k-means and keeps one representative per cluster —
# the frame nearest its centroid — then reorders the winners by time.

# In[1]:

import numpy as np

from ktv import SyntheticSpec, kmeans, nearest_to_centroid, select_keyframes
from ktv.synthetic import SyntheticVideo


# Plant 3 blobs across 60 frames so there is a known right answer.

# In[2]:

video = SyntheticVideo(SyntheticSpec(
    frame_count=60, cluster_count=3, blob_separation=50.0,
    token_count=8, token_dim=4, frame_dim=16, relevance_dim=8, seed=5,
))
points = video.bundle.cluster_embeddings
print("frame features:", points.shape)
print("planted labels:", np.array(video.truth.frame_labels))


# k-means is seeded and fully deterministic: same inputs, same seed,
# bit-identical model. Greedy k-means++ seeding keeps bad starts rare.

# In[3]:

model = kmeans(points, m=3, seed=0)
print("assignments:  ", model.assignments)
print("iterations:", model.iterations_run, " converged:", model.converged)
print("SSE history:", [round(s, 2) for s in model.sse_history])


# The SSE history is non-increasing — each Lloyd iteration can only
# improve the clustering. Assignments match the planted blobs up to
# relabeling.

# In[4]:

agree = len(set(zip(video.truth.frame_labels, model.assignments.tolist())))
print("distinct (planted, recovered) label pairs:", agree, "(3 = perfect)")


# One representative per cluster: the member frame closest to the
# centroid, ties going to the earlier frame.

# In[5]:

reps = nearest_to_centroid(model, points)
print("representative frame per cluster:", reps)


# `select_keyframes` wraps the whole stage: cluster, elect, sort by time.

# In[6]:

selection = select_keyframes(video.bundle, m=3, seed=0)
print("keyframes (temporal order):", selection.keyframe_indices)
print("cluster of each keyframe:  ", selection.cluster_of_keyframe)
print("effective m:", selection.effective_m)


# Asking for more clusters than distinct frames collapses gracefully:
# m is capped at the frame count, and degenerate duplicate-only clusters
# are dropped rather than fabricated.

# In[7]:

tiny = points[:4]
wide = kmeans(tiny, m=9, seed=0)
print("requested m=9 on 4 frames -> clusters:", wide.cluster_count)
