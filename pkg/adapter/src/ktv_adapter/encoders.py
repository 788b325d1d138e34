"""Encoder backends and their registry.

Three encoder roles feed an extraction:

* frame encoder  -> cluster_embeddings, one vector per sampled frame;
* relevance encoder -> relevance_embeddings plus the question embedding,
  image and text mapped into one shared space;
* vision tower   -> per-frame token features and CLS-attention inputs.

The bundled backends are fully offline and deterministic: documented
pixel statistics, no model downloads, identical bytes on re-run. Real
pretrained encoders (DINOv2 / CLIP / a VLM vision tower) plug in by
implementing the same protocols and registering an id; the extraction
and file-writing machinery does not change.

All backends receive frames as RGB uint8 arrays of shape [H, W, 3].
"""

from typing import Protocol

import cv2
import numpy as np

from .errors import ConfigError

# Named anchor colors shared by the image and text sides of the
# relevance space. Order defines the embedding dimensions.
PALETTE = (
    ("red", (255, 0, 0)),
    ("green", (0, 255, 0)),
    ("blue", (0, 0, 255)),
    ("yellow", (255, 255, 0)),
    ("cyan", (0, 255, 255)),
    ("magenta", (255, 0, 255)),
    ("white", (255, 255, 255)),
    ("black", (0, 0, 0)),
)
_ANCHORS = np.array([rgb for _, rgb in PALETTE], dtype=np.float64)
_COLOR_INDEX = {name: i for i, (name, _) in enumerate(PALETTE)}


class FrameEncoder(Protocol):
    name: str
    dim: int

    def embed_frames(self, frames) -> np.ndarray: ...


class RelevanceEncoder(Protocol):
    name: str
    dim: int

    def embed_frames(self, frames) -> np.ndarray: ...

    def embed_text(self, text: str) -> np.ndarray: ...


class VisionTower(Protocol):
    name: str
    token_dim: int

    def tokenize(self, frame) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...


def _palette_histogram(frame: np.ndarray) -> np.ndarray:
    """Fraction of pixels nearest (L2 in RGB) to each anchor color."""
    pixels = frame.reshape(-1, 3).astype(np.float64)
    # squared distances to the 8 anchors; argmin picks the color class
    d2 = ((pixels[:, None, :] - _ANCHORS[None, :, :]) ** 2).sum(axis=2)
    nearest = d2.argmin(axis=1)
    counts = np.bincount(nearest, minlength=len(PALETTE)).astype(np.float64)
    return counts / pixels.shape[0]


class PatchStatsEncoder:
    """Frame encoder: 8x8 grayscale thumbnail + channel stats + palette
    histogram. 78 dimensions, all in [0, 1]."""

    name = "offline/patch-stats"
    dim = 78

    def embed_frames(self, frames) -> np.ndarray:
        out = np.empty((len(frames), self.dim))
        for t, frame in enumerate(frames):
            gray = cv2.cvtColor(frame, cv2.COLOR_RGB2GRAY)
            thumb = cv2.resize(gray, (8, 8), interpolation=cv2.INTER_AREA)
            rgb = frame.reshape(-1, 3).astype(np.float64)
            out[t] = np.concatenate([
                thumb.astype(np.float64).ravel() / 255.0,
                rgb.mean(axis=0) / 255.0,
                rgb.std(axis=0) / 255.0,
                _palette_histogram(frame),
            ])
        return out


class ColorWordEncoder:
    """Relevance encoder over a shared color-word space.

    Images embed as their palette histogram; text embeds as counts of
    palette color names appearing in it (with tiny uniform smoothing so
    any non-empty text yields a usable vector). Both sides are
    L2-normalized, so cosine against a question like "the red screen"
    ranks predominantly red frames first.
    """

    name = "offline/color-words"
    dim = len(PALETTE)

    def embed_frames(self, frames) -> np.ndarray:
        out = np.empty((len(frames), self.dim))
        for t, frame in enumerate(frames):
            hist = _palette_histogram(frame)
            out[t] = hist / np.linalg.norm(hist)
        return out

    def embed_text(self, text: str) -> np.ndarray:
        words = text.lower().split()
        counts = np.full(self.dim, 1e-3)
        for word in words:
            stripped = "".join(ch for ch in word if ch.isalpha())
            if stripped in _COLOR_INDEX:
                counts[_COLOR_INDEX[stripped]] += 1.0
        return counts / np.linalg.norm(counts)


class PatchTokenTower:
    """Vision tower: one token per grid cell, 8 statistics each.

    Token features: [R mean, G mean, B mean, gray std, |dx| mean,
    |dy| mean, row center, col center] -- intensities scaled to [0, 1],
    positions as cell centers in [0, 1]. Keys are the features centered
    across the frame's tokens; the CLS query is the leading principal
    axis of the token statistics (sign fixed so its largest-magnitude
    entry is positive), so attention highlights the patches at the
    positive extreme of the frame's dominant variation.
    """

    name = "offline/patch-tokens"
    token_dim = 8

    def __init__(self, grid: int = 8):
        if grid < 1:
            raise ConfigError("token grid must be >= 1")
        self.grid = grid
        self.token_count = grid * grid

    def tokenize(self, frame):
        g = self.grid
        height, width = frame.shape[:2]
        if height < g or width < g:
            raise ConfigError(
                f"frame {height}x{width} too small for a {g}x{g} token grid"
            )
        gray = cv2.cvtColor(frame, cv2.COLOR_RGB2GRAY).astype(np.float64)
        dx = np.abs(cv2.Sobel(gray, cv2.CV_64F, 1, 0, ksize=3))
        dy = np.abs(cv2.Sobel(gray, cv2.CV_64F, 0, 1, ksize=3))
        rgb = frame.astype(np.float64)

        features = np.empty((self.token_count, self.token_dim))
        for i in range(g):
            r0, r1 = height * i // g, height * (i + 1) // g
            for j in range(g):
                c0, c1 = width * j // g, width * (j + 1) // g
                cell = rgb[r0:r1, c0:c1].reshape(-1, 3)
                features[i * g + j] = [
                    cell[:, 0].mean() / 255.0,
                    cell[:, 1].mean() / 255.0,
                    cell[:, 2].mean() / 255.0,
                    gray[r0:r1, c0:c1].std() / 255.0,
                    dx[r0:r1, c0:c1].mean() / 255.0,
                    dy[r0:r1, c0:c1].mean() / 255.0,
                    (i + 0.5) / g,
                    (j + 0.5) / g,
                ]

        keys = features - features.mean(axis=0)
        cov = keys.T @ keys / self.token_count
        _, vecs = np.linalg.eigh(cov)
        query = vecs[:, -1]
        if query[np.argmax(np.abs(query))] < 0:
            query = -query
        return features, query, keys


_FRAME_ENCODERS = {PatchStatsEncoder.name: PatchStatsEncoder}
_RELEVANCE_ENCODERS = {ColorWordEncoder.name: ColorWordEncoder}
_VISION_TOWERS = {PatchTokenTower.name: PatchTokenTower}


def _lookup(table: dict, kind: str, name: str):
    if name not in table:
        known = ", ".join(sorted(table))
        raise ConfigError(f"unknown {kind} id {name!r} (available: {known})")
    return table[name]


def resolve_frame_encoder(name: str) -> FrameEncoder:
    return _lookup(_FRAME_ENCODERS, "frame encoder", name)()


def resolve_relevance_encoder(name: str) -> RelevanceEncoder:
    return _lookup(_RELEVANCE_ENCODERS, "relevance encoder", name)()


def resolve_vision_tower(name: str, grid: int = 8) -> VisionTower:
    return _lookup(_VISION_TOWERS, "vision tower", name)(grid=grid)
