"""ktv-adapter: export video features into KTVF feature directories."""

from .encoders import (
    PALETTE,
    ColorWordEncoder,
    PatchStatsEncoder,
    PatchTokenTower,
    resolve_frame_encoder,
    resolve_relevance_encoder,
    resolve_vision_tower,
)
from .errors import AdapterError, ConfigError, DecodeError, ShapeError
from .extract import ExtractionConfig, embed_question, extract
from .ktvf import read_ktvf, write_ktvf
from .video import sample_frames

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "ColorWordEncoder",
    "ConfigError",
    "DecodeError",
    "ExtractionConfig",
    "PALETTE",
    "PatchStatsEncoder",
    "PatchTokenTower",
    "ShapeError",
    "embed_question",
    "extract",
    "read_ktvf",
    "resolve_frame_encoder",
    "resolve_relevance_encoder",
    "resolve_vision_tower",
    "sample_frames",
    "write_ktvf",
    "__version__",
]
