"""KTVF tensor container and the typed records the pipeline exchanges.

File layout, byte-exact:

    bytes 0-3    magic ``KTVF``
    bytes 4-7    format version, u32 little-endian (currently 1)
    bytes 8-15   header length in bytes, u64 little-endian
    ...          header: UTF-8 JSON (see below)
    ...          data section: tensor payloads tightly packed in header order

Header JSON::

    {"video_id": str,
     "tensors": [{"name": str, "shape": [int, ...], "dtype": "f32",
                  "offset": int}, ...],
     "meta": {...}}

``offset`` is a byte offset into the data section. Payloads are IEEE 754
binary32, little-endian, row-major, tightly packed. Recognized tensor
names: ``cluster_embeddings``, ``relevance_embeddings``, ``token_features``,
``importance_logits``, ``cls_query``, ``token_keys``, ``question_embedding``;
readers tolerate unrecognized names for forward compatibility.

Records are immutable after construction (arrays are marked read-only), so
reads are safe to share across threads.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"KTVF"
VERSION = 1

KNOWN_TENSORS = frozenset(
    {
        "cluster_embeddings",
        "relevance_embeddings",
        "token_features",
        "importance_logits",
        "cls_query",
        "token_keys",
        "question_embedding",
    }
)


def _freeze(name: str, value, ndim: int) -> np.ndarray:
    """Coerce to a read-only, C-contiguous float32 array and validate."""
    with np.errstate(over="ignore"):  # overflow surfaces as inf, caught below
        arr = np.ascontiguousarray(value, dtype=np.float32)
    if arr is value:
        # don't flip the caller's own array to read-only behind their back
        arr = arr.copy() if arr.flags.writeable else arr
    if arr.ndim != ndim:
        raise ValidationError(
            "bad_shape", f"{name} must be {ndim}-dimensional, got {arr.ndim}"
        )
    if arr.size == 0 or min(arr.shape) < 1:
        raise ValidationError("bad_shape", f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("non_finite", f"non-finite value in {name}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FeatureBundle:
    """Per-video frame-level embeddings.

    ``cluster_embeddings`` [T, d_f] feeds keyframe clustering;
    ``relevance_embeddings`` [T, d_q], when present, feeds question-relevance
    ranking. Arrays are stored as float32.
    """

    video_id: str
    cluster_embeddings: np.ndarray
    relevance_embeddings: np.ndarray | None = None
    fps_hint: float | None = None

    def __post_init__(self):
        cluster = _freeze("cluster_embeddings", self.cluster_embeddings, 2)
        object.__setattr__(self, "cluster_embeddings", cluster)
        if self.relevance_embeddings is not None:
            rel = _freeze("relevance_embeddings", self.relevance_embeddings, 2)
            if rel.shape[0] != cluster.shape[0]:
                raise ValidationError(
                    "bad_shape",
                    "relevance_embeddings row count "
                    f"{rel.shape[0]} != frame count {cluster.shape[0]}",
                )
            object.__setattr__(self, "relevance_embeddings", rel)
        if self.fps_hint is not None and not self.fps_hint > 0:
            raise ValidationError("bad_value", "fps_hint must be positive")

    @property
    def frame_count(self) -> int:
        return self.cluster_embeddings.shape[0]


@dataclass(frozen=True)
class TokenFrameRecord:
    """One frame's token feature matrix plus its CLS-attention inputs.

    Exactly one attention-input variant must be populated: either
    ``importance_logits`` [L], or ``cls_query`` [d_t] together with
    ``token_keys`` [L, d_t].
    """

    frame_index: int
    token_features: np.ndarray
    importance_logits: np.ndarray | None = None
    cls_query: np.ndarray | None = None
    token_keys: np.ndarray | None = None

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValidationError("bad_value", "frame_index must be >= 0")
        feats = _freeze("token_features", self.token_features, 2)
        object.__setattr__(self, "token_features", feats)
        has_logits = self.importance_logits is not None
        has_query = self.cls_query is not None or self.token_keys is not None
        if has_logits and has_query:
            raise ValidationError(
                "ambiguous_attention_inputs", "ambiguous attention inputs"
            )
        if not has_logits and not has_query:
            raise ValidationError(
                "missing_attention_inputs", "missing attention inputs"
            )
        if has_logits:
            logits = _freeze("importance_logits", self.importance_logits, 1)
            if logits.shape[0] != feats.shape[0]:
                raise ValidationError(
                    "bad_shape",
                    f"importance_logits length {logits.shape[0]} != "
                    f"token count {feats.shape[0]}",
                )
            object.__setattr__(self, "importance_logits", logits)
        else:
            if self.cls_query is None or self.token_keys is None:
                raise ValidationError(
                    "missing_attention_inputs",
                    "cls_query and token_keys must be supplied together",
                )
            query = _freeze("cls_query", self.cls_query, 1)
            keys = _freeze("token_keys", self.token_keys, 2)
            if keys.shape != feats.shape:
                raise ValidationError(
                    "bad_shape",
                    f"token_keys shape {keys.shape} != "
                    f"token_features shape {feats.shape}",
                )
            if query.shape[0] != keys.shape[1]:
                raise ValidationError(
                    "bad_shape",
                    f"cls_query length {query.shape[0]} != "
                    f"key width {keys.shape[1]}",
                )
            object.__setattr__(self, "cls_query", query)
            object.__setattr__(self, "token_keys", keys)

    @property
    def token_count(self) -> int:
        return self.token_features.shape[0]

    @property
    def attention_variant(self) -> str:
        """``"logits"`` or ``"query_keys"``."""
        return "logits" if self.importance_logits is not None else "query_keys"


@dataclass(frozen=True)
class QuestionEmbedding:
    """A question vector in the relevance space."""

    vector: np.ndarray
    question_text: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "vector", _freeze("question_embedding", self.vector, 1))

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


# ---------------------------------------------------------------------------
# low-level container IO
# ---------------------------------------------------------------------------


def write_tensors(
    path,
    video_id: str,
    tensors: list[tuple[str, np.ndarray]],
    meta: dict | None = None,
) -> None:
    """Write named float32 tensors to ``path`` in KTVF layout."""
    entries = []
    offset = 0
    payloads = []
    for name, arr in tensors:
        arr = np.ascontiguousarray(arr, dtype="<f4")
        entries.append(
            {"name": name, "shape": list(arr.shape), "dtype": "f32", "offset": offset}
        )
        offset += arr.nbytes
        payloads.append(arr)
    header = {"video_id": video_id, "tensors": entries, "meta": meta or {}}
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for arr in payloads:
            fh.write(arr.tobytes())


def _parse_header(blob: bytes) -> tuple[dict, int]:
    if len(blob) < 16:
        raise FormatError("truncated", f"file holds {len(blob)} bytes, need >= 16")
    if blob[:4] != MAGIC:
        raise FormatError("bad_magic", f"bad magic {blob[:4]!r}")
    version = struct.unpack("<I", blob[4:8])[0]
    if version != VERSION:
        raise FormatError("unsupported_version", f"unsupported version {version}")
    header_len = struct.unpack("<Q", blob[8:16])[0]
    if 16 + header_len > len(blob):
        raise FormatError("truncated", "header extends past end of file")
    try:
        header = json.loads(blob[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError("bad_header", f"header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict):
        raise FormatError("bad_header", "header must be a JSON object")
    return header, 16 + header_len


def _check_entry(entry) -> tuple[str, tuple[int, ...], int]:
    if not isinstance(entry, dict):
        raise FormatError("bad_header", "tensor entry must be an object")
    name = entry.get("name")
    shape = entry.get("shape")
    dtype = entry.get("dtype")
    offset = entry.get("offset")
    if not isinstance(name, str) or not name:
        raise FormatError("bad_header", "tensor entry lacks a name")
    if dtype != "f32":
        raise FormatError("bad_header", f"unsupported dtype {dtype!r} for {name}")
    if (
        not isinstance(shape, list)
        or not shape
        or not all(isinstance(d, int) and d >= 1 for d in shape)
    ):
        raise FormatError("bad_header", f"bad shape {shape!r} for {name}")
    if not isinstance(offset, int) or offset < 0:
        raise FormatError("bad_header", f"bad offset {offset!r} for {name}")
    return name, tuple(shape), offset


def read_tensors(path) -> tuple[str, dict[str, np.ndarray], dict]:
    """Read a KTVF file; returns (video_id, tensors by name, meta)."""
    blob = Path(path).read_bytes()
    header, data_start = _parse_header(blob)
    video_id = header.get("video_id")
    if not isinstance(video_id, str):
        raise FormatError("bad_header", "video_id missing or not a string")
    raw_entries = header.get("tensors")
    if not isinstance(raw_entries, list):
        raise FormatError("bad_header", "tensors must be a list")
    meta = header.get("meta", {})
    if not isinstance(meta, dict):
        raise FormatError("bad_header", "meta must be an object")

    payload = blob[data_start:]
    tensors: dict[str, np.ndarray] = {}
    expected_offset = 0
    for raw in raw_entries:
        name, shape, offset = _check_entry(raw)
        if name in tensors:
            raise FormatError("bad_header", f"duplicate tensor {name!r}")
        if offset != expected_offset:
            raise FormatError(
                "payload_length_mismatch",
                f"tensor {name!r} declares offset {offset}, "
                f"tight packing requires {expected_offset}",
            )
        count = math.prod(shape)
        expected_offset += count * 4
        if expected_offset > len(payload):
            raise FormatError(
                "payload_length_mismatch",
                f"payload length mismatch: header declares >= {expected_offset} "
                f"bytes, data section holds {len(payload)}",
            )
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset)
        tensors[name] = arr.reshape(shape)
    if expected_offset != len(payload):
        raise FormatError(
            "payload_length_mismatch",
            f"payload length mismatch: header declares {expected_offset} bytes, "
            f"data section holds {len(payload)}",
        )
    return video_id, tensors, meta


def describe(path) -> dict:
    """Header summary for a KTVF file: shapes, meta, unknown-name warnings."""
    video_id, tensors, meta = read_tensors(path)
    warnings = [
        f"unknown tensor name {name!r}" for name in tensors if name not in KNOWN_TENSORS
    ]
    return {
        "video_id": video_id,
        "version": VERSION,
        "tensors": [
            {"name": name, "shape": list(arr.shape), "dtype": "f32"}
            for name, arr in tensors.items()
        ],
        "meta": meta,
        "warnings": warnings,
    }


# ---------------------------------------------------------------------------
# typed readers / writers
# ---------------------------------------------------------------------------


def write_bundle(bundle: FeatureBundle, path) -> None:
    tensors = [("cluster_embeddings", bundle.cluster_embeddings)]
    if bundle.relevance_embeddings is not None:
        tensors.append(("relevance_embeddings", bundle.relevance_embeddings))
    meta = {} if bundle.fps_hint is None else {"fps_hint": bundle.fps_hint}
    write_tensors(path, bundle.video_id, tensors, meta)


def read_bundle(path) -> FeatureBundle:
    video_id, tensors, meta = read_tensors(path)
    if "cluster_embeddings" not in tensors:
        raise ValidationError(
            "missing_tensor", f"{path}: bundle lacks 'cluster_embeddings'"
        )
    fps = meta.get("fps_hint")
    if fps is not None and not isinstance(fps, (int, float)):
        raise ValidationError("bad_value", "fps_hint must be a number")
    return FeatureBundle(
        video_id=video_id,
        cluster_embeddings=tensors["cluster_embeddings"],
        relevance_embeddings=tensors.get("relevance_embeddings"),
        fps_hint=None if fps is None else float(fps),
    )


def write_token_frame(record: TokenFrameRecord, path) -> None:
    tensors = [("token_features", record.token_features)]
    if record.attention_variant == "logits":
        tensors.append(("importance_logits", record.importance_logits))
    else:
        tensors.append(("cls_query", record.cls_query))
        tensors.append(("token_keys", record.token_keys))
    write_tensors(path, "", tensors, {"frame_index": record.frame_index})


def read_token_frame(path) -> TokenFrameRecord:
    _, tensors, meta = read_tensors(path)
    if "token_features" not in tensors:
        raise ValidationError(
            "missing_tensor", f"{path}: token frame lacks 'token_features'"
        )
    frame_index = meta.get("frame_index")
    if not isinstance(frame_index, int) or frame_index < 0:
        raise ValidationError(
            "bad_value", f"{path}: frame_index missing or invalid in meta"
        )
    return TokenFrameRecord(
        frame_index=frame_index,
        token_features=tensors["token_features"],
        importance_logits=tensors.get("importance_logits"),
        cls_query=tensors.get("cls_query"),
        token_keys=tensors.get("token_keys"),
    )


def write_question(question: QuestionEmbedding, path) -> None:
    meta = {}
    if question.question_text is not None:
        meta["question_text"] = question.question_text
    write_tensors(path, "", [("question_embedding", question.vector)], meta)


def read_question(path) -> QuestionEmbedding:
    _, tensors, meta = read_tensors(path)
    if "question_embedding" not in tensors:
        raise ValidationError(
            "missing_tensor", f"{path}: file lacks 'question_embedding'"
        )
    text = meta.get("question_text")
    if text is not None and not isinstance(text, str):
        raise ValidationError("bad_value", "question_text must be a string")
    return QuestionEmbedding(vector=tensors["question_embedding"], question_text=text)


def token_frame_filename(frame_index: int) -> str:
    """Naming convention for per-frame token files."""
    return f"frame_{frame_index:06d}.ktvf"
