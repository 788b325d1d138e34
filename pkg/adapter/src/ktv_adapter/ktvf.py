"""Writer (and a small reader, used by tests) for the KTVF container.

This is an independent implementation of the published format, kept
deliberately separate from the consumer side so that the file layout --
not anyone's in-process API -- is the contract between the two packages:

    bytes 0-3    magic "KTVF"
    bytes 4-7    version, u32 little-endian (currently 1)
    bytes 8-15   header length H, u64 little-endian
    16 .. 16+H   UTF-8 JSON: {"video_id": str,
                              "tensors": [{"name", "shape", "dtype": "f32",
                                           "offset"}, ...],
                              "meta": {...}}
    rest         data section; tensors tightly packed in listed order,
                 IEEE 754 binary32 little-endian, row-major; offsets are
                 relative to the start of the data section.
"""

import json
import struct

import numpy as np

from .errors import ShapeError

MAGIC = b"KTVF"
VERSION = 1


def write_ktvf(path, video_id: str, tensors, meta: dict) -> None:
    """Write named float tensors to `path`.

    `tensors` is an ordered list of (name, array) pairs; arrays must be
    non-empty and finite (after conversion to float32).
    """
    entries = []
    payloads = []
    offset = 0
    for name, value in tensors:
        arr = np.ascontiguousarray(value, dtype="<f4")
        if arr.size == 0:
            raise ShapeError(f"tensor {name!r} is empty")
        if not np.all(np.isfinite(arr)):
            raise ShapeError(f"tensor {name!r} has non-finite entries")
        entries.append(
            {"name": name, "shape": list(arr.shape), "dtype": "f32", "offset": offset}
        )
        payloads.append(arr.tobytes())
        offset += arr.nbytes
    header = json.dumps(
        {"video_id": video_id, "tensors": entries, "meta": meta},
        separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for payload in payloads:
            fh.write(payload)


def read_ktvf(path):
    """Minimal reader: returns (video_id, {name: array}, meta).

    Used by the adapter's own tests to round-trip files; production
    consumers use the core pipeline's reader.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ShapeError(f"{path}: not a KTVF file")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise ShapeError(f"{path}: unsupported version {version}")
    (hlen,) = struct.unpack_from("<Q", blob, 8)
    header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    data = blob[16 + hlen :]
    out = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) * 4
        start = entry["offset"]
        out[entry["name"]] = np.frombuffer(
            data[start : start + n], dtype="<f4"
        ).reshape(shape)
    return header["video_id"], out, header.get("meta", {})
