"""KTVF container: round-trips are bit-exact, corrupt files fail with
typed errors, never a crash or a silent misparse."""

import json
import struct

import numpy as np
import pytest

from ktv import (
    FeatureBundle,
    FormatError,
    QuestionEmbedding,
    TokenFrameRecord,
    ValidationError,
    describe,
    read_bundle,
    read_question,
    read_tensors,
    read_token_frame,
    write_bundle,
    write_question,
    write_tensors,
    write_token_frame,
)

rng = np.random.default_rng(42)


def test_bundle_round_trip_bit_exact(tmp_path):
    bundle = FeatureBundle(
        video_id="clip-01",
        cluster_embeddings=rng.normal(size=(4, 2)),
        relevance_embeddings=rng.normal(size=(4, 3)),
        fps_hint=3.0,
    )
    path = tmp_path / "bundle.ktvf"
    write_bundle(bundle, path)
    back = read_bundle(path)
    assert back.video_id == "clip-01"
    assert back.fps_hint == 3.0
    assert back.cluster_embeddings.tobytes() == bundle.cluster_embeddings.tobytes()
    assert back.relevance_embeddings.tobytes() == bundle.relevance_embeddings.tobytes()


def test_bundle_without_relevance(tmp_path):
    bundle = FeatureBundle(video_id="x", cluster_embeddings=np.ones((2, 5)))
    write_bundle(bundle, tmp_path / "b.ktvf")
    back = read_bundle(tmp_path / "b.ktvf")
    assert back.relevance_embeddings is None
    assert back.fps_hint is None
    assert back.frame_count == 2


def test_token_frame_round_trip_logits(tmp_path):
    record = TokenFrameRecord(
        frame_index=7,
        token_features=rng.normal(size=(6, 4)),
        importance_logits=rng.normal(size=6),
    )
    write_token_frame(record, tmp_path / "f.ktvf")
    back = read_token_frame(tmp_path / "f.ktvf")
    assert back.frame_index == 7
    assert back.attention_variant == "logits"
    assert back.token_features.tobytes() == record.token_features.tobytes()
    assert back.importance_logits.tobytes() == record.importance_logits.tobytes()


def test_token_frame_round_trip_query_keys(tmp_path):
    record = TokenFrameRecord(
        frame_index=0,
        token_features=rng.normal(size=(5, 3)),
        cls_query=rng.normal(size=3),
        token_keys=rng.normal(size=(5, 3)),
    )
    write_token_frame(record, tmp_path / "f.ktvf")
    back = read_token_frame(tmp_path / "f.ktvf")
    assert back.attention_variant == "query_keys"
    assert back.cls_query.tobytes() == record.cls_query.tobytes()
    assert back.token_keys.tobytes() == record.token_keys.tobytes()


def test_question_round_trip(tmp_path):
    q = QuestionEmbedding(vector=rng.normal(size=9), question_text="what happens?")
    write_question(q, tmp_path / "q.ktvf")
    back = read_question(tmp_path / "q.ktvf")
    assert back.question_text == "what happens?"
    assert back.vector.tobytes() == q.vector.tobytes()


def test_large_bundle_payload_size(tmp_path):
    # header + tightly packed f32 payload, nothing else
    T, d = 10800, 768
    bundle = FeatureBundle(video_id="hour", cluster_embeddings=np.zeros((T, d)))
    path = tmp_path / "big.ktvf"
    write_bundle(bundle, path)
    blob = path.read_bytes()
    header_len = struct.unpack("<Q", blob[8:16])[0]
    assert len(blob) == 16 + header_len + T * d * 4


# --- validation of in-memory records -------------------------------------


def test_non_finite_rejected():
    bad = np.ones((3, 2))
    bad[1, 0] = np.nan
    with pytest.raises(ValidationError, match="non-finite value"):
        FeatureBundle(video_id="x", cluster_embeddings=bad)


def test_float64_overflow_to_inf_rejected():
    # finite in float64, infinite once cast to the container's float32
    bad = np.full((2, 2), 1e200)
    with pytest.raises(ValidationError, match="non-finite value"):
        FeatureBundle(video_id="x", cluster_embeddings=bad)


def test_relevance_row_count_mismatch():
    with pytest.raises(ValidationError, match="row count"):
        FeatureBundle(
            video_id="x",
            cluster_embeddings=np.ones((3, 2)),
            relevance_embeddings=np.ones((4, 2)),
        )


def test_both_attention_variants_rejected():
    with pytest.raises(ValidationError, match="ambiguous attention inputs"):
        TokenFrameRecord(
            frame_index=0,
            token_features=np.ones((2, 2)),
            importance_logits=np.ones(2),
            cls_query=np.ones(2),
            token_keys=np.ones((2, 2)),
        )


def test_neither_attention_variant_rejected():
    with pytest.raises(ValidationError, match="attention inputs"):
        TokenFrameRecord(frame_index=0, token_features=np.ones((2, 2)))


def test_attention_shape_mismatches():
    with pytest.raises(ValidationError, match="importance_logits"):
        TokenFrameRecord(
            frame_index=0, token_features=np.ones((3, 2)), importance_logits=np.ones(2)
        )
    with pytest.raises(ValidationError, match="token_keys"):
        TokenFrameRecord(
            frame_index=0,
            token_features=np.ones((3, 2)),
            cls_query=np.ones(2),
            token_keys=np.ones((4, 2)),
        )


def test_record_arrays_are_frozen():
    record = TokenFrameRecord(
        frame_index=1, token_features=np.ones((2, 2)), importance_logits=np.ones(2)
    )
    with pytest.raises(ValueError):
        record.token_features[0, 0] = 9.0


def test_freeze_does_not_mutate_caller_array():
    mine = np.ones((2, 2), dtype=np.float32)
    FeatureBundle(video_id="x", cluster_embeddings=mine)
    mine[0, 0] = 5.0  # still writable


# --- corrupted files ------------------------------------------------------


def _valid_file(tmp_path):
    path = tmp_path / "ok.ktvf"
    write_tensors(
        path, "vid", [("cluster_embeddings", np.arange(8, dtype=np.float32).reshape(4, 2))]
    )
    return path


def _mutate(path, out, offset, data: bytes):
    blob = bytearray(path.read_bytes())
    blob[offset : offset + len(data)] = data
    out.write_bytes(bytes(blob))
    return out


def test_bad_magic(tmp_path):
    bad = _mutate(_valid_file(tmp_path), tmp_path / "bad.ktvf", 0, b"XXXX")
    with pytest.raises(FormatError, match="bad magic") as err:
        read_tensors(bad)
    assert err.value.code == "bad_magic"


def test_unsupported_version(tmp_path):
    bad = _mutate(_valid_file(tmp_path), tmp_path / "bad.ktvf", 4, struct.pack("<I", 9))
    with pytest.raises(FormatError) as err:
        read_tensors(bad)
    assert err.value.code == "unsupported_version"


def test_truncated_header(tmp_path):
    # declared header length runs past the end of the file
    bad = _mutate(
        _valid_file(tmp_path), tmp_path / "bad.ktvf", 8, struct.pack("<Q", 1 << 30)
    )
    with pytest.raises(FormatError) as err:
        read_tensors(bad)
    assert err.value.code == "truncated"


def test_tiny_file(tmp_path):
    path = tmp_path / "tiny.ktvf"
    path.write_bytes(b"KTVF\x01")
    with pytest.raises(FormatError) as err:
        read_tensors(path)
    assert err.value.code == "truncated"


def test_header_not_json(tmp_path):
    header = b"not json at all!"
    path = tmp_path / "bad.ktvf"
    path.write_bytes(b"KTVF" + struct.pack("<I", 1) + struct.pack("<Q", len(header)) + header)
    with pytest.raises(FormatError) as err:
        read_tensors(path)
    assert err.value.code == "bad_header"


def _craft(tmp_path, header: dict, payload: bytes):
    raw = json.dumps(header, separators=(",", ":")).encode()
    path = tmp_path / "crafted.ktvf"
    path.write_bytes(b"KTVF" + struct.pack("<I", 1) + struct.pack("<Q", len(raw)) + raw + payload)
    return path


def _header(**overrides):
    entry = {"name": "token_features", "shape": [4, 2], "dtype": "f32", "offset": 0}
    entry.update(overrides)
    return {"video_id": "v", "tensors": [entry], "meta": {}}


def test_short_payload(tmp_path):
    # header declares 4x2 but only 7 floats follow
    path = _craft(tmp_path, _header(), np.zeros(7, dtype="<f4").tobytes())
    with pytest.raises(FormatError, match="payload length mismatch") as err:
        read_tensors(path)
    assert err.value.code == "payload_length_mismatch"


def test_long_payload(tmp_path):
    path = _craft(tmp_path, _header(), np.zeros(9, dtype="<f4").tobytes())
    with pytest.raises(FormatError) as err:
        read_tensors(path)
    assert err.value.code == "payload_length_mismatch"


def test_offset_not_tightly_packed(tmp_path):
    path = _craft(tmp_path, _header(offset=4), np.zeros(9, dtype="<f4").tobytes())
    with pytest.raises(FormatError) as err:
        read_tensors(path)
    assert err.value.code == "payload_length_mismatch"


@pytest.mark.parametrize(
    "mangle",
    [
        {"dtype": "f64"},
        {"shape": [4, 0]},
        {"shape": "4x2"},
        {"shape": []},
        {"name": ""},
        {"offset": -4},
        {"offset": "zero"},
    ],
)
def test_bad_tensor_entries(tmp_path, mangle):
    path = _craft(tmp_path, _header(**mangle), np.zeros(8, dtype="<f4").tobytes())
    with pytest.raises(FormatError) as err:
        read_tensors(path)
    assert err.value.code == "bad_header"


def test_duplicate_tensor_name(tmp_path):
    entry = {"name": "token_features", "shape": [2, 2], "dtype": "f32", "offset": 0}
    twin = dict(entry, offset=16)
    header = {"video_id": "v", "tensors": [entry, twin], "meta": {}}
    path = _craft(tmp_path, header, np.zeros(8, dtype="<f4").tobytes())
    with pytest.raises(FormatError) as err:
        read_tensors(path)
    assert err.value.code == "bad_header"


def test_missing_video_id(tmp_path):
    header = {"tensors": [], "meta": {}}
    path = _craft(tmp_path, header, b"")
    with pytest.raises(FormatError) as err:
        read_tensors(path)
    assert err.value.code == "bad_header"


def test_unknown_tensor_names_tolerated(tmp_path):
    path = tmp_path / "fwd.ktvf"
    write_tensors(
        path,
        "v",
        [
            ("cluster_embeddings", np.ones((2, 2), dtype=np.float32)),
            ("mystery_feature", np.ones((1, 1), dtype=np.float32)),
        ],
    )
    _, tensors, _ = read_tensors(path)
    assert "mystery_feature" in tensors
    info = describe(path)
    assert any("mystery_feature" in w for w in info["warnings"])


def test_bundle_file_missing_required_tensor(tmp_path):
    path = tmp_path / "noclu.ktvf"
    write_tensors(path, "v", [("relevance_embeddings", np.ones((2, 2), dtype=np.float32))])
    with pytest.raises(ValidationError, match="cluster_embeddings"):
        read_bundle(path)


def test_token_frame_requires_frame_index_meta(tmp_path):
    path = tmp_path / "nofi.ktvf"
    write_tensors(
        path,
        "",
        [
            ("token_features", np.ones((2, 2), dtype=np.float32)),
            ("importance_logits", np.ones(2, dtype=np.float32)),
        ],
    )
    with pytest.raises(ValidationError, match="frame_index"):
        read_token_frame(path)
