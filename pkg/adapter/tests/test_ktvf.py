import json
import struct
import subprocess

import numpy as np
import pytest

from ktv_adapter import read_ktvf, write_ktvf
from ktv_adapter.errors import ShapeError

from conftest import CORE_CLI


def test_round_trip(tmp_path):
    path = tmp_path / "t.ktvf"
    a = np.arange(12, dtype=np.float64).reshape(3, 4)
    b = np.array([0.5, -1.5, 2.25])
    write_ktvf(path, "vid", [("alpha", a), ("beta", b)], {"k": 1})
    video_id, tensors, meta = read_ktvf(path)
    assert video_id == "vid"
    assert meta == {"k": 1}
    assert tensors["alpha"].shape == (3, 4)
    assert tensors["alpha"].dtype == np.dtype("<f4")
    np.testing.assert_array_equal(tensors["alpha"], a.astype("<f4"))
    np.testing.assert_array_equal(tensors["beta"], b.astype("<f4"))


def test_byte_layout(tmp_path):
    """Parse the container manually against the published layout."""
    path = tmp_path / "t.ktvf"
    a = np.ones((2, 3))
    b = np.full(5, 7.0)
    write_ktvf(path, "v", [("a", a), ("b", b)], {})
    blob = path.read_bytes()
    assert blob[:4] == b"KTVF"
    assert struct.unpack_from("<I", blob, 4)[0] == 1
    hlen = struct.unpack_from("<Q", blob, 8)[0]
    header = json.loads(blob[16 : 16 + hlen])
    assert header["video_id"] == "v"
    entries = header["tensors"]
    assert [e["name"] for e in entries] == ["a", "b"]
    assert entries[0]["offset"] == 0
    assert entries[1]["offset"] == 2 * 3 * 4  # tightly packed after `a`
    assert all(e["dtype"] == "f32" for e in entries)
    assert len(blob) == 16 + hlen + 24 + 20
    # payload bytes are little-endian f32
    assert struct.unpack_from("<f", blob, 16 + hlen)[0] == 1.0


@pytest.mark.parametrize(
    "bad",
    [np.array([1.0, np.nan]), np.array([np.inf]), np.empty((0, 3))],
    ids=["nan", "inf", "empty"],
)
def test_refuses_bad_tensors(tmp_path, bad):
    with pytest.raises(ShapeError):
        write_ktvf(tmp_path / "t.ktvf", "v", [("x", bad)], {})
    assert not (tmp_path / "t.ktvf").exists() or (tmp_path / "t.ktvf").stat().st_size == 0


def test_core_inspect_accepts_our_files(tmp_path):
    """The real contract: files we write pass the consumer's validation."""
    path = tmp_path / "t.ktvf"
    write_ktvf(
        path,
        "vid",
        [("cluster_embeddings", np.random.default_rng(0).normal(size=(4, 6)))],
        {"fps_hint": 3.0},
    )
    proc = subprocess.run(
        CORE_CLI + ["inspect", str(path)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert "cluster_embeddings" in proc.stdout
