import sys

import cv2
import numpy as np
import pytest

# The core pipeline is exercised strictly through its CLI; module form
# avoids depending on the scripts directory being on PATH.
CORE_CLI = [sys.executable, "-m", "ktv.cli"]


def write_clip(path, segments, fps=6.0, size=(64, 48)):
    """Write an mp4 of solid-color segments.

    `segments` is a list of ((r, g, b), frame_count) pairs. Colors should
    be saturated: mp4 encoding is lossy, and tests classify colors rather
    than compare exact pixel values.
    """
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"mp4v"), fps, size
    )
    assert writer.isOpened(), "cv2 could not open a VideoWriter"
    width, height = size
    for rgb, count in segments:
        frame = np.zeros((height, width, 3), dtype=np.uint8)
        frame[:, :] = rgb[::-1]  # cv2 writes BGR
        for _ in range(count):
            writer.write(frame)
    writer.release()
    return path


@pytest.fixture
def red_blue_clip(tmp_path):
    """12 frames at 6 fps: six red then six blue."""
    return write_clip(
        tmp_path / "red_blue.mp4",
        [((220, 30, 30), 6), ((30, 30, 220), 6)],
    )
