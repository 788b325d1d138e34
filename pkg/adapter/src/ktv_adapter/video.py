"""Video decoding and frame sampling."""

import numpy as np
import cv2

from .errors import DecodeError


def sample_frames(video_path, sample_fps: float):
    """Decode `video_path` and return (frames, native_fps).

    Frames are RGB uint8 [H, W, 3], taken at `sample_fps`: sample k maps
    to source index round(k * native_fps / sample_fps). When the
    requested rate exceeds the native rate the mapping would repeat
    source frames; repeats are skipped, so the effective rate caps at
    the native rate rather than duplicating data.
    """
    cap = cv2.VideoCapture(str(video_path))
    if not cap.isOpened():
        raise DecodeError(f"could not open video: {video_path}")
    try:
        native_fps = cap.get(cv2.CAP_PROP_FPS)
        if not native_fps or native_fps <= 0:
            native_fps = 30.0  # containers without a rate: assume 30
        stride = native_fps / sample_fps

        frames = []
        k = 0  # next sample number
        target = 0  # its source index
        src = 0
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            if src == target:
                frames.append(
                    np.ascontiguousarray(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB))
                )
                while target == src:  # collapse duplicate targets
                    k += 1
                    target = int(round(k * stride))
            src += 1
    finally:
        cap.release()

    if not frames:
        raise DecodeError(f"no frames decoded from {video_path}")
    return frames, float(native_fps)
