import numpy as np
import pytest

from ktv_adapter import (
    ColorWordEncoder,
    PatchStatsEncoder,
    PatchTokenTower,
    resolve_frame_encoder,
    resolve_relevance_encoder,
    resolve_vision_tower,
)
from ktv_adapter.errors import ConfigError


def solid(rgb, height=48, width=64):
    frame = np.zeros((height, width, 3), dtype=np.uint8)
    frame[:, :] = rgb
    return frame


class TestRegistry:
    def test_resolves_offline_ids(self):
        assert resolve_frame_encoder("offline/patch-stats").dim == 78
        assert resolve_relevance_encoder("offline/color-words").dim == 8
        assert resolve_vision_tower("offline/patch-tokens", grid=4).token_count == 16

    @pytest.mark.parametrize(
        "resolver",
        [resolve_frame_encoder, resolve_relevance_encoder, resolve_vision_tower],
    )
    def test_unknown_id_lists_available(self, resolver):
        with pytest.raises(ConfigError, match="available"):
            resolver("nope/nothing")


class TestColorWords:
    def test_red_frame_embeds_as_red(self):
        enc = ColorWordEncoder()
        vec = enc.embed_frames([solid((255, 0, 0))])[0]
        assert vec.argmax() == 0  # palette position of "red"
        assert vec[0] == pytest.approx(1.0)

    def test_text_image_agreement(self):
        enc = ColorWordEncoder()
        red_img, blue_img = enc.embed_frames(
            [solid((255, 0, 0)), solid((0, 0, 255))]
        )
        question = enc.embed_text("Look at the RED screen.")
        assert question @ red_img > 0.9
        assert question @ red_img > question @ blue_img + 0.5

    def test_same_text_same_vector(self):
        enc = ColorWordEncoder()
        a = enc.embed_text("a blue and yellow flag")
        b = enc.embed_text("a blue and yellow flag")
        np.testing.assert_array_equal(a, b)

    def test_text_without_color_words_is_usable(self):
        vec = ColorWordEncoder().embed_text("what is happening here")
        assert np.isfinite(vec).all()
        assert np.linalg.norm(vec) == pytest.approx(1.0)

    def test_embeddings_are_unit_norm(self):
        enc = ColorWordEncoder()
        frames = [solid((255, 0, 0)), solid((10, 200, 90)), solid((128, 128, 128))]
        norms = np.linalg.norm(enc.embed_frames(frames), axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)


class TestPatchStats:
    def test_shape_and_range(self):
        embs = PatchStatsEncoder().embed_frames([solid((200, 40, 120))])
        assert embs.shape == (1, 78)
        assert np.all(embs >= 0) and np.all(embs <= 1.0 + 1e-12)

    def test_distinct_colors_far_apart(self):
        embs = PatchStatsEncoder().embed_frames(
            [solid((255, 0, 0)), solid((0, 0, 255)), solid((254, 0, 0))]
        )
        assert np.linalg.norm(embs[0] - embs[1]) > 10 * np.linalg.norm(
            embs[0] - embs[2]
        )

    def test_deterministic(self):
        frame = (np.arange(48 * 64 * 3, dtype=np.uint8).reshape(48, 64, 3)) % 251
        a = PatchStatsEncoder().embed_frames([frame])
        b = PatchStatsEncoder().embed_frames([frame])
        np.testing.assert_array_equal(a, b)


class TestPatchTokens:
    def test_shapes(self):
        features, query, keys = PatchTokenTower(grid=8).tokenize(solid((9, 9, 9)))
        assert features.shape == (64, 8)
        assert keys.shape == (64, 8)
        assert query.shape == (8,)

    def test_keys_are_centered_and_query_unit(self):
        rng = np.random.default_rng(3)
        frame = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
        features, query, keys = PatchTokenTower(grid=8).tokenize(frame)
        np.testing.assert_allclose(keys.mean(axis=0), 0.0, atol=1e-12)
        assert np.linalg.norm(query) == pytest.approx(1.0)
        np.testing.assert_allclose(keys, features - features.mean(axis=0))

    def test_no_zero_norm_tokens(self):
        # position channels keep every token nonzero even on a black frame
        features, _, _ = PatchTokenTower(grid=8).tokenize(solid((0, 0, 0)))
        assert np.linalg.norm(features, axis=1).min() > 0

    def test_constant_frame_is_finite(self):
        features, query, keys = PatchTokenTower(grid=8).tokenize(solid((77, 77, 77)))
        for arr in (features, query, keys):
            assert np.isfinite(arr).all()

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        frame = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
        tower = PatchTokenTower(grid=8)
        for a, b in zip(tower.tokenize(frame), tower.tokenize(frame)):
            np.testing.assert_array_equal(a, b)

    def test_attention_tracks_dominant_variation(self):
        # left half black, right half white: the principal axis separates
        # the halves, and attention concentrates on one of them
        frame = np.zeros((48, 64, 3), dtype=np.uint8)
        frame[:, 32:] = 255
        features, query, keys = PatchTokenTower(grid=8).tokenize(frame)
        logits = keys @ query / np.sqrt(8)
        left = logits.reshape(8, 8)[:, :4].mean()
        right = logits.reshape(8, 8)[:, 4:].mean()
        assert abs(left - right) > 0.1

    def test_frame_too_small(self):
        with pytest.raises(ConfigError, match="too small"):
            PatchTokenTower(grid=8).tokenize(solid((1, 1, 1), height=4, width=4))
