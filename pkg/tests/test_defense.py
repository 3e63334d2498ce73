"""Blur detection: Laplacian scoring and LBP sharpness segmentation."""

import numpy as np
import pytest

from depthlens.defense import (DEFAULT_LBP_SCORE_THRESHOLD, DEFAULT_VARLAP_THRESHOLD,
                               laplacian, lbp_sharpness_map, segment_blur,
                               variance_of_laplacian, varlap_verdict)
from depthlens.errors import TooSmall
from depthlens.imaging import (BlurPlacement, LensKind, LensRegion, RasterImage,
                               apply_attack_transform, box_blur, level_to_profile,
                               region_masks, AttackProfile)

from helpers import noise_image, textured_image


def impulse_image():
    data = np.zeros((5, 5), np.uint8)
    data[2, 2] = 9
    return RasterImage(data)


class TestLaplacian:
    def test_constant_zero(self):
        img = RasterImage(np.full((10, 10), 99, np.uint8))
        assert (laplacian(img) == 0).all()

    def test_impulse_pattern(self):
        lap = laplacian(impulse_image())
        assert lap.shape == (3, 3)
        assert lap[1, 1] == -36
        assert lap[0, 1] == lap[1, 0] == lap[1, 2] == lap[2, 1] == 9
        assert lap[0, 0] == lap[0, 2] == lap[2, 0] == lap[2, 2] == 0

    def test_linear_ramp_zero(self):
        ramp = np.tile(np.arange(0, 60, 3, dtype=np.uint8), (12, 1))
        assert (laplacian(RasterImage(ramp)) == 0).all()

    def test_too_small(self):
        with pytest.raises(TooSmall):
            laplacian(RasterImage(np.zeros((2, 5), np.uint8)))

    def test_rgb_converted_by_luma(self):
        rng = np.random.default_rng(2)
        rgb = RasterImage(rng.integers(0, 256, (12, 12, 3)).astype(np.uint8))
        assert np.array_equal(laplacian(rgb), laplacian(rgb.to_gray()))


class TestVarianceOfLaplacian:
    def test_constant_zero(self):
        assert variance_of_laplacian(RasterImage(np.full((8, 8), 7, np.uint8))) == 0.0

    def test_impulse_fixture_exact(self):
        assert variance_of_laplacian(impulse_image()) == 180.0

    def test_blur_strictly_lowers_score_random(self):
        full = np.ones((96, 96), bool)
        for seed in range(50):
            img = noise_image((96, 96), seed=seed)
            blurred = box_blur(img, full, 2)
            assert variance_of_laplacian(blurred) < variance_of_laplacian(img)

    def test_verdict_thresholding(self):
        sharp = noise_image((96, 96), seed=0)
        verdict = varlap_verdict(sharp, DEFAULT_VARLAP_THRESHOLD)
        assert not verdict.blurred
        assert verdict.blurred == (verdict.score < verdict.threshold)
        blurred_img = box_blur(sharp, np.ones((96, 96), bool), 4)
        verdict = varlap_verdict(blurred_img, DEFAULT_VARLAP_THRESHOLD)
        assert verdict.blurred

    def test_report_line_format(self):
        line = varlap_verdict(noise_image((32, 32), seed=1)).report_line()
        assert line.startswith("verdict=")
        assert "score=" in line and "threshold=" in line


class TestLbpSharpness:
    def test_constant_tile_zero(self):
        img = RasterImage(np.full((64, 64), 128, np.uint8))
        assert (lbp_sharpness_map(img, window=32).scores == 0.0).all()

    def test_checkerboard_high(self):
        cb = (np.indices((64, 64)).sum(axis=0) % 2 * 255).astype(np.uint8)
        scores = lbp_sharpness_map(RasterImage(cb), window=32).scores
        assert (scores >= 0.9).all()

    def test_scores_bounded(self):
        for seed in range(10):
            scores = lbp_sharpness_map(textured_image(seed=seed)).scores
            assert (scores >= 0.0).all() and (scores <= 1.0).all()

    def test_sharp_beats_blurred(self):
        for seed in range(10):
            img = noise_image((96, 96), seed=seed)
            blurred = box_blur(img, np.ones((96, 96), bool), 3)
            sharp_score = lbp_sharpness_map(img, window=32).scores.mean()
            blur_score = lbp_sharpness_map(blurred, window=32).scores.mean()
            assert sharp_score > blur_score

    def test_brightness_shift_invariance(self):
        rng = np.random.default_rng(5)
        base = rng.integers(60, 180, (64, 64)).astype(np.uint8)  # no clipping room needed
        shifted = (base.astype(np.int16) + 15).astype(np.uint8)
        a = lbp_sharpness_map(RasterImage(base), window=32).scores
        b = lbp_sharpness_map(RasterImage(shifted), window=32).scores
        assert np.array_equal(a, b)

    def test_window_floor(self):
        with pytest.raises(ValueError):
            lbp_sharpness_map(noise_image(), window=4)


class TestSegmentBlur:
    def test_all_above_threshold_clean(self):
        img = noise_image((128, 128), seed=3)
        verdict = segment_blur(lbp_sharpness_map(img), DEFAULT_LBP_SCORE_THRESHOLD)
        assert not verdict.blurred
        assert not verdict.blur_mask.any()

    def test_threshold_zero_empty_mask(self):
        img = noise_image((128, 128), seed=4)
        verdict = segment_blur(lbp_sharpness_map(img), 0.0)
        assert not verdict.blurred

    def test_half_blurred_composite_iou(self):
        img = noise_image((256, 256), seed=7)
        mask = np.zeros((256, 256), bool)
        mask[:, :128] = True  # left half defocused
        composite = box_blur(img, mask, 4)
        verdict = segment_blur(lbp_sharpness_map(composite, window=32))
        assert verdict.blurred
        inter = (verdict.blur_mask & mask).sum()
        union = (verdict.blur_mask | mask).sum()
        assert inter / union >= 0.7

    def test_mask_resolution_matches_image(self):
        img = noise_image((100, 140), seed=8)
        verdict = segment_blur(lbp_sharpness_map(img, window=32))
        assert verdict.blur_mask.shape == (100, 140)


class TestAttackDetection:
    def attack_images(self):
        """Attacked renders with blur radius >= 3 over the fixture corpus."""
        images = []
        region = LensRegion.circle(128, 128, 80)
        for seed in (1, 2, 3):
            base = textured_image((256, 256), seed=seed)
            for kind in (LensKind.CONCAVE, LensKind.CONVEX):
                for level in (3, 5, 7, 9):
                    profile = level_to_profile(kind, level, region=region)
                    images.append(apply_attack_transform(base, profile))
        return images

    def test_every_blurred_attack_flagged_at_defaults(self):
        for attacked in self.attack_images():
            verdict = segment_blur(lbp_sharpness_map(attacked))
            assert verdict.blurred

    def test_blur_radius_below_three_not_required_to_flag(self):
        # sanity only: the benign corpus itself stays clean
        for seed in (1, 2, 3):
            verdict = segment_blur(lbp_sharpness_map(textured_image(seed=seed)))
            assert not verdict.blurred
