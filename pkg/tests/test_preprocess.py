"""Tests for the pose-sequence preprocessing chain.

Oracles here are deliberately independent re-implementations (plain Python
loops, closed-form values) rather than calls back into the library.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from dam.preprocess import (
    PreprocessParams,
    arc_length_resample,
    direction_frames,
    normalize_wdfs,
    preprocess_action,
    smooth_joint,
    windowed_direction_frames,
)


def _smooth_oracle(series, sigma, radius):
    """Direct O(T*r) weighted moving average with boundary renormalization."""
    series = np.asarray(series, dtype=float)
    if sigma <= 0 or radius <= 0:
        return series.copy()
    out = np.zeros_like(series)
    n = series.shape[0]
    for t in range(n):
        acc = np.zeros(series.shape[1])
        wsum = 0.0
        for k in range(-radius, radius + 1):
            if 0 <= t + k < n:
                w = math.exp(-(k * k) / (2.0 * sigma * sigma))
                acc += w * series[t + k]
                wsum += w
        out[t] = acc / wsum
    return out


class TestSmoothing:
    def test_matches_direct_oracle_on_random_series(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(1, 40))
            d = int(rng.integers(1, 4))
            series = rng.normal(size=(n, d)) * 10
            sigma = float(rng.choice([0.5, 1.0, 2.0]))
            radius = int(rng.choice([1, 2, 5]))
            got = smooth_joint(series, sigma=sigma, radius=radius)
            want = _smooth_oracle(series, sigma, radius)
            assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_constant_series_is_preserved(self):
        series = np.full((30, 3), 7.25)
        out = smooth_joint(series, sigma=1.0, radius=2)
        assert_allclose(out, series, rtol=1e-12)

    def test_zero_sigma_and_zero_radius_are_identity(self):
        rng = np.random.default_rng(0)
        series = rng.normal(size=(12, 3))
        assert_array_equal(smooth_joint(series, sigma=0.0, radius=2), series)
        assert_array_equal(smooth_joint(series, sigma=1.0, radius=0), series)

    def test_impulse_ratios_follow_gaussian_kernel(self):
        """An interior impulse spreads with weights exp(-k^2 / 2 sigma^2)."""
        sigma, radius = 1.0, 3
        series = np.zeros((21, 1))
        series[10, 0] = 1.0
        out = smooth_joint(series, sigma=sigma, radius=radius)
        for k in range(1, radius + 1):
            expected = math.exp(-(k * k) / (2.0 * sigma * sigma))
            assert out[10 + k, 0] / out[10, 0] == pytest.approx(expected, rel=1e-12)
            assert out[10 - k, 0] / out[10, 0] == pytest.approx(expected, rel=1e-12)

    def test_boundary_renormalization_hand_value(self):
        # First sample of [3, 0, 0, 0, 0] with sigma=1, radius=2 only sees
        # offsets k=0,1,2: 3 * 1 / (1 + e^-0.5 + e^-2).
        series = np.array([[3.0], [0.0], [0.0], [0.0], [0.0]])
        out = smooth_joint(series, sigma=1.0, radius=2)
        want = 3.0 / (1.0 + math.exp(-0.5) + math.exp(-2.0))
        assert out[0, 0] == pytest.approx(want, rel=1e-12)

    def test_input_not_mutated(self):
        series = np.arange(15.0).reshape(5, 3)
        copy = series.copy()
        smooth_joint(series, sigma=1.0, radius=2)
        assert_array_equal(series, copy)


class TestArcLengthResample:
    def test_line_with_uneven_sampling_becomes_uniform(self):
        # Points crowd near the start; resampling must spread them evenly.
        t = np.linspace(0.0, 1.0, 50) ** 3
        series = np.stack([t * 4.0, -t * 2.0, t], axis=1)
        out = arc_length_resample(series, 10)
        chords = np.linalg.norm(np.diff(out, axis=0), axis=1)
        assert_allclose(chords, chords.mean(), rtol=1e-6)
        assert_allclose(out[0], series[0], atol=1e-9)
        assert_allclose(out[-1], series[-1], atol=1e-9)

    def test_quarter_circle_stays_on_curve_with_equal_chords(self):
        theta = np.linspace(0.0, math.pi / 2.0, 100)
        series = np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=1)
        out = arc_length_resample(series, 10)
        radii = np.linalg.norm(out, axis=1)
        assert np.abs(radii - 1.0).max() < 1e-3
        chords = np.linalg.norm(np.diff(out, axis=0), axis=1)
        assert chords.max() / chords.min() < 1.01

    def test_endpoints_preserved_on_random_walks(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 60))
            series = np.cumsum(rng.normal(size=(n, 3)), axis=0)
            out = arc_length_resample(series, int(rng.integers(2, 30)))
            assert_allclose(out[0], series[0], atol=1e-9)
            assert_allclose(out[-1], series[-1], atol=1e-9)

    def test_stationary_path_repeats_first_position(self):
        series = np.tile([[1.5, -2.0, 0.25]], (8, 1))
        out = arc_length_resample(series, 5)
        assert_array_equal(out, np.tile([[1.5, -2.0, 0.25]], (5, 1)))

    def test_interior_duplicate_points_are_tolerated(self):
        series = np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]
        )
        out = arc_length_resample(series, 5)
        assert_allclose(out[:, 0], np.linspace(0.0, 2.0, 5), atol=1e-9)

    def test_two_point_input_interpolates_linearly(self):
        series = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 2.0]])
        out = arc_length_resample(series, 5)
        assert_allclose(out[:, 0], np.linspace(0.0, 4.0, 5), atol=1e-9)
        assert_allclose(out[:, 2], np.linspace(0.0, 2.0, 5), atol=1e-9)

    def test_rejects_too_short_inputs(self):
        with pytest.raises(ValueError):
            arc_length_resample(np.zeros((1, 3)), 5)
        with pytest.raises(ValueError):
            arc_length_resample(np.zeros((4, 3)), 1)


class TestDirectionFrames:
    def test_hand_computed_differences(self):
        positions = np.array(
            [
                [[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]],
                [[1.0, 0.0, 0.0], [1.0, 2.0, 1.0]],
                [[1.0, 0.0, 3.0], [0.0, 2.0, 1.0]],
            ]
        )
        out = direction_frames(positions)
        want = np.array(
            [
                [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
                [[0.0, 0.0, 3.0], [-1.0, 0.0, 0.0]],
            ]
        )
        assert_array_equal(out, want)

    def test_count_is_frames_minus_one(self):
        rng = np.random.default_rng(3)
        positions = rng.normal(size=(25, 4, 3))
        assert direction_frames(positions).shape == (24, 4, 3)

    def test_translation_cancels_bitwise_on_integer_grid(self):
        rng = np.random.default_rng(11)
        positions = rng.integers(-50, 50, size=(10, 3, 3)).astype(float) / 8.0
        shifted = positions + np.array([5.0, -3.25, 2.5])
        assert_array_equal(direction_frames(shifted), direction_frames(positions))

    def test_rejects_single_frame(self):
        with pytest.raises(ValueError):
            direction_frames(np.zeros((1, 5, 3)))


class TestWindowedDirectionFrames:
    def test_window_one_reproduces_direction_frames(self):
        rng = np.random.default_rng(5)
        dirs = rng.normal(size=(24, 6, 3))
        out = windowed_direction_frames(dirs, 1)
        assert_array_equal(out, dirs.reshape(24, 18))

    def test_full_window_yields_single_vector(self):
        rng = np.random.default_rng(6)
        dirs = rng.normal(size=(9, 2, 3))
        out = windowed_direction_frames(dirs, 9)
        assert out.shape == (1, 9 * 2 * 3)
        assert_array_equal(out[0], dirs.reshape(-1))

    @pytest.mark.parametrize("window", [1, 2, 3, 7, 14])
    def test_count_shrinks_by_window_minus_one(self, window):
        dirs = np.zeros((14, 3, 3))
        out = windowed_direction_frames(dirs, window)
        assert out.shape == (14 - window + 1, 3 * 3 * window)

    def test_layout_is_frame_major_then_joint_then_coordinate(self):
        # Encode (frame, joint, coord) into the value so the flat layout is
        # fully observable: value = 100*frame + 10*joint + coord.
        dirs = np.zeros((4, 2, 3))
        for f in range(4):
            for j in range(2):
                for c in range(3):
                    dirs[f, j, c] = 100 * f + 10 * j + c
        out = windowed_direction_frames(dirs, 2)
        want_first = [
            0, 1, 2, 10, 11, 12,          # frame 0: joint 0 xyz, joint 1 xyz
            100, 101, 102, 110, 111, 112,  # frame 1
        ]
        assert_array_equal(out[0], np.array(want_first, dtype=float))
        assert out.shape == (3, 12)

    def test_rejects_window_out_of_range(self):
        dirs = np.zeros((5, 2, 3))
        with pytest.raises(ValueError):
            windowed_direction_frames(dirs, 0)
        with pytest.raises(ValueError):
            windowed_direction_frames(dirs, 6)


class TestNormalizeWdfs:
    def test_unit_norms_within_tolerance(self):
        rng = np.random.default_rng(9)
        wdfs = rng.normal(size=(40, 12)) * 3.0
        out = normalize_wdfs(wdfs)
        assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)

    def test_near_zero_rows_left_untouched(self):
        wdfs = np.zeros((3, 6))
        wdfs[1] = 1e-12
        wdfs[2, 0] = 2.0
        out = normalize_wdfs(wdfs, epsilon=1e-8)
        assert_array_equal(out[0], np.zeros(6))
        assert_array_equal(out[1], wdfs[1])
        assert_allclose(np.linalg.norm(out[2]), 1.0, atol=1e-12)


class TestPreprocessParams:
    def test_wdf_count(self):
        params = PreprocessParams(frames=25, window=3)
        assert params.wdf_count == 22

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(frames=1, window=1),
            dict(frames=10, window=0),
            dict(frames=10, window=10),
            dict(frames=10, window=3, smoothing_sigma=-1.0),
            dict(frames=10, window=3, smoothing_radius=-2),
            dict(frames=10, window=3, norm_epsilon=0.0),
        ],
    )
    def test_rejects_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            PreprocessParams(**kwargs)


def _grid_action(rng, frames=20, joints=3, step=2.0 ** -6):
    """Random action whose coordinates sit on a dyadic grid (exact fp sums)."""
    return rng.integers(-(2 ** 12), 2 ** 12, size=(frames, joints, 3)).astype(float) * step


class TestPreprocessAction:
    def test_output_shape(self):
        rng = np.random.default_rng(21)
        frames = np.cumsum(rng.normal(size=(40, 5, 3)), axis=0)
        params = PreprocessParams(frames=16, window=3)
        wdfs = preprocess_action(frames, params)
        assert wdfs.shape == (13, 5 * 3 * 3)

    def test_translation_invariance_is_bit_exact_on_grid_data(self):
        rng = np.random.default_rng(22)
        params = PreprocessParams(frames=12, window=2)
        for _ in range(20):
            frames = _grid_action(rng)
            offset = rng.integers(-(2 ** 12), 2 ** 12, size=3).astype(float) * 2.0 ** -6
            assert_array_equal(
                preprocess_action(frames + offset, params),
                preprocess_action(frames, params),
            )

    def test_translation_invariance_on_arbitrary_floats(self):
        rng = np.random.default_rng(23)
        params = PreprocessParams(frames=14, window=3)
        frames = np.cumsum(rng.normal(size=(30, 4, 3)), axis=0)
        shifted = frames + np.array([12.345678901, -0.777, 3.14159])
        assert_allclose(
            preprocess_action(shifted, params),
            preprocess_action(frames, params),
            atol=1e-9,
        )

    @pytest.mark.parametrize("scale", [10.0, 0.1])
    def test_scale_invariance(self, scale):
        rng = np.random.default_rng(24)
        params = PreprocessParams(frames=14, window=3)
        frames = np.cumsum(rng.normal(size=(30, 4, 3)), axis=0)
        assert_allclose(
            preprocess_action(frames * scale, params),
            preprocess_action(frames, params),
            atol=1e-9,
        )

    def test_motionless_action_yields_zero_vectors_without_crashing(self):
        frames = np.tile(np.array([[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]]), (9, 1, 1))
        params = PreprocessParams(frames=8, window=2)
        wdfs = preprocess_action(frames, params)
        assert wdfs.shape == (6, 2 * 3 * 2)
        assert_array_equal(wdfs, np.zeros_like(wdfs))

    def test_smoothing_parameters_reach_the_pipeline(self):
        rng = np.random.default_rng(25)
        frames = np.cumsum(rng.normal(size=(30, 2, 3)), axis=0)
        a = preprocess_action(frames, PreprocessParams(frames=10, window=2))
        b = preprocess_action(
            frames,
            PreprocessParams(frames=10, window=2, smoothing_sigma=3.0, smoothing_radius=6),
        )
        assert not np.array_equal(a, b)

    def test_accepts_objects_with_frames_attribute(self):
        class Carrier:
            def __init__(self, frames):
                self.frames = frames

        rng = np.random.default_rng(26)
        frames = np.cumsum(rng.normal(size=(20, 2, 3)), axis=0)
        params = PreprocessParams(frames=10, window=2)
        assert_array_equal(
            preprocess_action(Carrier(frames), params),
            preprocess_action(frames, params),
        )

    def test_deterministic_and_pure(self):
        rng = np.random.default_rng(27)
        frames = np.cumsum(rng.normal(size=(18, 3, 3)), axis=0)
        copy = frames.copy()
        params = PreprocessParams(frames=9, window=2)
        first = preprocess_action(frames, params)
        second = preprocess_action(frames, params)
        assert_array_equal(first, second)
        assert_array_equal(frames, copy)
