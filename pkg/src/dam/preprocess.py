"""Pose-sequence preprocessing: smoothing, arc-length resampling, direction windows.

The chain turns one recorded action of shape (frames, joints, 3) into a set of
unit-norm feature vectors ("windowed direction frames", WDFs): each vector is
the concatenation of `window` consecutive per-frame displacement snapshots of
the whole skeleton. Every stage is deterministic and side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

DEFAULT_SMOOTHING_SIGMA = 1.0
DEFAULT_SMOOTHING_RADIUS = 2
DEFAULT_NORM_EPSILON = 1e-8


@dataclass(frozen=True)
class PreprocessParams:
    """Knobs for the full preprocessing chain.

    Attributes:
        frames: temporal length F every action is resampled to (>= 2).
        window: number of consecutive direction frames per feature vector,
            in [1, frames - 1].
        smoothing_sigma: Gaussian weight scale of the moving average; <= 0
            disables smoothing.
        smoothing_radius: one-sided kernel extent in samples; 0 disables
            smoothing.
        norm_epsilon: vectors (and total path lengths) below this are treated
            as zero and left unnormalized.
    """

    frames: int
    window: int
    smoothing_sigma: float = DEFAULT_SMOOTHING_SIGMA
    smoothing_radius: int = DEFAULT_SMOOTHING_RADIUS
    norm_epsilon: float = DEFAULT_NORM_EPSILON

    def __post_init__(self) -> None:
        if self.frames < 2:
            raise ValueError(f"frames must be >= 2, got {self.frames}")
        if not 1 <= self.window <= self.frames - 1:
            raise ValueError(
                f"window must be in [1, frames - 1] = [1, {self.frames - 1}], "
                f"got {self.window}"
            )
        if self.smoothing_sigma < 0:
            raise ValueError(f"smoothing_sigma must be >= 0, got {self.smoothing_sigma}")
        if self.smoothing_radius < 0:
            raise ValueError(f"smoothing_radius must be >= 0, got {self.smoothing_radius}")
        if self.norm_epsilon <= 0:
            raise ValueError(f"norm_epsilon must be > 0, got {self.norm_epsilon}")

    @property
    def wdf_count(self) -> int:
        """Feature vectors produced per action: F - W."""
        return self.frames - self.window

    def feature_dim(self, joint_count: int) -> int:
        return joint_count * 3 * self.window


# --- Smoothing -------------------------------------------------------------


def smooth_joint(
    series: np.ndarray,
    sigma: float = DEFAULT_SMOOTHING_SIGMA,
    radius: int = DEFAULT_SMOOTHING_RADIUS,
) -> np.ndarray:
    """Gaussian-weighted moving average over one joint's (T, d) trajectory.

    Weights are exp(-k^2 / (2 sigma^2)) for offsets k in [-radius, radius];
    near the boundaries the kernel is truncated to valid samples and
    renormalized. sigma <= 0 or radius <= 0 returns the input unchanged.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 2:
        raise ValueError(f"series must be 2-dimensional (T, d), got shape {series.shape}")
    if sigma <= 0 or radius <= 0:
        return series.copy()
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    n = series.shape[0]

    def _centered(signal: np.ndarray) -> np.ndarray:
        # Center slice of the full convolution; with a symmetric kernel this is
        # the truncated correlation sum_k w[k] * signal[t + k]. (numpy's 'same'
        # mode pads to the longer operand, which misbehaves when n < kernel.)
        return np.convolve(signal, kernel, mode="full")[radius : radius + n]

    # Dividing by the convolved all-ones series renormalizes the boundaries.
    weight_sums = _centered(np.ones(n))
    out = np.empty_like(series)
    for col in range(series.shape[1]):
        out[:, col] = _centered(series[:, col]) / weight_sums
    return out


# --- Arc-length resampling ---------------------------------------------------


def arc_length_resample(
    series: np.ndarray, count: int, epsilon: float = DEFAULT_NORM_EPSILON
) -> np.ndarray:
    """Resample a (T, d) polyline to `count` points uniform in arc length.

    A natural cubic spline is fit per coordinate against the cumulative chord
    length and evaluated at `count` evenly spaced parameter values, so output
    points are equidistant along the curve and the endpoints are preserved.
    A path whose total chord length is below `epsilon` is considered
    stationary and yields `count` copies of its first position.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 2:
        raise ValueError(f"series must be 2-dimensional (T, d), got shape {series.shape}")
    if series.shape[0] < 2:
        raise ValueError(f"need at least 2 samples to resample, got {series.shape[0]}")
    if count < 2:
        raise ValueError(f"count must be >= 2, got {count}")

    seglen = np.linalg.norm(np.diff(series, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seglen)])
    total = arc[-1]
    if total < epsilon:
        return np.tile(series[0], (count, 1))

    # Coincident consecutive samples give zero-length segments; the spline
    # needs strictly increasing knots, so collapse them.
    keep = np.concatenate([[True], seglen > 0.0])
    knots = arc[keep]
    points = series[keep]
    spline = CubicSpline(knots, points, axis=0, bc_type="natural")
    return spline(np.linspace(0.0, total, count))


# --- Direction frames and windows --------------------------------------------


def direction_frames(positions: np.ndarray) -> np.ndarray:
    """Per-frame skeleton displacement: (F, J, 3) -> (F - 1, J, 3)."""
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 3 or positions.shape[2] != 3:
        raise ValueError(f"positions must have shape (F, J, 3), got {positions.shape}")
    if positions.shape[0] < 2:
        raise ValueError(f"need at least 2 frames, got {positions.shape[0]}")
    return np.diff(positions, axis=0)


def windowed_direction_frames(directions: np.ndarray, window: int) -> np.ndarray:
    """Concatenate every run of `window` consecutive direction frames.

    Layout of each output row is frame-major, then joint, then x/y/z — i.e.
    row i is directions[i : i + window] flattened in C order. Shape:
    (M, J, 3) -> (M - window + 1, J * 3 * window).
    """
    directions = np.asarray(directions, dtype=np.float64)
    if directions.ndim != 3:
        raise ValueError(f"directions must have shape (M, J, 3), got {directions.shape}")
    m = directions.shape[0]
    if not 1 <= window <= m:
        raise ValueError(f"window must be in [1, {m}], got {window}")
    count = m - window + 1
    return np.stack([directions[i : i + window].reshape(-1) for i in range(count)])


def normalize_wdfs(wdfs: np.ndarray, epsilon: float = DEFAULT_NORM_EPSILON) -> np.ndarray:
    """Rescale each row to euclidean norm 1; rows with norm < epsilon stay as-is."""
    wdfs = np.asarray(wdfs, dtype=np.float64)
    norms = np.linalg.norm(wdfs, axis=1)
    scale = np.where(norms < epsilon, 1.0, norms)
    return wdfs / scale[:, None]


# --- Full chain ---------------------------------------------------------------


def preprocess_action(action, params: PreprocessParams) -> np.ndarray:
    """Run the full chain on one action; returns (F - W, J * 3 * W) unit vectors.

    Accepts a raw (frames, joints, 3) array or any object with a `frames`
    attribute holding one. Stages, in fixed order: per-joint Gaussian
    smoothing, per-joint arc-length resampling to `params.frames` positions,
    frame-to-frame differencing, windowing, unit normalization.
    """
    positions = np.asarray(getattr(action, "frames", action), dtype=np.float64)
    if positions.ndim != 3 or positions.shape[2] != 3:
        raise ValueError(f"action must have shape (F, J, 3), got {positions.shape}")
    if positions.shape[0] < 2:
        raise ValueError(f"action needs at least 2 frames, got {positions.shape[0]}")
    if not np.isfinite(positions).all():
        raise ValueError("action contains non-finite coordinates")

    # Anchor each joint at its first position. Downstream differencing makes
    # the result independent of absolute position anyway; doing it up front
    # keeps translation invariance exact instead of within rounding error.
    positions = positions - positions[0]

    resampled = np.empty((params.frames, positions.shape[1], 3))
    for j in range(positions.shape[1]):
        smoothed = smooth_joint(
            positions[:, j, :],
            sigma=params.smoothing_sigma,
            radius=params.smoothing_radius,
        )
        resampled[:, j, :] = arc_length_resample(
            smoothed, params.frames, epsilon=params.norm_epsilon
        )

    directions = direction_frames(resampled)
    wdfs = windowed_direction_frames(directions, params.window)
    return normalize_wdfs(wdfs, epsilon=params.norm_epsilon)
