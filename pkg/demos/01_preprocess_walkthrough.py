"""Walk one noisy action through every preprocessing stage, printing shapes.

The stages compose into `preprocess_action`; this script runs them one at a
time so the intermediate arrays can be inspected, then checks that the
one-shot helper produces the same result.
"""

import numpy as np

from dam import (
    PreprocessParams,
    arc_length_resample,
    direction_frames,
    normalize_wdfs,
    preprocess_action,
    smooth_joint,
    windowed_direction_frames,
)


def main() -> None:
    rng = np.random.default_rng(7)

    # A fake two-joint recording: one joint sweeps a quarter circle, the other
    # drifts along a line; both get sensor-style jitter and an uneven frame rate.
    t = np.sort(rng.uniform(0.0, np.pi / 2, size=33))
    joint_a = np.column_stack([np.cos(t), np.sin(t), 0.3 * t])
    joint_b = np.column_stack([0.5 * t, -0.2 * t, np.full_like(t, 1.0)])
    raw = np.stack([joint_a, joint_b], axis=1) + 0.005 * rng.normal(size=(33, 2, 3))
    print(f"raw recording:          {raw.shape}  (frames, joints, xyz)")

    params = PreprocessParams(frames=12, window=3)

    # The pipeline first re-expresses everything relative to the first frame,
    # which makes the descriptor's translation invariance exact.
    centered = raw - raw[0]

    smoothed = np.stack(
        [
            smooth_joint(centered[:, j], params.smoothing_sigma, params.smoothing_radius)
            for j in range(centered.shape[1])
        ],
        axis=1,
    )
    print(f"after smoothing:        {smoothed.shape}  (jitter averaged out)")
    print(f"  max change:           {np.abs(smoothed - centered).max():.4f}")

    resampled = np.stack(
        [
            arc_length_resample(smoothed[:, j], params.frames, params.norm_epsilon)
            for j in range(smoothed.shape[1])
        ],
        axis=1,
    )
    print(f"after resampling:       {resampled.shape}  (fixed frame count)")
    steps = np.linalg.norm(np.diff(resampled[:, 0], axis=0), axis=1)
    print(f"  joint 0 step lengths: min {steps.min():.4f}, max {steps.max():.4f}"
          "  (nearly uniform by construction)")

    directions = direction_frames(resampled)
    print(f"direction frames:       {directions.shape}  (frame-to-frame movement)")

    windows = windowed_direction_frames(directions, params.window)
    print(f"windowed vectors:       {windows.shape}  "
          f"({params.window} consecutive direction frames each)")

    wdfs = normalize_wdfs(windows, params.norm_epsilon)
    print(f"unit-normalized:        {wdfs.shape}  norms -> "
          f"{np.round(np.linalg.norm(wdfs, axis=1), 6)}")

    one_shot = preprocess_action(raw, params)
    print(f"preprocess_action match: {np.array_equal(one_shot, wdfs)}")


if __name__ == "__main__":
    main()
