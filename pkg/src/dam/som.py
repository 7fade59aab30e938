"""Online Kohonen self-organizing map over a rectangular unit grid.

Deliberately hand-rolled rather than pulled off the shelf: the clustering
contract here (seeded sample-based initialization, per-epoch seeded visiting
order, lowest-index tie breaking, exponential decay of learning rate and
neighborhood radius) must be reproducible bit-for-bit for a given seed.

The codebook container doubles as the pluggable-clusterer seam: anything able
to produce a (units, dim) matrix — e.g. k-means centers via
``SomGrid.from_vectors`` — can stand in for the trained map downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

DEFAULT_EPOCHS = 20
DEFAULT_LEARNING_RATE = (0.5, 0.01)
DEFAULT_FINAL_RADIUS = 0.5

# Keep pairwise-distance work buffers around this many floats per chunk.
_CHUNK_BUDGET = 4_000_000


@dataclass(frozen=True)
class SomTrainParams:
    """Training schedule. Rates and radii decay exponentially from start to end."""

    epochs: int = DEFAULT_EPOCHS
    learning_rate_start: float = DEFAULT_LEARNING_RATE[0]
    learning_rate_end: float = DEFAULT_LEARNING_RATE[1]
    radius_start: float | None = None  # None -> max(rows, cols) / 2
    radius_end: float = DEFAULT_FINAL_RADIUS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.learning_rate_start <= 1.0:
            raise ValueError(
                f"learning_rate_start must be in (0, 1], got {self.learning_rate_start}"
            )
        if not 0.0 < self.learning_rate_end <= self.learning_rate_start:
            raise ValueError(
                "learning_rate_end must be in (0, learning_rate_start], got "
                f"{self.learning_rate_end}"
            )
        if self.radius_end <= 0.0:
            raise ValueError(f"radius_end must be > 0, got {self.radius_end}")
        if self.radius_start is not None and self.radius_start < self.radius_end:
            raise ValueError(
                f"radius_start ({self.radius_start}) must be >= radius_end "
                f"({self.radius_end})"
            )


@dataclass
class SomGrid:
    """A trained (or just assembled) codebook on a rows x cols grid.

    Unit l corresponds to grid cell (l // cols, l % cols) — row-major.
    """

    rows: int
    cols: int
    codebook: np.ndarray  # (rows * cols, dim)

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        codebook = np.asarray(self.codebook, dtype=np.float64)
        self.codebook = codebook
        if codebook.ndim != 2:
            raise ValueError(f"codebook must be 2-dimensional, got shape {codebook.shape}")
        if codebook.shape[0] != self.rows * self.cols:
            raise ValueError(
                f"codebook has {codebook.shape[0]} rows, expected "
                f"{self.rows} * {self.cols} = {self.rows * self.cols}"
            )
        if not np.isfinite(codebook).all():
            raise ValueError("codebook contains non-finite values")

    @property
    def unit_count(self) -> int:
        return self.rows * self.cols

    @property
    def dim(self) -> int:
        return self.codebook.shape[1]

    def unit_coordinates(self) -> np.ndarray:
        """(units, 2) array of (row, col) grid positions, row-major order."""
        idx = np.arange(self.unit_count)
        return np.stack([idx // self.cols, idx % self.cols], axis=1).astype(np.float64)

    @classmethod
    def from_vectors(cls, vectors: np.ndarray) -> "SomGrid":
        """Wrap externally produced cluster centers (k-means etc.) as a 1 x K grid."""
        vectors = np.asarray(vectors, dtype=np.float64)
        return cls(rows=1, cols=vectors.shape[0], codebook=vectors)


def _check_query(grid: SomGrid, vectors: np.ndarray) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.shape[-1] != grid.dim:
        raise ValueError(
            f"query dimension {vectors.shape[-1]} does not match codebook "
            f"dimension {grid.dim}"
        )
    return vectors


def bmu(grid: SomGrid, x: np.ndarray) -> int:
    """Index of the best-matching unit; exact ties go to the lowest index."""
    x = _check_query(grid, x)
    diff = grid.codebook - x
    return int(np.argmin((diff * diff).sum(axis=1)))


def _min_sqdist(codebook: np.ndarray, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row argmin and min of squared distances, chunked to bound memory."""
    n, dim = xs.shape
    k = codebook.shape[0]
    chunk = max(1, _CHUNK_BUDGET // max(1, k * dim))
    best = np.empty(n, dtype=np.int64)
    best_d = np.empty(n)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        diff = xs[lo:hi, None, :] - codebook[None, :, :]
        d = (diff * diff).sum(axis=2)
        best[lo:hi] = np.argmin(d, axis=1)
        best_d[lo:hi] = d[np.arange(hi - lo), best[lo:hi]]
    return best, best_d


def bmu_batch(grid: SomGrid, xs: np.ndarray) -> np.ndarray:
    """Vectorized bmu() over rows of xs; identical results, one call."""
    xs = _check_query(grid, np.atleast_2d(xs))
    return _min_sqdist(grid.codebook, xs)[0]


def quantization_error(grid: SomGrid, samples: np.ndarray) -> float:
    """Mean euclidean distance from each sample to its best-matching unit."""
    samples = _check_query(grid, np.atleast_2d(samples))
    if samples.shape[0] == 0:
        raise ValueError("quantization error needs at least one sample")
    _, d = _min_sqdist(grid.codebook, samples)
    return float(np.sqrt(d).mean())


def train_som(
    samples: np.ndarray,
    rows: int,
    cols: int,
    params: SomTrainParams | None = None,
    initial_codebook: np.ndarray | None = None,
) -> SomGrid:
    """Train a rows x cols map on (n, dim) samples with the online update rule.

    Each step pulls the winner and its grid neighborhood toward the visited
    sample: ``c += alpha(t) * exp(-g^2 / (2 sigma(t)^2)) * (x - c)`` with g the
    euclidean distance between grid cells. alpha and sigma decay exponentially
    from their start to end values over all ``epochs * n`` steps. The codebook
    starts as a seeded draw of training vectors unless `initial_codebook` is
    given, and every epoch visits the samples in a fresh seeded order.
    """
    params = params or SomTrainParams()
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError(f"samples must be a non-empty (n, dim) array, got {samples.shape}")
    if not np.isfinite(samples).all():
        raise ValueError("samples contain non-finite values")
    n = samples.shape[0]
    units = rows * cols
    if units < 1:
        raise ValueError(f"grid must be at least 1x1, got {rows}x{cols}")
    if n < units:
        warnings.warn(
            f"training set has fewer vectors ({n}) than grid units ({units}); "
            "some units will start as duplicates"
        )

    rng = np.random.default_rng(params.seed)
    if initial_codebook is not None:
        codebook = np.array(initial_codebook, dtype=np.float64)
        if codebook.shape != (units, samples.shape[1]):
            raise ValueError(
                f"initial_codebook shape {codebook.shape} != {(units, samples.shape[1])}"
            )
    else:
        codebook = samples[rng.choice(n, size=units, replace=n < units)].copy()

    grid_pos = SomGrid(rows, cols, np.zeros((units, samples.shape[1]))).unit_coordinates()
    alpha0, alpha1 = params.learning_rate_start, params.learning_rate_end
    sigma0 = params.radius_start if params.radius_start is not None else max(rows, cols) / 2.0
    sigma0 = max(sigma0, params.radius_end)
    sigma1 = params.radius_end

    total = params.epochs * n
    step = 0
    for _ in range(params.epochs):
        for i in rng.permutation(n):
            frac = step / (total - 1) if total > 1 else 0.0
            alpha = alpha0 * (alpha1 / alpha0) ** frac
            sigma = sigma0 * (sigma1 / sigma0) ** frac
            x = samples[i]
            diff = codebook - x
            winner = int(np.argmin((diff * diff).sum(axis=1)))
            gdiff = grid_pos - grid_pos[winner]
            influence = alpha * np.exp(-(gdiff * gdiff).sum(axis=1) / (2.0 * sigma * sigma))
            codebook -= influence[:, None] * diff
            step += 1
    return SomGrid(rows, cols, codebook)
