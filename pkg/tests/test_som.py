"""Tests for the online Kohonen self-organizing map."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from dam.som import SomGrid, SomTrainParams, bmu, bmu_batch, quantization_error, train_som


def _bmu_oracle(codebook, x):
    """Brute-force linear scan with strict-improvement tie handling."""
    best, best_d = 0, None
    for idx in range(codebook.shape[0]):
        d = 0.0
        for a, b in zip(codebook[idx], x):
            d += (a - b) ** 2
        if best_d is None or d < best_d:
            best, best_d = idx, d
    return best


def _two_clouds(rng, n=120, dim=5, gap=60.0):
    a = rng.normal(size=(n, dim))
    b = rng.normal(size=(n, dim))
    b[:, 0] += gap
    return np.vstack([a, b]), np.array([0] * n + [1] * n)


class TestParamsAndGrid:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(epochs=0),
            dict(learning_rate_start=0.0),
            dict(learning_rate_start=1.5),
            dict(learning_rate_end=0.2, learning_rate_start=0.1),
            dict(radius_end=0.0),
            dict(radius_start=0.1, radius_end=0.5),
        ],
    )
    def test_rejects_bad_training_params(self, kwargs):
        with pytest.raises(ValueError):
            SomTrainParams(**kwargs)

    def test_grid_shape_must_match(self):
        with pytest.raises(ValueError):
            SomGrid(rows=2, cols=3, codebook=np.zeros((5, 4)))
        with pytest.raises(ValueError):
            SomGrid(rows=2, cols=3, codebook=np.zeros(6))

    def test_unit_coordinates_are_row_major(self):
        grid = SomGrid(rows=2, cols=3, codebook=np.zeros((6, 4)))
        coords = grid.unit_coordinates()
        assert_array_equal(
            coords, [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]]
        )
        assert grid.unit_count == 6
        assert grid.dim == 4


class TestBmu:
    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            k = int(rng.integers(1, 25))
            dim = int(rng.integers(1, 8))
            codebook = rng.normal(size=(k, dim))
            x = rng.normal(size=dim)
            grid = SomGrid(rows=1, cols=k, codebook=codebook)
            assert bmu(grid, x) == _bmu_oracle(codebook, x)

    def test_exact_tie_picks_lowest_index(self):
        codebook = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        grid = SomGrid(rows=1, cols=3, codebook=codebook)
        assert bmu(grid, np.array([1.0, 0.0])) == 0
        assert bmu(grid, np.array([0.55, 0.55])) in (0, 1)

    def test_batch_agrees_with_single_queries(self):
        rng = np.random.default_rng(3)
        codebook = rng.normal(size=(12, 6))
        grid = SomGrid(rows=3, cols=4, codebook=codebook)
        xs = rng.normal(size=(200, 6))
        batch = bmu_batch(grid, xs)
        assert batch.shape == (200,)
        for i in range(0, 200, 17):
            assert batch[i] == bmu(grid, xs[i])

    def test_dimension_mismatch_fails(self):
        grid = SomGrid(rows=1, cols=2, codebook=np.zeros((2, 3)))
        with pytest.raises(ValueError):
            bmu(grid, np.zeros(4))


class TestTraining:
    def test_same_seed_is_bit_identical(self):
        rng = np.random.default_rng(9)
        samples = rng.normal(size=(80, 6))
        params = SomTrainParams(epochs=5, seed=123)
        g1 = train_som(samples, 3, 3, params)
        g2 = train_som(samples, 3, 3, params)
        assert_array_equal(g1.codebook, g2.codebook)

    def test_different_seeds_differ(self):
        rng = np.random.default_rng(10)
        samples = rng.normal(size=(80, 6))
        a = train_som(samples, 3, 3, SomTrainParams(epochs=5, seed=1))
        b = train_som(samples, 3, 3, SomTrainParams(epochs=5, seed=2))
        assert not np.array_equal(a.codebook, b.codebook)

    def test_separated_clouds_get_pure_units(self):
        rng = np.random.default_rng(11)
        samples, cloud = _two_clouds(rng)
        grid = train_som(samples, 3, 3, SomTrainParams(epochs=10, seed=0))
        assert np.isfinite(grid.codebook).all()
        assigned = bmu_batch(grid, samples)
        for unit in np.unique(assigned):
            owners = cloud[assigned == unit]
            assert len(set(owners.tolist())) == 1, f"unit {unit} mixes both clouds"

    def test_codebook_contracts_toward_constant_sample(self):
        v = np.array([2.0, -1.0, 0.5])
        samples = np.tile(v, (30, 1))
        start = np.full((4, 3), 40.0) + np.arange(12).reshape(4, 3)
        dists = []
        for epochs in [1, 2, 3, 5]:
            grid = train_som(
                samples, 2, 2,
                SomTrainParams(epochs=epochs, seed=0),
                initial_codebook=start,
            )
            dists.append(np.linalg.norm(grid.codebook - v, axis=1).max())
        assert all(b < a for a, b in zip(dists, dists[1:])), dists

    def test_warns_when_fewer_samples_than_units(self):
        rng = np.random.default_rng(12)
        samples = rng.normal(size=(3, 4))
        with pytest.warns(UserWarning, match="fewer"):
            train_som(samples, 3, 3, SomTrainParams(epochs=2, seed=0))

    def test_rejects_empty_or_non_finite(self):
        with pytest.raises(ValueError):
            train_som(np.zeros((0, 4)), 2, 2, SomTrainParams())
        with pytest.raises(ValueError):
            train_som(np.full((5, 4), np.nan), 2, 2, SomTrainParams())

    def test_initial_codebook_is_sampled_from_training_vectors(self):
        # With learning rate ~0 the codebook stays at its initialization,
        # which must be rows of the training set.
        rng = np.random.default_rng(13)
        samples = rng.normal(size=(50, 4))
        params = SomTrainParams(
            epochs=1, learning_rate_start=1e-12, learning_rate_end=1e-13, seed=7
        )
        grid = train_som(samples, 2, 2, params)
        for unit in grid.codebook:
            match = np.isclose(samples, unit, atol=1e-9).all(axis=1)
            assert match.any()


class TestQuantizationError:
    def test_hand_value(self):
        grid = SomGrid(rows=1, cols=2, codebook=np.array([[0.0, 0.0], [2.0, 0.0]]))
        samples = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 1.0]])
        # distances to nearest unit: 0, 1, 1 -> mean 2/3
        assert quantization_error(grid, samples) == pytest.approx(2.0 / 3.0, rel=1e-12)

    def test_training_reduces_error_on_structured_data(self):
        rng = np.random.default_rng(14)
        samples, _ = _two_clouds(rng)
        init = rng.normal(size=(9, samples.shape[1])) * 100
        before = quantization_error(SomGrid(3, 3, init.copy()), samples)
        grid = train_som(samples, 3, 3, SomTrainParams(epochs=10, seed=0), initial_codebook=init)
        assert quantization_error(grid, samples) < before
