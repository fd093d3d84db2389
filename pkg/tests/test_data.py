import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradnet.data import (
    Dataset,
    EnhancementSpec,
    LabeledSample,
    apply_enhancement,
    assemble_enhanced,
    sample_uniform_cube,
)


def toy_dataset(n=6, d=3, seed=0, grad_every=2):
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        g = rng.normal(size=d) if i % grad_every == 0 else None
        samples.append(LabeledSample(rng.uniform(-1, 1, d), float(rng.normal()), g))
    return Dataset.from_samples(samples)


class TestTypes:
    def test_gradient_length_enforced(self):
        with pytest.raises(ValueError):
            LabeledSample(np.zeros(3), 0.0, np.zeros(2))

    def test_nonempty_required(self):
        with pytest.raises(ValueError):
            Dataset.from_samples([])

    def test_homogeneous_dimension_required(self):
        with pytest.raises(ValueError):
            Dataset.from_samples([LabeledSample(np.zeros(2), 0.0), LabeledSample(np.zeros(3), 0.0)])

    def test_counts(self):
        ds = toy_dataset(n=6, grad_every=2)
        assert ds.n == 6 and ds.n_grad == 3


class TestSerialization:
    def test_csv_round_trip(self):
        ds = toy_dataset()
        back = Dataset.from_csv(ds.to_csv())
        np.testing.assert_array_equal(ds.x, back.x)
        np.testing.assert_array_equal(ds.y, back.y)
        np.testing.assert_array_equal(ds.has_grad, back.has_grad)
        np.testing.assert_array_equal(ds.grad, back.grad)

    def test_csv_empty_cells_mean_no_gradient(self):
        ds = toy_dataset(n=4, d=2, grad_every=2)
        lines = ds.to_csv().strip().split("\n")
        assert lines[0] == "x_1,x_2,y,g_1,g_2"
        assert lines[2].endswith(",,")  # sample 1 has no gradient

    def test_json_round_trip(self):
        ds = toy_dataset()
        back = Dataset.from_json(ds.to_json())
        np.testing.assert_array_equal(ds.x, back.x)
        np.testing.assert_array_equal(ds.grad, back.grad)

    def test_full_precision_round_trip(self):
        ds = Dataset.from_samples([LabeledSample(np.array([1 / 3, np.pi / 7]), 2 / 7)])
        back = Dataset.from_csv(ds.to_csv())
        assert back.x[0, 0] == 1 / 3 and back.y[0] == 2 / 7


class TestSampling:
    def test_in_cube(self):
        pts = sample_uniform_cube(500, 4, 0)
        assert pts.shape == (500, 4)
        assert np.all(pts >= -1) and np.all(pts <= 1)

    def test_mean_near_zero(self):
        pts = sample_uniform_cube(100_000, 3, 1)
        # per-coordinate std of the mean is 1/sqrt(3 n)
        tol = 3.0 / np.sqrt(3 * 100_000)
        assert np.all(np.abs(pts.mean(axis=0)) < tol)

    def test_seed_determinism(self):
        np.testing.assert_array_equal(sample_uniform_cube(10, 2, 5), sample_uniform_cube(10, 2, 5))


class TestEnhancement:
    def test_percent_bounds(self):
        with pytest.raises(ValueError):
            EnhancementSpec(percent=101.0, n=10)

    @pytest.mark.parametrize(
        "percent,n,expected",
        [(100.0, 400, 400), (20.0, 400, 80), (0.0, 400, 0), (12.5, 4, 0), (37.5, 4, 2)],
    )
    def test_round_half_even_counts(self, percent, n, expected):
        assert EnhancementSpec(percent=percent, n=n).n_enhanced == expected

    def test_assemble_counts_and_subset(self):
        pts = sample_uniform_cube(50, 2, 3)
        value_fn = lambda x: x[:, 0] + x[:, 1]
        grad_fn = lambda x: np.ones_like(x)
        ds = assemble_enhanced(pts, value_fn, grad_fn, EnhancementSpec(20.0, 50, seed=4))
        assert ds.n_grad == 10
        np.testing.assert_array_equal(ds.x, pts)  # gradients attach to existing points
        np.testing.assert_allclose(ds.y, value_fn(pts))
        np.testing.assert_allclose(ds.grad[ds.has_grad], 1.0)

    def test_x0_and_x100(self):
        pts = sample_uniform_cube(8, 2, 3)
        fn = lambda x: np.zeros(len(x))
        gfn = lambda x: np.zeros_like(x)
        assert assemble_enhanced(pts, fn, gfn, EnhancementSpec(0.0, 8)).n_grad == 0
        assert assemble_enhanced(pts, fn, gfn, EnhancementSpec(100.0, 8)).n_grad == 8

    def test_assembly_is_pure(self):
        pts = sample_uniform_cube(20, 2, 3)
        fn = lambda x: x[:, 0]
        gfn = lambda x: np.ones_like(x)
        spec = EnhancementSpec(50.0, 20, seed=9)
        a = assemble_enhanced(pts, fn, gfn, spec)
        b = assemble_enhanced(pts, fn, gfn, spec)
        np.testing.assert_array_equal(a.has_grad, b.has_grad)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 60), st.floats(0.0, 100.0), st.integers(0, 1000))
    def test_count_matches_rounding_rule(self, n, percent, seed):
        spec = EnhancementSpec(percent=percent, n=n, seed=seed)
        pts = np.zeros((n, 2))
        ds = assemble_enhanced(pts, lambda x: np.zeros(len(x)), lambda x: np.zeros_like(x), spec)
        assert ds.n_grad == round(percent * n / 100.0)

    def test_apply_enhancement_masks_full_dataset(self):
        pts = sample_uniform_cube(10, 2, 0)
        full = Dataset(pts, np.zeros(10), np.ones((10, 2)), np.ones(10, dtype=bool))
        masked = apply_enhancement(full, EnhancementSpec(30.0, 10, seed=1))
        assert masked.n_grad == 3
        np.testing.assert_array_equal(masked.grad[~masked.has_grad], 0.0)

    def test_apply_enhancement_requires_full_gradients(self):
        ds = toy_dataset(grad_every=2)
        with pytest.raises(ValueError):
            apply_enhancement(ds, EnhancementSpec(50.0, ds.n))
