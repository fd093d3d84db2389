import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradnet.data import Dataset, LabeledSample
from gradnet.losses import (
    combined_risk,
    grad_risk,
    grad_risk_unsquared,
    param_gradient,
    value_risk,
)
from gradnet.network import TwoLayerNet, forward, input_gradient


def loop_value_risk(net, data, truncate=False):
    total = 0.0
    for s in data.samples():
        f = forward(net, s.x)
        if truncate:
            f = min(max(f, 0.0), 1.0)
        total += 0.5 * (f - s.y) ** 2
    return total / data.n


def loop_grad_risk(net, data, squared=True):
    terms = []
    for s in data.samples():
        if s.y_grad is None:
            continue
        r = np.linalg.norm(input_gradient(net, s.x) - s.y_grad)
        terms.append(r**2 if squared else r)
    return sum(terms) / len(terms)


def random_instance(m=4, d=2, n=5, seed=0, grad_every=1, bias=False):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=m) * 0.1 if bias else None
    net = TwoLayerNet(rng.normal(size=m), rng.normal(size=(m, d)), b)
    samples = []
    for i in range(n):
        g = rng.normal(size=d) if i % grad_every == 0 else None
        samples.append(LabeledSample(rng.uniform(-1, 1, d), float(rng.normal()), g))
    return net, Dataset.from_samples(samples)


class TestValueRisk:
    def test_exact_reproduction_gives_zero(self):
        net = TwoLayerNet([1.0], [[1.0, 0.0]])
        xs = np.array([[0.5, 0.1], [0.2, -0.3]])
        data = Dataset(xs, np.array([0.5, 0.2]), np.zeros_like(xs), np.zeros(2, bool))
        assert value_risk(net, data) == 0.0

    def test_single_sample_half_square(self):
        net = TwoLayerNet([1.0], [[1.0]])
        data = Dataset(np.array([[1.0]]), np.array([0.0]), np.zeros((1, 1)), np.zeros(1, bool))
        assert value_risk(net, data) == 0.5

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_loop_oracle(self, seed):
        net, data = random_instance(seed=seed)
        assert value_risk(net, data) == pytest.approx(loop_value_risk(net, data), abs=1e-12)

    def test_truncated_matches_loop_oracle(self):
        net, data = random_instance(seed=9)
        assert value_risk(net, data, truncate=True) == pytest.approx(
            loop_value_risk(net, data, truncate=True), abs=1e-12
        )

    def test_dimension_mismatch(self):
        net, _ = random_instance(d=2)
        _, data3 = random_instance(d=3, seed=1)
        with pytest.raises(ValueError):
            value_risk(net, data3)


class TestGradRisk:
    def test_perfect_gradients_zero(self):
        net = TwoLayerNet([2.0], [[1.0, 1.0]])
        x = np.array([[0.5, 0.2]])
        data = Dataset(x, np.zeros(1), input_gradient(net, x), np.ones(1, bool))
        assert grad_risk(net, data) == 0.0

    def test_unit_residual(self):
        net = TwoLayerNet([1.0], [[1.0, 0.0]])
        data = Dataset(
            np.array([[1.0, 0.0]]), np.zeros(1), np.zeros((1, 2)), np.ones(1, bool)
        )
        # input gradient is (1, 0), label (0, 0): squared norm 1
        assert grad_risk(net, data) == 1.0
        assert grad_risk_unsquared(net, data) == 1.0

    def test_mixed_dataset_divides_by_n_prime(self):
        net, data = random_instance(n=5, grad_every=2, seed=3)  # 3 of 5 carry gradients
        assert data.n_grad == 3
        assert grad_risk(net, data) == pytest.approx(loop_grad_risk(net, data), abs=1e-12)

    def test_unsquared_hand_mean(self):
        # residual norms {1, 1, 2, 2} -> unsquared mean 1.5, squared mean 2.5
        net = TwoLayerNet([1.0], [[1.0, 0.0]])
        x = np.tile([1.0, 0.0], (4, 1))
        grads = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0], [1.0, -2.0]])
        data = Dataset(x, np.zeros(4), grads, np.ones(4, bool))
        assert grad_risk_unsquared(net, data) == pytest.approx(1.5)
        assert grad_risk(net, data) == pytest.approx(2.5)

    def test_no_gradient_samples_error(self):
        net, data = random_instance(grad_every=10**9, seed=4, n=3)
        assert data.n_grad == 1  # only sample 0
        netd, data_none = random_instance(seed=5)
        data_none = Dataset(data_none.x, data_none.y, data_none.grad, np.zeros(data_none.n, bool))
        with pytest.raises(ValueError):
            grad_risk(netd, data_none)


class TestCombinedRisk:
    def test_beta_zero_is_value_risk(self):
        net, data = random_instance(seed=6)
        assert combined_risk(net, data, 0.0) == value_risk(net, data)

    def test_paper_beta_ten(self):
        # value_risk 0.5, grad_risk 1 -> 10.5 with beta = 10
        net = TwoLayerNet([1.0], [[1.0, 0.0]])
        data = Dataset(
            np.array([[1.0, 0.0]]), np.array([0.0]), np.zeros((1, 2)), np.ones(1, bool)
        )
        assert combined_risk(net, data, 10.0) == pytest.approx(10.5)

    def test_sum_matches_loop_oracles(self):
        net, data = random_instance(seed=7)
        expected = loop_value_risk(net, data) + 1.0 * loop_grad_risk(net, data)
        assert combined_risk(net, data, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_negative_beta_rejected(self):
        net, data = random_instance(seed=8)
        with pytest.raises(ValueError):
            combined_risk(net, data, -1.0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 500), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
    def test_monotone_in_beta(self, seed, b1, b2):
        net, data = random_instance(seed=seed)
        lo, hi = sorted((b1, b2))
        assert combined_risk(net, data, lo) <= combined_risk(net, data, hi) + 1e-12

    def test_permutation_invariance(self):
        net, data = random_instance(n=8, grad_every=2, seed=10)
        perm = np.random.default_rng(0).permutation(8)
        shuffled = Dataset(data.x[perm], data.y[perm], data.grad[perm], data.has_grad[perm])
        assert combined_risk(net, shuffled, 3.0) == pytest.approx(
            combined_risk(net, data, 3.0), rel=1e-13
        )


def fd_param_gradient(net, data, beta, truncate=False, h=1e-6):
    """Central finite differences of combined_risk through every parameter."""
    def J(a, W, b):
        return combined_risk(TwoLayerNet(a, W, b), data, beta, truncate)

    m, d = net.width, net.dim
    fd_a = np.zeros(m)
    for k in range(m):
        ap, am = net.a.copy(), net.a.copy()
        ap[k] += h
        am[k] -= h
        fd_a[k] = (J(ap, net.W, net.b) - J(am, net.W, net.b)) / (2 * h)
    fd_W = np.zeros((m, d))
    for k in range(m):
        for j in range(d):
            Wp, Wm = net.W.copy(), net.W.copy()
            Wp[k, j] += h
            Wm[k, j] -= h
            fd_W[k, j] = (J(net.a, Wp, net.b) - J(net.a, Wm, net.b)) / (2 * h)
    fd_b = None
    if net.b is not None:
        fd_b = np.zeros(m)
        for k in range(m):
            bp, bm = net.b.copy(), net.b.copy()
            bp[k] += h
            bm[k] -= h
            fd_b[k] = (J(net.a, net.W, bp) - J(net.a, net.W, bm)) / (2 * h)
    return fd_a, fd_W, fd_b


def away_from_kinks(net, data, margin=1e-3):
    return np.min(np.abs(net.preactivations(data.x))) > margin


class TestParamGradient:
    def test_zero_residual_gives_zero_gradient(self):
        net = TwoLayerNet([1.0], [[1.0, 0.0]])
        xs = np.array([[0.5, 0.3], [0.25, -0.1]])
        data = Dataset(xs, np.array([0.5, 0.25]), input_gradient(net, xs), np.ones(2, bool))
        g = param_gradient(net, data, 5.0)
        np.testing.assert_allclose(g.grad_a, 0.0, atol=1e-15)
        np.testing.assert_allclose(g.grad_W, 0.0, atol=1e-15)

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("bias", [False, True])
    def test_matches_finite_differences(self, seed, bias):
        seed_iter = seed
        while True:
            net, data = random_instance(m=4, d=2, n=6, seed=seed_iter, grad_every=2, bias=bias)
            if away_from_kinks(net, data):
                break
            seed_iter += 1000
        g = param_gradient(net, data, beta=3.0)
        fd_a, fd_W, fd_b = fd_param_gradient(net, data, beta=3.0)
        np.testing.assert_allclose(g.grad_a, fd_a, rtol=1e-4, atol=1e-8)
        np.testing.assert_allclose(g.grad_W, fd_W, rtol=1e-4, atol=1e-8)
        if bias:
            np.testing.assert_allclose(g.grad_b, fd_b, rtol=1e-4, atol=1e-8)

    def test_beta_zero_matches_plain_least_squares_oracle(self):
        net, data = random_instance(m=3, d=2, n=5, seed=12)
        g = param_gradient(net, data, beta=0.0)
        # independent loop implementation of the value-term gradient
        m, d = net.width, net.dim
        ga = np.zeros(m)
        gW = np.zeros((m, d))
        for s in data.samples():
            r = forward(net, s.x) - s.y
            z = net.W @ s.x
            for k in range(m):
                ga[k] += r * max(z[k], 0.0) / data.n
                if z[k] > 0:
                    gW[k] += r * net.a[k] * s.x / data.n
        np.testing.assert_allclose(g.grad_a, ga, rtol=1e-12)
        np.testing.assert_allclose(g.grad_W, gW, rtol=1e-12)

    def test_truncated_gradient_matches_fd(self):
        # scale labels into [0,1] so clamping actually engages for some samples
        seed = 0
        while True:
            net, data = random_instance(m=4, d=2, n=8, seed=seed, grad_every=2)
            data = Dataset(data.x, np.clip(data.y, 0.0, 1.0), data.grad, data.has_grad)
            vals = forward(net, data.x)
            inside = (vals > 0.0) & (vals < 1.0)
            if away_from_kinks(net, data) and np.min(np.abs(np.r_[vals, vals - 1.0])) > 1e-3:
                break
            seed += 1
        g = param_gradient(net, data, beta=2.0, truncate=True)
        fd_a, fd_W, _ = fd_param_gradient(net, data, beta=2.0, truncate=True)
        np.testing.assert_allclose(g.grad_a, fd_a, rtol=1e-4, atol=1e-8)
        np.testing.assert_allclose(g.grad_W, fd_W, rtol=1e-4, atol=1e-8)
