"""Numerical checks of the approximation and generalization bounds.

The checks are one-sided by construction. Rademacher suprema are inner-
approximated by random candidate search, so the estimates are statistically
valid lower bounds and may only ever fail to reach the closed-form ceilings,
never exceed them spuriously. Mixture norms gamma_p are computed from the
given finite representation, an upper-bound surrogate for the true infimum,
which preserves every inequality direction used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .data import Dataset, sample_uniform_cube
from .losses import grad_risk_unsquared, value_risk
from .network import TwoLayerNet, path_norm

#: sum_{k>=1} 1/k^2, the union-bound constant of the posterior bound.
BOUND_C = math.pi**2 / 6.0


@dataclass
class BarronMixture:
    """Finite-support single-neuron mixture f(x) = sum_i p_i a_i relu(<w_i, x>).

    Rows of W lie on the unit l1 sphere and p is a probability vector; the
    pair (a, p) plays the role of a density against the sampling measure.
    """

    p: np.ndarray
    a: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        k = self.p.shape[0]
        if self.a.shape != (k,) or self.W.ndim != 2 or self.W.shape[0] != k:
            raise ValueError("mixture arrays must share one atom count")
        if np.any(self.p < 0) or abs(self.p.sum() - 1.0) > 1e-12:
            raise ValueError("p must be a probability vector (sum 1 within 1e-12)")
        row_l1 = np.abs(self.W).sum(axis=1)
        if np.any(np.abs(row_l1 - 1.0) > 1e-12):
            raise ValueError("every w_i must have unit l1 norm within 1e-12")

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.p.shape[0]

    def gamma(self, order: float) -> float:
        """(sum_i p_i |a_i|^order)^(1/order) for this representation."""
        if order < 1:
            raise ValueError("order must be >= 1")
        return float((self.p @ np.abs(self.a) ** order) ** (1.0 / order))

    def gradient_bound(self) -> float:
        """Analytic upper bound on sup ||grad f||_2: sum_i p_i |a_i| ||w_i||_2."""
        return float(self.p @ (np.abs(self.a) * np.linalg.norm(self.W, axis=1)))

    def to_dict(self) -> dict:
        return {"p": self.p.tolist(), "a": self.a.tolist(), "W": self.W.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "BarronMixture":
        return cls(np.array(doc["p"]), np.array(doc["a"]), np.array(doc["W"]))


def random_mixture(
    n_atoms: int, d: int, seed, amplitude: float = 2.0, unit_range: bool = False
) -> BarronMixture:
    """Random test mixture; with unit_range the target satisfies 0 <= f <= 1."""
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.full(n_atoms, 2.0))
    W = rng.standard_normal((n_atoms, d))
    W /= np.abs(W).sum(axis=1, keepdims=True)
    if unit_range:
        # relu(<w,x>) <= 1 on the cube, so positive a with sum p_i a_i <= 1 works
        a = rng.uniform(0.2, 1.0, size=n_atoms)
        a *= rng.uniform(0.8, 1.0) / (p @ a)
    else:
        a = rng.uniform(-amplitude, amplitude, size=n_atoms)
    return BarronMixture(p, a, W)


def _mix_points(mix: BarronMixture, x) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.shape[1] != mix.dim:
        raise ValueError(f"input dimension {pts.shape[1]} != mixture dimension {mix.dim}")
    return pts, single


def mixture_eval(mix: BarronMixture, x):
    """f(x) for one point (d,) or a batch (n, d)."""
    pts, single = _mix_points(mix, x)
    vals = np.maximum(pts @ mix.W.T, 0.0) @ (mix.p * mix.a)
    return float(vals[0]) if single else vals


def mixture_gradient(mix: BarronMixture, x):
    """A.e. gradient sum_i p_i a_i 1{<w_i,x> > 0} w_i."""
    pts, single = _mix_points(mix, x)
    active = (pts @ mix.W.T > 0).astype(float)
    grads = (active * (mix.p * mix.a)) @ mix.W
    return grads[0] if single else grads


def sample_subnetwork(mix: BarronMixture, m: int, seed) -> TwoLayerNet:
    """Monte Carlo width-m subnetwork: draw atoms from p, set a_k = a(w_k)/m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.choice(mix.n_atoms, size=m, p=mix.p)
    return TwoLayerNet(mix.a[idx] / m, mix.W[idx])


@dataclass
class ApproximationEventReport:
    """Empirical frequencies of the three sampled-construction events.

    E1: mean squared value error below 3*gamma2^2/m; E2: mean squared gradient
    error at most 7*gamma2^2/m; E3: path norm below 2*gamma2. The first two
    expectations are Monte Carlo estimates over uniform inputs on the cube.
    """

    gamma2: float
    m: int
    n_trials: int
    n_mc: int
    freq_e1: float
    freq_e2: float
    freq_e3: float
    freq_all: float
    mean_value_mse: float
    mean_grad_mse: float
    mean_path_norm: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def verify_approximation_theorem(
    mix: BarronMixture, m: int, n_trials: int, n_mc: int = 4096, seed=0
) -> ApproximationEventReport:
    """Estimate how often random subnetworks land inside the three event bounds."""
    if n_trials < 100:
        raise ValueError("n_trials must be >= 100 for a meaningful frequency")
    d = mix.dim
    g2 = mix.gamma(2)
    ss = np.random.SeedSequence(seed)
    x_seed, trial_seed = ss.spawn(2)
    xs = sample_uniform_cube(n_mc, d, x_seed)
    f_true = mixture_eval(mix, xs)
    g_true = mixture_gradient(mix, xs)

    t1 = 3.0 * g2**2 / m
    t2 = 7.0 * g2**2 / m
    t3 = 2.0 * g2
    e1 = np.zeros(n_trials, dtype=bool)
    e2 = np.zeros(n_trials, dtype=bool)
    e3 = np.zeros(n_trials, dtype=bool)
    l1s = np.empty(n_trials)
    l2s = np.empty(n_trials)
    pns = np.empty(n_trials)
    for t, child in enumerate(trial_seed.spawn(n_trials)):
        net = sample_subnetwork(mix, m, child)
        vals = np.maximum(xs @ net.W.T, 0.0) @ net.a
        grads = ((xs @ net.W.T > 0).astype(float) * net.a) @ net.W
        l1s[t] = np.mean((vals - f_true) ** 2)
        l2s[t] = np.mean(np.sum((grads - g_true) ** 2, axis=1))
        pns[t] = path_norm(net)
        e1[t] = l1s[t] < t1
        e2[t] = l2s[t] <= t2
        e3[t] = pns[t] < t3
    return ApproximationEventReport(
        gamma2=g2,
        m=m,
        n_trials=n_trials,
        n_mc=n_mc,
        freq_e1=float(e1.mean()),
        freq_e2=float(e2.mean()),
        freq_e3=float(e3.mean()),
        freq_all=float((e1 & e2 & e3).mean()),
        mean_value_mse=float(l1s.mean()),
        mean_grad_mse=float(l2s.mean()),
        mean_path_norm=float(pns.mean()),
    )


def _candidate_nets(d: int, q: float, n_theta: int, rng, max_width: int = 32):
    """Random networks rescaled to path norm exactly q (outer weights carry the scale)."""
    nets = []
    for _ in range(n_theta):
        k = int(rng.integers(1, max_width + 1))
        W = rng.standard_normal((k, d))
        a = rng.standard_normal(k)
        net = TwoLayerNet(a, W)
        pn = path_norm(net)
        nets.append(TwoLayerNet(a * (q / pn), W))
    return nets


def empirical_rademacher_value_family(
    points: np.ndarray, q: float, n_theta: int = 256, n_xi: int = 1000, seed=0
) -> float:
    """Lower estimate of the Rademacher complexity of the path-norm-q value family.

    The sup over the family is replaced by a max over random candidates; the
    family is closed under negation, so each candidate contributes both signs.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if q == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    nets = _candidate_nets(points.shape[1], q, n_theta, rng)
    vals = np.stack([np.maximum(points @ net.W.T, 0.0) @ net.a for net in nets])
    signs = rng.integers(0, 2, size=(n_xi, n)) * 2.0 - 1.0
    stats = signs @ vals.T / n  # (n_xi, n_theta)
    return float(np.abs(stats).max(axis=1).mean())


def rademacher_value_bound(q: float, n: int, d: int) -> float:
    """Closed-form ceiling 2 q sqrt(2 ln(2d) / n) for the value family."""
    return 2.0 * q * math.sqrt(2.0 * math.log(2 * d) / n)


def empirical_rademacher_gradient_family(
    points: np.ndarray,
    grad_labels: np.ndarray,
    q: float,
    n_theta: int = 256,
    n_xi: int = 1000,
    seed=0,
) -> float:
    """Lower estimate for the family of gradient-mismatch losses ||grad f - y'||_2.

    The offset by y' breaks the sign symmetry, so only the sampled candidates
    enter the max.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    points = np.asarray(points, dtype=float)
    grad_labels = np.asarray(grad_labels, dtype=float)
    n, d = points.shape
    if grad_labels.shape != (n, d):
        raise ValueError("gradient labels must match the points array")
    rng = np.random.default_rng(seed)
    if q == 0.0:
        nets = [TwoLayerNet(np.zeros(1), np.zeros((1, d)) + 1.0)]
    else:
        nets = _candidate_nets(d, q, n_theta, rng)
    stats_rows = []
    for net in nets:
        grads = ((points @ net.W.T > 0).astype(float) * net.a) @ net.W
        stats_rows.append(np.linalg.norm(grads - grad_labels, axis=1))
    h = np.stack(stats_rows)  # (n_theta, n)
    signs = rng.integers(0, 2, size=(n_xi, n)) * 2.0 - 1.0
    stats = signs @ h.T / n
    return float(stats.max(axis=1).mean())


def rademacher_gradient_bound(q: float, n: int, d: int) -> float:
    """Closed-form ceiling 2 sqrt(2) q d sqrt(2 ln(2d) / n) for the gradient family."""
    return 2.0 * math.sqrt(2.0) * q * d * math.sqrt(2.0 * math.log(2 * d) / n)


def posterior_bound(q: float, n: int, d: int, beta: float, big_d: float, delta: float) -> float:
    """Closed-form posterior generalization bound for a net of path norm q.

    4(1+sqrt(2) beta d)(q+1) sqrt(2 ln(2d)/n)
      + (1/2 + beta (q+1+big_d)) sqrt(2 ln(2 c (q+1)^2 / delta) / n),
    with c = pi^2/6. Requires d >= 2 so that ln(2d) >= 1.
    """
    if d < 2:
        raise ValueError("the bound requires d >= 2 (ln(2d) >= 1)")
    if n < 1 or not 0.0 < delta < 1.0 or q < 0 or beta < 0 or big_d < 0:
        raise ValueError("invalid bound arguments")
    first = 4.0 * (1.0 + math.sqrt(2.0) * beta * d) * (q + 1.0) * math.sqrt(
        2.0 * math.log(2 * d) / n
    )
    second = (0.5 + beta * (q + 1.0 + big_d)) * math.sqrt(
        2.0 * math.log(2.0 * BOUND_C * (q + 1.0) ** 2 / delta) / n
    )
    return first + second


@dataclass
class BoundReport:
    """Posterior-bound evaluation against a measured train/test risk gap."""

    path_norm: float
    n: int
    d: int
    beta: float
    big_d: float
    delta: float
    bound_value: float
    measured_gap: float
    holds: bool
    train_risk: float = 0.0
    test_risk: float = 0.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def check_generalization_gap(
    net: TwoLayerNet,
    train_data: Dataset,
    beta: float,
    big_d: float,
    delta: float,
    oracle,
    n_test: int,
    seed=0,
    truncate: bool = True,
) -> BoundReport:
    """Compare |population - empirical| combined risk against the posterior bound.

    Population terms are Monte Carlo estimates on n_test fresh uniform points
    labeled by ``oracle`` (anything with evaluate/gradient, e.g. a
    TargetFunction). Gradient risks enter unsquared on both sides: that is the
    family the bound actually controls. Truncation applies to values only.
    """
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    d = net.dim
    xs = sample_uniform_cube(n_test, d, seed)
    y = np.asarray(oracle.evaluate(xs), dtype=float)
    g = np.asarray(oracle.gradient(xs), dtype=float)
    test_data = Dataset(xs, y, g, np.ones(n_test, dtype=bool))

    train_risk = value_risk(net, train_data, truncate)
    test_risk = value_risk(net, test_data, truncate)
    if beta > 0:
        train_risk += beta * grad_risk_unsquared(net, train_data)
        test_risk += beta * grad_risk_unsquared(net, test_data)
    gap = abs(test_risk - train_risk)
    q = path_norm(net)
    bound = posterior_bound(q, train_data.n, d, beta, big_d, delta)
    return BoundReport(
        path_norm=q,
        n=train_data.n,
        d=d,
        beta=beta,
        big_d=big_d,
        delta=delta,
        bound_value=bound,
        measured_gap=gap,
        holds=bool(gap <= bound),
        train_risk=train_risk,
        test_risk=test_risk,
    )


@dataclass
class RiskBoundReport:
    """Explicit empirical-risk ceiling for an event-conditioned subnetwork."""

    gamma2: float
    m: int
    n: int
    d: int
    beta: float
    delta: float
    big_d: float
    lhs: float
    rhs: float
    holds: bool
    retries: int
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def risk_upper_bound_check(
    mix: BarronMixture,
    m: int,
    data: Dataset,
    beta: float,
    delta: float,
    n_mc: int = 4096,
    seed=0,
    retry_budget: int = 200,
) -> RiskBoundReport:
    """Check the pre-simplification empirical-risk ceiling on mixture-labeled data.

    A subnetwork is resampled until the three construction events hold (their
    joint probability is bounded away from zero, so the retry loop terminates
    quickly in practice), then its combined empirical risk -- truncated values,
    unsquared gradient mismatch -- is compared against
    3 g2^2/m + beta sqrt(7 g2^2/m) + deviation terms evaluated at Q = 2 g2 + 1.
    """
    if data.dim != mix.dim:
        raise ValueError("data dimension does not match mixture")
    d = mix.dim
    n = data.n
    g2 = mix.gamma(2)
    big_d = mix.gradient_bound()

    ss = np.random.SeedSequence(seed)
    x_seed, trial_seed = ss.spawn(2)
    xs = sample_uniform_cube(n_mc, d, x_seed)
    f_true = mixture_eval(mix, xs)
    g_true = mixture_gradient(mix, xs)
    net = None
    retries = 0
    for child in trial_seed.spawn(retry_budget):
        cand = sample_subnetwork(mix, m, child)
        vals = np.maximum(xs @ cand.W.T, 0.0) @ cand.a
        grads = ((xs @ cand.W.T > 0).astype(float) * cand.a) @ cand.W
        ok = (
            np.mean((vals - f_true) ** 2) < 3.0 * g2**2 / m
            and np.mean(np.sum((grads - g_true) ** 2, axis=1)) <= 7.0 * g2**2 / m
            and path_norm(cand) < 2.0 * g2
        )
        retries += 1
        if ok:
            net = cand
            break
    if net is None:
        raise RuntimeError(f"no event-conditioned subnetwork within {retry_budget} draws")

    lhs = value_risk(net, data, truncate=True)
    if beta > 0:
        lhs += beta * grad_risk_unsquared(net, data)

    value_term = 3.0 * g2**2 / m
    grad_term = beta * math.sqrt(7.0 * g2**2 / m)
    dev1 = 4.0 * (1.0 + math.sqrt(2.0) * beta * d) * (2.0 * g2 + 1.0) * math.sqrt(
        2.0 * math.log(2 * d) / n
    )
    dev2 = (0.5 + beta * (2.0 * g2 + 1.0 + big_d)) * math.sqrt(
        2.0 * math.log(2.0 * BOUND_C * (1.0 + 2.0 * g2) ** 2 / delta) / n
    )
    rhs = value_term + grad_term + dev1 + dev2
    return RiskBoundReport(
        gamma2=g2,
        m=m,
        n=n,
        d=d,
        beta=beta,
        delta=delta,
        big_d=big_d,
        lhs=lhs,
        rhs=rhs,
        holds=bool(lhs <= rhs),
        retries=retries,
        terms={
            "value_term": value_term,
            "grad_term": grad_term,
            "deviation_complexity": dev1,
            "deviation_confidence": dev2,
        },
    )
