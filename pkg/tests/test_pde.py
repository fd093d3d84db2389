import numpy as np
import pytest

from gradnet.pde import (
    CORRELATION_LENGTH,
    Grid2D,
    SolverConvergenceError,
    assemble_system,
    coefficient,
    coefficient_nodes,
    generate_uq_dataset,
    make_solver,
    phi,
    qoi,
    solve_forward,
    solve_realization,
    zeta,
)


def mms_forcing(x1, x2):
    return 2 * np.pi**2 * np.sin(np.pi * x1) * np.sin(np.pi * x2)


def mms_solution(grid):
    xs = grid.interior_coords
    x1, x2 = np.meshgrid(xs, xs)
    return (np.sin(np.pi * x1) * np.sin(np.pi * x2)).ravel()


def unit_coef(grid):
    n = grid.n_interior
    return np.ones((n + 2, n + 2))


class TestGrid:
    def test_even_n_rejected(self):
        with pytest.raises(ValueError):
            Grid2D(32)

    def test_center_is_a_node(self):
        for n in (15, 31, 63):
            grid = Grid2D(n)
            c = (n + 1) // 2
            assert grid.node_coords[c] == pytest.approx(0.5)

    def test_h(self):
        assert Grid2D(63).h == pytest.approx(1 / 64)


class TestCoefficient:
    def test_zero_random_vector(self):
        assert coefficient(np.zeros(5), np.array([0.3, 0.8])) == pytest.approx(
            0.5 + np.e, rel=1e-14
        )

    def test_zeta2_frozen_value(self):
        # (sqrt(pi)/12)^(1/2) * exp(-(pi/12)^2 / 8), computed independently
        L = CORRELATION_LENGTH
        expected = (np.sqrt(np.pi) * L) ** 0.5 * np.exp(-((np.pi * L) ** 2) / 8.0)
        assert zeta(2) == pytest.approx(expected, rel=1e-15)
        assert zeta(2) == pytest.approx(0.38104484081106516, rel=1e-12)

    def test_phi_parity(self):
        x = np.linspace(0, 1, 7)
        np.testing.assert_allclose(phi(2, x), np.sin(np.pi * x))
        np.testing.assert_allclose(phi(3, x), np.cos(np.pi * x))
        np.testing.assert_allclose(phi(4, x), np.sin(2 * np.pi * x))

    def test_constant_along_x2(self):
        y = np.random.default_rng(0).uniform(-1, 1, 6)
        x2 = np.linspace(0, 1, 9)
        pts = np.stack([np.full(9, 0.37), x2], axis=1)
        vals = coefficient(y, pts)
        np.testing.assert_allclose(vals, vals[0])

    def test_positive_for_extreme_y(self):
        for y in (np.ones(10), -np.ones(10)):
            grid = Grid2D(15)
            assert np.all(coefficient_nodes(y, grid) > 0.5)

    def test_truncated_expansion_ignores_tail(self):
        y = np.array([0.5, -0.3, 0.2, 0.9])
        pts = np.array([[0.25, 0.5]])
        full = coefficient(y[:2], pts)
        padded = coefficient(y, pts, n_terms=2)
        np.testing.assert_allclose(padded, full)


class TestAssembly:
    def test_constant_coefficient_gives_laplacian_stencil(self):
        grid = Grid2D(5)
        A, _ = assemble_system(np.zeros(1), grid, coef_nodes=unit_coef(grid))
        dense = A.toarray() * grid.h**2
        center = 2 * 5 + 2  # interior node (3,3) zero-based flat index
        assert dense[center, center] == pytest.approx(4.0)
        assert dense[center, center - 1] == pytest.approx(-1.0)
        assert dense[center, center + 5] == pytest.approx(-1.0)

    def test_exact_symmetry(self):
        y = np.random.default_rng(1).uniform(-1, 1, 5)
        A, _ = assemble_system(y, Grid2D(15))
        assert (A - A.T).nnz == 0

    def test_spd_for_extreme_coefficients(self):
        for y in (np.ones(8), -np.ones(8)):
            A, _ = assemble_system(y, Grid2D(15))
            eigvals = np.linalg.eigvalsh(A.toarray())
            assert eigvals.min() > 0

    def test_mms_convergence_order(self):
        errs = {}
        for n in (15, 31):
            grid = Grid2D(n)
            A, F = assemble_system(
                np.zeros(1), grid, coef_nodes=unit_coef(grid), forcing=mms_forcing
            )
            u = solve_forward(A, F, tol=1e-12)
            errs[n] = np.max(np.abs(u - mms_solution(grid)))
        assert 3.5 <= errs[15] / errs[31] <= 4.5


class TestSolver:
    def test_zero_load_gives_zero(self):
        grid = Grid2D(15)
        A, _ = assemble_system(np.zeros(3), grid)
        u = solve_forward(A, np.zeros(grid.n_unknowns), tol=1e-10)
        np.testing.assert_allclose(u, 0.0)

    def test_residual_within_tolerance(self):
        y = np.random.default_rng(2).uniform(-1, 1, 5)
        grid = Grid2D(31)
        A, F = assemble_system(y, grid)
        u = solve_forward(A, F, tol=1e-10)
        assert np.linalg.norm(A @ u - F) <= 1e-10 * np.linalg.norm(F)

    def test_matches_dense_oracle(self):
        y = np.random.default_rng(3).uniform(-1, 1, 4)
        grid = Grid2D(15)
        A, F = assemble_system(y, grid)
        u = solve_forward(A, F, tol=1e-12)
        u_dense = np.linalg.solve(A.toarray(), F)
        assert np.max(np.abs(u - u_dense)) < 1e-8

    def test_nonconvergence_raises(self):
        grid = Grid2D(5)
        A, F = assemble_system(np.zeros(2), grid)
        solve = make_solver(A, tol=1e-300)
        with pytest.raises(SolverConvergenceError):
            solve(F + 1.0)

    def test_maximum_principle_with_nonnegative_forcing(self):
        y = np.random.default_rng(4).uniform(-1, 1, 5)
        A, F = assemble_system(y, Grid2D(31), forcing=lambda x1, x2: np.ones_like(x1))
        u = solve_forward(A, F, tol=1e-10)
        assert np.all(u >= 0.0)


class TestQoi:
    def test_zero_solution(self):
        grid = Grid2D(15)
        assert qoi(np.zeros(grid.n_unknowns), grid) == 0.0

    def test_manufactured_center_value(self):
        grid = Grid2D(31)
        A, F = assemble_system(
            np.zeros(1), grid, coef_nodes=unit_coef(grid), forcing=mms_forcing
        )
        u = solve_forward(A, F, tol=1e-12)
        assert qoi(u, grid) == pytest.approx(1.0, abs=5e-3)  # sin^2(pi/2) up to O(h^2)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            qoi(np.zeros(10), Grid2D(15))

    def test_grid_refinement_consistency(self):
        y = np.random.default_rng(5).uniform(-1, 1, 5)
        qs = {}
        for n in (15, 31, 63):
            qs[n] = solve_realization(y, Grid2D(n), tol=1e-12, with_gradient=False).q
        # O(h^2): consecutive q differences shrink by about 4
        ratio = abs(qs[15] - qs[31]) / abs(qs[31] - qs[63])
        assert 2.5 <= ratio <= 6.0


class TestAdjointGradient:
    def test_matches_pipeline_finite_differences(self):
        grid = Grid2D(31)
        rng = np.random.default_rng(6)
        y = rng.uniform(-1, 1, 5)
        real = solve_realization(y, grid, tol=1e-12)
        h = 1e-4
        for k in range(5):
            yp, ym = y.copy(), y.copy()
            yp[k] += h
            ym[k] -= h
            fd = (
                solve_realization(yp, grid, tol=1e-12, with_gradient=False).q
                - solve_realization(ym, grid, tol=1e-12, with_gradient=False).q
            ) / (2 * h)
            assert abs(real.q_grad[k] - fd) <= 1e-4 * max(abs(fd), 1e-12)

    def test_padding_zeros_give_zero_sensitivity(self):
        grid = Grid2D(15)
        y = np.array([0.4, -0.2, 0.1, 0.6, 0.3, 0.0, 0.0])
        real = solve_realization(y, grid, tol=1e-12, n_terms=5)
        np.testing.assert_array_equal(real.q_grad[5:], 0.0)
        trimmed = solve_realization(y[:5], grid, tol=1e-12)
        np.testing.assert_allclose(real.q_grad[:5], trimmed.q_grad, rtol=1e-10)

    def test_adjoint_reuses_symmetric_matrix(self):
        # one assembled matrix serves both solves: q_grad from the realization
        # equals the hand computation with the same A and its transpose
        grid = Grid2D(15)
        y = np.random.default_rng(7).uniform(-1, 1, 4)
        A, F = assemble_system(y, grid)
        assert (A - A.T).nnz == 0
        solve = make_solver(A, tol=1e-12)
        u = solve(F)
        c = np.zeros(grid.n_unknowns)
        c[grid.center_flat_index] = 1.0
        lam = solve(c)
        real = solve_realization(y, grid, tol=1e-12)
        assert real.q == pytest.approx(float(u[grid.center_flat_index]), rel=1e-10)
        assert float(c @ u) == pytest.approx(float(lam @ F), rel=1e-8)


class TestUqDataset:
    def test_shapes_and_gradients_present(self):
        ds, meta = generate_uq_dataset(5, 8, Grid2D(15), seed=0)
        assert ds.n == 8 and ds.dim == 5 and ds.n_grad == 8
        assert meta["grid_n"] == 15 and meta["solver"] == "cg+ilu"

    def test_seed_determinism(self):
        a, _ = generate_uq_dataset(3, 5, Grid2D(15), seed=1)
        b, _ = generate_uq_dataset(3, 5, Grid2D(15), seed=1)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.grad, b.grad)

    def test_values_only_mode(self):
        ds, _ = generate_uq_dataset(3, 4, Grid2D(15), seed=2, with_gradient=False)
        assert ds.n_grad == 0

    def test_qoi_mean_stable_across_seeds(self):
        grid = Grid2D(15)
        means = [generate_uq_dataset(4, 40, grid, seed=s)[0].y.mean() for s in (0, 1)]
        spread = abs(means[0] - means[1])
        assert spread < 0.2 * abs(np.mean(means))
