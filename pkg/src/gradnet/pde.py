"""Stochastic elliptic PDE pipeline: forward solves, QoI, and adjoint sensitivities.

Solves -div(a(x, Y) grad u) = f on the unit square with zero Dirichlet data,
where log(a - 0.5) is an affine expansion in the random vector Y in [-1,1]^d
whose spatial modes depend only on x_1. Discretization is a 5-point finite
volume scheme with harmonic face averaging (keeps A symmetric positive
definite for any positive coefficient). The quantity of interest is u at the
center node (0.5, 0.5), and all d of its Y-sensitivities come from a single
adjoint solve against the same matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .data import Dataset

CORRELATION_LENGTH = 1.0 / 12.0
_Y1_FACTOR = math.sqrt(math.sqrt(math.pi) * CORRELATION_LENGTH / 2.0)


class SolverConvergenceError(RuntimeError):
    """Linear solve failed to reach the requested residual tolerance."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid on [0,1]^2 with N interior nodes per axis, h = 1/(N+1).

    N must be odd so that (0.5, 0.5) falls exactly on an interior node.
    """

    n_interior: int

    def __post_init__(self):
        if self.n_interior < 1 or self.n_interior % 2 == 0:
            raise ValueError("n_interior must be a positive odd integer")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_interior + 1)

    @property
    def node_coords(self) -> np.ndarray:
        """All node coordinates along one axis, boundary included: i*h, i=0..N+1."""
        return np.arange(self.n_interior + 2) * self.h

    @property
    def interior_coords(self) -> np.ndarray:
        return self.node_coords[1:-1]

    @property
    def center_flat_index(self) -> int:
        """Flat interior index of the node at (0.5, 0.5)."""
        c = (self.n_interior + 1) // 2  # node index along each axis
        return (c - 1) * self.n_interior + (c - 1)

    @property
    def n_unknowns(self) -> int:
        return self.n_interior * self.n_interior


def zeta(k: int) -> float:
    """Expansion amplitude for mode k >= 2."""
    if k < 2:
        raise ValueError("zeta is defined for k >= 2")
    L = CORRELATION_LENGTH
    return math.sqrt(math.sqrt(math.pi) * L) * math.exp(-((k // 2) * math.pi * L) ** 2 / 8.0)


def phi(k: int, x1) -> np.ndarray:
    """Spatial mode k >= 2: sin for even k, cos for odd k, frequency floor(k/2)*pi."""
    if k < 2:
        raise ValueError("phi is defined for k >= 2")
    freq = (k // 2) * math.pi
    return np.sin(freq * np.asarray(x1)) if k % 2 == 0 else np.cos(freq * np.asarray(x1))


def _mode_profiles(y: np.ndarray, x1: np.ndarray, n_terms: int) -> np.ndarray:
    """Rows k=1..d of the per-node log-coefficient factors g_k(x1); zero beyond n_terms."""
    d = y.shape[0]
    g = np.zeros((d, x1.shape[0]))
    if n_terms >= 1:
        g[0, :] = _Y1_FACTOR
    for k in range(2, n_terms + 1):
        g[k - 1, :] = zeta(k) * phi(k, x1)
    return g


def coefficient(y, x, n_terms: Optional[int] = None):
    """Diffusion coefficient a(x, Y) = 0.5 + exp(1 + sum_k g_k(x1) Y_k).

    ``x`` is a point (2,) or an array of points (..., 2); only x_1 matters.
    ``n_terms`` truncates the expansion (defaults to len(y)); entries of Y
    beyond it are ignored, so their sensitivities vanish identically.
    """
    y = np.asarray(y, dtype=float)
    if n_terms is None:
        n_terms = y.shape[0]
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    x1 = np.atleast_2d(pts)[..., 0].ravel()
    g = _mode_profiles(y, x1, n_terms)
    vals = 0.5 + np.exp(1.0 + y @ g)
    if single:
        return float(vals[0])
    return vals.reshape(np.asarray(x).shape[:-1])


def _coefficient_profile(y: np.ndarray, x1: np.ndarray, n_terms: int) -> np.ndarray:
    g = _mode_profiles(y, x1, n_terms)
    return 0.5 + np.exp(1.0 + y @ g)


def default_forcing(x1, x2):
    """Deterministic load cos(x_1) sin(x_2)."""
    return np.cos(x1) * np.sin(x2)


def _harmonic(p, q):
    return 2.0 * p * q / (p + q)


def _face_coefficients(anode: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Harmonic face averages; anode is (N+2, N+2) indexed [ix, iy]."""
    cx = _harmonic(anode[:-1, 1 : n + 1], anode[1:, 1 : n + 1])  # (N+1, N)
    cy = _harmonic(anode[1 : n + 1, :-1], anode[1 : n + 1, 1:])  # (N, N+1)
    return cx, cy


def coefficient_nodes(y, grid: Grid2D, n_terms: Optional[int] = None) -> np.ndarray:
    """Coefficient sampled on all nodes (boundary included), indexed [ix, iy]."""
    y = np.asarray(y, dtype=float)
    if n_terms is None:
        n_terms = y.shape[0]
    prof = _coefficient_profile(y, grid.node_coords, n_terms)
    return np.repeat(prof[:, None], grid.n_interior + 2, axis=1)


def assemble_system(
    y,
    grid: Grid2D,
    n_terms: Optional[int] = None,
    coef_nodes: Optional[np.ndarray] = None,
    forcing: Callable = default_forcing,
) -> tuple[sp.csr_matrix, np.ndarray]:
    """Sparse SPD system A u = F for the interior unknowns.

    ``coef_nodes`` overrides the stochastic coefficient with an arbitrary
    (N+2, N+2) node array (used by manufactured-solution tests).
    """
    n = grid.n_interior
    h = grid.h
    anode = coefficient_nodes(y, grid, n_terms) if coef_nodes is None else np.asarray(coef_nodes)
    if anode.shape != (n + 2, n + 2):
        raise ValueError("coefficient node array has wrong shape")
    cx, cy = _face_coefficients(anode, n)

    ix, iy = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1))  # [iy, ix] layout
    p = ((iy - 1) * n + (ix - 1)).ravel()
    cw = cx[ix - 1, iy - 1].ravel()
    ce = cx[ix, iy - 1].ravel()
    cs = cy[ix - 1, iy - 1].ravel()
    cn = cy[ix - 1, iy].ravel()

    rows = [p]
    cols = [p]
    vals = [cw + ce + cs + cn]
    for coef, mask, offset in (
        (cw, (ix > 1).ravel(), -1),
        (ce, (ix < n).ravel(), 1),
        (cs, (iy > 1).ravel(), -n),
        (cn, (iy < n).ravel(), n),
    ):
        rows.append(p[mask])
        cols.append(p[mask] + offset)
        vals.append(-coef[mask])

    A = sp.coo_matrix(
        (np.concatenate(vals) / h**2, (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_unknowns, grid.n_unknowns),
    ).tocsr()
    xs = grid.node_coords
    F = forcing(xs[ix], xs[iy]).ravel()
    return A, F


def make_solver(A: sp.csr_matrix, tol: float = 1e-10):
    """ILU-preconditioned CG solver bound to one matrix, reusable across right sides."""
    ilu = spla.spilu(A.tocsc(), drop_tol=1e-5, fill_factor=20)
    M = spla.LinearOperator(A.shape, ilu.solve)

    def solve(rhs: np.ndarray) -> np.ndarray:
        u, info = spla.cg(A, rhs, rtol=tol, atol=0.0, M=M, maxiter=10 * A.shape[0])
        if info != 0:
            raise SolverConvergenceError(f"CG did not converge (info={info})")
        resid = np.linalg.norm(A @ u - rhs)
        if resid > tol * max(np.linalg.norm(rhs), np.finfo(float).tiny):
            raise SolverConvergenceError(f"residual {resid:.3e} above tolerance")
        return u

    return solve


def solve_forward(A: sp.csr_matrix, F: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Solve A u = F to ||A u - F|| <= tol * ||F||."""
    return make_solver(A, tol)(F)


def qoi(u: np.ndarray, grid: Grid2D) -> float:
    """Solution value at the center node (0.5, 0.5)."""
    if u.shape[0] != grid.n_unknowns:
        raise ValueError("solution vector does not match grid")
    return float(u[grid.center_flat_index])


def _pad_interior(u: np.ndarray, n: int) -> np.ndarray:
    """Zero-extend the interior solution onto the full node array, indexed [ix, iy]."""
    full = np.zeros((n + 2, n + 2))
    full[1 : n + 1, 1 : n + 1] = u.reshape(n, n).T
    return full


def qoi_gradient(
    y,
    grid: Grid2D,
    u: np.ndarray,
    lam: np.ndarray,
    n_terms: Optional[int] = None,
) -> np.ndarray:
    """All d sensitivities dq/dY_k from the forward and adjoint solutions.

    Uses dq/dY_k = -lam^T (dA/dY_k) u with dF/dY_k = 0, expanded over faces:
    u^T A v = (1/h^2) sum_faces c_face (Du)(Dv) with zero boundary extension,
    so only the face-coefficient derivatives are needed. The node derivative
    is d a/d Y_k = (a - 0.5) g_k(x_1).
    """
    y = np.asarray(y, dtype=float)
    d = y.shape[0]
    if n_terms is None:
        n_terms = d
    n = grid.n_interior
    h = grid.h
    anode = coefficient_nodes(y, grid, n_terms)
    U = _pad_interior(u, n)
    Lam = _pad_interior(lam, n)

    dxu = U[1:, 1 : n + 1] - U[:-1, 1 : n + 1]
    dxl = Lam[1:, 1 : n + 1] - Lam[:-1, 1 : n + 1]
    dyu = U[1 : n + 1, 1:] - U[1 : n + 1, :-1]
    dyl = Lam[1 : n + 1, 1:] - Lam[1 : n + 1, :-1]
    px = dxu * dxl / h**2  # (N+1, N) face products
    py = dyu * dyl / h**2  # (N, N+1)

    aL, aR = anode[:-1, 1 : n + 1], anode[1:, 1 : n + 1]
    aB, aT = anode[1 : n + 1, :-1], anode[1 : n + 1, 1:]
    hx_L = 2.0 * (aR / (aL + aR)) ** 2  # dH/d(left node)
    hx_R = 2.0 * (aL / (aL + aR)) ** 2
    hy_B = 2.0 * (aT / (aB + aT)) ** 2
    hy_T = 2.0 * (aB / (aB + aT)) ** 2

    g = _mode_profiles(y, grid.node_coords, n_terms)  # (d, N+2)
    expo = anode - 0.5  # (N+2, N+2), constant along iy
    grad = np.zeros(d)
    for k in range(d):
        dan = expo * g[k][:, None]
        dcx = hx_L * dan[:-1, 1 : n + 1] + hx_R * dan[1:, 1 : n + 1]
        dcy = hy_B * dan[1 : n + 1, :-1] + hy_T * dan[1 : n + 1, 1:]
        grad[k] = -(np.sum(dcx * px) + np.sum(dcy * py))
    return grad


@dataclass
class PdeRealization:
    """One sampled coefficient field: random vector, solution, QoI, QoI gradient."""

    y: np.ndarray
    u: np.ndarray
    q: float
    q_grad: Optional[np.ndarray]


def solve_realization(
    y,
    grid: Grid2D,
    tol: float = 1e-10,
    n_terms: Optional[int] = None,
    with_gradient: bool = True,
) -> PdeRealization:
    """Forward solve plus (optionally) the one-adjoint-solve QoI gradient.

    The adjoint reuses the forward solver verbatim: A is symmetric, so the
    adjoint system shares the assembled matrix and its preconditioner.
    """
    y = np.asarray(y, dtype=float)
    A, F = assemble_system(y, grid, n_terms)
    solve = make_solver(A, tol)
    u = solve(F)
    q = qoi(u, grid)
    q_grad = None
    if with_gradient:
        c = np.zeros(grid.n_unknowns)
        c[grid.center_flat_index] = 1.0
        lam = solve(c)
        q_grad = qoi_gradient(y, grid, u, lam, n_terms)
    return PdeRealization(y=y, u=u, q=q, q_grad=q_grad)


def generate_uq_dataset(
    d: int,
    n: int,
    grid: Grid2D,
    seed,
    tol: float = 1e-10,
    with_gradient: bool = True,
) -> tuple[Dataset, dict]:
    """n realizations with x := Y, y := q and (optionally) y' := dq/dY.

    Returns the dataset plus a provenance record of grid and solver settings.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    ys = rng.uniform(-1.0, 1.0, size=(n, d))
    qs = np.empty(n)
    grads = np.zeros((n, d))
    for i in range(n):
        real = solve_realization(ys[i], grid, tol=tol, with_gradient=with_gradient)
        qs[i] = real.q
        if with_gradient:
            grads[i] = real.q_grad
    has = np.full(n, with_gradient)
    meta = {
        "grid_n": grid.n_interior,
        "h": grid.h,
        "solver": "cg+ilu",
        "tol": tol,
        "d": d,
        "n": n,
        "with_gradient": with_gradient,
    }
    return Dataset(ys, qs, grads, has), meta
