"""Leading-vector search on the unit sphere.

The per-stage objective is the mean squared residual left after projecting
onto a candidate unit vector and subtracting the best least-squares polynomial
prediction of the orthogonal coordinates. The objective is non-convex in
general, so the search is plain projected gradient descent with backtracking,
initialized at the top covariance eigenvector by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    as_data_matrix,
    fit_polynomial,
    pca_split,
    poly_basis_derivative,
    vandermonde,
)

_ARMIJO = 1e-4
_MIN_STEP = 1e-14


@dataclass(frozen=True)
class DescentOptions:
    max_iters: int = 200
    initial_step: float = 0.1
    backtrack: float = 0.5
    grad_tol: float = 1e-7
    restarts: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1 or self.initial_step <= 0 or self.grad_tol <= 0:
            raise ValueError("iterations, step and tolerance must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtracking factor must be in (0, 1)")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")
        if self.grad_tol >= self.initial_step:
            raise ValueError("gradient tolerance must be below the initial step")


@dataclass(frozen=True)
class DescentResult:
    leading: np.ndarray
    cost: float
    iterations: int
    converged: bool  # False means the iteration limit cut the search short


def derivative_operator(degree: int) -> np.ndarray:
    """Matrix D with D @ [1, a, ..., a^g]^T = [0, 1, 2a, ..., g a^(g-1)]^T.

    Realized as the subdiagonal form D[k, k-1] = k; this is the orientation
    that differentiates the power basis (validated against finite differences
    of the cost, which is what the gradient below needs).
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    D = np.zeros((degree + 1, degree + 1))
    ks = np.arange(1, degree + 1)
    D[ks, ks - 1] = ks
    return D


def complement_basis(e) -> np.ndarray:
    """Deterministic orthonormal complement of a unit vector.

    Rows are the last m-1 rows of the Householder reflection mapping e onto
    (a multiple of) the first axis: orthonormal and exactly orthogonal to e.
    """
    e = np.asarray(e, dtype=float).reshape(-1)
    norm = np.linalg.norm(e)
    if norm < 1e-12:
        raise ValueError("cannot build a complement of the zero vector")
    unit = e / norm
    m = unit.shape[0]
    sign = 1.0 if unit[0] >= 0 else -1.0
    u = unit.copy()
    u[0] += sign  # reflect onto -sign * first axis; stable for any e
    H = np.eye(m) - (2.0 / (u @ u)) * np.outer(u, u)
    return H[1:]


def _prepare(e, X, degree: int):
    X = as_data_matrix(X, min_dims=2)
    e = np.asarray(e, dtype=float).reshape(-1)
    if e.shape[0] != X.shape[0]:
        raise ValueError(f"vector length {e.shape[0]} does not match {X.shape[0]} dims")
    comp = complement_basis(e)
    scores = e @ X
    V = vandermonde(scores, degree)
    proj = comp @ X
    W = fit_polynomial(proj, V)
    resid = proj - W @ V
    return X, scores, W, resid


def cost(e, X, degree: int) -> float:
    """Mean squared residual after one deflation stage along e.

    The value does not depend on the complement basis choice, and it is
    invariant to the scale of e (the polynomial space absorbs score scaling),
    so finite differences of this function probe the sphere-intrinsic
    objective directly.
    """
    _, _, _, resid = _prepare(e, X, degree)
    return float(np.sum(resid * resid) / resid.shape[1])


def cost_gradient(e, X, degree: int) -> np.ndarray:
    """Analytic gradient of cost with respect to e.

    Assembled from per-sample terms (residual . W vdot) x. The least-squares
    orthogonality of the residual to the score powers makes this the exact
    (already tangential) gradient of the intrinsic objective; the sign and the
    derivative-operator orientation are fixed by the finite-difference oracle.
    """
    X, scores, W, resid = _prepare(e, X, degree)
    n = X.shape[1]
    slopes = W @ poly_basis_derivative(scores, degree)
    per_sample = np.einsum("ij,ij->j", resid, slopes)
    return -(2.0 / n) * (X @ per_sample)


def optimize_leading(
    X, degree: int, init=None, options: DescentOptions | None = None
) -> DescentResult:
    """Projected gradient descent on the unit sphere, best-cost iterate wins.

    Steps follow the gradient component tangent to the sphere, renormalize,
    and accept only on Armijo-style sufficient decrease. The returned cost
    never exceeds the cost at init. Extra seeded random restarts are searched
    when options.restarts > 0.
    """
    X = as_data_matrix(X, min_dims=2)
    opts = options or DescentOptions()
    if init is None:
        init, _ = pca_split(X)
    init = np.asarray(init, dtype=float).reshape(-1)
    init = init / np.linalg.norm(init)

    best = _descend(init, X, degree, opts)
    if opts.restarts > 0:
        rng = np.random.default_rng(opts.seed)
        for _ in range(opts.restarts):
            start = rng.standard_normal(init.shape[0])
            start /= np.linalg.norm(start)
            trial = _descend(start, X, degree, opts)
            if trial.cost < best.cost:
                best = trial
    return best


def _descend(start, X, degree: int, opts: DescentOptions) -> DescentResult:
    e = start
    f = cost(e, X, degree)
    best_e, best_f = e, f
    converged = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        grad = cost_gradient(e, X, degree)
        tangent = grad - (e @ grad) * e
        gnorm = float(np.linalg.norm(tangent))
        if gnorm < opts.grad_tol:
            converged = True
            break
        step = opts.initial_step
        accepted = False
        while step >= _MIN_STEP:
            cand = e - step * tangent
            cand /= np.linalg.norm(cand)
            fc = cost(cand, X, degree)
            if fc <= f - _ARMIJO * step * gnorm * gnorm:
                e, f = cand, fc
                accepted = True
                break
            step *= opts.backtrack
        if not accepted:
            converged = True  # no descent direction left at line-search floor
            break
        if f < best_f:
            best_e, best_f = e, f
    return DescentResult(leading=best_e, cost=best_f, iterations=it, converged=converged)
