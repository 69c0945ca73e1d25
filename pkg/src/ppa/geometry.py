"""Differential geometry of the fitted transform.

Analytic Jacobian (a product of per-stage shear blocks, so its determinant has
magnitude one everywhere), the induced metric generalizing Mahalanobis
distance, principal curves/surfaces traced through the exact inverse, and
moving frames with generalized curvatures along the first curvilinear
coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import UndefinedFrameError
from .model import (
    PpaModel,
    PpaStep,
    _as_point,
    as_data_matrix,
    inverse,
    inverse_transform,
    poly_basis_derivative,
    transform,
    vandermonde,
)

VARIANCE_FLOOR = 1e-12
# Safety factor on the finite-difference roundoff floor below which a
# Gram-Schmidt remainder is treated as an exactly flat direction.
_FLAT_SAFETY = 8.0


def step_jacobian(step: PpaStep, xprev) -> np.ndarray:
    """Jacobian block of one stage at a point of its input space.

    Rows: the leading projection, then the complement rows sheared by the
    polynomial slope (slope vector times leading). Shear preserves volume, so
    the block determinant is +-1.
    """
    xprev = np.asarray(xprev, dtype=float).reshape(-1)
    m = step.in_dim
    if xprev.shape[0] != m:
        raise ValueError(f"stage expects dimension {m}, got {xprev.shape[0]}")
    score = float(step.leading @ xprev)
    slope = step.coeffs @ poly_basis_derivative(np.array([score]), step.degree)[:, 0]
    return np.vstack([step.leading, step.complement - np.outer(slope, step.leading)])


def full_jacobian(model: PpaModel, x) -> np.ndarray:
    """d x d Jacobian of the forward transform at x.

    Product of identity-padded stage blocks, each evaluated at the residual
    that stage actually sees during the forward pass of x.
    """
    x = _as_point(model, x)
    d = model.dims
    z = x - model.mean
    J = np.eye(d)
    for p, step in enumerate(model.steps):
        block = step_jacobian(step, z)
        padded = np.eye(d)
        padded[p:, p:] = block
        J = padded @ J
        score = step.leading @ z
        z = step.complement @ z - (
            step.coeffs @ vandermonde(np.array([score]), step.degree)[:, 0]
        )
    return J


def whitened_variances(model: PpaModel, X) -> np.ndarray:
    """Per-coordinate empirical variances in the transformed domain.

    Floored at 1e-12 so the induced metric stays invertible even when a
    residual coordinate collapses.
    """
    X = as_data_matrix(X, min_samples=2)
    return np.maximum(transform(model, X).var(axis=1), VARIANCE_FLOOR)


def metric_tensor(model: PpaModel, x, variances) -> np.ndarray:
    """Induced metric M(x) = J^T diag(variances)^-1 J; symmetric positive definite."""
    variances = np.asarray(variances, dtype=float).reshape(-1)
    if variances.shape[0] != model.dims:
        raise ValueError("need one variance per dimension")
    if np.any(variances <= 0):
        raise ValueError("variances must be positive")
    J = full_jacobian(model, x)
    return J.T @ (J / variances[:, None])


def squared_distance(model: PpaModel, x, dx, variances) -> float:
    """Quadratic form dx^T M(x) dx of the induced metric at x."""
    dx = np.asarray(dx, dtype=float).reshape(-1)
    M = metric_tensor(model, x, variances)
    return float(dx @ M @ dx)


def principal_curve(model: PpaModel, alphas) -> np.ndarray:
    """Points of the first curvilinear feature: inverse of [alpha, 0, ..., 0].

    Returns an (n_alphas, d) array. See principal_grid for surfaces/volumes.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    R = np.zeros((model.dims, alphas.size))
    R[0] = alphas
    return inverse_transform(model, R).T


def principal_grid(model: PpaModel, axes) -> tuple[np.ndarray, np.ndarray]:
    """Grid the first k transformed coordinates, zero the rest, invert.

    axes is a sequence of k 1d arrays. Returns (coords, points) where coords
    is (n_points, k) of grid coordinates and points is (n_points, d).
    """
    axes = [np.atleast_1d(np.asarray(a, dtype=float)) for a in axes]
    k = len(axes)
    if not 1 <= k <= model.dims:
        raise ValueError(f"can grid 1..{model.dims} coordinates, got {k}")
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=0)
    R = np.zeros((model.dims, coords.shape[1]))
    R[:k] = coords
    return coords.T, inverse_transform(model, R).T


def alpha_span(model: PpaModel, X, coverage: float = 0.9) -> tuple[float, float]:
    """Central quantile range of the first projection score over samples."""
    if not 0.0 < coverage <= 1.0:
        raise ValueError("coverage must be in (0, 1]")
    scores = transform(model, as_data_matrix(X))[0]
    tail = (1.0 - coverage) / 2.0
    lo, hi = np.quantile(scores, [tail, 1.0 - tail])
    return float(lo), float(hi)


@dataclass(frozen=True)
class FrenetFrame:
    """Moving frame at one point of the first curvilinear feature.

    vectors has the frame as rows (tangent first); curvatures holds the d-1
    generalized curvatures in inverse-length units. All are reported
    non-negative except the last, which keeps its sign (torsion in 3d).
    """

    point: np.ndarray
    alpha: float
    vectors: np.ndarray
    curvatures: np.ndarray


def frenet_frame(model: PpaModel, alpha: float, step: float | None = None) -> FrenetFrame:
    """Frame and generalized curvatures of the first curvilinear feature.

    The tangent is the first column of the inverse Jacobian at the curve point
    (the exact curve derivative). Higher derivatives come from central finite
    differences of the curve itself, which is cheap and exact to evaluate.
    Gram-Schmidt on the derivative stack yields the frame; curvature i is
    ||g_{i+1}|| / (||g_i|| ||g_1||), which folds in the arc-length
    reparameterization. Directions flattened to numerical zero report zero
    curvature and a deterministic orthonormal completion.
    """
    d = model.dims
    alpha = float(alpha)
    if step is None:
        step = 1e-4 * max(1.0, abs(alpha))

    r = np.zeros(d)
    r[0] = alpha
    point = inverse(model, r)
    J = full_jacobian(model, point)
    first = np.linalg.solve(J, np.eye(d)[:, 0])

    derivs = [first]
    floors = [0.0]
    if d > 1:
        half = max(2, (d + 1) // 2)
        offsets = np.arange(-half, half + 1)
        samples = principal_curve(model, alpha + offsets * step)  # (2h+1, d)
        scale = float(np.abs(samples).max())
        eps = np.finfo(float).eps
        for order in range(2, d + 1):
            coef = _solve_stencil(order, half)
            derivs.append((coef @ samples) / step**order)
            # Cancellation noise of the stencil sum; below this the derivative
            # is indistinguishable from zero.
            floors.append(
                _FLAT_SAFETY
                * eps
                * float(np.sum(np.abs(coef)))
                * scale
                * np.sqrt(d)
                / step**order
            )

    vectors = np.zeros((d, d))
    curvatures = np.zeros(d - 1)
    norms = np.zeros(d)
    speed = np.linalg.norm(first)
    if speed < 1e-12:
        raise UndefinedFrameError(f"curve derivative vanishes at alpha={alpha}")

    rank = 0
    for i, dv in enumerate(derivs):
        if rank:
            g = dv - (vectors[:rank] @ dv) @ vectors[:rank]
        else:
            g = dv.copy()
        gnorm = np.linalg.norm(g)
        if i > 0 and gnorm <= floors[i]:
            break  # flat from here on: remaining curvatures are zero
        vectors[rank] = g / gnorm
        norms[rank] = gnorm
        if rank:
            curvatures[rank - 1] = gnorm / (norms[rank - 1] * speed)
        rank += 1
    _complete_basis(vectors, rank)

    if d >= 2:
        # Sign convention: orient the last frame vector so the full frame is
        # right-handed; the last curvature inherits that sign (3d torsion).
        if np.linalg.det(vectors) < 0:
            vectors[d - 1] = -vectors[d - 1]
            curvatures[d - 2] = -curvatures[d - 2]
    return FrenetFrame(point=point, alpha=alpha, vectors=vectors, curvatures=curvatures)


def _solve_stencil(order: int, half: int) -> np.ndarray:
    offsets = np.arange(-half, half + 1, dtype=float)
    A = np.vander(offsets, N=2 * half + 1, increasing=True).T
    rhs = np.zeros(2 * half + 1)
    fact = 1.0
    for k in range(2, order + 1):
        fact *= k
    rhs[order] = fact
    return np.linalg.solve(A, rhs)


def _complete_basis(vectors: np.ndarray, rank: int) -> None:
    # Extend an orthonormal row prefix to a full basis, deterministically.
    d = vectors.shape[1]
    for axis in range(d):
        if rank == d:
            break
        g = np.eye(d)[axis] - vectors[:rank].T @ (vectors[:rank] @ np.eye(d)[axis])
        gnorm = np.linalg.norm(g)
        if gnorm > 1e-8:
            vectors[rank] = g / gnorm
            rank += 1


def curvature_profile(
    model: PpaModel, alphas, step: float | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Frames along an alpha grid: (points, frames, curvatures).

    points is (n, d); frames is (n, d, d) with frame vectors as rows;
    curvatures is (n, d-1). The finite-difference step defaults to 1e-4 times
    the grid span.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if step is None:
        span = float(alphas.max() - alphas.min())
        step = 1e-4 * max(span, 1.0)
    d = model.dims
    points = np.zeros((alphas.size, d))
    frames = np.zeros((alphas.size, d, d))
    chis = np.zeros((alphas.size, d - 1))
    for i, a in enumerate(alphas):
        frame = frenet_frame(model, a, step=step)
        points[i] = frame.point
        frames[i] = frame.vectors
        chis[i] = frame.curvatures
    return points, frames, chis


def helix_reference_curvatures(radius: float, pitch: float) -> tuple[float, float]:
    """Closed-form curvature and torsion of the helix (a cos t, a sin t, b t)."""
    if radius == 0:
        raise ValueError("a helix with zero radius is a straight line")
    denom = radius * radius + pitch * pitch
    return abs(radius) / denom, pitch / denom
