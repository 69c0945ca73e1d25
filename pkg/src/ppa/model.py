"""Sequential polynomial deflation model: fitting, transforms, serialization.

Data matrices are d x n (rows = dimensions, columns = samples). The model is a
chain of d-1 deflation stages. Stage p projects its (d-p+1)-dimensional input
onto a unit leading vector to get the score alpha_p, predicts the orthogonal
complement coordinates with a degree-gamma polynomial in alpha_p, and passes
the prediction residual (one dimension fewer) to the next stage. The transform
is exactly invertible and has unit-magnitude Jacobian determinant everywhere.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    ConditioningWarning,
    DegreeCapWarning,
    InsufficientSamplesError,
    InvalidDataError,
    RankDeficiencyError,
)

MODEL_SCHEMA = "ppa-1"
PCA_BASED = "pca-based"
GRADIENT_DESCENT = "gradient-descent"

_STRATEGY_ALIASES = {
    "pca": PCA_BASED,
    "pca-based": PCA_BASED,
    "gd": GRADIENT_DESCENT,
    "gradient-descent": GRADIENT_DESCENT,
}

# Relative singular-value cutoff for polynomial least squares.
PINV_RCOND = 1e-12
# Vandermonde condition number above which a ConditioningWarning is emitted.
COND_WARN = 1e12
# Covariance trace below which a residual is treated as numerically zero.
_DEGENERATE_TRACE = 1e-24


def canonical_strategy(name: str) -> str:
    try:
        return _STRATEGY_ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}") from None


def as_data_matrix(X, min_dims: int = 1, min_samples: int = 2) -> np.ndarray:
    """Validate and return a d x n float matrix (copy only if needed)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidDataError(f"expected a 2d data matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidDataError("data matrix contains non-finite entries")
    d, n = X.shape
    if d < min_dims:
        raise InvalidDataError(f"need at least {min_dims} dimensions, got {d}")
    if n < min_samples:
        raise InsufficientSamplesError(f"need at least {min_samples} samples, got {n}")
    return X


@dataclass(frozen=True)
class PpaStep:
    """One deflation stage.

    leading: unit vector of length m (the stage input dimension)
    complement: (m-1) x m matrix with orthonormal rows, each orthogonal to leading
    coeffs: (m-1) x (degree+1) polynomial coefficient matrix, low order first
    degree: polynomial degree (>= 1)
    """

    leading: np.ndarray
    complement: np.ndarray
    coeffs: np.ndarray
    degree: int

    @property
    def in_dim(self) -> int:
        return self.leading.shape[0]


@dataclass(frozen=True)
class PpaModel:
    """Fitted model: centering mean plus the ordered deflation stages."""

    mean: np.ndarray
    steps: tuple[PpaStep, ...]
    strategy: str
    dims: int

    def __post_init__(self):
        if len(self.steps) != self.dims - 1:
            raise InvalidDataError(
                f"model with dims={self.dims} needs {self.dims - 1} steps, "
                f"got {len(self.steps)}"
            )


@dataclass(frozen=True)
class FitConfig:
    """Fitting options.

    degree: fixed polynomial degree (int, or one int per stage); None selects
        the degree per stage by cross-validation over degree_range.
    degree_range: inclusive (min, max) candidate degrees for cross-validation.
    cv_fraction: fraction of the stage input held out to score candidate degrees.
    strategy: "pca-based" or "gradient-descent" (aliases "pca"/"gd" accepted).
    seed: drives the cross-validation splits and any descent restarts.
    descent: options for the gradient-descent leading-vector search.
    basis_seed: when set, each stage's orthonormal complement is rotated by a
        seeded random rotation. The truncation error is provably independent of
        this choice; the knob exists to exercise that invariant.
    """

    degree: int | tuple[int, ...] | None = None
    degree_range: tuple[int, int] = (1, 5)
    cv_fraction: float = 0.5
    strategy: str = PCA_BASED
    seed: int = 0
    descent: "object | None" = None  # optim.DescentOptions; resolved lazily
    basis_seed: int | None = None

    def __post_init__(self):
        lo, hi = self.degree_range
        if lo < 1 or hi < lo:
            raise ValueError(f"invalid degree range [{lo}, {hi}]")
        if not 0.0 < self.cv_fraction < 1.0:
            raise ValueError("cv_fraction must be in (0, 1)")
        object.__setattr__(self, "strategy", canonical_strategy(self.strategy))


def center(X) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the per-dimension empirical mean; return (centered, mean)."""
    X = as_data_matrix(X)
    mean = X.mean(axis=1)
    return X - mean[:, None], mean


def pca_split(X) -> tuple[np.ndarray, np.ndarray]:
    """Top covariance eigenvector and the orthonormal remainder.

    Returns (leading, complement) where complement rows are the remaining
    eigenvectors. Output is deterministic: every eigenvector is flipped so its
    largest-magnitude entry is positive, eigenvalues sort descending, and exact
    eigenvalue ties order lexicographically by eigenvector entries.
    """
    X = as_data_matrix(X, min_dims=2)
    n = X.shape[1]
    cov = (X @ X.T) / n
    if np.trace(cov) <= _DEGENERATE_TRACE:
        raise RankDeficiencyError("sample covariance is numerically zero")
    eigvals, eigvecs = np.linalg.eigh(cov)
    vecs = eigvecs.T.copy()
    for row in vecs:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    order = sorted(range(len(eigvals)), key=lambda i: (-eigvals[i], tuple(vecs[i])))
    vecs = vecs[order]
    return vecs[0], vecs[1:]


def vandermonde(alphas, degree: int) -> np.ndarray:
    """Stacked power columns [1, a, a^2, ..., a^degree]^T, shape (degree+1, n)."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if not np.all(np.isfinite(alphas)):
        raise InvalidDataError("projection scores contain non-finite values")
    return np.vander(alphas, N=degree + 1, increasing=True).T


def poly_basis_derivative(alphas, degree: int) -> np.ndarray:
    """Derivative of each vandermonde column: [0, 1, 2a, ..., g*a^(g-1)]^T."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    out = np.zeros((degree + 1, alphas.size))
    powers = np.vander(alphas, N=degree, increasing=True).T
    out[1:] = powers * np.arange(1, degree + 1)[:, None]
    return out


def fit_polynomial(proj, V) -> np.ndarray:
    """Least-squares coefficients W minimizing ||proj - W V||_F.

    Uses an SVD pseudoinverse of V with singular values below
    max(singular) * 1e-12 treated as zero. Warns when V's condition number
    exceeds 1e12 (raw powers of large scores degrade fast).
    """
    proj = np.asarray(proj, dtype=float)
    V = np.asarray(V, dtype=float)
    rows, n = V.shape
    if n < rows:
        raise InsufficientSamplesError(
            f"degree {rows - 1} needs at least {rows} samples, got {n}"
        )
    U, s, Vt = np.linalg.svd(V, full_matrices=False)
    if s[0] > 0 and (s[-1] == 0 or s[0] / s[-1] > COND_WARN):
        warnings.warn(
            f"Vandermonde condition number exceeds {COND_WARN:.0e}; "
            "polynomial coefficients may be unstable",
            ConditioningWarning,
            stacklevel=2,
        )
    cutoff = s[0] * PINV_RCOND if s.size else 0.0
    inv_s = np.where(s > cutoff, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    pinv = (Vt.T * inv_s) @ U.T
    return proj @ pinv


def _degenerate_step(m: int, degree: int) -> PpaStep:
    # Residual energy is numerically zero: store a fixed orthonormal basis so
    # the transform stays total, invertible, and volume preserving.
    eye = np.eye(m)
    return PpaStep(
        leading=eye[0],
        complement=eye[1:],
        coeffs=np.zeros((m - 1, degree + 1)),
        degree=degree,
    )


def fit_step(
    Xprev,
    degree: int,
    strategy: str = PCA_BASED,
    descent=None,
    basis_rotation=None,
) -> tuple[PpaStep, np.ndarray]:
    """Fit one deflation stage and return (step, residual).

    The residual is complement @ Xprev minus the fitted polynomial prediction
    evaluated at the scores leading @ Xprev; its per-sample norm is the
    distance from the complement projection to the fitted curve.
    """
    Xprev = as_data_matrix(Xprev, min_dims=2)
    m, n = Xprev.shape
    if n < degree + 1:
        raise InsufficientSamplesError(
            f"degree {degree} needs at least {degree + 1} samples, got {n}"
        )
    strategy = canonical_strategy(strategy)

    cov_trace = float(np.einsum("ij,ij->", Xprev, Xprev)) / n
    if cov_trace <= _DEGENERATE_TRACE:
        step = _degenerate_step(m, degree)
        return step, step.complement @ Xprev

    if strategy == PCA_BASED:
        leading, complement = pca_split(Xprev)
    else:
        from . import optim  # local import: optim depends on this module

        init, _ = pca_split(Xprev)
        result = optim.optimize_leading(Xprev, degree, init=init, options=descent)
        leading = result.leading
        complement = optim.complement_basis(leading)

    if basis_rotation is not None:
        complement = np.asarray(basis_rotation) @ complement

    scores = leading @ Xprev
    V = vandermonde(scores, degree)
    coeffs = fit_polynomial(complement @ Xprev, V)
    residual = complement @ Xprev - coeffs @ V
    step = PpaStep(leading=leading, complement=complement, coeffs=coeffs, degree=degree)
    return step, residual


def select_degree(Xprev, degree_range, cv_fraction: float = 0.5, seed: int = 0) -> int:
    """Pick the polynomial degree by a held-out validation split.

    Columns of Xprev are split once (seeded); candidate degrees are fitted on
    the kept part and scored by residual energy on the held-out part. Ties
    (within a 1e-9 relative margin, so that float noise between equally good
    degrees does not matter) go to the smaller degree. When the fit part is
    too small for the largest candidate, the range is capped and a
    DegreeCapWarning is emitted.
    """
    from .data import split  # local import: data is leaf-level

    Xprev = as_data_matrix(Xprev, min_dims=2)
    gmin, gmax = degree_range
    if gmin < 1 or gmax < gmin:
        raise ValueError(f"invalid degree range [{gmin}, {gmax}]")

    fit_part, val_part = split(Xprev, 1.0 - cv_fraction, seed)
    n_fit = fit_part.shape[1]
    feasible = min(gmax, n_fit - 1)
    if feasible < gmax:
        warnings.warn(
            f"capping candidate degrees at {feasible}: only {n_fit} fit samples",
            DegreeCapWarning,
            stacklevel=2,
        )
    if feasible < gmin:
        raise InsufficientSamplesError(
            f"cannot fit degree {gmin} with {n_fit} fit samples"
        )

    try:
        leading, complement = pca_split(fit_part)
    except RankDeficiencyError:
        return gmin  # nothing left to explain; lowest degree wins
    scores_fit = leading @ fit_part
    proj_fit = complement @ fit_part
    scores_val = leading @ val_part
    proj_val = complement @ val_part

    # Residual energies at working precision count as exact zeros, so that
    # roundoff does not out-vote the smaller-degree tie rule on perfect fits.
    zero_floor = 1e-24 * float(np.sum(val_part * val_part))
    best_degree, best_err = gmin, np.inf
    for gamma in range(gmin, feasible + 1):
        W = fit_polynomial(proj_fit, vandermonde(scores_fit, gamma))
        resid = proj_val - W @ vandermonde(scores_val, gamma)
        err = float(np.sum(resid * resid))
        if err <= zero_floor:
            err = 0.0
        if err < best_err * (1.0 - 1e-9):
            best_degree, best_err = gamma, err
    return best_degree


def _fixed_degrees(degree, n_steps: int) -> list[int]:
    if isinstance(degree, (int, np.integer)):
        degrees = [int(degree)] * n_steps
    else:
        degrees = [int(g) for g in degree]
        if len(degrees) != n_steps:
            raise ValueError(f"need {n_steps} per-stage degrees, got {len(degrees)}")
    if any(g < 1 for g in degrees):
        raise ValueError("degrees must be >= 1")
    return degrees


def fit(X, config: FitConfig | None = None) -> PpaModel:
    """Fit the full deflation sequence: center once, then d-1 stages."""
    from .data import random_rotation

    config = config or FitConfig()
    X = as_data_matrix(X, min_dims=2)
    d = X.shape[0]
    Xc, mean = center(X)

    n_steps = d - 1
    fixed = None if config.degree is None else _fixed_degrees(config.degree, n_steps)
    step_seeds = np.random.SeedSequence(config.seed).generate_state(n_steps)
    basis_rng = (
        None if config.basis_seed is None else np.random.default_rng(config.basis_seed)
    )

    steps = []
    residual = Xc
    for p in range(n_steps):
        if fixed is not None:
            degree = fixed[p]
        else:
            degree = select_degree(
                residual, config.degree_range, config.cv_fraction, int(step_seeds[p])
            )
        rotation = None
        if basis_rng is not None:
            rotation = random_rotation(residual.shape[0] - 1, basis_rng)
        descent = config.descent
        if descent is not None:
            descent = replace(descent, seed=descent.seed + p)
        step, residual = fit_step(
            residual, degree, config.strategy, descent, basis_rotation=rotation
        )
        steps.append(step)
    return PpaModel(mean=mean, steps=tuple(steps), strategy=config.strategy, dims=d)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def transform(model: PpaModel, X) -> np.ndarray:
    """Map a d x n matrix to response coordinates [alpha_1..alpha_{d-1}, resid]."""
    X = as_data_matrix(X, min_dims=model.dims, min_samples=1)
    if X.shape[0] != model.dims:
        raise ValueError(f"model expects {model.dims} dimensions, got {X.shape[0]}")
    Z = X - model.mean[:, None]
    out = np.empty_like(Z)
    for p, step in enumerate(model.steps):
        scores = step.leading @ Z
        out[p] = scores
        Z = step.complement @ Z - step.coeffs @ vandermonde(scores, step.degree)
    out[-1] = Z[0]
    return out


def inverse_transform(model: PpaModel, R) -> np.ndarray:
    """Exact inverse of transform for a d x n matrix of response coordinates."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != model.dims:
        raise ValueError(f"expected shape ({model.dims}, n), got {R.shape}")
    Z = R[-1:, :].copy()
    for p in range(model.dims - 2, -1, -1):
        step = model.steps[p]
        scores = R[p]
        V = vandermonde(scores, step.degree)
        Z = step.leading[:, None] * scores + step.complement.T @ (Z + step.coeffs @ V)
    return Z + model.mean[:, None]


def forward(model: PpaModel, x) -> np.ndarray:
    """Transform a single point (length d) to response coordinates."""
    x = _as_point(model, x)
    return transform(model, x[:, None])[:, 0]


def inverse(model: PpaModel, r) -> np.ndarray:
    """Map a single response-coordinate point back to the input domain."""
    r = _as_point(model, r)
    return inverse_transform(model, r[:, None])[:, 0]


def _as_point(model: PpaModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.dims:
        raise ValueError(f"expected a point of length {model.dims}, got {x.shape[0]}")
    return x


def reconstruct_truncated(model: PpaModel, r, keep: int) -> np.ndarray:
    """Invert keeping the first `keep` coordinates, discarding the rest.

    The discarded information is exactly the stage-`keep` residual, which is
    set to zero before running the inverse recursion over the kept stages.
    Orthonormal stages preserve norms, so the input-domain reconstruction
    error of a sample equals the norm of its discarded residual. For
    keep = dims this is the exact inverse.
    """
    r = _as_point(model, r)
    return reconstruct(model, r[:, None], keep)[:, 0]


def reconstruct(model: PpaModel, R, keep: int) -> np.ndarray:
    """Batch version of reconstruct_truncated for d x n coordinate matrices."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != model.dims:
        raise ValueError(f"expected shape ({model.dims}, n), got {R.shape}")
    if keep == model.dims:
        return inverse_transform(model, R)
    if not 1 <= keep <= model.dims:
        raise ValueError(f"keep must be in [1, {model.dims}], got {keep}")
    Z = np.zeros((model.dims - keep, R.shape[1]))
    for p in range(keep - 1, -1, -1):
        step = model.steps[p]
        scores = R[p]
        V = vandermonde(scores, step.degree)
        Z = step.leading[:, None] * scores + step.complement.T @ (Z + step.coeffs @ V)
    return Z + model.mean[:, None]


def truncation_mse(model: PpaModel, X, keep: int) -> float:
    """Mean squared input-domain reconstruction error keeping `keep` coords."""
    X = as_data_matrix(X, min_dims=model.dims, min_samples=1)
    recon = reconstruct(model, transform(model, X), keep)
    diff = X - recon
    return float(np.mean(np.sum(diff * diff, axis=0)))


# ---------------------------------------------------------------------------
# Serialization (schema "ppa-1")
# ---------------------------------------------------------------------------


def model_to_dict(model: PpaModel) -> dict:
    return {
        "schema": MODEL_SCHEMA,
        "dims": model.dims,
        "strategy": model.strategy,
        "mean": model.mean.tolist(),
        "steps": [
            {
                "degree": step.degree,
                "leading": step.leading.tolist(),
                "complement": step.complement.tolist(),
                "coeffs": step.coeffs.tolist(),
            }
            for step in model.steps
        ],
    }


def model_from_dict(doc: dict) -> PpaModel:
    if doc.get("schema") != MODEL_SCHEMA:
        raise InvalidDataError(
            f"unsupported model schema {doc.get('schema')!r}; expected {MODEL_SCHEMA!r}"
        )
    try:
        dims = int(doc["dims"])
        strategy = canonical_strategy(doc["strategy"])
        mean = np.asarray(doc["mean"], dtype=float)
        steps = []
        for p, raw in enumerate(doc["steps"]):
            m = dims - p
            step = PpaStep(
                leading=np.asarray(raw["leading"], dtype=float),
                complement=np.asarray(raw["complement"], dtype=float),
                coeffs=np.asarray(raw["coeffs"], dtype=float),
                degree=int(raw["degree"]),
            )
            if step.leading.shape != (m,) or step.complement.shape[1] != m:
                raise InvalidDataError(f"step {p + 1} has inconsistent shapes")
            steps.append(step)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDataError(f"malformed model document: {exc}") from exc
    if mean.shape != (dims,):
        raise InvalidDataError("mean length does not match dims")
    return PpaModel(mean=mean, steps=tuple(steps), strategy=strategy, dims=dims)


def save_model(model: PpaModel, path) -> None:
    """Write the model as versioned JSON text; floats round-trip bit-exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path) -> PpaModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidDataError(f"not a valid model file: {exc}") from exc
    return model_from_dict(doc)
