"""Marginal entropy estimation and multi-information reduction.

The transform preserves volume (unit Jacobian determinant), so the redundancy
it removes reduces to a difference of marginal entropy sums; only univariate
densities ever need estimating. Entropies are reported in bits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientSamplesError, InvalidDataError

ESTIMATOR = "histogram-mm"
MIN_SAMPLES = 30


@dataclass(frozen=True)
class EntropyEstimate:
    value: float  # differential entropy, bits
    n: int
    bins: int
    estimator: str = ESTIMATOR
    degenerate: bool = False


def marginal_entropy(z) -> EntropyEstimate:
    """Histogram differential entropy with Miller-Madow bias correction.

    Equal-width bins over [min, max], ceil(sqrt(n)) of them; the plug-in
    discrete entropy is corrected by (occupied_bins - 1) / (2 n ln 2) and
    shifted by log2(bin width) to land in differential-entropy units.
    Constant input yields a -inf sentinel flagged degenerate.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    if not np.all(np.isfinite(z)):
        raise InvalidDataError("samples contain non-finite values")
    n = z.size
    if n < MIN_SAMPLES:
        raise InsufficientSamplesError(f"need at least {MIN_SAMPLES} samples, got {n}")
    bins = math.ceil(math.sqrt(n))
    lo, hi = float(z.min()), float(z.max())
    if hi == lo:
        return EntropyEstimate(value=-np.inf, n=n, bins=bins, degenerate=True)
    counts, _ = np.histogram(z, bins=bins, range=(lo, hi))
    probs = counts[counts > 0] / n
    plug_in = float(-np.sum(probs * np.log2(probs)))
    miller_madow = (probs.size - 1) / (2.0 * n * math.log(2.0))
    width = (hi - lo) / bins
    return EntropyEstimate(
        value=plug_in + miller_madow + math.log2(width), n=n, bins=bins
    )


def multi_info_reduction(X, Y, log_det_term: float = 0.0) -> float:
    """Redundancy removed by a transform, in bits per dimension.

    X and Y are d x n matrices of inputs and their transforms. The result is
    (sum of input marginal entropies - sum of output marginal entropies
    + log_det_term) / d. Volume-preserving callers pass log_det_term = 0,
    which is exact here because |det J| = 1 everywhere. A degenerate
    (constant) marginal poisons the estimate: NaN is returned with a warning.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 2:
        raise InvalidDataError(f"shape mismatch: {X.shape} vs {Y.shape}")
    hx = [marginal_entropy(row) for row in X]
    hy = [marginal_entropy(row) for row in Y]
    if any(e.degenerate for e in hx + hy):
        warnings.warn("degenerate (constant) marginal; reduction is undefined")
        return float("nan")
    d = X.shape[0]
    total = sum(e.value for e in hx) - sum(e.value for e in hy) + log_det_term
    return total / d
