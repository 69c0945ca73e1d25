"""Synthetic generators, CSV ingestion, normalization, and splitting.

All generators are deterministic per seed. CSV files are rows = samples,
columns = dimensions; internally everything is column-wise samples (d x n).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidDataError
from .model import as_data_matrix

HELIX_T_RANGE = (0.0, 5.0 * math.pi)  # 2.5 turns


def gen_parabola2d(
    curvature: float,
    noise: float,
    n: int,
    seed: int = 0,
    x_range: tuple[float, float] = (-2.0, 2.0),
    offset: float = 0.0,
) -> np.ndarray:
    """Noisy parabola: x2 = curvature * x1^2 / 2 + offset + N(0, noise)."""
    _check_params(noise, n)
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(x_range[0], x_range[1], size=n)
    x2 = curvature * x1**2 / 2.0 + offset + rng.normal(0.0, 1.0, size=n) * noise
    return np.vstack([x1, x2])


def gen_helix3d(
    radius: float, pitch: float, noise: float, n: int, seed: int = 0
) -> np.ndarray:
    """Helix (a cos t, a sin t, b t), t uniform over 2.5 turns, isotropic noise."""
    _check_params(noise, n)
    if radius == 0:
        raise ValueError("helix radius must be nonzero")
    rng = np.random.default_rng(seed)
    t = rng.uniform(HELIX_T_RANGE[0], HELIX_T_RANGE[1], size=n)
    pts = np.vstack([radius * np.cos(t), radius * np.sin(t), pitch * t])
    return pts + rng.normal(0.0, 1.0, size=pts.shape) * noise


def gen_helix4d(
    radius: float, pitch: float, noise: float, n: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """3d helix zero-padded to 4d and randomly rotated; noise added after.

    Returns (data, rotation). Radius and pitch are restricted to (0, 1].
    The rotation leaves the curve's curvature and torsion unchanged and its
    third generalized curvature is exactly zero.
    """
    _check_params(noise, n)
    if not (0.0 < radius <= 1.0 and 0.0 < pitch <= 1.0):
        raise ValueError("radius and pitch must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    t = rng.uniform(HELIX_T_RANGE[0], HELIX_T_RANGE[1], size=n)
    pts = np.vstack(
        [radius * np.cos(t), radius * np.sin(t), pitch * t, np.zeros(n)]
    )
    rotation = random_rotation(4, rng)
    pts = rotation @ pts
    return pts + rng.normal(0.0, 1.0, size=pts.shape) * noise, rotation


def generate(kind: str, **params):
    """Dispatch on generator kind: parabola2d, helix3d, or helix4d."""
    table = {
        "parabola2d": gen_parabola2d,
        "helix3d": gen_helix3d,
        "helix4d": gen_helix4d,
    }
    try:
        fn = table[kind]
    except KeyError:
        raise ValueError(f"unknown synthetic kind {kind!r}") from None
    return fn(**params)


def random_rotation(dim: int, rng) -> np.ndarray:
    """Haar-uniform orthogonal matrix: QR of a Gaussian with sign fixing."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    if dim == 1:
        return np.ones((1, 1))
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _check_params(noise: float, n: int) -> None:
    if noise < 0:
        raise ValueError("noise standard deviation must be >= 0")
    if n < 10:
        raise ValueError("need at least 10 samples")


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Loaded data plus the per-dimension affine map used for normalization.

    values is d x n. When normalized, dimension j was mapped from
    [column_min[j], column_max[j]] onto [0, 1] (constant columns map to 0.5).
    """

    values: np.ndarray
    column_min: np.ndarray
    column_max: np.ndarray
    normalized: bool

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        """Undo the affine map on a d x n matrix of normalized values."""
        if not self.normalized:
            return np.asarray(values, dtype=float)
        span = self.column_max - self.column_min
        out = np.asarray(values, dtype=float) * span[:, None] + self.column_min[:, None]
        const = span == 0
        if np.any(const):
            out[const] = self.column_min[const, None]
        return out


def load_dataset(path, normalize: bool = False) -> Dataset:
    """Parse a rows-as-samples CSV; optionally map each dimension to [0, 1].

    A single leading header row is skipped automatically when any of its cells
    is non-numeric. Ragged rows and non-numeric data cells raise
    InvalidDataError with the offending row and column.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        raw = [row for row in reader if row]
    if not raw:
        raise InvalidDataError(f"{path}: empty file")

    start = 0
    if not _all_numeric(raw[0]):
        start = 1
        if len(raw) == 1:
            raise InvalidDataError(f"{path}: only a header row present")
    width = len(raw[start])
    if width < 2:
        raise InvalidDataError(f"{path}: need at least 2 numeric columns")
    for i, row in enumerate(raw[start:], start=start + 1):
        if len(row) != width:
            raise InvalidDataError(
                f"{path}: row {i} has {len(row)} cells, expected {width}"
            )
        try:
            rows.append([float(cell) for cell in row])
        except ValueError:
            col = next(j for j, cell in enumerate(row, 1) if not _is_number(cell))
            raise InvalidDataError(
                f"{path}: non-numeric cell at row {i}, column {col}"
            ) from None

    values = as_data_matrix(np.asarray(rows, dtype=float).T, min_samples=1)
    col_min = values.min(axis=1)
    col_max = values.max(axis=1)
    if normalize:
        span = col_max - col_min
        scaled = np.empty_like(values)
        const = span == 0
        nz = ~const
        scaled[nz] = (values[nz] - col_min[nz, None]) / span[nz, None]
        scaled[const] = 0.5
        values = scaled
    return Dataset(
        values=values, column_min=col_min, column_max=col_max, normalized=normalize
    )


def save_csv(path, X, header: list[str] | None = None) -> None:
    """Write a d x n matrix as rows-of-samples CSV with shortest exact floats."""
    X = np.asarray(X, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for col in X.T:
            writer.writerow([repr(float(v)) for v in col])


def _all_numeric(row) -> bool:
    return all(_is_number(cell) for cell in row)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------


def split(X, fraction: float, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Seeded column split: first floor(fraction * n) permuted columns to train."""
    X = as_data_matrix(X, min_samples=2)
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    n = X.shape[1]
    n_train = int(math.floor(fraction * n))
    if n_train == 0 or n_train == n:
        raise InvalidDataError(f"split of {n} samples at {fraction} leaves a side empty")
    perm = np.random.default_rng(seed).permutation(n)
    return X[:, perm[:n_train]], X[:, perm[n_train:]]
