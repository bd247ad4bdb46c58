"""Input validation helpers for array-shaped API surfaces."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NegativeEntry, NotNormalized
from .taxonomy import LOAD_SUM_TOLERANCE


def check_object_names(X) -> np.ndarray:
    """Coerce to a 1-D array of strings; accepts (n,) or an (n, 1) column."""
    arr = np.asarray(X, dtype=object)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected object names of shape (n,) or (n, 1), got {arr.shape}")
    return np.array([str(v) for v in arr], dtype=object)


def check_probability_rows(P, k: int, tol: float = LOAD_SUM_TOLERANCE) -> np.ndarray:
    """Validate an (n, K) matrix of probability rows and renormalize each row."""
    arr = np.asarray(P, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != k:
        raise DimensionMismatch(f"expected probability rows of shape (n, {k}), got {arr.shape}")
    if np.any(arr < 0):
        rows = np.unique(np.nonzero(arr < 0)[0])[:5].tolist()
        raise NegativeEntry(f"negative entries in rows {rows}")
    sums = arr.sum(axis=1)
    bad = np.abs(sums - 1.0) > tol
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NotNormalized(f"row {i} sums to {float(sums[i])!r}, expected 1 within {tol}")
    return arr / sums[:, None]


def split_fusion_features(X, k: int) -> tuple[np.ndarray, np.ndarray | None]:
    """Split a feature matrix into (object names, probability rows).

    Accepts either names alone, shaped (n,) or (n, 1), for the affordance-only
    methods, or an (n, 1 + K) matrix whose first column is the object name
    and whose remaining columns are the classifier distribution.
    """
    arr = np.asarray(X, dtype=object)
    if arr.ndim == 1 or (arr.ndim == 2 and arr.shape[1] == 1):
        return check_object_names(arr), None
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected 1-D or 2-D features, got shape {arr.shape}")
    if arr.shape[1] != k + 1:
        raise DimensionMismatch(
            f"expected (n, 1 + K={k + 1}) features (object name + distribution), got {arr.shape}"
        )
    names = check_object_names(arr[:, 0])
    probs = check_probability_rows(arr[:, 1:].astype(np.float64), k)
    return names, probs


def stack_fusion_features(object_names, P) -> np.ndarray:
    """Build the (n, 1 + K) feature matrix consumed by the estimator."""
    names = check_object_names(object_names)
    arr = np.asarray(P, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != names.size:
        raise DimensionMismatch(
            f"distributions shape {arr.shape} does not pair with {names.size} names"
        )
    out = np.empty((names.size, 1 + arr.shape[1]), dtype=object)
    out[:, 0] = names
    out[:, 1:] = arr
    return out
