"""Input checking helpers shared by the kernels."""

from __future__ import annotations

import numpy as np

from .exceptions import CoincidentPoints


def as_points(x, *, min_count: int = 1) -> np.ndarray:
    """Return ``x`` as a float array of shape ``(..., N, d)``.

    Accepts a :class:`~mphardy.geometry.Configuration`, a nested sequence or an
    array. A 1-D input is read as ``N`` points on the line.
    """
    coords = getattr(x, "coords", x)
    arr = np.asarray(coords, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim < 2:
        raise ValueError("expected an array of shape (..., N, d)")
    if arr.shape[-2] < min_count:
        raise ValueError(f"need at least {min_count} points, got {arr.shape[-2]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        arr = arr[None]
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def raise_if_coincident(sq_dist: np.ndarray, what: str = "points") -> None:
    if np.any(sq_dist == 0.0):
        raise CoincidentPoints(f"two {what} coincide; kernel is singular there")
