"""Pair and triple kernels on particle configurations.

Every function accepts arrays with arbitrary leading batch dimensions, so
``pair_density`` works on one configuration of shape ``(N, d)`` or on a stack
of Monte Carlo samples of shape ``(n, N, d)``. Triangle kernels take three
point arrays of shape ``(..., d)``.

Sums over pairs and triples are always unordered (``i < j`` and
``i < j < k``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from ._validation import as_point, as_points, raise_if_coincident
from .exceptions import CoincidentPoints

# 1/R^2 below this fraction of 1/max(side^2) is treated as collinear
COLLINEAR_RTOL = 1e-14


@dataclass(frozen=True)
class Configuration:
    """``count`` particles in ``dim`` dimensions."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("coords must be an N x d matrix")
        if arr.shape[0] < 2:
            raise ValueError("a configuration needs at least two particles")
        if arr.shape[1] < 1:
            raise ValueError("dimension must be positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def count(self) -> int:
        return self.coords.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())


@dataclass(frozen=True)
class TriangleMetrics:
    side_sq: tuple[float, float, float]
    inv_circum_sq: float
    menger_b: float


@lru_cache(maxsize=None)
def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    return i, j


@lru_cache(maxsize=None)
def triple_indices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if n < 3:
        empty = np.zeros(0, dtype=int)
        return empty, empty, empty
    idx = np.array(list(combinations(range(n), 3)), dtype=int)
    return idx[:, 0], idx[:, 1], idx[:, 2]


def _sq(v: np.ndarray) -> np.ndarray:
    return np.einsum("...k,...k->...", v, v)


def pair_sq_distances(x) -> np.ndarray:
    """Squared distances ``r_ij^2`` for ``i < j``, shape ``(..., N(N-1)/2)``."""
    x = as_points(x)
    i, j = pair_indices(x.shape[-2])
    return _sq(x[..., i, :] - x[..., j, :])


def min_pair_distance(x) -> np.ndarray:
    x = as_points(x, min_count=2)
    return np.sqrt(pair_sq_distances(x).min(axis=-1))


def pair_density(config) -> np.ndarray | float:
    """Sum of ``1 / r_ij^2`` over unordered pairs."""
    r2 = pair_sq_distances(as_points(config, min_count=2))
    raise_if_coincident(r2)
    out = (1.0 / r2).sum(axis=-1)
    return out if out.ndim else float(out)


def _twice_area_factor(a2, b2, c2):
    # 16 * Area^2 from squared side lengths, Kahan's ordering of Heron
    a, b, c = np.sqrt(a2), np.sqrt(b2), np.sqrt(c2)
    s = np.sort(np.stack(np.broadcast_arrays(a, b, c)), axis=0)[::-1]
    a, b, c = s[0], s[1], s[2]
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return np.maximum(prod, 0.0)


def _inv_circum_sq_from_sides(a2, b2, c2):
    a2, b2, c2 = np.broadcast_arrays(a2, b2, c2)
    area16 = _twice_area_factor(a2, b2, c2)
    denom = a2 * b2 * c2
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = area16 / denom
        biggest = np.maximum(np.maximum(a2, b2), c2)
        inv = np.where(inv < COLLINEAR_RTOL / biggest, 0.0, inv)
    return inv


def circumradius_inv_sq(p1, p2, p3) -> np.ndarray | float:
    """``1 / R^2`` for the triangle ``p1 p2 p3``; zero when collinear.

    Raises :class:`CoincidentPoints` if any two vertices coincide.
    """
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    a2, b2, c2 = _sq(p2 - p3), _sq(p1 - p3), _sq(p1 - p2)
    raise_if_coincident(np.stack(np.broadcast_arrays(a2, b2, c2)))
    out = _inv_circum_sq_from_sides(a2, b2, c2)
    if p1.shape[-1] == 1:
        out = np.zeros_like(out)
    return out if out.ndim else float(out)


def _wedge_sq(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``|u|^2 |v|^2 - (u.v)^2`` as a sum of squared 2x2 minors."""
    d = u.shape[-1]
    total = np.zeros(np.broadcast_shapes(u.shape, v.shape)[:-1])
    for k in range(d):
        for l in range(k + 1, d):
            total = total + (u[..., k] * v[..., l] - u[..., l] * v[..., k]) ** 2
    return total


def menger_b(p1, p2, p3) -> np.ndarray | float:
    """The symmetric three-term kernel ``b_ijk``.

    The three inner-product terms are combined over a common denominator,
    which turns the numerator into twice the squared wedge product of two
    edge vectors. In one dimension the wedge has no components, so the value
    is exactly zero.
    """
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    a = p1 - p2
    b = p1 - p3
    a2, b2, c2 = _sq(a), _sq(b), _sq(p2 - p3)
    raise_if_coincident(np.stack(np.broadcast_arrays(a2, b2, c2)))
    out = 2.0 * _wedge_sq(a, b) / (a2 * b2 * c2)
    return out if np.ndim(out) else float(out)


def menger_b_terms(p1, p2, p3) -> np.ndarray | float:
    """``b_ijk`` summed term by term from its inner-product definition."""
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    d12, d13, d23 = p1 - p2, p1 - p3, p2 - p3
    r12, r13, r23 = _sq(d12), _sq(d13), _sq(d23)
    raise_if_coincident(np.stack(np.broadcast_arrays(r12, r13, r23)))
    dot = lambda u, v: np.einsum("...k,...k->...", u, v)  # noqa: E731
    out = (
        dot(d12, d13) / (r12 * r13)
        + dot(-d12, d23) / (r12 * r23)
        + dot(d13, d23) / (r13 * r23)
    )
    return out if np.ndim(out) else float(out)


def triple_density(config) -> np.ndarray | float:
    """Sum of ``1 / R_ijk^2`` over unordered triples (zero for ``N < 3``)."""
    x = as_points(config, min_count=2)
    raise_if_coincident(pair_sq_distances(x))
    i, j, k = triple_indices(x.shape[-2])
    if i.size == 0 or x.shape[-1] == 1:
        # points on a line are always collinear
        out = np.zeros(x.shape[:-2])
    else:
        xi, xj, xk = x[..., i, :], x[..., j, :], x[..., k, :]
        out = _inv_circum_sq_from_sides(_sq(xj - xk), _sq(xi - xk), _sq(xi - xj)).sum(axis=-1)
    return out if out.ndim else float(out)


def rho_sq(p1, p2, p3) -> np.ndarray | float:
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    out = _sq(p1 - p2) + _sq(p1 - p3) + _sq(p2 - p3)
    return out if np.ndim(out) else float(out)


def triangle_chain(p1, p2, p3) -> tuple[float, float, float]:
    """``(1/R^2, 9/rho^2, sum 1/side^2)``, an increasing chain."""
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    a2, b2, c2 = _sq(p2 - p3), _sq(p1 - p3), _sq(p1 - p2)
    raise_if_coincident(np.stack(np.broadcast_arrays(a2, b2, c2)))
    inv_r2 = _inv_circum_sq_from_sides(a2, b2, c2)
    middle = 9.0 / (a2 + b2 + c2)
    top = 1.0 / a2 + 1.0 / b2 + 1.0 / c2
    if np.ndim(inv_r2) == 0:
        return float(inv_r2), float(middle), float(top)
    return inv_r2, middle, top


def triangle_metrics(p1, p2, p3) -> TriangleMetrics:
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    sides = (float(_sq(p2 - p3)), float(_sq(p1 - p3)), float(_sq(p1 - p2)))
    return TriangleMetrics(sides, circumradius_inv_sq(p1, p2, p3), menger_b(p1, p2, p3))


def mm_identity_residual(p1, p2, p3) -> np.ndarray | float:
    """Sum of squared sides minus twice the three vertex inner products."""
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    dot = lambda u, v: np.einsum("...k,...k->...", u, v)  # noqa: E731
    lhs = rho_sq(p1, p2, p3)
    rhs = 2.0 * (dot(p1 - p2, p1 - p3) + dot(p2 - p1, p2 - p3) + dot(p3 - p1, p3 - p2))
    out = lhs - rhs
    return out if np.ndim(out) else float(out)


def equilateral(side: float = 1.0, dim: int = 2, center: bool = True) -> np.ndarray:
    """Vertices of an equilateral triangle embedded in the first two axes."""
    if dim < 2:
        raise ValueError("an equilateral triangle needs dim >= 2")
    pts = np.zeros((3, dim))
    pts[1, 0] = side
    pts[2, 0] = side / 2
    pts[2, 1] = side * np.sqrt(3.0) / 2
    if center:
        pts -= pts.mean(axis=0)
    return pts


__all__ = [
    "CoincidentPoints",
    "Configuration",
    "TriangleMetrics",
    "circumradius_inv_sq",
    "equilateral",
    "menger_b",
    "menger_b_terms",
    "min_pair_distance",
    "mm_identity_residual",
    "pair_density",
    "pair_indices",
    "pair_sq_distances",
    "rho_sq",
    "triangle_chain",
    "triangle_metrics",
    "triple_density",
    "triple_indices",
]
