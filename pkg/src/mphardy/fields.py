"""Vector fields on configuration space with closed-form divergences.

A field value has the same shape as the configuration, ``(..., N, d)``: one
``d``-dimensional block per particle. The optional ``eps`` argument replaces
``r^2`` (or ``rho^2``) by ``r^2 + eps^2`` in denominators.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ._validation import as_points, raise_if_coincident
from .exceptions import CoincidentPoints, SingularField
from .geometry import pair_density, pair_indices, pair_sq_distances, triple_density


def _pair_terms(x: np.ndarray, eps: float):
    i, j = pair_indices(x.shape[-2])
    diff = x[..., i, :] - x[..., j, :]
    r2 = np.einsum("...k,...k->...", diff, diff)
    if eps == 0:
        raise_if_coincident(r2)
    return i, j, diff, r2 + eps**2


def field_F3(config, eps: float = 0.0) -> np.ndarray:
    """Block ``j`` is ``sum_{k != j} (x_j - x_k) / r_jk^2``."""
    x = as_points(config, min_count=2)
    diff = x[..., :, None, :] - x[..., None, :, :]
    r2 = np.einsum("...k,...k->...", diff, diff)
    n = x.shape[-2]
    off = ~np.eye(n, dtype=bool)
    if eps == 0:
        raise_if_coincident(r2[..., off])
    den = r2 + eps**2
    den[..., ~off] = np.inf
    return (diff / den[..., None]).sum(axis=-2)


def field_F3_div(config, eps: float = 0.0) -> np.ndarray | float:
    """Divergence of :func:`field_F3`; equals ``2 (d - 2) * pair_density`` at ``eps = 0``."""
    x = as_points(config, min_count=2)
    d = x.shape[-1]
    if eps == 0:
        return 2.0 * (d - 2) * pair_density(x)
    _, _, _, den = _pair_terms(x, eps)
    r2 = den - eps**2
    out = (2.0 * (d / den - 2.0 * r2 / den**2)).sum(axis=-1)
    return out if out.ndim else float(out)


def field_F3_norm_sq(config, eps: float = 0.0) -> np.ndarray | float:
    """``|F3|^2``; at ``eps = 0`` the closed form ``2 X + Z``."""
    x = as_points(config, min_count=2)
    if eps == 0:
        return 2.0 * pair_density(x) + triple_density(x)
    out = (field_F3(x, eps) ** 2).sum(axis=(-1, -2))
    return out if out.ndim else float(out)


def _check_triple(x: np.ndarray) -> None:
    if x.shape[-2] != 3:
        raise ValueError("field G is defined for exactly three particles")


def _rho_sq(x: np.ndarray) -> np.ndarray:
    return pair_sq_distances(x).sum(axis=-1)


def field_G(config, eps: float = 0.0) -> np.ndarray:
    """Three-particle field ``(2 x_1 - x_2 - x_3, ...) / rho^2``."""
    x = as_points(config)
    _check_triple(x)
    rho2 = _rho_sq(x)
    if eps == 0 and np.any(rho2 == 0):
        raise CoincidentPoints("field G is singular when all three points coincide")
    centered = 3.0 * x - x.sum(axis=-2, keepdims=True)
    return centered / (rho2 + eps**2)[..., None, None]


def field_G_div(config, eps: float = 0.0) -> np.ndarray | float:
    x = as_points(config)
    _check_triple(x)
    d = x.shape[-1]
    rho2 = _rho_sq(x)
    if eps == 0:
        if np.any(rho2 == 0):
            raise CoincidentPoints("field G is singular when all three points coincide")
        out = 6.0 * (d - 1) / rho2
    else:
        den = rho2 + eps**2
        out = 6.0 * d / den - 6.0 * rho2 / den**2
    return out if np.ndim(out) else float(out)


def field_G_norm_sq(config, eps: float = 0.0) -> np.ndarray | float:
    x = as_points(config)
    _check_triple(x)
    rho2 = _rho_sq(x)
    if eps == 0 and np.any(rho2 == 0):
        raise CoincidentPoints("field G is singular when all three points coincide")
    out = 3.0 * rho2 / (rho2 + eps**2) ** 2
    return out if np.ndim(out) else float(out)


def field_pair(config, j: int, k: int, eps: float = 0.0) -> np.ndarray:
    """``+(x_j - x_k)/r_jk^2`` in block ``j``, its negative in block ``k``, zero elsewhere."""
    x = as_points(config, min_count=2)
    if j == k:
        raise ValueError("field_pair needs two distinct particle indices")
    diff = x[..., j, :] - x[..., k, :]
    r2 = np.einsum("...k,...k->...", diff, diff)
    if eps == 0:
        raise_if_coincident(r2)
    term = diff / (r2 + eps**2)[..., None]
    out = np.zeros_like(x)
    out[..., j, :] = term
    out[..., k, :] = -term
    return out


def field_pair_div(config, j: int, k: int) -> np.ndarray | float:
    x = as_points(config, min_count=2)
    r2 = np.einsum("...k,...k->...", x[..., j, :] - x[..., k, :], x[..., j, :] - x[..., k, :])
    raise_if_coincident(r2)
    out = 2.0 * (x.shape[-1] - 2) / r2
    return out if np.ndim(out) else float(out)


def field_center(config, eps: float = 0.0) -> np.ndarray:
    """``S / |S|^2`` with ``S = sum_j x_j``, copied into every block."""
    x = as_points(config)
    s = x.sum(axis=-2)
    s2 = np.einsum("...k,...k->...", s, s)
    if eps == 0 and np.any(s2 == 0):
        raise CoincidentPoints("center field is singular when the particle sum vanishes")
    block = s / (s2 + eps**2)[..., None]
    return np.broadcast_to(block[..., None, :], x.shape).copy()


def field_center_div(config) -> np.ndarray | float:
    """Full-space divergence ``N (d - 2) / |S|^2`` of :func:`field_center`."""
    x = as_points(config)
    n, d = x.shape[-2:]
    s = x.sum(axis=-2)
    s2 = np.einsum("...k,...k->...", s, s)
    if np.any(s2 == 0):
        raise CoincidentPoints("center field is singular when the particle sum vanishes")
    out = n * (d - 2) / s2
    return out if np.ndim(out) else float(out)


def point_field(config, eps: float = 0.0) -> np.ndarray:
    """``x / (|x|^2 + eps^2)`` on the full configuration space."""
    x = as_points(config)
    r2 = np.einsum("...ij,...ij->...", x, x)
    if eps == 0 and np.any(r2 == 0):
        raise CoincidentPoints("point field is singular at the origin")
    return x / (r2 + eps**2)[..., None, None]


def point_field_div(config, eps: float = 0.0) -> np.ndarray | float:
    x = as_points(config)
    m = x.shape[-1] * x.shape[-2]
    r2 = np.einsum("...ij,...ij->...", x, x)
    den = r2 + eps**2
    out = m / den - 2.0 * r2 / den**2
    return out if np.ndim(out) else float(out)


def point_field_norm_sq(config, eps: float = 0.0) -> np.ndarray | float:
    x = as_points(config)
    r2 = np.einsum("...ij,...ij->...", x, x)
    out = r2 / (r2 + eps**2) ** 2
    return out if np.ndim(out) else float(out)


def ab_field(config2d, alpha: float) -> np.ndarray:
    """Aharonov-Bohm potentials: ``alpha`` times ``F3`` rotated by +90 degrees per block."""
    x = as_points(config2d, min_count=2)
    if x.shape[-1] != 2:
        raise ValueError("ab_field needs planar (d = 2) configurations")
    f = field_F3(x)
    return alpha * np.stack([-f[..., 1], f[..., 0]], axis=-1)


def complex_sum_identity(config2d) -> tuple[float, float]:
    """Compare ``sum_j |sum_{k!=j} 1/(z_j - z_k)|^2`` with ``2 X + Z``.

    The left side uses complex arithmetic on ``z = x + i y``; the right side
    uses the unordered pair and triple kernels.
    """
    x = as_points(config2d, min_count=2)
    if x.shape[-1] != 2:
        raise ValueError("complex_sum_identity needs planar configurations")
    raise_if_coincident(pair_sq_distances(x))
    z = x[..., 0] + 1j * x[..., 1]
    diff = z[..., :, None] - z[..., None, :]
    n = z.shape[-1]
    off = ~np.eye(n, dtype=bool)
    inv = np.zeros_like(diff)
    inv[..., off] = 1.0 / diff[..., off]
    lhs = (np.abs(inv.sum(axis=-1)) ** 2).sum(axis=-1)
    rhs = 2.0 * np.asarray(pair_density(x)) + np.asarray(triple_density(x))
    if np.ndim(lhs) == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def fd_divergence(
    field: Callable[[np.ndarray], np.ndarray],
    config,
    h: float | None = None,
) -> float:
    """Central-difference divergence of ``field`` over all ``N * d`` coordinates.

    ``h`` defaults to ``1e-4`` times the smallest pair distance, which keeps
    the truncation error relative to the nearest singularity fixed.
    """
    x = np.array(as_points(config), dtype=float)
    if x.ndim != 2:
        raise ValueError("fd_divergence takes a single configuration")
    if h is None:
        scale = np.sqrt(pair_sq_distances(x).min()) if x.shape[0] > 1 else 1.0
        if scale == 0:
            raise SingularField("configuration has coincident points")
        h = 1e-4 * scale
    if h <= 0:
        raise ValueError("step h must be positive")
    total = 0.0
    for a in range(x.shape[0]):
        for b in range(x.shape[1]):
            xp = x.copy()
            xm = x.copy()
            xp[a, b] += h
            xm[a, b] -= h
            try:
                fp = np.asarray(field(xp))[a, b]
                fm = np.asarray(field(xm))[a, b]
            except CoincidentPoints as exc:
                raise SingularField(f"singularity within h={h:g} of the configuration") from exc
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise SingularField(f"singularity within h={h:g} of the configuration")
            total += (fp - fm) / (2.0 * h)
    return float(total)
