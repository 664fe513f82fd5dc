"""Deterministic 1-D and tensor-product quadrature with refinement checks.

Two families of rules are provided:

* Gauss rules (Legendre on ``[a, b]``, Laguerre on ``(a, inf)``), exact for
  polynomials up to degree ``2 * order - 1``; refinement doubles the order.
* Double-exponential rules (tanh-sinh on ``[a, b]``, exp-sinh on
  ``(a, inf)``), which tolerate integrable endpoint singularities such as
  ``r**-0.5``; refinement halves the step.

:func:`radial_quadrature` and :func:`tensor_quadrature` integrate on a grid
and on its refinement and raise :class:`NonConvergent` when the two differ by
more than the tolerance after ``max_refinements`` attempts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonConvergent

DEFAULT_RTOL = 1e-8

# parameter window of the double-exponential maps; nodes outside carry
# weights below double precision for the integrands used here
_TS_T = 3.2
_ES_LO, _ES_HI = -6.0, 3.5


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and positive weights for one rule on ``[a, b]`` (``b`` may be ``inf``).

    ``order`` is the number of Gauss points, or the step level of a
    double-exponential rule.
    """

    kind: str
    a: float
    b: float
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def integrate(self, f) -> float:
        vals = np.asarray(f(self.nodes), dtype=float)
        return float(np.dot(self.weights, vals))

    def refined(self) -> "QuadratureGrid":
        if self.kind in ("tanh_sinh", "exp_sinh"):
            return make_grid(self.kind, self.a, self.b, self.order + 1)
        return make_grid(self.kind, self.a, self.b, self.order * 2)

    def __len__(self):
        return self.nodes.size


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureGrid:
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureGrid("gauss_legendre", a, b, order, a + half * (x + 1.0), half * w)


def gauss_laguerre(order: int, a: float = 0.0) -> QuadratureGrid:
    """Laguerre nodes with the ``exp(-x)`` weight folded back in.

    Integrates plain ``f(x)`` over ``(a, inf)``; exact for
    ``exp(-x) * poly`` of degree below ``2 * order``.
    """
    x, w = np.polynomial.laguerre.laggauss(order)
    return QuadratureGrid("gauss_laguerre", a, math.inf, order, a + x, w * np.exp(x))


def tanh_sinh(a: float, b: float, level: int = 4) -> QuadratureGrid:
    """Tanh-sinh rule on ``[a, b]`` with step ``2**-level``.

    Nodes are placed by their distance to the nearer endpoint so no node
    ever lands on an endpoint.
    """
    h = 2.0**-level
    t = np.arange(-math.floor(_TS_T / h), math.floor(_TS_T / h) + 1) * h
    u = 0.5 * math.pi * np.sinh(t)
    half = 0.5 * (b - a)
    # distance of each node from the endpoint it approaches
    gap = half * 2.0 / (np.exp(2.0 * np.abs(u)) + 1.0)
    nodes = np.where(t < 0, a + gap, b - gap)
    weights = h * half * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    keep = (gap > 0) & (weights > 0) & (nodes > a) & (nodes < b)
    return QuadratureGrid("tanh_sinh", a, b, level, nodes[keep], weights[keep])


def exp_sinh(a: float = 0.0, level: int = 4) -> QuadratureGrid:
    """Exp-sinh rule on ``(a, inf)`` with step ``2**-level``."""
    h = 2.0**-level
    t = np.arange(math.ceil(_ES_LO / h), math.floor(_ES_HI / h) + 1) * h
    e = np.exp(0.5 * math.pi * np.sinh(t))
    nodes = a + e
    weights = h * e * 0.5 * math.pi * np.cosh(t)
    keep = e > 0
    return QuadratureGrid("exp_sinh", a, math.inf, level, nodes[keep], weights[keep])


def make_grid(kind: str, a: float, b: float, order: int) -> QuadratureGrid:
    if kind == "gauss_legendre":
        return gauss_legendre(order, a, b)
    if kind == "gauss_laguerre":
        return gauss_laguerre(order, a)
    if kind == "tanh_sinh":
        return tanh_sinh(a, b, level=order)
    if kind == "exp_sinh":
        return exp_sinh(a, level=order)
    raise ValueError(f"unknown quadrature kind {kind!r}")


def default_grid(a: float = 0.0, b: float = math.inf, level: int = 3) -> QuadratureGrid:
    if math.isinf(b):
        return exp_sinh(a, level)
    return tanh_sinh(a, b, level)


def _converged(prev: float, cur: float, rtol: float, atol: float) -> bool:
    return abs(cur - prev) <= max(rtol * abs(cur), atol)


def radial_quadrature(
    f,
    grid: QuadratureGrid | None = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = 0.0,
    max_refinements: int = 6,
    full_output: bool = False,
):
    """Integrate a vectorised ``f`` over the grid's interval.

    Refines until two successive results agree to ``rtol`` (relative) or
    ``atol``. With ``full_output`` returns ``(value, last_delta)``.
    """
    grid = grid if grid is not None else default_grid()
    prev = _integrate(grid, f)
    for _ in range(max_refinements):
        grid = grid.refined()
        cur = _integrate(grid, f)
        delta = abs(cur - prev)
        if _converged(prev, cur, rtol, atol):
            return (cur, delta) if full_output else cur
        prev = cur
    raise NonConvergent(f"quadrature did not converge: last refinements differ by {delta:.3g}")


def _integrate(grid: QuadratureGrid, f) -> float:
    with np.errstate(over="ignore", under="ignore"):
        vals = np.asarray(f(grid.nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonConvergent("integrand is not finite on the quadrature nodes")
    return float(np.dot(grid.weights, vals))


def tensor_quadrature(
    f,
    grids,
    rtol: float = DEFAULT_RTOL,
    atol: float = 0.0,
    max_refinements: int = 5,
    full_output: bool = False,
):
    """Integrate ``f(points)`` with ``points`` of shape ``(n, dims)`` on a product grid.

    ``grids`` is a sequence of at most four :class:`QuadratureGrid` objects,
    one per axis; every axis is refined together.
    """
    grids = list(grids)
    if not 1 <= len(grids) <= 4:
        raise ValueError("tensor_quadrature supports 1 to 4 dimensions")

    def once(gs):
        mesh = np.meshgrid(*[g.nodes for g in gs], indexing="ij")
        wts = np.ones_like(mesh[0])
        for axis, g in enumerate(gs):
            shape = [1] * len(gs)
            shape[axis] = g.weights.size
            wts = wts * g.weights.reshape(shape)
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        with np.errstate(over="ignore", under="ignore"):
            vals = np.asarray(f(pts), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonConvergent("integrand is not finite on the quadrature nodes")
        return float(np.dot(wts.ravel(), vals))

    prev = once(grids)
    for _ in range(max_refinements):
        grids = [g.refined() for g in grids]
        cur = once(grids)
        delta = abs(cur - prev)
        if _converged(prev, cur, rtol, atol):
            return (cur, delta) if full_output else cur
        prev = cur
    raise NonConvergent(f"tensor quadrature did not converge: last refinements differ by {delta:.3g}")
