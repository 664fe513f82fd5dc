"""Kinetic and weighted-mass functionals of trial functions and the checks built on them.

All Monte Carlo quantities are expectations under the normalised density
``|u|^2 / int |u|^2``:

* ``T = E[|grad u|^2 / |u|^2]`` (kinetic energy per unit mass),
* ``X = E[sum_{i<j} 1 / r_ij^2]``,
* ``Z = E[sum_{i<j<k} 1 / R_ijk^2]``.

Every check draws its terms from one shared sample, so numerator and
denominator errors are correlated, and reports its margin in standard
errors. A check passes when the margin is at least ``-3``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import fields as _fields
from .bounds import fermi_bound, hardy_lower_bound, one_d_constant
from .estimate import (
    DEFAULT_CHUNK_SIZE,
    MCEstimate,
    delta_method,
    mean_and_cov,
    near_coincidence,
    near_origin,
    ratio_estimate,
    sample_values,
)
from .exceptions import DomainError, NotAntisymmetric, NotOdd
from .geometry import pair_density, triple_density
from .quadrature import radial_quadrature
from .trials import TrialFunction

SIGMA_THRESHOLD = 3.0

__all__ = [
    "DivLemmaResult",
    "QuotientResult",
    "ab_mode_quotient",
    "check_antisymmetric",
    "check_odd",
    "div_lemma_bound",
    "divmain_check",
    "fermi_quotient",
    "hardy_quotient",
    "nn_identity_residual",
    "odd_quotient",
    "scaling_demo",
]


@dataclass(frozen=True)
class QuotientResult:
    """Estimates of ``T``, ``X``, ``Z`` and ``T / X`` with a checked bound.

    Exact entries are plain floats; Monte Carlo entries are
    :class:`MCEstimate`. ``margin_sigma`` is ``(value - bound) / stderr``
    for lower bounds (``inf`` for exact values that satisfy the bound).
    ``passed`` is true when no bound applies.
    """

    quotient: MCEstimate | float
    T: MCEstimate | float | None = None
    X: MCEstimate | float | None = None
    Z: MCEstimate | float | None = None
    bound_name: str | None = None
    bound_value: float | None = None
    margin_sigma: float | None = None
    method: str = "mc"
    extra: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        q = self.quotient
        return q.mean if isinstance(q, MCEstimate) else float(q)

    @property
    def stderr(self) -> float:
        q = self.quotient
        return q.stderr if isinstance(q, MCEstimate) else 0.0

    @property
    def passed(self) -> bool:
        return self.margin_sigma is None or self.margin_sigma >= -SIGMA_THRESHOLD

    def to_dict(self) -> dict:
        out = asdict(self)
        out["value"] = self.value
        out["stderr"] = self.stderr
        out["passed"] = self.passed
        return out


def _margin(value: float, bound: float, stderr: float) -> float:
    diff = value - bound
    if stderr == 0:
        return math.inf if diff >= 0 else -math.inf
    return diff / stderr


def _default_bound(u: TrialFunction):
    d, N = u.dim, u.count
    if N >= 2 and d >= 3:
        return "hardy_lower_bound", hardy_lower_bound(d, N)
    if N >= 2 and u.symmetry == "antisymmetric":
        return "fermi_bound", fermi_bound(d, N)
    if N >= 2 and d == 1 and u.symmetry == "diagonal_vanishing":
        return "one_d_constant", one_d_constant()
    return None, None


def _mc_terms(u, columns, n, seed, chunk_size, workers, sampler, singular=near_coincidence):
    sampler = u.sampler() if sampler is None else sampler
    values, labels, rejected = sample_values(columns, sampler, n, seed, chunk_size, workers, singular)
    return values, labels, rejected


def _estimate(mean, cov, col, n_kept, seed, rejected) -> MCEstimate:
    return MCEstimate(float(mean[col]), math.sqrt(max(cov[col, col], 0.0)), n_kept, seed, rejected)


def hardy_quotient(
    u: TrialFunction,
    n: int = 100_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    sampler=None,
    bound: tuple[str, float] | None = None,
) -> QuotientResult:
    """Monte Carlo Rayleigh quotient ``T / X`` for ``N >= 2`` particles.

    Uses the exact sampler when ``u`` has one and a Metropolis chain on
    ``|u|^2`` otherwise. The default checked bound is the many-particle
    lower bound for ``d >= 3``, ``d^2 / N`` for antisymmetric ``u`` and
    ``1/2`` for one-dimensional functions vanishing on the diagonals.
    """
    if u.count < 2:
        raise DomainError("the pair quotient needs at least two particles")
    columns = [u.local_kinetic, pair_density]
    if u.count >= 3:
        columns.append(triple_density)
    values, labels, rejected = _mc_terms(u, columns, n, seed, chunk_size, workers, sampler)
    mean, cov = mean_and_cov(values, labels)
    kept = values.shape[0]
    q = ratio_estimate(values, labels, seed, rejected)
    T = _estimate(mean, cov, 0, kept, seed, rejected)
    X = _estimate(mean, cov, 1, kept, seed, rejected)
    Z = _estimate(mean, cov, 2, kept, seed, rejected) if u.count >= 3 else 0.0
    name, value = bound if bound is not None else _default_bound(u)
    margin = None if value is None else _margin(q.mean, value, q.stderr)
    extra = {"family": u.name, "params": u.params, "d": u.dim, "N": u.count}
    return QuotientResult(q, T, X, Z, name, value, margin, "mc", extra)


def exact_quotient(u: TrialFunction) -> QuotientResult | None:
    """Closed-form quotient when ``u`` provides one, else ``None``."""
    cf = u.closed_forms
    if "quotient" not in cf:
        return None
    name, value = _default_bound(u)
    q = float(cf["quotient"])
    margin = None if value is None else _margin(q, value, 0.0)
    T = cf.get("T_normalized", cf["T"] / cf["norm"] if "T" in cf and "norm" in cf else None)
    X = cf.get("X_normalized", cf["X"] / cf["norm"] if "X" in cf and "norm" in cf else None)
    extra = {"family": u.name, "params": u.params, "d": u.dim, "N": u.count}
    return QuotientResult(q, T, X, None, name, value, margin, "closed_form", extra)


# -- divergence lemma ---------------------------------------------------------


@dataclass(frozen=True)
class DivLemmaResult:
    """Both sides of ``T >= (E[div F])^2 / (4 E[|F|^2])``.

    Unpacks as ``rhs, T``; ``gap`` is ``T - rhs`` with its own error.
    """

    rhs: MCEstimate
    T: MCEstimate
    gap: MCEstimate
    field: str

    def __iter__(self):
        return iter((self.rhs, self.T))

    @property
    def margin_sigma(self) -> float:
        return _margin(self.gap.mean, 0.0, self.gap.stderr)

    @property
    def passed(self) -> bool:
        return self.margin_sigma >= -SIGMA_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "rhs": self.rhs.to_dict(),
            "T": self.T.to_dict(),
            "gap": self.gap.to_dict(),
            "field": self.field,
            "margin_sigma": self.margin_sigma,
            "passed": self.passed,
        }


def _field_pair(name: str, eps: float, pair: tuple[int, int]):
    """``(div F, |F|^2)`` as batch functions of configurations."""
    if name == "F3":
        return (lambda x: _fields.field_F3_div(x, eps)), (lambda x: _fields.field_F3_norm_sq(x, eps))
    if name == "G":
        return (lambda x: _fields.field_G_div(x, eps)), (lambda x: _fields.field_G_norm_sq(x, eps))
    if name == "point":
        return (lambda x: _fields.point_field_div(x, eps)), (lambda x: _fields.point_field_norm_sq(x, eps))
    if name == "pair":
        j, k = pair

        def div(x):
            if eps == 0:
                return _fields.field_pair_div(x, j, k)
            diff = x[..., j, :] - x[..., k, :]
            r2 = np.einsum("...k,...k->...", diff, diff)
            den = r2 + eps**2
            return 2.0 * (x.shape[-1] / den - 2.0 * r2 / den**2)

        def norm(x):
            f = _fields.field_pair(x, j, k, eps)
            return np.einsum("...ij,...ij->...", f, f)

        return div, norm
    raise ValueError(f"unknown field {name!r}; expected F3, G, point or pair")


def div_lemma_bound(
    u: TrialFunction,
    field: str = "F3",
    n: int = 100_000,
    seed: int = 0,
    eps: float = 0.0,
    pair: tuple[int, int] = (0, 1),
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    sampler=None,
) -> DivLemmaResult:
    """Estimate both sides of the divergence inequality for one field.

    ``field`` is ``"F3"`` (pair field), ``"G"`` (three-particle field),
    ``"point"`` (``x / |x|^2`` on the whole configuration space) or
    ``"pair"`` (the field of one pair ``pair = (j, k)``).
    """
    div, norm = _field_pair(field, eps, pair)
    singular = near_origin if field == "point" else near_coincidence
    if u.count == 1 and field != "point":
        raise DomainError(f"field {field} needs at least two particles")
    values, labels, rejected = _mc_terms(
        u, [div, norm, u.local_kinetic], n, seed, chunk_size, workers, sampler, singular
    )
    mean, cov = mean_and_cov(values, labels)
    kept = values.shape[0]

    def rhs(m):
        return m[0] ** 2 / (4.0 * m[1])

    def rhs_grad(m):
        return np.array([m[0] / (2.0 * m[1]), -(m[0] ** 2) / (4.0 * m[1] ** 2), 0.0])

    r, r_err = delta_method(mean, cov, rhs, rhs_grad)
    g, g_err = delta_method(mean, cov, lambda m: m[2] - rhs(m), lambda m: np.array([0, 0, 1.0]) - rhs_grad(m))
    return DivLemmaResult(
        MCEstimate(r, r_err, kept, seed, rejected),
        _estimate(mean, cov, 2, kept, seed, rejected),
        MCEstimate(g, g_err, kept, seed, rejected),
        field,
    )


def divmain_bound(d: int, X: float, Z: float) -> float:
    """``(d - 2)^2 X^2 / (2 X + Z)``."""
    return (d - 2) ** 2 * X * X / (2.0 * X + Z)


def divmain_check(
    u: TrialFunction,
    n: int = 100_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    sampler=None,
) -> QuotientResult:
    """Estimate ``T``, ``X``, ``Z`` jointly and check ``T >= (d-2)^2 X^2 / (2X + Z)``.

    For ``d < 3`` the quantities are reported and the check is skipped
    (``margin_sigma`` is ``None``).
    """
    if u.count < 2:
        raise DomainError("divmain check needs at least two particles")
    d = u.dim
    columns = [u.local_kinetic, pair_density, triple_density]
    values, labels, rejected = _mc_terms(u, columns, n, seed, chunk_size, workers, sampler)
    mean, cov = mean_and_cov(values, labels)
    kept = values.shape[0]
    q = ratio_estimate(values, labels, seed, rejected)
    T, X, Z = (_estimate(mean, cov, c, kept, seed, rejected) for c in range(3))

    c2 = (d - 2) ** 2

    def rhs(m):
        return c2 * m[1] ** 2 / (2.0 * m[1] + m[2])

    def rhs_grad(m):
        den = 2.0 * m[1] + m[2]
        return np.array([0.0, c2 * (2 * m[1] * den - 2 * m[1] ** 2) / den**2, -c2 * m[1] ** 2 / den**2])

    r, r_err = delta_method(mean, cov, rhs, rhs_grad)
    g, g_err = delta_method(mean, cov, lambda m: m[0] - rhs(m), lambda m: np.array([1.0, 0, 0]) - rhs_grad(m))
    extra = {
        "family": u.name,
        "params": u.params,
        "d": d,
        "N": u.count,
        "rhs": MCEstimate(r, r_err, kept, seed, rejected).to_dict(),
        "gap": MCEstimate(g, g_err, kept, seed, rejected).to_dict(),
    }
    if d < 3:
        return QuotientResult(q, T, X, Z, None, None, None, "mc", {**extra, "skipped": "d < 3"})
    return QuotientResult(q, T, X, Z, "divmain", r, _margin(g, 0.0, g_err), "mc", extra)


# -- symmetry-restricted quotients ---------------------------------------------


def check_antisymmetric(u: TrialFunction, points: int = 20, seed: int = 0, rtol: float = 1e-10) -> None:
    """Raise :class:`NotAntisymmetric` unless every transposition flips the sign.

    Tested at ``points`` Gaussian configurations, one random transposition
    each plus all adjacent ones at the first point.
    """
    rng = np.random.default_rng(seed)
    N, d = u.count, u.dim
    scale = 1.0
    c = getattr(u, "centers", None)
    if c is not None:
        scale = max(1.0, float(np.abs(c).max()))
    swaps = [(a, a + 1) for a in range(N - 1)]
    for p in range(points):
        x = scale * rng.standard_normal((N, d))
        pairs = swaps if p == 0 else [tuple(rng.choice(N, size=2, replace=False))]
        v = u.value(x)
        for a, b in pairs:
            y = x.copy()
            y[[a, b]] = y[[b, a]]
            w = u.value(y)
            if not abs(v + w) <= rtol * max(abs(v), abs(w), 1e-300):
                raise NotAntisymmetric(f"exchanging particles {a} and {b} gives {w!r}, expected {-v!r}")


def fermi_quotient(
    u: TrialFunction,
    n: int = 100_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    sampler=None,
) -> QuotientResult:
    """Quotient of an antisymmetric trial, checked against ``d^2 / N``."""
    check_antisymmetric(u, seed=seed)
    return hardy_quotient(
        u, n, seed, chunk_size, workers, sampler, bound=("fermi_bound", fermi_bound(u.dim, u.count))
    )


def check_odd(u: TrialFunction, points: int = 20, seed: int = 0, rtol: float = 1e-12) -> None:
    rng = np.random.default_rng(seed)
    for _ in range(points):
        x = rng.standard_normal((u.count, u.dim))
        v, w = u.value(x), u.value(-x)
        if not abs(v + w) <= rtol * max(abs(v), abs(w), 1e-300):
            raise NotOdd(f"u(-x) = {w!r} but -u(x) = {-v!r}")


def odd_quotient(u: TrialFunction, seed: int = 0, rtol: float = 1e-10) -> float:
    """``int |grad u|^2 / int |u|^2 |x|^-2`` for an odd single-particle trial.

    ``u`` must expose ``radial_profile() -> (f, f', lam)`` with
    ``u = f(r) Y(theta)`` and ``-Delta_sphere Y = lam Y``; the angular
    integrals cancel and the quotient is

        [int (f'^2 + lam f^2 / r^2) r^(d-1) dr] / int f^2 r^(d-3) dr.
    """
    if u.count != 1:
        raise DomainError("odd_quotient takes a single-particle trial")
    check_odd(u, seed=seed)
    f, df, lam = u.radial_profile()
    d = u.dim
    kin = radial_quadrature(lambda r: (df(r) ** 2 + lam * f(r) ** 2 / r**2) * r ** (d - 1), rtol=rtol)
    mass = radial_quadrature(lambda r: f(r) ** 2 * r ** (d - 3), rtol=rtol)
    return kin / mass


def ab_mode_quotient(alpha: float, m: int, profile=None) -> float:
    """Magnetic quotient of ``f(r) e^{i m theta}`` in an Aharonov-Bohm field of flux ``alpha``.

    ``[int f'^2 r dr + (alpha - m)^2 int f^2 / r dr] / int f^2 / r dr``,
    with both radial integrals by quadrature. Never below
    ``min_k (k - alpha)^2``.
    """
    from .trials import ab_mode

    u = ab_mode(m, profile)
    kin, mass = u.radial_terms()
    if not (math.isfinite(mass) and mass > 0):
        raise DomainError("profile has no finite positive weighted mass")
    return kin / mass + (alpha - u.m) ** 2


# -- identities and scaling ---------------------------------------------------


def nn_identity_residual(xi) -> np.ndarray | float:
    """``N sum_j |xi_j|^2 - sum_{j<k} |xi_j - xi_k|^2 - |sum_j xi_j|^2`` (identically zero)."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1:
        xi = xi[:, None]
    if not np.all(np.isfinite(xi)):
        raise ValueError("xi must be finite")
    n = xi.shape[-2]
    lhs = n * np.einsum("...jk,...jk->...", xi, xi)
    diff = xi[..., :, None, :] - xi[..., None, :, :]
    pairs = 0.5 * np.einsum("...jlk,...jlk->...", diff, diff)
    s = xi.sum(axis=-2)
    out = lhs - pairs - np.einsum("...k,...k->...", s, s)
    return out if np.ndim(out) else float(out)


def scaling_demo(
    u: TrialFunction,
    c: float,
    lambdas: Sequence[float],
    n: int = 100_000,
    seed: int = 0,
) -> list[tuple[float, float]]:
    """``(lam, T(u_lam) - c X(u_lam))`` for the mass-preserving dilations ``u_lam``.

    With closed forms (trials exposing ``rescaled``) each dilation is
    evaluated from scratch; otherwise ``T`` and ``X`` are estimated once and
    scaled by ``lam^2``.
    """
    out = []
    if hasattr(u, "rescaled") and "X" in u.closed_forms:
        for lam in lambdas:
            cf = u.rescaled(lam).closed_forms
            out.append((float(lam), (cf["T"] - c * cf["X"]) / cf["norm"]))
        return out
    res = hardy_quotient(u, n, seed)
    base = res.T.mean - c * res.X.mean
    return [(float(lam), lam * lam * base) for lam in lambdas]
