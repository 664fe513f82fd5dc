"""Trial functions with analytic gradients, samplers and closed forms.

Every trial function evaluates on configurations of shape ``(..., N, d)``
and exposes

* ``value(x)`` and ``grad(x)`` (same shape as ``x``),
* ``log_density(x) = log |u(x)|^2`` (``-inf`` on the nodal set),
* ``grad_log(x) = grad u / u``, whose squared norm is the kinetic integrand
  under the normalised density ``|u|^2 / int |u|^2``,
* ``sample(n, rng)`` when an exact sampler exists (``has_sampler``),
* ``closed_forms``, a dict of exactly known integrals (may be empty).

Trial functions are immutable; the random stream is always passed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import as_points, check_positive_int
from .bounds import gaussian_kinetic_integral, gaussian_mass_integral
from .estimate import MetropolisSampler
from .exceptions import DegenerateOrbitals, DomainError
from .geometry import pair_indices
from .quadrature import gauss_legendre, radial_quadrature, tanh_sinh

__all__ = [
    "LogPlateauProfile",
    "PowerExpProfile",
    "SharpnessParams",
    "TrialFunction",
    "ab_mode",
    "check_gradient",
    "gaussian_product",
    "gaussian_shifted",
    "odd_gaussian",
    "sharpness_1d",
    "sharpness_cross_term",
    "shifted_gaussian_inverse_square",
    "slater_gaussian",
]


class TrialFunction:
    """Base class; subclasses implement ``_log_abs``, ``_grad_log`` and ``_sign``."""

    name = "trial"
    has_sampler = False
    # "antisymmetric", "odd", "diagonal_vanishing" or "" (no special structure)
    symmetry = ""

    def __init__(self, dim: int, count: int, params: dict):
        self.dim = int(dim)
        self.count = int(count)
        self.params = dict(params)

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    def _check(self, x) -> np.ndarray:
        x = np.asarray(getattr(x, "coords", x), dtype=float)
        if x.shape[-2:] != (self.count, self.dim):
            raise ValueError(f"expected configurations of shape (..., {self.count}, {self.dim}), got {x.shape}")
        return x

    # subclasses override these three
    def _log_abs(self, x):
        raise NotImplementedError

    def _sign(self, x):
        return np.ones(x.shape[:-2])

    def _grad_log(self, x):
        raise NotImplementedError

    def value(self, x):
        x = self._check(x)
        with np.errstate(divide="ignore", under="ignore"):
            out = self._sign(x) * np.exp(self._log_abs(x))
        return out if np.ndim(out) else out.item()

    def log_density(self, x):
        x = self._check(x)
        with np.errstate(divide="ignore"):
            return 2.0 * np.asarray(self._log_abs(x), dtype=float)

    def grad_log(self, x) -> np.ndarray:
        x = self._check(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._grad_log(x)

    def grad(self, x) -> np.ndarray:
        """Gradient of ``value``; zero on the nodal set."""
        x = self._check(x)
        u = np.asarray(self.value(x))
        g = self.grad_log(x)
        zero = (u == 0)[..., None, None] | ~np.isfinite(g)
        with np.errstate(invalid="ignore"):
            out = np.where(zero, 0.0, u[..., None, None] * np.where(zero, 0.0, g))
        return out

    def local_kinetic(self, x) -> np.ndarray:
        """``|grad u|^2 / |u|^2``, the kinetic integrand under ``|u|^2``."""
        g = self.grad_log(x)
        return np.einsum("...ij,...ij->...", np.abs(g), np.abs(g))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no exact sampler")

    @property
    def closed_forms(self) -> dict:
        return {}

    def init_config(self) -> np.ndarray:
        """A configuration where the density is positive, for Markov chains."""
        return np.zeros((self.count, self.dim))

    def sampler(self, **metropolis_kwargs):
        """The exact sampler if there is one, otherwise a Metropolis sampler of ``|u|^2``."""
        if self.has_sampler and not metropolis_kwargs:
            return self.sample
        return MetropolisSampler(self.log_density, self.init_config(), **metropolis_kwargs)


def check_gradient(u: TrialFunction, x, h: float = 1e-5) -> float:
    """Largest relative error between ``u.grad`` and central differences at ``x``.

    The error is relative to the largest gradient component.
    """
    x = np.array(u._check(x), dtype=float)
    if x.ndim != 2:
        raise ValueError("check_gradient takes a single configuration")
    g = np.asarray(u.grad(x))
    fd = np.zeros_like(g)
    for a in range(x.shape[0]):
        for b in range(x.shape[1]):
            xp, xm = x.copy(), x.copy()
            xp[a, b] += h
            xm[a, b] -= h
            fd[a, b] = (u.value(xp) - u.value(xm)) / (2.0 * h)
    scale = max(np.abs(g).max(), np.abs(fd).max())
    if scale == 0:
        return 0.0
    return float(np.abs(g - fd).max() / scale)


# -- Gaussians ----------------------------------------------------------------


class _ProductGaussian(TrialFunction):
    """``prod_i exp(-|x_i - c_i|^2 / (2 s_i^2))``."""

    has_sampler = True

    def __init__(self, name, d, N, centers, scales, params):
        super().__init__(d, N, params)
        self.name = name
        self.centers = np.array(centers, dtype=float).reshape(N, d)
        self.scales = np.array(scales, dtype=float).reshape(N)
        if np.any(self.scales <= 0) or not np.all(np.isfinite(self.scales)):
            raise DomainError("Gaussian scales must be positive and finite")
        self.centers.setflags(write=False)
        self.scales.setflags(write=False)

    def _log_abs(self, x):
        y = (x - self.centers) / self.scales[:, None]
        return -0.5 * np.einsum("...ij,...ij->...", y, y)

    def _grad_log(self, x):
        return -(x - self.centers) / (self.scales**2)[:, None]

    def sample(self, n, rng):
        # |u|^2 is a product of normals with standard deviation s / sqrt(2)
        z = rng.standard_normal((n, self.count, self.dim))
        return self.centers + z * (self.scales[:, None] / math.sqrt(2.0))

    def init_config(self):
        return self.centers.copy()

    def normalized_T(self) -> float:
        """``int |grad u|^2 / int |u|^2``."""
        return float(np.sum(0.5 * self.dim / self.scales**2))

    def normalized_X(self) -> float:
        """``int |u|^2 sum_{i<j} r_ij^-2 / int |u|^2``."""
        i, j = pair_indices(self.count)
        total = 0.0
        for a, b in zip(i, j):
            var = 0.5 * (self.scales[a] ** 2 + self.scales[b] ** 2)
            total += shifted_gaussian_inverse_square(self.centers[a] - self.centers[b], var)
        return total


def shifted_gaussian_inverse_square(mean, var: float) -> float:
    """``E[1 / |Z|^2]`` for ``Z ~ N(mean, var I_d)`` with ``d >= 3``.

    Uses ``E[1/|Z|^2] = (1/(2 var)) int_0^1 t^(d/2-2) exp(-|m|^2 (1-t) / (2 var)) dt``
    with ``t = s^2`` to remove the endpoint singularity.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    d = mean.size
    if d < 3:
        raise DomainError("E[1/|Z|^2] is infinite for d < 3")
    if var <= 0:
        raise DomainError("variance must be positive")
    a = float(mean @ mean) / (2.0 * var)
    if a == 0:
        return 1.0 / (var * (d - 2))

    def integrand(s):
        return 2.0 * s ** (d - 3) * np.exp(-a * (1.0 - s * s))

    return radial_quadrature(integrand, tanh_sinh(0.0, 1.0, 3), rtol=1e-13, atol=1e-300) / (2.0 * var)


class GaussianProduct(_ProductGaussian):
    """Isotropic product Gaussian with common scale ``s``."""

    def __init__(self, d, N, s):
        super().__init__("gaussian", d, N, np.zeros((N, d)), np.full(N, float(s)), {"d": d, "N": N, "s": s})
        self.s = float(s)

    def rescaled(self, lam: float) -> "GaussianProduct":
        """The trial ``u(lam x)``, i.e. scale ``s / lam``."""
        return GaussianProduct(self.dim, self.count, self.s / lam)

    @cached_property
    def _closed(self) -> dict:
        d, N, s = self.dim, self.count, self.s
        mass = gaussian_mass_integral(d) * s**d
        kinetic = gaussian_kinetic_integral(d) * s ** (d - 2)
        out = {
            "mass": mass,
            "kinetic": kinetic,
            "norm": mass**N,
            "T": N * kinetic * mass ** (N - 1),
        }
        if d >= 3 and N >= 2:
            # E[1/|x - y|^2] = 1 / (s^2 (d - 2)) for the difference of two draws
            pair = mass**2 / (s * s * (d - 2))
            out["pair"] = pair
            out["X"] = 0.5 * N * (N - 1) * pair * mass ** (N - 2)
            out["quotient"] = out["T"] / out["X"]
        return out

    @property
    def closed_forms(self) -> dict:
        return dict(self._closed)


def gaussian_product(d: int, N: int, s: float = 1.0) -> GaussianProduct:
    """``prod_i exp(-|x_i|^2 / (2 s^2))`` with an exact sampler.

    ``closed_forms`` holds the one-particle ``mass`` and ``kinetic``
    integrals, the pair integral ``pair`` and the full ``T``, ``X`` and
    ``quotient = T / X = d (d - 2) / (N - 1)`` (``d >= 3``, ``N >= 2``).

    Examples
    --------
    >>> u = gaussian_product(3, 1)
    >>> u.closed_forms["kinetic"] / u.closed_forms["mass"]
    1.5
    """
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N")
    if not s > 0 or not math.isfinite(s):
        raise DomainError("scale s must be positive and finite")
    return GaussianProduct(d, N, s)


class GaussianShifted(_ProductGaussian):
    @property
    def closed_forms(self) -> dict:
        out = {"T_normalized": self.normalized_T()}
        if self.dim >= 3 and self.count >= 2:
            x = self.normalized_X()
            out["X_normalized"] = x
            out["quotient"] = out["T_normalized"] / x
        return out


def gaussian_shifted(d: int, N: int, centers=None, scales=None) -> GaussianShifted:
    """Product of Gaussians with individual centers and widths.

    The quotient is exact up to a one-dimensional quadrature per pair
    (:func:`shifted_gaussian_inverse_square`).
    """
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N")
    centers = np.zeros((N, d)) if centers is None else np.asarray(centers, dtype=float).reshape(N, d)
    scales = np.ones(N) if scales is None else np.asarray(scales, dtype=float).reshape(N)
    params = {"d": d, "N": N, "centers": centers.tolist(), "scales": scales.tolist()}
    return GaussianShifted("gaussian_shifted", d, N, centers, scales, params)


# -- one-dimensional sharpness family ----------------------------------------


@dataclass(frozen=True)
class SharpnessParams:
    """``alpha = 1/4 + delta`` with ``delta > 0``."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0 or not math.isfinite(self.delta):
            raise DomainError(f"delta must be positive, got {self.delta!r}")

    @property
    def alpha(self) -> float:
        return 0.25 + self.delta


class Sharpness1D(TrialFunction):
    """``v(x) = prod_{i<j} |x_i - x_j|^(2 alpha) exp(-|x|)`` on ``R^N``."""

    name = "sharpness1d"
    symmetry = "diagonal_vanishing"

    def __init__(self, N: int, params: SharpnessParams):
        super().__init__(1, N, {"d": 1, "N": N, "delta": params.delta})
        self.delta = params.delta
        self.alpha = params.alpha

    def _log_abs(self, x):
        t = x[..., 0]
        i, j = pair_indices(self.count)
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(t[..., i] - t[..., j])).sum(axis=-1)
        return 2.0 * self.alpha * logs - np.sqrt(np.einsum("...i,...i->...", t, t))

    def _grad_log(self, x):
        t = x[..., 0]
        diff = t[..., :, None] - t[..., None, :]
        off = ~np.eye(self.count, dtype=bool)
        inv = np.zeros_like(diff)
        with np.errstate(divide="ignore"):
            inv[..., off] = 1.0 / diff[..., off]
        norm = np.sqrt(np.einsum("...i,...i->...", t, t))
        g = 2.0 * self.alpha * inv.sum(axis=-1) - t / norm[..., None]
        return g[..., None]

    def init_config(self):
        return (np.arange(self.count) - 0.5 * (self.count - 1)).reshape(self.count, 1)

    @property
    def closed_forms(self) -> dict:
        if self.count != 2:
            return {}
        a = self.alpha
        # two particles: exact integrals in polar coordinates of R^2
        return {"quotient": 0.5 + 4.0 * self.delta, "beta": 1.0 - 1.0 / (16.0 * a * a)}


def sharpness_1d(N: int, params: SharpnessParams | float) -> Sharpness1D:
    """The one-dimensional family whose quotients approach ``1/2``.

    ``params`` may be a :class:`SharpnessParams` or a bare ``delta``. The
    gradient is ``2 alpha v sum_{j != i} 1/(x_i - x_j) - v x_i / |x|``; on
    a diagonal the value and gradient are both zero.

    For ``N = 2`` the exact quotient is ``1/2 + 4 delta`` and the exact
    ``beta`` is ``1 - 1/(16 alpha^2)``.
    """
    N = check_positive_int(N, "N", minimum=2)
    if not isinstance(params, SharpnessParams):
        params = SharpnessParams(float(params))
    return Sharpness1D(N, params)


def sharpness_cross_term(x, return_scale: bool = False):
    """``sum_i sum_{j,k != i, j != k} 1/((x_i - x_j)(x_i - x_k))`` for points on a line.

    Summed triple by triple, where the six ordered terms cancel. With
    ``return_scale`` also returns the sum of absolute values of all terms.
    """
    t = as_points(x, min_count=2)
    if t.shape[-1] != 1:
        raise ValueError("cross term is defined for one-dimensional particles")
    t = t[..., 0]
    n = t.shape[-1]
    total = np.zeros(t.shape[:-1])
    scale = np.zeros(t.shape[:-1])
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                ta, tb, tc = t[..., a], t[..., b], t[..., c]
                terms = (
                    1.0 / ((ta - tb) * (ta - tc)),
                    1.0 / ((tb - ta) * (tb - tc)),
                    1.0 / ((tc - ta) * (tc - tb)),
                )
                total = total + 2.0 * (terms[0] + terms[1] + terms[2])
                scale = scale + 2.0 * (np.abs(terms[0]) + np.abs(terms[1]) + np.abs(terms[2]))
    if total.ndim == 0:
        total, scale = float(total), float(scale)
    return (total, scale) if return_scale else total


# -- Slater determinants ------------------------------------------------------


def _permutation_parity(perm: np.ndarray) -> np.ndarray:
    n = perm.shape[-1]
    inversions = np.zeros(perm.shape[:-1], dtype=int)
    for a in range(n):
        for b in range(a + 1, n):
            inversions += perm[..., a] > perm[..., b]
    return np.where(inversions % 2 == 0, 1.0, -1.0)


class SlaterGaussian(TrialFunction):
    """``det[phi_k(x_j)]`` with ``phi_k(x) = exp(-|x - c_k|^2 / 2)``."""

    name = "slater"
    symmetry = "antisymmetric"

    def __init__(self, d, N, centers):
        super().__init__(d, N, {"d": d, "N": N, "centers": np.asarray(centers).tolist()})
        self.centers = np.array(centers, dtype=float)
        self.centers.setflags(write=False)

    def _scaled_matrix(self, x):
        # row j scaled by exp(-max_k exponent) so no row underflows
        e = -0.5 * np.einsum("...jkl,...jkl->...jk", x[..., :, None, :] - self.centers, x[..., :, None, :] - self.centers)
        m = e.max(axis=-1, keepdims=True)
        return np.exp(e - m), m[..., 0]

    def _canonical(self, x):
        # rows in lexicographic order of the particle coordinates; the sign
        # of the sorting permutation restores the caller's order
        keys = [x[..., :, k] for k in range(self.dim - 1, -1, -1)]
        perm = np.lexsort(keys, axis=-1)
        xs = np.take_along_axis(x, perm[..., None], axis=-2)
        return xs, _permutation_parity(perm)

    def _log_abs(self, x):
        xs, _ = self._canonical(x)
        a, m = self._scaled_matrix(xs)
        sign, logdet = np.linalg.slogdet(a)
        out = np.where(sign == 0, -np.inf, logdet + m.sum(axis=-1))
        return out

    def _sign(self, x):
        xs, parity = self._canonical(x)
        a, _ = self._scaled_matrix(xs)
        sign, _ = np.linalg.slogdet(a)
        return parity * sign

    def _grad_log(self, x):
        a, _ = self._scaled_matrix(x)
        # d log det / d x_j = sum_k (A^-1)_kj A_jk (c_k - x_j)
        inv = np.linalg.inv(a)
        w = a * np.swapaxes(inv, -1, -2)
        return np.einsum("...jk,...jkl->...jl", w, self.centers - x[..., :, None, :])

    def init_config(self):
        return self.centers.copy()


def slater_gaussian(d: int, N: int, centers) -> SlaterGaussian:
    """Antisymmetric determinant of Gaussian orbitals centred at ``centers``.

    Determinants are evaluated with the particles sorted lexicographically,
    so exchanging two particles flips the sign bit for bit.
    """
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N", minimum=2)
    c = np.asarray(centers, dtype=float)
    if c.shape != (N, d):
        raise ValueError(f"centers must have shape ({N}, {d}), got {c.shape}")
    diff = c[:, None, :] - c[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)[np.triu_indices(N, 1)]
    if np.any(r2 == 0):
        raise DegenerateOrbitals("two orbital centers coincide")
    return SlaterGaussian(d, N, c)


# -- single-particle families -------------------------------------------------


class OddGaussian(TrialFunction):
    """``u(x) = x_1 exp(-|x|^2 / 2)`` for one particle in ``R^d``."""

    name = "odd"
    has_sampler = True
    symmetry = "odd"

    def __init__(self, d):
        super().__init__(d, 1, {"d": d})

    def _log_abs(self, x):
        y = x[..., 0, :]
        with np.errstate(divide="ignore"):
            return np.log(np.abs(y[..., 0])) - 0.5 * np.einsum("...k,...k->...", y, y)

    def _sign(self, x):
        return np.sign(x[..., 0, 0])

    def _grad_log(self, x):
        g = -np.array(x, dtype=float)
        g[..., 0, 0] += 1.0 / x[..., 0, 0]
        return g

    def sample(self, n, rng):
        # x_1^2 ~ Gamma(3/2) with a random sign; the other axes are N(0, 1/2)
        out = rng.standard_normal((n, 1, self.dim)) / math.sqrt(2.0)
        first = np.sqrt(rng.gamma(1.5, 1.0, size=n))
        out[:, 0, 0] = np.where(rng.random(n) < 0.5, -first, first)
        return out

    def init_config(self):
        x = np.zeros((1, self.dim))
        x[0, 0] = 1.0
        return x

    def radial_profile(self):
        """``(f, f', angular eigenvalue)`` with ``u = f(r) Y(theta)``."""
        return (
            lambda r: r * np.exp(-0.5 * r * r),
            lambda r: (1.0 - r * r) * np.exp(-0.5 * r * r),
            float(self.dim - 1),
        )

    @property
    def closed_forms(self) -> dict:
        d = self.dim
        c = math.pi ** (d / 2)
        return {
            "kinetic": c * (d + 2) / 4.0,
            "mass": c / 2.0,
            "weighted_mass": c / d,
            "quotient": d * (d + 2) / 4.0,
        }


def odd_gaussian(d: int) -> OddGaussian:
    """Odd single-particle trial with quotient ``d (d + 2) / 4``.

    Examples
    --------
    >>> odd_gaussian(3).closed_forms["quotient"]
    3.75
    """
    d = check_positive_int(d, "d", minimum=2)
    return OddGaussian(d)


@dataclass(frozen=True)
class PowerExpProfile:
    """``f(r) = r^beta exp(-gamma r)``; radial ratio ``beta / 2``."""

    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (self.beta > 0 and self.gamma > 0):
            raise DomainError("profile r^beta exp(-gamma r) needs beta > 0 and gamma > 0")

    def f(self, r):
        return r**self.beta * np.exp(-self.gamma * r)

    def df(self, r):
        return (self.beta / r - self.gamma) * self.f(r)

    def radial_integrals(self) -> tuple[float, float]:
        """``(int f'^2 r dr, int f^2 / r dr)`` by double-exponential quadrature."""
        # rescale r so the exponential decays at unit rate
        g = self.gamma

        def kin(t):
            r = t / g
            return self.df(r) ** 2 * r / g

        def mass(t):
            r = t / g
            return self.f(r) ** 2 / r / g

        return radial_quadrature(kin, rtol=1e-12), radial_quadrature(mass, rtol=1e-12)

    def radial_ratio_exact(self) -> float:
        return self.beta / 2.0

    def as_dict(self) -> dict:
        return {"profile": "power", "beta": self.beta, "gamma": self.gamma}


@dataclass(frozen=True)
class LogPlateauProfile:
    """Equal to 1 on ``[1, R]`` with ``sin^2`` ramps of width ``width`` in ``log r``.

    Radial ratio ``pi^2 / (4 w (log R + 3 w / 4))``, which tends to 0 as
    ``R`` grows.
    """

    R: float = 1e3
    width: float = 1.0

    def __post_init__(self):
        if not (self.R >= 1 and self.width > 0 and math.isfinite(self.R)):
            raise DomainError("plateau profile needs R >= 1 and width > 0")

    @property
    def length(self) -> float:
        return math.log(self.R)

    def _g(self, t):
        w, L = self.width, self.length
        t = np.asarray(t, dtype=float)
        up = np.sin(0.5 * math.pi * (t + w) / w) ** 2
        down = np.cos(0.5 * math.pi * (t - L) / w) ** 2
        return np.select([t <= -w, t < 0, t <= L, t < L + w], [0.0, up, 1.0, down], 0.0)

    def _dg(self, t):
        w, L = self.width, self.length
        t = np.asarray(t, dtype=float)
        up = 0.5 * math.pi / w * np.sin(math.pi * (t + w) / w)
        down = -0.5 * math.pi / w * np.sin(math.pi * (t - L) / w)
        return np.select([t <= -w, t < 0, t <= L, t < L + w], [0.0, up, 0.0, down], 0.0)

    def f(self, r):
        with np.errstate(divide="ignore"):
            return self._g(np.log(r))

    def df(self, r):
        with np.errstate(divide="ignore"):
            return self._dg(np.log(r)) / r

    def radial_integrals(self) -> tuple[float, float]:
        """``(int f'^2 r dr, int f^2 / r dr)``; in ``t = log r`` both are plain integrals."""
        w, L = self.width, self.length
        # the plateau contributes L to the mass and nothing to the kinetic part
        kin, mass = 0.0, L
        for a, b in ((-w, 0.0), (L, L + w)):
            grid = gauss_legendre(32, a, b)
            kin += float(grid.weights @ self._dg(grid.nodes) ** 2)
            mass += float(grid.weights @ self._g(grid.nodes) ** 2)
        return kin, mass

    def radial_ratio_exact(self) -> float:
        w = self.width
        return math.pi**2 / (4.0 * w * (self.length + 0.75 * w))

    def as_dict(self) -> dict:
        return {"profile": "plateau", "R": self.R, "width": self.width}


class ABMode(TrialFunction):
    """``u = f(r) exp(i m theta)`` for one particle in the plane."""

    name = "abmode"

    def __init__(self, m: int, profile):
        super().__init__(2, 1, {"m": m, **profile.as_dict()})
        self.m = int(m)
        self.profile = profile

    def value(self, x):
        x = self._check(x)
        y = x[..., 0, :]
        r = np.hypot(y[..., 0], y[..., 1])
        theta = np.arctan2(y[..., 1], y[..., 0])
        out = self.profile.f(r) * np.exp(1j * self.m * theta)
        return out if np.ndim(out) else complex(out)

    def _log_abs(self, x):
        y = x[..., 0, :]
        r = np.hypot(y[..., 0], y[..., 1])
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.profile.f(r)))

    def _grad_log(self, x):
        y = x[..., 0, :]
        r = np.hypot(y[..., 0], y[..., 1])
        rhat = y / r[..., None]
        that = np.stack([-rhat[..., 1], rhat[..., 0]], axis=-1)
        radial = np.asarray(self.profile.df(r) / self.profile.f(r))
        g = radial[..., None] * rhat + np.asarray(1j * self.m / r)[..., None] * that
        return g[..., None, :]

    def grad(self, x):
        x = self._check(x)
        y = x[..., 0, :]
        r = np.hypot(y[..., 0], y[..., 1])
        rhat = y / r[..., None]
        that = np.stack([-rhat[..., 1], rhat[..., 0]], axis=-1)
        phase = np.exp(1j * self.m * np.arctan2(y[..., 1], y[..., 0]))
        df = np.asarray(self.profile.df(r))
        ang = np.asarray(1j * self.m * self.profile.f(r) / r)
        g = df[..., None] * rhat + ang[..., None] * that
        return (np.asarray(phase)[..., None] * g)[..., None, :]

    def init_config(self):
        return np.array([[1.0, 0.0]])

    def radial_terms(self) -> tuple[float, float]:
        """``(int f'^2 r dr, int f^2 / r dr)``."""
        return self.profile.radial_integrals()


def ab_mode(m: int, profile=None) -> ABMode:
    """Single angular mode ``f(r) e^{i m theta}``.

    ``profile`` is a :class:`PowerExpProfile` (default ``r e^{-r}``) or a
    :class:`LogPlateauProfile`; both vanish at the origin, as required when
    ``m != 0``, and have finite ``int f^2 / r dr``.
    """
    if isinstance(m, bool) or int(m) != m:
        raise ValueError(f"m must be an integer, got {m!r}")
    profile = PowerExpProfile() if profile is None else profile
    if not isinstance(profile, (PowerExpProfile, LogPlateauProfile)):
        raise DomainError("profile must be PowerExpProfile or LogPlateauProfile")
    return ABMode(int(m), profile)
