"""Closed-form constants for the many-particle Hardy inequalities.

All functions return plain floats except :func:`magnetic_constant`, which
returns an exact :class:`fractions.Fraction` when the flux is rational.
:func:`bound_table` collects the constants for one ``(d, N)`` as
:class:`BoundReport` rows.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from numbers import Rational

from ._validation import check_positive_int
from .exceptions import DomainError

__all__ = [
    "BoundReport",
    "RationalFlux",
    "bound_table",
    "case_b_bound",
    "fermi_bound",
    "gamma_half",
    "gaussian_Dd",
    "gaussian_Dd_exact",
    "gaussian_kinetic_integral",
    "gaussian_mass_integral",
    "gaussian_pair_integral",
    "gaussian_pair_integral_tabulated",
    "gaussian_trial_upper_bound",
    "gaussian_upper_bound",
    "hardy_lower_bound",
    "k_asymptotic_bound",
    "magnetic_constant",
    "naive_bound",
    "one_d_constant",
    "sphere_area",
]


@dataclass(frozen=True)
class BoundReport:
    """A named constant with the formula it evaluates.

    ``value`` is ``None`` and ``applicable`` is false when the inequality
    does not hold for the requested parameters.
    """

    name: str
    value: float | None
    kind: str
    params: dict = field(default_factory=dict)
    formula: str = ""
    applicable: bool = True

    def __post_init__(self):
        if self.kind not in ("lower", "upper", "exact"):
            raise ValueError(f"unknown bound kind {self.kind!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RationalFlux:
    """A flux ``p / q`` in lowest terms with ``q > 0``."""

    p: int
    q: int

    def __post_init__(self):
        if self.q == 0:
            raise ValueError("flux denominator must be nonzero")
        g = math.gcd(self.p, self.q)
        sign = -1 if self.q < 0 else 1
        object.__setattr__(self, "p", sign * self.p // g)
        object.__setattr__(self, "q", sign * self.q // g)

    @classmethod
    def parse(cls, text: str) -> "RationalFlux":
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return cls(int(num), int(den))
        return cls(int(text), 1)

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


def _check_dN(d, N, dmin=3):
    try:
        d = check_positive_int(d, "d")
        N = check_positive_int(N, "N")
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    if d < dmin:
        raise DomainError(f"requires d >= {dmin}, got d={d}")
    if N < 2:
        raise DomainError(f"requires N >= 2, got N={N}")
    return d, N


def gamma_half(n: int) -> float:
    """``Gamma(n / 2)`` for a positive integer ``n`` by the upward recursion."""
    n = check_positive_int(n, "n")
    if n % 2 == 0:
        value, start = 1.0, 2
    else:
        value, start = math.sqrt(math.pi), 1
    for k in range(start, n, 2):
        value *= k / 2
    return value


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in ``R^d``."""
    return 2.0 * math.pi ** (d / 2) / gamma_half(d)


def case_b_bound(d: int, ell: float) -> float:
    """Positive root of the quadratic obtained when ``Z <= ell * T``.

    Returns ``(d-2)^2 / (1 + sqrt(1 + ell (d-2)^2))``.
    """
    if d < 3:
        raise DomainError(f"requires d >= 3, got d={d}")
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    c = (d - 2) ** 2
    return c / (1.0 + math.sqrt(1.0 + ell * c))


def _three_body_ell(d: int, N: int) -> float:
    return 3.0 * (N - 1) * (N - 2) / (2.0 * (d - 1) ** 2)


def hardy_lower_bound(d: int, N: int, return_branch: bool = False):
    """Lower bound on the many-particle Hardy constant for ``d >= 3``.

    The larger of ``(d-2)^2 / N`` and the three-body curvature branch.
    With ``return_branch=True`` also returns ``"pair"`` or ``"triple"``;
    ties go to ``"triple"``.
    """
    d, N = _check_dN(d, N)
    pair = (d - 2) ** 2 / N
    triple = case_b_bound(d, _three_body_ell(d, N))
    value, branch = (triple, "triple") if triple >= pair else (pair, "pair")
    return (value, branch) if return_branch else value


def naive_bound(d: int, N: int) -> float:
    """``(d-2)^2 / (2N - 2)`` from summing two-body Hardy inequalities."""
    d, N = _check_dN(d, N)
    return (d - 2) ** 2 / (2 * N - 2)


def fermi_bound(d: int, N: int) -> float:
    """``d^2 / N``, valid for antisymmetric functions in every dimension."""
    d, N = _check_dN(d, N, dmin=1)
    return d * d / N


def one_d_constant() -> float:
    """Sharp constant for one-dimensional particles vanishing on the diagonals."""
    return 0.5


def gaussian_mass_integral(d: int) -> float:
    """``int exp(-|x|^2) dx`` over ``R^d``."""
    return math.pi ** (d / 2)


def gaussian_kinetic_integral(d: int) -> float:
    """``int |grad exp(-|x|^2/2)|^2 dx`` over ``R^d``."""
    return 0.5 * d * math.pi ** (d / 2)


def gaussian_pair_integral(d: int) -> float:
    """``int int exp(-|x|^2 - |y|^2) / |x - y|^2 dx dy = pi^d / (d - 2)``."""
    if d < 3:
        raise DomainError("pair integral diverges for d < 3")
    return math.pi**d / (d - 2)


def gaussian_pair_integral_tabulated(d: int) -> float:
    """The published closed form ``2 pi^(d/2) / Gamma(d/2)`` for the pair integral.

    Kept because the published upper bounds are built from it. It does not
    equal the integral; see :func:`gaussian_pair_integral`.
    """
    return 2.0 * math.pi ** (d / 2) / gamma_half(d)


def gaussian_Dd(d: int) -> float:
    """Published Gaussian value ``(d/4) pi^(d/2) Gamma(d/2)`` of the one-body ratio.

    Assembled as kinetic * mass / pair using
    :func:`gaussian_pair_integral_tabulated` for the pair integral.
    """
    if d < 3:
        raise DomainError(f"requires d >= 3, got d={d}")
    return gaussian_kinetic_integral(d) * gaussian_mass_integral(d) / gaussian_pair_integral_tabulated(d)


def gaussian_Dd_exact(d: int) -> float:
    """Exact Gaussian ratio ``kinetic * mass / pair = d (d - 2) / 2``."""
    if d < 3:
        raise DomainError(f"requires d >= 3, got d={d}")
    return d * (d - 2) / 2


def gaussian_upper_bound(d: int, N: int) -> float:
    """Published upper bound ``2 D(d) / (N - 1)`` with :func:`gaussian_Dd`.

    Equals ``3 pi^2 / 8`` at ``(3, 3)``. It is a valid upper bound because it
    exceeds :func:`gaussian_trial_upper_bound` for every ``d >= 3``.
    """
    d, N = _check_dN(d, N)
    return 2.0 * gaussian_Dd(d) / (N - 1)


def gaussian_trial_upper_bound(d: int, N: int) -> float:
    """Rayleigh quotient of the product Gaussian: ``d (d - 2) / (N - 1)``."""
    d, N = _check_dN(d, N)
    return d * (d - 2) / (N - 1)


def magnetic_constant(N: int, alpha) -> Fraction | float:
    """``min_{l=1..N-1} (dist(l alpha, Z) / l)^2``.

    ``alpha`` may be a :class:`RationalFlux`, a :class:`fractions.Fraction`,
    an ``int``, a string ``"p/q"`` (all exact) or a float (scanned over the
    integers next to ``l * alpha``).
    """
    N = check_positive_int(N, "N", minimum=2)
    if isinstance(alpha, str):
        alpha = RationalFlux.parse(alpha)
    if isinstance(alpha, RationalFlux):
        alpha = alpha.as_fraction()
    if isinstance(alpha, Rational):
        a = Fraction(alpha)
        # dist(l p / q, Z) = min(m, q - m) / q with m = l p mod q
        p, q = a.numerator, a.denominator
        best = None
        for l in range(1, N):
            m = (l * p) % q
            val = Fraction(min(m, q - m), q * l) ** 2
            if best is None or val < best:
                best = val
        return best
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError("flux must be finite")
    # the constant has period 1 in alpha; subtracting the floor is exact
    alpha -= math.floor(alpha)
    best = math.inf
    for l in range(1, N):
        la = l * alpha
        dist = min(abs(k - la) for k in range(math.floor(la) - 1, math.ceil(la) + 2))
        best = min(best, (dist / l) ** 2)
    return best


def k_asymptotic_bound(d: int, K: float) -> float:
    """``(d-2)^2 / (2 + K)``, the large-``N`` bound on ``N * C(d, N)``."""
    if d < 3:
        raise DomainError(f"requires d >= 3, got d={d}")
    if K < 0:
        raise DomainError("K must be nonnegative")
    return (d - 2) ** 2 / (2.0 + K)


def bound_table(d: int, N: int, alpha=None, K: float | None = None) -> list[BoundReport]:
    """All constants that apply to ``(d, N)`` plus the optional flux and ``K`` rows."""
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N", minimum=2)
    params = {"d": d, "N": N}
    rows: list[BoundReport] = []
    general = [
        ("hardy_lower_bound", "lower", hardy_lower_bound,
         "(d-2)^2 max{1/N, 1/(1+sqrt(1+3(d-2)^2(N-1)(N-2)/(2(d-1)^2)))}"),
        ("naive_bound", "lower", naive_bound, "(d-2)^2/(2N-2)"),
        ("gaussian_upper_bound", "upper", gaussian_upper_bound, "d pi^(d/2) Gamma(d/2) / (2(N-1))"),
        ("gaussian_trial_upper_bound", "upper", gaussian_trial_upper_bound, "d(d-2)/(N-1)"),
    ]
    for name, kind, fn, formula in general:
        if d >= 3:
            rows.append(BoundReport(name, fn(d, N), kind, dict(params), formula))
        else:
            rows.append(BoundReport(name, None, kind, dict(params), formula, applicable=False))
    if d == 1:
        rows.append(BoundReport("one_d_constant", one_d_constant(), "exact", dict(params),
                                "1/2 (functions vanishing on coincidence planes)"))
    rows.append(BoundReport("fermi_bound", fermi_bound(d, N), "lower", dict(params),
                            "d^2/N (antisymmetric functions)"))
    if alpha is not None:
        value = magnetic_constant(N, alpha)
        label = str(alpha) if not isinstance(alpha, float) else repr(alpha)
        rows.append(BoundReport("magnetic_constant", float(value), "exact",
                                {**params, "alpha": label},
                                "min_{l<N} (min_k |k - l alpha| / l)^2 (planar particles)"))
    if K is not None:
        if d >= 3:
            rows.append(BoundReport("k_asymptotic_bound", k_asymptotic_bound(d, K), "lower",
                                    {**params, "K": K}, "(d-2)^2/(2+K) for lim N C(d,N)"))
        else:
            rows.append(BoundReport("k_asymptotic_bound", None, "lower", {**params, "K": K},
                                    "(d-2)^2/(2+K) for lim N C(d,N)", applicable=False))
    return rows
