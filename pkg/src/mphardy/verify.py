"""Verification suites behind ``mphardy verify``.

Each suite takes ``(seed, samples)`` and returns a list of :class:`Check`.
Deterministic identities use fixed tolerances; Monte Carlo checks pass when
the tested inequality holds within three standard errors. A check that
raises is recorded as failed with the exception text.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import bounds, fields, functionals, geometry, optimize, trials
from .exceptions import HardyError, NotAntisymmetric

SUITES = ("geometry", "fields", "identities", "hardy", "sharpness", "fermion", "magnetic")


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    target: float | None = None
    stderr: float | None = None
    detail: str = ""
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = "check"
        return out


def _guard(name, fn, *args, **kwargs) -> list[Check]:
    try:
        out = fn(*args, **kwargs)
    except (HardyError, ValueError, ArithmeticError) as exc:
        return [Check(name, False, detail=f"{type(exc).__name__}: {exc}")]
    return out if isinstance(out, list) else [out]


# -- geometry -----------------------------------------------------------------


def random_triangles(rng, n: int, d: int, min_shape: float = 1e-3) -> np.ndarray:
    """``(n, 3, d)`` Gaussian triangles, redrawing any with area below ``min_shape * max side^2``."""
    out = np.empty((0, 3, d))
    while out.shape[0] < n:
        p = rng.standard_normal((2 * n, 3, d))
        a2 = geometry.pair_sq_distances(p)
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        area = 0.5 * np.sqrt(geometry._wedge_sq(e1, e2))
        good = area > min_shape * a2.max(axis=-1)
        out = np.concatenate([out, p[good]])
    return out[:n]


def geometry_suite(seed: int = 0, samples: int = 10_000) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for d in (2, 3, 5):
        p = random_triangles(rng, samples, d)
        p1, p2, p3 = p[:, 0], p[:, 1], p[:, 2]
        inv_r2 = geometry.circumradius_inv_sq(p1, p2, p3)
        b = geometry.menger_b(p1, p2, p3)
        err = float(np.max(np.abs(2.0 * b / inv_r2 - 1.0)))
        checks.append(Check(f"circumradius_menger_d{d}", err <= 1e-9, err, 1e-9, params={"d": d}))
        lo, mid, hi = geometry.triangle_chain(p1, p2, p3)
        slack = float(np.max(np.maximum((lo - mid) / mid, (mid - hi) / hi)))
        checks.append(Check(f"triangle_chain_d{d}", slack <= 1e-12, slack, 1e-12, params={"d": d}))
        res = geometry.mm_identity_residual(p1, p2, p3) / geometry.rho_sq(p1, p2, p3)
        worst = float(np.max(np.abs(res)))
        checks.append(Check(f"mm_identity_d{d}", worst <= 1e-10, worst, 1e-10, params={"d": d}))
    tri = geometry.equilateral(1.7, 3)
    lo, mid, hi = geometry.triangle_chain(*tri)
    gap = max(abs(lo - mid) / mid, abs(mid - hi) / hi)
    checks.append(Check("triangle_chain_equilateral_equality", gap <= 1e-12, gap, 1e-12))
    q = rng.standard_normal((samples, 3, 1))
    b1 = geometry.menger_b(q[:, 0], q[:, 1], q[:, 2])
    z1 = geometry.triple_density(rng.standard_normal((samples, 5, 1)))
    ok = bool(np.all(b1 == 0.0) and np.all(z1 == 0.0))
    checks.append(Check("one_dimensional_triples_vanish", ok, float(np.max(np.abs(b1))), 0.0))
    return checks


# -- fields -------------------------------------------------------------------


def random_config(rng, N: int, d: int, min_sep: float = 1e-2) -> np.ndarray:
    while True:
        x = rng.standard_normal((N, d))
        if geometry.min_pair_distance(x) > min_sep:
            return x


def fields_suite(seed: int = 0, samples: int = 1000) -> list[Check]:
    """Closed forms against central differences (divergence) and direct sums (norms).

    Divergence errors are relative to ``2 X`` because the divergence of the
    pair field vanishes identically in the plane.
    """
    rng = np.random.default_rng(seed)
    checks = []
    cases = [(d, N) for d in (1, 2, 3) for N in (3, 5)]
    per_case = max(1, samples // len(cases))
    for d, N in cases:
        div_err = norm_err = 0.0
        for _ in range(per_case):
            x = random_config(rng, N, d)
            scale = 2.0 * geometry.pair_density(x)
            fd = fields.fd_divergence(fields.field_F3, x)
            div_err = max(div_err, abs(fd - fields.field_F3_div(x)) / scale)
            direct = float((fields.field_F3(x) ** 2).sum())
            norm_err = max(norm_err, abs(direct - fields.field_F3_norm_sq(x)) / direct)
        prm = {"d": d, "N": N}
        checks.append(Check(f"F3_divergence_d{d}_N{N}", div_err <= 1e-6, div_err, 1e-6, params=prm))
        checks.append(Check(f"F3_norm_d{d}_N{N}", norm_err <= 1e-10, norm_err, 1e-10, params=prm))
    for d in (1, 2, 3):
        div_err = norm_err = 0.0
        for _ in range(max(1, samples // 3)):
            x = random_config(rng, 3, d)
            closed = fields.field_G_div(x)
            # 6 / rho^2 sets the scale; the divergence itself vanishes for d = 1
            scale = 2.0 * fields.field_G_norm_sq(x)
            div_err = max(div_err, abs(fields.fd_divergence(fields.field_G, x) - closed) / scale)
            direct = float((fields.field_G(x) ** 2).sum())
            norm_err = max(norm_err, abs(direct - fields.field_G_norm_sq(x)) / direct)
        checks.append(Check(f"G_divergence_d{d}", div_err <= 1e-6, div_err, 1e-6, params={"d": d}))
        checks.append(Check(f"G_norm_d{d}", norm_err <= 1e-10, norm_err, 1e-10, params={"d": d}))
    return checks


# -- algebraic identities -----------------------------------------------------


def identities_suite(seed: int = 0, samples: int = 10_000) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    worst = 0.0
    for _ in range(max(1, samples // 10)):
        n = int(rng.integers(2, 9))
        x = random_config(rng, n, 2)
        lhs, rhs = fields.complex_sum_identity(x)
        worst = max(worst, abs(lhs - rhs) / rhs)
    checks.append(Check("complex_sum_identity", worst <= 1e-10, worst, 1e-10))
    worst = 0.0
    for _ in range(samples):
        n, d = int(rng.integers(1, 11)), int(rng.integers(1, 7))
        xi = rng.standard_normal((n, d))
        lhs = n * float((xi * xi).sum())
        worst = max(worst, abs(functionals.nn_identity_residual(xi)) / lhs)
    checks.append(Check("fourier_pair_identity", worst <= 1e-12, worst, 1e-12))
    worst = 0.0
    for _ in range(max(1, samples // 10)):
        t = rng.standard_normal(int(rng.integers(3, 8)))
        val, scale = trials.sharpness_cross_term(t, return_scale=True)
        worst = max(worst, abs(val) / scale)
    checks.append(Check("one_dimensional_cross_term", worst <= 1e-10, worst, 1e-10))
    p = rng.standard_normal((samples, 3, 4))
    res = geometry.mm_identity_residual(p[:, 0], p[:, 1], p[:, 2]) / geometry.rho_sq(p[:, 0], p[:, 1], p[:, 2])
    worst = float(np.max(np.abs(res)))
    checks.append(Check("mm_identity", worst <= 1e-10, worst, 1e-10))
    return checks


# -- Monte Carlo inequality checks ----------------------------------------------


def slater_centers(N: int, d: int, spacing: float = 2.0) -> np.ndarray:
    c = np.zeros((N, d))
    c[:, 0] = spacing * (np.arange(N) - 0.5 * (N - 1))
    return c


def hardy_families(d: int, N: int, seed: int = 0):
    """The shipped trial families that apply to ``d >= 3``, ``N >= 2``."""
    rng = np.random.default_rng([seed, d, N])
    return [
        trials.gaussian_product(d, N, 1.0),
        trials.gaussian_shifted(d, N, 0.7 * rng.standard_normal((N, d)), np.exp(0.3 * rng.standard_normal(N))),
        trials.slater_gaussian(d, N, slater_centers(N, d)),
    ]


def _hardy_case(u, samples, seed) -> list[Check]:
    d, N = u.dim, u.count
    prm = {"d": d, "N": N, "family": u.name, "samples": samples}
    res = functionals.divmain_check(u, n=samples, seed=seed)
    lower = bounds.hardy_lower_bound(d, N)
    q = res.quotient
    margin = q.sigma_distance(lower)
    out = [
        Check(f"hardy_lower_{u.name}_d{d}_N{N}", margin >= -3, q.mean, lower, q.stderr,
              f"margin {margin:.2f} sigma", prm),
        Check(f"divmain_{u.name}_d{d}_N{N}", res.passed, res.T.mean, res.bound_value, res.extra["gap"]["stderr"],
              f"margin {res.margin_sigma:.2f} sigma", prm),
    ]
    return out


def hardy_suite(seed: int = 0, samples: int = 100_000) -> list[Check]:
    checks = []
    for d in (3, 4, 5):
        for N in (2, 3, 4):
            for u in hardy_families(d, N, seed):
                checks += _guard(f"hardy_{u.name}_d{d}_N{N}", _hardy_case, u, samples, seed)

    def gaussian_closed_form():
        out = []
        for d, N in ((3, 3), (4, 3)):
            u = trials.gaussian_product(d, N)
            res = functionals.hardy_quotient(u, n=samples, seed=seed)
            exact = u.closed_forms["quotient"]
            z = res.quotient.sigma_distance(exact)
            upper = bounds.gaussian_upper_bound(d, N)
            prm = {"d": d, "N": N, "samples": samples}
            out.append(Check(f"gaussian_closed_form_d{d}_N{N}", abs(z) <= 3, res.value, exact, res.stderr,
                             f"{z:.2f} sigma", prm))
            out.append(Check(f"gaussian_upper_bound_d{d}_N{N}", res.value <= upper + 3 * res.stderr,
                             res.value, upper, res.stderr, "", prm))
        return out

    def two_way_rhs():
        u = trials.gaussian_product(3, 3)
        main = functionals.divmain_check(u, n=samples, seed=seed)
        lemma = functionals.div_lemma_bound(u, "F3", n=samples, seed=seed)
        a, b = main.extra["rhs"]["mean"], lemma.rhs.mean
        err = math.hypot(main.extra["rhs"]["stderr"], lemma.rhs.stderr)
        return Check("divmain_rhs_two_ways", abs(a - b) <= 3 * err + 1e-12 * abs(a), a, b, err)

    def point_and_G():
        out = []
        for name, u in (("point", trials.gaussian_product(3, 1)), ("G", trials.gaussian_product(3, 3))):
            res = functionals.div_lemma_bound(u, name, n=samples, seed=seed)
            out.append(Check(f"div_lemma_{name}", res.passed, res.T.mean, res.rhs.mean, res.gap.stderr,
                             f"margin {res.margin_sigma:.2f} sigma"))
        return out

    checks += _guard("gaussian_closed_form", gaussian_closed_form)
    checks += _guard("divmain_rhs_two_ways", two_way_rhs)
    checks += _guard("div_lemma_fields", point_and_G)
    return checks


def sharpness_suite(seed: int = 0, samples: int = 200_000, deltas=(0.2, 0.1, 0.05)) -> list[Check]:
    def run():
        rows = optimize.sharpness_scan(2, deltas, n=samples, seed=seed)
        out = []
        for r in rows:
            prm = {"N": 2, "delta": r.delta, "samples": samples}
            out.append(Check(f"sharpness_lower_delta{r.delta}", r.lower_ok, r.quotient.mean, r.lower,
                             r.quotient.stderr, "", prm))
            out.append(Check(f"sharpness_upper_delta{r.delta}", r.upper_ok, r.quotient.mean, r.upper.mean,
                             r.quotient.stderr, f"exact quotient {r.exact_quotient}", prm))
        for a, b in zip(rows, rows[1:]):
            err = math.hypot(a.quotient.stderr, b.quotient.stderr)
            diff = a.quotient.mean - b.quotient.mean
            out.append(Check(f"sharpness_decreasing_{a.delta}_{b.delta}", diff >= -3 * err, diff, 0.0, err))
        return out

    return _guard("sharpness", run)


def fermion_suite(seed: int = 0, samples: int = 100_000) -> list[Check]:
    checks = []

    def slater(d, N):
        u = trials.slater_gaussian(d, N, slater_centers(N, d))
        res = functionals.fermi_quotient(u, n=samples, seed=seed)
        return Check(f"fermi_slater_d{d}_N{N}", res.passed, res.value, res.bound_value, res.stderr,
                     f"margin {res.margin_sigma:.2f} sigma", {"d": d, "N": N, "samples": samples})

    for d, N in ((1, 2), (2, 2), (2, 3), (3, 2)):
        checks += _guard(f"fermi_slater_d{d}_N{N}", slater, d, N)

    def odd():
        out = []
        for d in (2, 3):
            q = functionals.odd_quotient(trials.odd_gaussian(d))
            exact = d * (d + 2) / 4.0
            out.append(Check(f"odd_quadrature_d{d}", abs(q - exact) <= 1e-6, q, exact, params={"d": d}))
            out.append(Check(f"odd_bound_d{d}", q >= d * d / 4.0, q, d * d / 4.0, params={"d": d}))
        return out

    def guard():
        try:
            functionals.check_antisymmetric(trials.gaussian_product(2, 2))
        except NotAntisymmetric:
            return Check("antisymmetry_guard", True)
        return Check("antisymmetry_guard", False, detail="symmetric trial accepted")

    checks += _guard("odd", odd)
    checks += _guard("antisymmetry_guard", guard)
    return checks


def brute_force_magnetic(N: int, alpha: Fraction) -> Fraction:
    """``min_l min_k ((k - l alpha) / l)^2`` by scanning ``k`` over a wide window."""
    best = None
    for l in range(1, N):
        target = l * alpha
        centre = math.floor(target)
        for k in range(centre - 3, centre + 4):
            val = ((k - target) / l) ** 2
            if best is None or val < best:
                best = val
    return best


def magnetic_suite(seed: int = 0, samples: int = 100) -> list[Check]:
    checks = []
    table = [(2, Fraction(1, 2), Fraction(1, 4)), (3, Fraction(1, 3), Fraction(1, 36))]
    table += [(N, Fraction(k), Fraction(0)) for N in (2, 3, 5) for k in (-1, 0, 2)]
    for N, alpha, expect in table:
        got = bounds.magnetic_constant(N, alpha)
        brute = brute_force_magnetic(N, alpha)
        ok = got == expect == brute
        checks.append(Check(f"magnetic_constant_N{N}_alpha{alpha}", ok, float(got), float(expect),
                            detail=f"exact {got}, brute force {brute}", params={"N": N, "alpha": str(alpha)}))

    def ab_cases():
        rng = np.random.default_rng(seed)
        worst = math.inf
        for _ in range(samples):
            alpha = float(rng.uniform(-2, 2))
            m = int(rng.integers(-3, 4))
            if rng.random() < 0.5:
                prof = trials.PowerExpProfile(float(rng.uniform(0.2, 3)), float(rng.uniform(0.2, 3)))
            else:
                prof = trials.LogPlateauProfile(float(np.exp(rng.uniform(0, 8))), float(rng.uniform(0.2, 2)))
            q = functionals.ab_mode_quotient(alpha, m, prof)
            floor = min((k - alpha) ** 2 for k in range(math.floor(alpha) - 1, math.ceil(alpha) + 2))
            worst = min(worst, q - floor)
        return Check("ab_mode_floor", worst >= -1e-10, worst, 0.0, detail="smallest value minus min_k (k - alpha)^2")

    def plateau():
        alpha, m = 0.3, 0
        q = functionals.ab_mode_quotient(alpha, m, trials.LogPlateauProfile(1e3, 1.0))
        radial = trials.LogPlateauProfile(1e3, 1.0).radial_ratio_exact()
        excess = q - (alpha - m) ** 2
        return Check("ab_mode_plateau_approach", excess <= 0.1 * (alpha - m) ** 2 + radial, excess,
                     0.1 * (alpha - m) ** 2 + radial)

    def complex_sum():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            lhs, rhs = fields.complex_sum_identity(random_config(rng, int(rng.integers(2, 8)), 2))
            worst = max(worst, abs(lhs - rhs) / rhs)
        return Check("complex_sum_identity", worst <= 1e-10, worst, 1e-10)

    checks += _guard("ab_mode_floor", ab_cases)
    checks += _guard("ab_mode_plateau_approach", plateau)
    checks += _guard("complex_sum_identity", complex_sum)
    return checks


SUITE_FUNCS = {
    "geometry": (geometry_suite, 10_000),
    "fields": (fields_suite, 1000),
    "identities": (identities_suite, 10_000),
    "hardy": (hardy_suite, 20_000),
    "sharpness": (sharpness_suite, 200_000),
    "fermion": (fermion_suite, 50_000),
    "magnetic": (magnetic_suite, 100),
}


def run_suite(name: str, seed: int = 0, samples: int | None = None) -> list[Check]:
    """Run one suite; ``samples`` overrides its default budget."""
    fn, default = SUITE_FUNCS[name]
    n = default if samples is None else samples
    return _guard(name, fn, seed, n)
