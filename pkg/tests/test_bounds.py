import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mphardy.bounds import (
    BoundReport,
    RationalFlux,
    bound_table,
    case_b_bound,
    fermi_bound,
    gamma_half,
    gaussian_Dd,
    gaussian_Dd_exact,
    gaussian_kinetic_integral,
    gaussian_mass_integral,
    gaussian_pair_integral,
    gaussian_pair_integral_tabulated,
    gaussian_trial_upper_bound,
    gaussian_upper_bound,
    hardy_lower_bound,
    k_asymptotic_bound,
    magnetic_constant,
    naive_bound,
    one_d_constant,
    sphere_area,
)
from mphardy.exceptions import DomainError
from mphardy.verify import brute_force_magnetic


class TestGammaHalf:
    @pytest.mark.parametrize("n", range(1, 30))
    def test_matches_math_gamma(self, n):
        assert gamma_half(n) == pytest.approx(math.gamma(n / 2), rel=1e-14)

    def test_sphere_areas(self):
        assert sphere_area(2) == pytest.approx(2 * math.pi)
        assert sphere_area(3) == pytest.approx(4 * math.pi)

    @pytest.mark.parametrize("bad", [0, -1, 1.5])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            gamma_half(bad)


class TestLowerBounds:
    def test_three_three(self):
        value, branch = hardy_lower_bound(3, 3, return_branch=True)
        assert value == pytest.approx(1 / (1 + math.sqrt(7) / 2), abs=1e-12)
        assert value == pytest.approx(0.430500, abs=1e-6)
        assert branch == "triple"

    def test_large_N(self):
        assert hardy_lower_bound(3, 10) == pytest.approx(0.158944, abs=1e-6)

    def test_pair_branch_in_high_dimension(self):
        value, branch = hardy_lower_bound(10, 2, return_branch=True)
        assert value == 32.0 and branch in ("pair", "triple")

    @given(st.integers(3, 30), st.integers(2, 50))
    def test_dominates_naive(self, d, N):
        assert hardy_lower_bound(d, N) >= naive_bound(d, N) * (1 - 1e-12)
        assert hardy_lower_bound(d, N) >= (d - 2) ** 2 / N * (1 - 1e-12)

    @given(st.integers(3, 30), st.integers(2, 50))
    def test_below_gaussian_trial(self, d, N):
        assert hardy_lower_bound(d, N) <= gaussian_trial_upper_bound(d, N)

    def test_case_b_limits(self):
        assert case_b_bound(3, 0.0) == pytest.approx(0.5)
        assert case_b_bound(5, 1e12) < 1e-4
        with pytest.raises(DomainError):
            case_b_bound(3, -1.0)

    @pytest.mark.parametrize("d,ell", [(3, 0.75), (4, 2.0), (7, 0.1), (12, 40.0)])
    def test_case_b_solves_quadratic(self, d, ell):
        # X^2 - 2 X T / c - ell T^2 / c = 0 with T = 1, X = 1 / case_b_bound
        c = (d - 2) ** 2
        x = 1.0 / case_b_bound(d, ell)
        assert abs(x * x - 2 * x / c - ell / c) <= 1e-12 * x * x

    def test_case_b_reproduces_triple_branch(self):
        assert case_b_bound(3, 0.75) == pytest.approx(1 / (1 + math.sqrt(7) / 2), abs=1e-15)
        assert case_b_bound(3, 0.75) == hardy_lower_bound(3, 3)

    def test_dominates_naive_in_three_dimensions(self):
        for N in range(3, 10_001):
            assert hardy_lower_bound(3, N) >= naive_bound(3, N)

    def test_below_published_upper_bound_sweep(self):
        for d in range(3, 13):
            for N in range(2, 10_001):
                assert hardy_lower_bound(d, N) <= gaussian_upper_bound(d, N)

    @pytest.mark.parametrize("d,N", [(2, 3), (1, 2), (3, 1)])
    def test_domain(self, d, N):
        with pytest.raises(DomainError):
            hardy_lower_bound(d, N)

    def test_fermi_and_one_d(self):
        assert fermi_bound(2, 3) == pytest.approx(4 / 3)
        assert fermi_bound(1, 2) == 0.5
        assert one_d_constant() == 0.5


class TestGaussianConstants:
    def test_published_upper_bound(self):
        assert gaussian_upper_bound(3, 3) == pytest.approx(3 * math.pi**2 / 8, abs=1e-12)
        assert gaussian_upper_bound(3, 2) == pytest.approx(3 * math.pi**2 / 4, abs=1e-12)

    def test_dd_values(self):
        assert gaussian_Dd(3) == pytest.approx(3 * math.pi**2 / 8, abs=1e-12)
        assert gaussian_Dd(4) == pytest.approx(math.pi**2, abs=1e-12)
        assert gaussian_Dd_exact(3) == 1.5

    def test_trial_upper_bound(self):
        assert gaussian_trial_upper_bound(3, 3) == 1.5
        assert gaussian_trial_upper_bound(3, 2) == 3.0

    def test_pair_integral(self):
        assert gaussian_pair_integral(3) == pytest.approx(math.pi**3)
        assert gaussian_pair_integral_tabulated(3) == pytest.approx(4 * math.pi)
        with pytest.raises(DomainError):
            gaussian_pair_integral(2)

    @pytest.mark.parametrize("d", range(3, 12))
    def test_published_form_is_looser(self, d):
        assert gaussian_Dd(d) == pytest.approx(d / 4 * math.pi ** (d / 2) * math.gamma(d / 2))
        assert gaussian_Dd_exact(d) == pytest.approx(gaussian_kinetic_integral(d) * gaussian_mass_integral(d) / gaussian_pair_integral(d))
        assert gaussian_Dd(d) > gaussian_Dd_exact(d)


class TestMagnetic:
    @pytest.mark.parametrize(
        "N,alpha,expected",
        [(2, "1/2", Fraction(1, 4)), (3, "1/3", Fraction(1, 36)), (4, 2, Fraction(0)), (5, "3", Fraction(0))],
    )
    def test_table(self, N, alpha, expected):
        assert magnetic_constant(N, alpha) == expected

    @given(st.integers(2, 9), st.integers(-20, 20), st.integers(1, 12))
    def test_matches_brute_force(self, N, p, q):
        alpha = Fraction(p, q)
        assert magnetic_constant(N, alpha) == brute_force_magnetic(N, alpha)

    @given(st.integers(2, 9), st.integers(-20, 20), st.integers(1, 12))
    def test_float_agrees_with_exact(self, N, p, q):
        exact = magnetic_constant(N, Fraction(p, q))
        assert magnetic_constant(N, p / q) == pytest.approx(float(exact), abs=1e-12)

    @given(st.fractions(min_value=-5, max_value=5, max_denominator=20), st.integers(2, 6))
    def test_periodic_and_even(self, a, N):
        assert magnetic_constant(N, a + 1) == magnetic_constant(N, a)
        assert magnetic_constant(N, -a) == magnetic_constant(N, a)

    @given(st.integers(2, 12), st.integers(-50, 50), st.integers(1, 30))
    def test_zero_iff_denominator_below_N(self, N, p, q):
        a = Fraction(p, q)
        assert (magnetic_constant(N, a) == 0) == (a.denominator <= N - 1)

    @given(st.integers(2, 8), st.integers(1, 10**6), st.data())
    def test_float_agrees_for_large_denominators(self, N, q, data):
        p = data.draw(st.integers(-q, q))
        exact = magnetic_constant(N, Fraction(p, q))
        assert magnetic_constant(N, p / q) == pytest.approx(float(exact), abs=1e-12)

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            magnetic_constant(3, math.inf)


class TestRationalFlux:
    def test_normalises(self):
        f = RationalFlux(2, -4)
        assert (f.p, f.q) == (-1, 2) and str(f) == "-1/2"

    def test_parse(self):
        assert RationalFlux.parse(" 3/9 ") == RationalFlux(1, 3)
        assert RationalFlux.parse("4").as_fraction() == 4

    def test_zero_denominator(self):
        with pytest.raises(ValueError):
            RationalFlux(1, 0)


class TestTable:
    def test_three_three_rows(self):
        rows = {r.name: r for r in bound_table(3, 3)}
        assert rows["hardy_lower_bound"].value == pytest.approx(0.430500, abs=1e-6)
        assert rows["gaussian_upper_bound"].value == pytest.approx(3.701101, abs=1e-6)
        assert rows["gaussian_upper_bound"].kind == "upper"

    def test_low_dimension_marks_inapplicable(self):
        rows = {r.name: r for r in bound_table(1, 2, K=1.0)}
        assert rows["hardy_lower_bound"].value is None
        assert not rows["hardy_lower_bound"].applicable
        assert rows["one_d_constant"].value == 0.5
        assert not rows["k_asymptotic_bound"].applicable

    def test_optional_rows(self):
        rows = {r.name: r for r in bound_table(3, 3, alpha=RationalFlux(1, 3), K=1.0)}
        assert rows["magnetic_constant"].value == pytest.approx(1 / 36)
        assert rows["k_asymptotic_bound"].value == pytest.approx(1 / 3)
        assert rows["magnetic_constant"].params["alpha"] == "1/3"

    def test_k_bound(self):
        assert k_asymptotic_bound(4, 0.0) == 2.0
        with pytest.raises(DomainError):
            k_asymptotic_bound(3, -1)

    def test_report_kind_checked(self):
        with pytest.raises(ValueError):
            BoundReport("x", 1.0, "sideways")
