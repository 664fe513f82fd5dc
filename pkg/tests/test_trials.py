import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mphardy.estimate import MetropolisSampler, mc_mean
from mphardy.exceptions import DegenerateOrbitals, DomainError
from mphardy.trials import (
    LogPlateauProfile,
    PowerExpProfile,
    SharpnessParams,
    ab_mode,
    check_gradient,
    gaussian_product,
    gaussian_shifted,
    odd_gaussian,
    sharpness_1d,
    sharpness_cross_term,
    shifted_gaussian_inverse_square,
    slater_gaussian,
)
from mphardy.verify import random_config, slater_centers

FAMILIES = {
    "gaussian": lambda: gaussian_product(3, 3, 1.3),
    "gaussian_shifted": lambda: gaussian_shifted(2, 3, [[0, 0], [1, 0.5], [-1, 2]], [1.0, 0.7, 1.4]),
    "sharpness2": lambda: sharpness_1d(2, 0.3),
    "sharpness4": lambda: sharpness_1d(4, 0.1),
    "slater1d": lambda: slater_gaussian(1, 3, slater_centers(3, 1)),
    "slater2d": lambda: slater_gaussian(2, 3, slater_centers(3, 2)),
    "slater3d": lambda: slater_gaussian(3, 2, slater_centers(2, 3)),
    "odd": lambda: odd_gaussian(3),
    "abmode": lambda: ab_mode(2, PowerExpProfile(2.0, 1.5)),
    "abplateau": lambda: ab_mode(-1, LogPlateauProfile(20.0, 1.0)),
}


class TestGradients:
    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_matches_finite_differences(self, name):
        u = FAMILIES[name]()
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            x = random_config(rng, u.count, u.dim, min_sep=0.05) if u.count > 1 else rng.standard_normal((1, u.dim))
            if u.name == "odd":
                x[0, 0] = math.copysign(max(abs(x[0, 0]), 0.05), x[0, 0])
            if u.name == "abmode":
                x = x * 2.0 + 0.05
            if abs(np.asarray(u.value(x))) < 1e-200:
                continue
            worst = max(worst, check_gradient(u, x))
        assert worst < 1e-6

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_log_density_and_kinetic_consistent(self, name):
        u = FAMILIES[name]()
        x = np.stack([u.init_config() + 0.01 * k for k in range(1, 4)]) if u.count == 1 else np.stack(
            [random_config(np.random.default_rng(k), u.count, u.dim, 0.1) for k in range(3)]
        )
        ld = u.log_density(x)
        np.testing.assert_allclose(ld, np.log(np.abs(u.value(x)) ** 2), rtol=1e-10, atol=1e-10)
        g = u.grad(x)
        v = np.asarray(u.value(x))
        kin = (np.abs(g) ** 2).sum(axis=(-1, -2)) / np.abs(v) ** 2
        np.testing.assert_allclose(u.local_kinetic(x), kin, rtol=1e-10)

    def test_grad_zero_on_nodal_set(self):
        u = sharpness_1d(3, 0.2)
        x = np.array([[0.5], [0.5], [-1.0]])
        assert u.value(x) == 0.0
        assert np.all(u.grad(x) == 0.0)
        assert u.log_density(x) == -np.inf

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            gaussian_product(3, 2).value(np.zeros((3, 3)))


class TestGaussians:
    @pytest.mark.parametrize("d,N", [(3, 2), (3, 3), (4, 5), (7, 2)])
    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_quotient(self, d, N, s):
        cf = gaussian_product(d, N, s).closed_forms
        assert cf["quotient"] == pytest.approx(d * (d - 2) / (N - 1), rel=1e-12)

    def test_one_particle_forms(self):
        cf = gaussian_product(3, 1).closed_forms
        assert cf["kinetic"] / cf["mass"] == pytest.approx(1.5)
        assert "quotient" not in cf

    def test_rescaled(self):
        u = gaussian_product(3, 3, 1.0)
        v = u.rescaled(2.0)
        assert v.s == 0.5
        ratio = (v.closed_forms["T"] / v.closed_forms["norm"]) / (u.closed_forms["T"] / u.closed_forms["norm"])
        assert ratio == pytest.approx(4.0)

    def test_sampler_moments(self):
        u = gaussian_product(3, 2, 1.5)
        x = u.sample(200_000, np.random.default_rng(1))
        assert x.var() == pytest.approx(1.5**2 / 2, rel=0.01)
        assert abs(x.mean()) < 0.01

    def test_mc_kinetic_matches_closed_form(self):
        u = gaussian_product(3, 3, 0.8)
        est = mc_mean(u.local_kinetic, u.sample, 100_000, seed=3)
        cf = u.closed_forms
        assert abs(est.sigma_distance(cf["T"] / cf["norm"])) < 4

    def test_inverse_square_oracle(self):
        # frozen from an independent two-dimensional scipy quadrature
        assert shifted_gaussian_inverse_square([1.0, 0.0, 0.0], 0.5) == pytest.approx(1.07615901382553, rel=1e-12)
        assert shifted_gaussian_inverse_square([0.0, 0.0, 0.0], 0.5) == pytest.approx(2.0)
        assert shifted_gaussian_inverse_square(np.zeros(5), 2.0) == pytest.approx(1 / 6)

    @given(st.floats(0.0, 5.0), st.floats(0.2, 3.0))
    def test_inverse_square_bounded_by_centred(self, m, var):
        # moving the mean away from the singularity can only lower the average
        value = shifted_gaussian_inverse_square([m, 0.0, 0.0], var)
        assert 0 < value <= 1.0 / var * (1 + 1e-12)

    def test_inverse_square_domain(self):
        with pytest.raises(DomainError):
            shifted_gaussian_inverse_square([1.0, 0.0], 1.0)
        with pytest.raises(DomainError):
            shifted_gaussian_inverse_square([1.0, 0.0, 0.0], 0.0)

    def test_shifted_reduces_to_product(self):
        a = gaussian_shifted(3, 3).closed_forms["quotient"]
        assert a == pytest.approx(gaussian_product(3, 3).closed_forms["quotient"], rel=1e-12)

    def test_shifted_mc_agrees(self):
        u = gaussian_shifted(3, 3, [[0, 0, 0], [1.5, 0, 0], [0, 1, 1]], [1.0, 0.8, 1.2])
        cf = u.closed_forms
        from mphardy.geometry import pair_density

        est = mc_mean(pair_density, u.sample, 200_000, seed=5)
        assert abs(est.sigma_distance(cf["X_normalized"])) < 4

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf])
    def test_bad_scale(self, bad):
        with pytest.raises(DomainError):
            gaussian_product(3, 2, bad)


class TestSharpness:
    def test_params(self):
        assert SharpnessParams(0.1).alpha == pytest.approx(0.35)
        for bad in (0.0, -0.1, math.nan):
            with pytest.raises(DomainError):
                SharpnessParams(bad)

    @pytest.mark.parametrize("delta", [0.05, 0.2, 1.0])
    def test_closed_forms(self, delta):
        cf = sharpness_1d(2, delta).closed_forms
        a = 0.25 + delta
        assert cf["quotient"] == pytest.approx(0.5 + 4 * delta)
        assert cf["beta"] == pytest.approx(1 - 1 / (16 * a * a))
        # upper end of the sandwich
        assert cf["quotient"] <= 8 * a * a * (1 + cf["beta"])

    def test_no_closed_form_beyond_two(self):
        assert sharpness_1d(3, 0.1).closed_forms == {}

    def test_metropolis_quotient_at_finite_variance_point(self):
        u = sharpness_1d(2, 0.75)
        from mphardy.functionals import hardy_quotient

        res = hardy_quotient(u, 200_000, seed=2)
        assert abs(res.quotient.sigma_distance(3.5)) < 4
        assert res.stderr < 0.05

    def test_sampler_is_metropolis(self):
        assert isinstance(sharpness_1d(2, 0.1).sampler(), MetropolisSampler)

    @given(st.integers(0, 10**6), st.integers(3, 7))
    def test_cross_term_cancels(self, seed, n):
        x = random_config(np.random.default_rng(seed), n, 1, min_sep=1e-3)
        total, scale = sharpness_cross_term(x, return_scale=True)
        assert abs(total) <= 1e-12 * scale

    def test_cross_term_batch_and_dims(self):
        x = np.random.default_rng(0).standard_normal((5, 4, 1))
        assert sharpness_cross_term(x).shape == (5,)
        with pytest.raises(ValueError):
            sharpness_cross_term(np.zeros((3, 2)))


class TestSlater:
    @pytest.mark.parametrize("d,N", [(1, 2), (1, 4), (2, 3), (3, 2), (3, 4)])
    def test_exchange_flips_sign_exactly(self, d, N):
        u = slater_gaussian(d, N, slater_centers(N, d))
        rng = np.random.default_rng(d * 10 + N)
        for _ in range(50):
            x = rng.standard_normal((N, d)) * 2
            a, b = rng.choice(N, 2, replace=False)
            y = x.copy()
            y[[a, b]] = y[[b, a]]
            assert u.value(y) == -u.value(x)

    def test_vanishes_at_coincidence(self):
        u = slater_gaussian(2, 2, slater_centers(2, 2))
        assert u.value(np.array([[0.3, 0.1], [0.3, 0.1]])) == 0.0

    def test_two_particle_closed_value(self):
        c = np.array([[-1.0], [1.0]])
        u = slater_gaussian(1, 2, c)
        x = np.array([[0.2], [-0.4]])
        phi = lambda t, ck: math.exp(-0.5 * (t - ck) ** 2)  # noqa: E731
        expected = phi(0.2, -1) * phi(-0.4, 1) - phi(0.2, 1) * phi(-0.4, -1)
        assert u.value(x) == pytest.approx(expected, rel=1e-12)

    def test_far_configuration_does_not_underflow_log(self):
        u = slater_gaussian(3, 2, slater_centers(2, 3))
        x = np.array([[40.0, 0, 0], [-40.0, 1, 0]])
        assert np.isfinite(u.log_density(x))

    def test_degenerate(self):
        with pytest.raises(DegenerateOrbitals):
            slater_gaussian(2, 2, [[0, 0], [0, 0]])
        with pytest.raises(ValueError):
            slater_gaussian(2, 3, [[0, 0], [1, 0]])


class TestOdd:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_closed_forms(self, d):
        cf = odd_gaussian(d).closed_forms
        assert cf["quotient"] == pytest.approx(d * (d + 2) / 4)
        assert cf["kinetic"] / cf["mass"] == pytest.approx((d + 2) / 2)

    def test_sampler_moment(self):
        x = odd_gaussian(3).sample(400_000, np.random.default_rng(0))
        assert (x[:, 0, 0] ** 2).mean() == pytest.approx(1.5, rel=0.01)
        assert (x[:, 0, 1] ** 2).mean() == pytest.approx(0.5, rel=0.01)
        assert abs(x[:, 0, 0].mean()) < 0.01

    def test_odd(self):
        u = odd_gaussian(4)
        x = np.random.default_rng(0).standard_normal((10, 1, 4))
        np.testing.assert_array_equal(u.value(-x), -u.value(x))

    def test_domain(self):
        with pytest.raises(ValueError):
            odd_gaussian(1)


class TestProfiles:
    @pytest.mark.parametrize("beta,gamma", [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)])
    def test_power_exp_ratio(self, beta, gamma):
        p = PowerExpProfile(beta, gamma)
        kin, mass = p.radial_integrals()
        assert kin / mass == pytest.approx(p.radial_ratio_exact(), rel=1e-9)

    @pytest.mark.parametrize("R,w", [(1.0, 1.0), (1e3, 0.5), (1e8, 2.0)])
    def test_plateau_ratio(self, R, w):
        p = LogPlateauProfile(R, w)
        kin, mass = p.radial_integrals()
        assert kin / mass == pytest.approx(p.radial_ratio_exact(), rel=1e-12)

    def test_plateau_shape(self):
        p = LogPlateauProfile(100.0, 1.0)
        r = np.array([0.1, 0.5, 1.0, 50.0, 100.0, 1000.0])
        np.testing.assert_allclose(p.f(r), [0.0, p.f(0.5), 1.0, 1.0, 1.0, 0.0])
        assert 0 < p.f(0.5) < 1

    def test_plateau_ratio_decreases(self):
        vals = [LogPlateauProfile(R).radial_ratio_exact() for R in (1e2, 1e4, 1e8)]
        assert vals[0] > vals[1] > vals[2]

    def test_bad_profiles(self):
        with pytest.raises(DomainError):
            PowerExpProfile(0.0)
        with pytest.raises(DomainError):
            LogPlateauProfile(0.5)
        with pytest.raises(DomainError):
            ab_mode(1, profile="flat")
        with pytest.raises(ValueError):
            ab_mode(1.5)

    def test_ab_mode_phase(self):
        u = ab_mode(3)
        v = u.value(np.array([[0.0, 2.0]]))
        assert v == pytest.approx(2 * math.exp(-2) * (1j) ** 3)
