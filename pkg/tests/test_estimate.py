import math

import numpy as np
import pytest

from mphardy.estimate import (
    MCEstimate,
    MetropolisSampler,
    chunk_generators,
    delta_method,
    mc_mean,
    mc_ratio,
    mean_and_cov,
    metropolis_sampler,
    near_coincidence,
    near_origin,
    sample_values,
)
from mphardy.exceptions import AllRejected, DenominatorNearZero, ZeroDensityInit
from mphardy.quadrature import exp_sinh, tanh_sinh, tensor_quadrature
from mphardy.trials import sharpness_1d


def normal_sampler(N=1, d=3):
    def draw(n, rng):
        return rng.standard_normal((n, N, d))

    return draw


def sq_norm(x):
    return np.einsum("...ij,...ij->...", x, x)


def gauss_log_density(x):
    return -0.5 * sq_norm(x)


class TestChunks:
    def test_sizes_cover_n(self):
        chunks = chunk_generators(3, 1000, 300)
        assert [s for s, _ in chunks] == [300, 300, 300, 100]

    def test_bad_chunk(self):
        with pytest.raises(ValueError):
            chunk_generators(0, 10, 0)


class TestMcMean:
    def test_constant_has_zero_error(self):
        est = mc_mean(lambda x: np.ones(x.shape[0]), normal_sampler(), 1000, seed=0)
        assert est.mean == 1.0 and est.stderr == 0.0

    @pytest.mark.parametrize("d", [1, 3, 6])
    def test_second_moment(self, d):
        est = mc_mean(sq_norm, normal_sampler(1, d), 200_000, seed=1)
        assert abs(est.sigma_distance(d)) < 4
        assert est.stderr == pytest.approx(math.sqrt(2 * d / 200_000), rel=0.05)

    def test_reproducible(self):
        a = mc_mean(sq_norm, normal_sampler(), 5000, seed=9, chunk_size=700)
        b = mc_mean(sq_norm, normal_sampler(), 5000, seed=9, chunk_size=700)
        assert a == b

    def test_workers_do_not_change_result(self):
        a = mc_mean(sq_norm, normal_sampler(), 20_000, seed=2, chunk_size=1000, workers=1)
        b = mc_mean(sq_norm, normal_sampler(), 20_000, seed=2, chunk_size=1000, workers=4)
        assert a == b

    def test_stderr_scales_like_inverse_sqrt(self):
        small = mc_mean(sq_norm, normal_sampler(), 10_000, seed=3)
        big = mc_mean(sq_norm, normal_sampler(), 160_000, seed=3)
        assert small.stderr / big.stderr == pytest.approx(4.0, rel=0.1)

    def test_all_rejected(self):
        with pytest.raises(AllRejected):
            mc_mean(sq_norm, normal_sampler(), 100, seed=0, singular=lambda x: np.ones(x.shape[0], bool))

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            mc_mean(sq_norm, normal_sampler(), 1, seed=0)

    def test_estimate_round_trip(self):
        est = MCEstimate(1.5, 0.1, 10, 4, 1)
        assert MCEstimate.from_dict(est.to_dict()) == est
        assert est.sigma_distance(1.0) == pytest.approx(5.0)
        assert MCEstimate(1.0, 0.0, 2, 0).sigma_distance(0.0) == math.inf


class TestRatio:
    def test_known_ratio(self):
        est = mc_ratio(lambda x: sq_norm(x) ** 2, sq_norm, normal_sampler(1, 3), 200_000, seed=4)
        # E|x|^4 / E|x|^2 = 15 / 3 in three dimensions
        assert abs(est.sigma_distance(5.0)) < 4

    def test_denominator_near_zero(self):
        with pytest.raises(DenominatorNearZero):
            mc_ratio(sq_norm, lambda x: x[:, 0, 0], normal_sampler(), 10_000, seed=0)

    def test_delta_method_linear(self):
        cov = np.array([[4.0, 0.0], [0.0, 9.0]])
        value, err = delta_method(np.array([1.0, 2.0]), cov, lambda m: m[0] + m[1], lambda m: np.ones(2))
        assert value == 3.0 and err == pytest.approx(math.sqrt(13.0))


class TestBatchMeans:
    def test_iid_labels_agree_with_plain(self, rng):
        v = rng.standard_normal((40_000, 2))
        labels = np.arange(v.shape[0]) % 200
        _, plain = mean_and_cov(v)
        _, batched = mean_and_cov(v, labels)
        np.testing.assert_allclose(np.diag(batched), np.diag(plain), rtol=0.3)

    def test_needs_two_chains(self):
        with pytest.raises(ValueError):
            mean_and_cov(np.ones((5, 1)), np.zeros(5))


class TestMetropolis:
    def test_standard_normal(self):
        s = metropolis_sampler(gauss_log_density, np.zeros((1, 2)), step=1.0, n_walkers=64)
        est = mc_mean(lambda x: x[:, 0, 0] ** 2, s, 100_000, seed=5, chunk_size=25_000)
        assert abs(est.mean - 1.0) < max(4 * est.stderr, 0.03)
        assert 0.1 < s.acceptance_rate < 0.9

    def test_zero_density_init(self):
        with pytest.raises(ZeroDensityInit):
            MetropolisSampler(lambda x: np.full(x.shape[0], -np.inf), np.zeros((2, 1)))

    @pytest.mark.parametrize("kwargs", [{"step": 0}, {"thinning": 0}, {"n_walkers": 1}, {"burn_in": -1}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            MetropolisSampler(gauss_log_density, np.zeros((2, 1)), **kwargs)

    def test_chain_labels(self):
        s = MetropolisSampler(gauss_log_density, np.zeros((2, 1)), n_walkers=8)
        assert list(s.chain_labels(10)) == [0, 1, 2, 3, 4, 5, 6, 7, 0, 1]

    def test_two_particle_inverse_square_matches_quadrature(self):
        # delta = 3/4 gives alpha = 1, where every moment used here is finite
        u = sharpness_1d(2, 0.75)
        a = u.alpha
        exact = 2.0 / ((4 * a + 1) * (4 * a - 1))

        # polar coordinates around the diagonal: |x1 - x2| = sqrt(2) rho |sin phi|
        def weight(p, power):
            rho, phi = p[:, 0], p[:, 1]
            r2 = 2.0 * rho**2 * np.sin(phi) ** 2
            return r2 ** (2 * a + power) * np.exp(-2 * rho) * rho

        grids = [exp_sinh(0.0, 3), tanh_sinh(0.0, math.pi, 3)]
        num = tensor_quadrature(lambda p: weight(p, -1), grids, rtol=1e-11)
        den = tensor_quadrature(lambda p: weight(p, 0), grids, rtol=1e-11)
        assert num / den == pytest.approx(exact, rel=1e-9)

        est = mc_mean(lambda x: 1.0 / sq_norm(x[:, :1] - x[:, 1:]), u.sampler(), 200_000, seed=11)
        assert abs(est.sigma_distance(num / den)) < 4


class TestMasks:
    def test_near_coincidence(self):
        x = np.array([[[0.0], [1.0], [3.0]], [[0.0], [1e-14], [3.0]]])
        assert list(near_coincidence(x)) == [False, True]
        assert not near_coincidence(np.zeros((3, 1, 2))).any()

    def test_near_origin(self):
        assert list(near_origin(np.array([[[0.0, 0.0]], [[1.0, 0.0]]]))) == [True, False]

    def test_sample_values_shapes(self):
        vals, labels, rejected = sample_values([sq_norm, sq_norm], normal_sampler(), 100, seed=0)
        assert vals.shape == (100, 2) and labels is None and rejected == 0
