import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mphardy.exceptions import CoincidentAtoms, DomainError
from mphardy.geometry import equilateral
from mphardy.optimize import (
    K_CONVENTION,
    WeightedMeasure,
    beta_delta,
    k_objective,
    maximize_K,
    minimize_quotient,
    sharpness_scan,
)

from .conftest import random_rotation


def circle(n):
    t = 2 * math.pi * np.arange(n) / n
    return np.c_[np.cos(t), np.sin(t)]


class TestMeasure:
    def test_validates(self):
        with pytest.raises(ValueError):
            WeightedMeasure([[0, 0], [1, 0]], [0.5, 0.6])
        with pytest.raises(ValueError):
            WeightedMeasure([[0, 0], [1, 0]], [1.0])
        with pytest.raises(ValueError):
            WeightedMeasure([[0, 0], [1, 0]], [1.5, -0.5])

    def test_from_logits(self):
        m = WeightedMeasure.from_logits(np.eye(3), [0.0, 0.0, math.log(2)])
        np.testing.assert_allclose(m.weights, [0.25, 0.25, 0.5])
        assert m.to_dict()["weights"] == pytest.approx([0.25, 0.25, 0.5])


class TestKObjective:
    def test_equilateral(self):
        assert abs(k_objective(WeightedMeasure.uniform(equilateral())) - 1.0) <= 1e-12

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 9, 16])
    def test_regular_polygon(self, n):
        # every triple has circumradius 1 and sum_k csc^2(pi k / n) = (n^2 - 1) / 3
        expected = 12 * (n - 2) / (n * (n + 1))
        assert k_objective(WeightedMeasure.uniform(circle(n))) == pytest.approx(expected, rel=1e-12)

    def test_collinear_and_small(self):
        assert k_objective(WeightedMeasure.uniform([[0.0], [1.0], [3.0]])) == 0.0
        assert k_objective(WeightedMeasure.uniform([[0.0, 0.0], [1.0, 1.0]])) == 0.0

    def test_coincident(self):
        with pytest.raises(CoincidentAtoms):
            k_objective(WeightedMeasure.uniform([[0, 0], [0, 0], [1, 0]]))

    @given(st.integers(0, 10**6), st.floats(0.01, 100), st.integers(3, 7))
    def test_invariances(self, seed, lam, n):
        rng = np.random.default_rng(seed)
        atoms = rng.standard_normal((n, 3))
        w = rng.dirichlet(np.ones(n))
        base = k_objective(WeightedMeasure(atoms, w))
        moved = lam * atoms @ random_rotation(rng, 3).T + rng.standard_normal(3)
        perm = rng.permutation(n)
        assert abs(k_objective(WeightedMeasure(moved, w)) - base) <= 1e-12 * max(1.0, base)
        assert abs(k_objective(WeightedMeasure(atoms[perm], w[perm])) - base) <= 1e-12 * max(1.0, base)


class TestMaximizeK:
    def test_three_atoms_reach_equilateral(self):
        res = maximize_K(2, 3, iters=400, restarts=4, seed=0)
        assert res.value >= 1 - 1e-6
        assert np.all(np.diff(res.trace) >= 0)
        assert len(res.trace) == 401
        assert res.to_dict()["convention"] == K_CONVENTION

    def test_value_is_feasible(self):
        res = maximize_K(2, 4, iters=100, restarts=2, seed=1)
        assert res.value == pytest.approx(k_objective(res.measure), rel=1e-12)
        assert res.restart_values[res.best_restart] == pytest.approx(res.value)

    def test_workers_do_not_change_result(self):
        a = maximize_K(3, 4, iters=50, restarts=3, seed=2, workers=1)
        b = maximize_K(3, 4, iters=50, restarts=3, seed=2, workers=3)
        assert a.value == b.value and a.best_restart == b.best_restart
        np.testing.assert_array_equal(a.measure.atoms, b.measure.atoms)

    def test_zero_iterations(self):
        res = maximize_K(2, 3, iters=0, restarts=1, seed=0)
        assert len(res.trace) == 1

    def test_rejects_two_atoms(self):
        with pytest.raises(ValueError):
            maximize_K(2, 2)


class TestSharpnessScan:
    def test_exact_beta(self):
        est = beta_delta(2, 0.75, n=100_000, seed=0)
        assert abs(est.sigma_distance(1 - 1 / 16)) < 4

    def test_rows(self):
        rows = sharpness_scan(2, (0.5, 0.75), n=50_000, seed=1)
        assert [r.delta for r in rows] == [0.5, 0.75]
        for r in rows:
            assert r.passed and r.lower == 0.5
            assert r.exact_quotient == pytest.approx(0.5 + 4 * r.delta)
            assert r.to_dict()["passed"]


class TestMinimizeQuotient:
    def test_gaussian_scale_free(self):
        best, res = minimize_quotient("gaussian", 3, 3, budget=30, seed=0)
        assert res.value == pytest.approx(1.5)
        assert res.method == "nelder_mead"

    def test_shifted_never_worse_than_start(self):
        best, res = minimize_quotient("gaussian_shifted", 3, 3, budget=60, seed=1)
        assert res.value <= res.extra["start_value"] + 1e-12
        assert len(best["centers"]) == 3

    def test_budget_zero_returns_start(self):
        best, res = minimize_quotient("gaussian_shifted", 3, 4, budget=0)
        assert res.value == pytest.approx(1.0)
        assert res.extra["evaluations"] == 1

    def test_sharpness_approaches_half(self):
        best, res = minimize_quotient("sharpness1d", 1, 2, budget=200)
        assert res.value < 0.5 + 0.01
        assert best["delta"] < 0.01

    def test_unknown_and_domain(self):
        with pytest.raises(ValueError):
            minimize_quotient("banana", 3, 2)
        with pytest.raises(DomainError):
            minimize_quotient("sharpness1d", 1, 3)
        with pytest.raises(DomainError):
            minimize_quotient("gaussian", 2, 3)
