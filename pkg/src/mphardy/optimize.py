"""Searches over measures and trial parameters.

* :func:`maximize_K` looks for atomic probability measures with a large
  ratio of integrated squared Menger curvature to pair energy. Every value
  it reports is the objective at an explicit measure, hence a lower bound
  on the supremum.
* :func:`sharpness_scan` and :func:`beta_delta` follow the one-dimensional
  family as ``delta -> 0``.
* :func:`minimize_quotient` tightens variational upper bounds by a
  Nelder-Mead search over trial parameters.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._validation import check_positive_int
from .estimate import DEFAULT_CHUNK_SIZE, MCEstimate, mean_and_cov, sample_values
from .exceptions import CoincidentAtoms, DomainError
from .functionals import QuotientResult, exact_quotient
from .geometry import (
    _inv_circum_sq_from_sides,
    pair_density,
    pair_indices,
    pair_sq_distances,
    triple_indices,
)
from .trials import SharpnessParams, gaussian_product, gaussian_shifted, sharpness_1d

# documented defaults for the K search
K_ITERS = 2000
K_RESTARTS = 8
K_INIT_STEP = 0.1
FD_REL_STEP = 1e-6

# metadata attached to every K report
K_CONVENTION = "triples with a repeated atom contribute 0 (infinite circumradius)"

__all__ = [
    "KResult",
    "SharpnessRow",
    "WeightedMeasure",
    "beta_delta",
    "k_objective",
    "maximize_K",
    "minimize_quotient",
    "sharpness_scan",
]


@dataclass(frozen=True)
class WeightedMeasure:
    """Atoms in ``R^d`` with nonnegative weights summing to one."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        w = np.array(self.weights, dtype=float).reshape(-1)
        if atoms.ndim != 2 or atoms.shape[0] != w.size:
            raise ValueError("atoms must be (n, d) with one weight per atom")
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(w))):
            raise ValueError("atoms and weights must be finite")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        atoms.setflags(write=False)
        w = w / w.sum()
        w.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_logits(cls, atoms, logits) -> "WeightedMeasure":
        z = np.asarray(logits, dtype=float)
        e = np.exp(z - z.max())
        return cls(atoms, e / e.sum())

    @classmethod
    def uniform(cls, atoms) -> "WeightedMeasure":
        n = np.asarray(atoms).shape[0]
        return cls(atoms, np.full(n, 1.0 / n))

    def to_dict(self) -> dict:
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}


def _k_batch(atoms: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """K objective for stacks ``atoms (B, n, d)`` and ``weights (B, n)``."""
    n = atoms.shape[-2]
    r2 = pair_sq_distances(atoms)
    if np.any(r2 == 0):
        raise CoincidentAtoms("two atoms share a position")
    i, j = pair_indices(n)
    den = 2.0 * (weights[..., i] * weights[..., j] / r2).sum(axis=-1)
    a, b, c = triple_indices(n)
    if a.size == 0:
        return np.zeros(atoms.shape[:-2])
    # side lengths from the pair table: pair (p, q) sits at p*n - p(p+1)/2 + q - p - 1
    def pos(p, q):
        return p * n - p * (p + 1) // 2 + q - p - 1

    inv_r2 = _inv_circum_sq_from_sides(r2[..., pos(b, c)], r2[..., pos(a, c)], r2[..., pos(a, b)])
    num = 6.0 * (weights[..., a] * weights[..., b] * weights[..., c] * inv_r2).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / den, 0.0)
    return out


def k_objective(measure: WeightedMeasure) -> float:
    """``sum_{i,j,k} w_i w_j w_k R_ijk^-2 / sum_{i != j} w_i w_j r_ij^-2`` over ordered indices.

    Triples with a repeated index contribute 0. The value is invariant
    under scaling, rigid motions and relabelling, is zero for collinear
    atoms and for fewer than three atoms.

    Examples
    --------
    >>> from mphardy.geometry import equilateral
    >>> round(k_objective(WeightedMeasure.uniform(equilateral())), 12)
    1.0
    """
    return float(_k_batch(measure.atoms[None], measure.weights[None])[0])


# -- K maximisation -----------------------------------------------------------


@dataclass(frozen=True)
class KResult:
    """Best measure found, its objective value and the best-so-far trace."""

    measure: WeightedMeasure
    value: float
    trace: list
    restart_values: list
    best_restart: int
    seed: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "measure": self.measure.to_dict(),
            "trace": list(self.trace),
            "restart_values": list(self.restart_values),
            "best_restart": self.best_restart,
            "seed": self.seed,
            "params": dict(self.params),
            "convention": K_CONVENTION,
        }


def _normalize(theta: np.ndarray, n: int, d: int) -> np.ndarray:
    x = theta[: n * d].reshape(n, d)
    x = x - x.mean(axis=0)
    rms = math.sqrt(float((x * x).sum()) / n)
    if rms > 0:
        x = x / rms
    z = theta[n * d :]
    return np.concatenate([x.ravel(), z - z.max()])


def _objective_batch(thetas: np.ndarray, n: int, d: int) -> np.ndarray:
    atoms = thetas[:, : n * d].reshape(-1, n, d)
    z = thetas[:, n * d :]
    w = np.exp(z - z.max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    try:
        return _k_batch(atoms, w)
    except CoincidentAtoms:
        # evaluate one by one so only the degenerate rows are penalised
        out = np.empty(thetas.shape[0])
        for b in range(thetas.shape[0]):
            try:
                out[b] = _k_batch(atoms[b : b + 1], w[b : b + 1])[0]
            except CoincidentAtoms:
                out[b] = -math.inf
        return out


def _fd_gradient(theta: np.ndarray, n: int, d: int) -> np.ndarray:
    h = FD_REL_STEP * np.maximum(1.0, np.abs(theta))
    eye = np.diag(h)
    vals = _objective_batch(np.concatenate([theta + eye, theta - eye]), n, d)
    m = theta.size
    g = (vals[:m] - vals[m:]) / (2.0 * h)
    return np.where(np.isfinite(g), g, 0.0)


def _ascend(theta: np.ndarray, n: int, d: int, iters: int) -> tuple[np.ndarray, float, list]:
    theta = _normalize(theta, n, d)
    value = float(_objective_batch(theta[None], n, d)[0])
    step = K_INIT_STEP
    trace = [value]
    for _ in range(iters):
        if step < 1e-14:
            # converged; keep the trace length equal to iters + 1
            trace.append(value)
            continue
        g = _fd_gradient(theta, n, d)
        gn = float(np.linalg.norm(g))
        if gn == 0:
            step = 0.0
            trace.append(value)
            continue
        while step >= 1e-14:
            cand = _normalize(theta + step * g / gn, n, d)
            v = float(_objective_batch(cand[None], n, d)[0])
            if v > value:
                theta, value = cand, v
                step *= 1.5
                break
            step *= 0.5
        trace.append(value)
    return theta, value, trace


def maximize_K(
    d: int,
    n_atoms: int,
    iters: int = K_ITERS,
    restarts: int = K_RESTARTS,
    seed: int = 0,
    workers: int = 1,
) -> KResult:
    """Gradient ascent on atom positions and softmax weight logits.

    Each restart starts from Gaussian atoms and logits drawn from its own
    substream of ``seed``; gradients are central differences with step
    ``1e-6`` relative. The best restart wins, ties going to the lower
    restart index, so the result does not depend on ``workers``.
    """
    d = check_positive_int(d, "d")
    n = check_positive_int(n_atoms, "n_atoms", minimum=3)
    restarts = check_positive_int(restarts, "restarts")
    iters = check_positive_int(iters, "iters", minimum=0)
    streams = np.random.SeedSequence(seed).spawn(restarts)

    def run(ss):
        rng = np.random.Generator(np.random.Philox(ss))
        theta = np.concatenate([rng.standard_normal(n * d), 0.1 * rng.standard_normal(n)])
        return _ascend(theta, n, d, iters)

    if workers > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, streams))
    else:
        runs = [run(ss) for ss in streams]
    values = [r[1] for r in runs]
    best = max(range(restarts), key=lambda k: (values[k], -k))
    theta, value, trace = runs[best]
    measure = WeightedMeasure.from_logits(theta[: n * d].reshape(n, d), theta[n * d :])
    params = {"d": d, "n_atoms": n, "iters": iters, "restarts": restarts}
    return KResult(measure, float(k_objective(measure)), trace, values, best, seed, params)


# -- one-dimensional sharpness ------------------------------------------------


def beta_delta(
    N: int,
    delta: float,
    n: int = 200_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    sampler=None,
) -> MCEstimate:
    """``beta = 1 / (8 alpha^2 E[sum_{i<j} r_ij^-2])`` under the ``v^2`` density."""
    row = _sharpness_row(N, delta, n, seed, chunk_size, sampler)
    return row.beta


@dataclass(frozen=True)
class SharpnessRow:
    """One point of the sharpness scan: the sandwich ``1/2 <= Q <= 8 alpha^2 (1 + beta)``."""

    delta: float
    alpha: float
    quotient: MCEstimate
    beta: MCEstimate
    upper: MCEstimate
    lower: float = 0.5
    exact_quotient: float | None = None

    @property
    def lower_ok(self) -> bool:
        return bool(self.quotient.mean >= self.lower - 3.0 * self.quotient.stderr)

    @property
    def upper_ok(self) -> bool:
        return bool(self.quotient.mean <= self.upper.mean + 3.0 * self.quotient.stderr)

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "alpha": self.alpha,
            "quotient": self.quotient.to_dict(),
            "beta": self.beta.to_dict(),
            "upper": self.upper.to_dict(),
            "lower": self.lower,
            "exact_quotient": self.exact_quotient,
            "passed": self.passed,
        }


def _sharpness_row(N, delta, n, seed, chunk_size, sampler=None) -> SharpnessRow:
    u = sharpness_1d(N, SharpnessParams(delta))
    a2 = 8.0 * u.alpha**2
    sampler = u.sampler() if sampler is None else sampler
    values, labels, rejected = sample_values([u.local_kinetic, pair_density], sampler, n, seed, chunk_size)
    mean, cov = mean_and_cov(values, labels)
    kept = values.shape[0]
    t, x = mean
    vt, vx, ctx = cov[0, 0], cov[1, 1], cov[0, 1]
    q = t / x
    q_err = math.sqrt(max(vt / x**2 - 2 * t * ctx / x**3 + t * t * vx / x**4, 0.0))
    beta = 1.0 / (a2 * x)
    beta_err = math.sqrt(max(vx, 0.0)) / (a2 * x * x)
    upper = a2 * (1.0 + beta)
    return SharpnessRow(
        delta,
        u.alpha,
        MCEstimate(q, q_err, kept, seed, rejected),
        MCEstimate(beta, beta_err, kept, seed, rejected),
        MCEstimate(upper, a2 * beta_err, kept, seed, rejected),
        exact_quotient=u.closed_forms.get("quotient"),
    )


def sharpness_scan(
    N: int = 2,
    deltas=(0.2, 0.1, 0.05),
    n: int = 200_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> list[SharpnessRow]:
    """Quotient, ``beta`` and the upper bound for each ``delta`` on shared Metropolis samples."""
    return [_sharpness_row(N, float(dl), n, seed, chunk_size) for dl in deltas]


# -- quotient minimisation ----------------------------------------------------

QUOTIENT_FAMILIES = ("gaussian", "gaussian_shifted", "sharpness1d")


def _family_setup(family: str, d: int, N: int):
    """``(x0, build(params) -> trial, describe(params) -> dict)`` for a family."""
    if family == "gaussian":
        return (
            np.zeros(1),
            lambda p: gaussian_product(d, N, math.exp(p[0])),
            lambda p: {"s": math.exp(p[0])},
        )
    if family == "gaussian_shifted":
        def split(p):
            return p[: N * d].reshape(N, d), np.exp(p[N * d :])

        return (
            np.zeros(N * d + N),
            lambda p: gaussian_shifted(d, N, *split(p)),
            lambda p: {"centers": split(p)[0].tolist(), "scales": split(p)[1].tolist()},
        )
    if family == "sharpness1d":
        if d != 1 or N != 2:
            raise DomainError("sharpness1d has a closed-form quotient only for d = 1, N = 2")
        return (
            np.array([math.log(0.25)]),
            lambda p: sharpness_1d(2, math.exp(p[0])),
            lambda p: {"delta": math.exp(p[0])},
        )
    raise ValueError(f"unknown family {family!r}; expected one of {QUOTIENT_FAMILIES}")


def minimize_quotient(
    family: str,
    d: int,
    N: int,
    budget: int = 200,
    seed: int = 0,
) -> tuple[dict, QuotientResult]:
    """Nelder-Mead search over a family's parameters for the smallest exact quotient.

    The search starts at the isotropic point (unit scale, centred; for
    ``sharpness1d`` at ``delta = 1/4``) with a seeded random initial
    simplex, and never returns anything worse than the starting point.
    ``budget`` caps objective evaluations; ``budget = 0`` returns the start.
    """
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N", minimum=2)
    x0, build, describe = _family_setup(family, d, N)

    def objective(p):
        try:
            res = exact_quotient(build(p))
        except (DomainError, ValueError, OverflowError):
            return math.inf
        return math.inf if res is None else res.value

    start_value = objective(x0)
    if not math.isfinite(start_value):
        raise DomainError(f"{family} has no closed-form quotient at d={d}, N={N}")
    best_p, best_v = x0, start_value
    evals = 1
    if budget > 0:
        rng = np.random.default_rng(seed)
        simplex = np.vstack([x0, x0 + 0.3 * rng.standard_normal((x0.size, x0.size))])
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": budget, "initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-12},
        )
        evals += int(res.nfev)
        if res.fun < best_v:
            best_p, best_v = np.asarray(res.x), float(res.fun)
    result = exact_quotient(build(best_p))
    result = QuotientResult(
        result.quotient,
        result.T,
        result.X,
        result.Z,
        result.bound_name,
        result.bound_value,
        result.margin_sigma,
        "nelder_mead",
        {**result.extra, "start_value": start_value, "evaluations": evals, "seed": seed},
    )
    return describe(best_p), result
