"""Seeded Monte Carlo means, ratio estimators and a Metropolis sampler.

Randomness is organised in chunks. Chunk ``c`` of a run with seed ``s``
draws from ``Generator(Philox(SeedSequence(s).spawn(n_chunks)[c]))``, so a
result depends only on ``(seed, n, chunk_size)`` and never on how many
workers evaluate the chunks. Values are concatenated in chunk order before
any reduction.

A sampler is any callable ``sampler(n, rng) -> array (n, N, d)``. Samplers
that produce correlated draws (Markov chains) also expose
``chain_labels(n)``, an integer label per draw; errors are then computed
from per-chain batch means instead of the iid formula.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import AllRejected, DenominatorNearZero, ZeroDensityInit
from .geometry import pair_sq_distances

log = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 1 << 16
REJECT_RADIUS = 1e-12


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo mean with its standard error and provenance."""

    mean: float
    stderr: float
    n_samples: int
    seed: int
    n_rejected: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MCEstimate":
        return cls(**data)

    def sigma_distance(self, value: float) -> float:
        """Signed distance ``(mean - value) / stderr``; infinite when stderr is 0."""
        diff = self.mean - value
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr


# -- chunked evaluation -------------------------------------------------------


def chunk_generators(seed: int, n: int, chunk_size: int = DEFAULT_CHUNK_SIZE):
    """``[(size, Generator), ...]`` covering ``n`` draws in fixed order."""
    if chunk_size <= 0:
        raise ValueError("chunk_size must be positive")
    n_chunks = max(1, math.ceil(n / chunk_size))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [chunk_size] * (n_chunks - 1) + [n - chunk_size * (n_chunks - 1)]
    return [(size, np.random.Generator(np.random.Philox(child))) for size, child in zip(sizes, children)]


def near_coincidence(samples: np.ndarray, radius: float = REJECT_RADIUS) -> np.ndarray:
    """Mask of samples whose closest pair is within ``radius`` of coincidence.

    The radius is relative to the configuration diameter.
    """
    if samples.shape[-2] < 2:
        return np.zeros(samples.shape[:-2], dtype=bool)
    r2 = pair_sq_distances(samples)
    return r2.min(axis=-1) <= (radius**2) * r2.max(axis=-1)


def near_origin(samples: np.ndarray, radius: float = REJECT_RADIUS) -> np.ndarray:
    r2 = np.einsum("...ij,...ij->...", samples, samples)
    return r2 <= radius**2


def sample_values(
    integrands: Sequence[Callable[[np.ndarray], np.ndarray]],
    sampler,
    n: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    singular: Callable[[np.ndarray], np.ndarray] | None = near_coincidence,
):
    """Evaluate integrands on ``n`` sampler draws.

    Returns ``(values, labels, n_rejected)`` where ``values`` has one column
    per integrand and ``labels`` is ``None`` for iid samplers.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    chunks = chunk_generators(seed, n, chunk_size)
    has_labels = hasattr(sampler, "chain_labels")

    def run(job):
        index, (size, rng) = job
        x = sampler(size, rng)
        keep = np.ones(x.shape[0], dtype=bool) if singular is None else ~singular(x)
        kept = x[keep]
        if kept.shape[0]:
            vals = np.column_stack([np.asarray(f(kept), dtype=float).reshape(-1) for f in integrands])
        else:
            vals = np.zeros((0, len(integrands)))
        labels = None
        if has_labels:
            labels = np.asarray(sampler.chain_labels(size))[keep] + index * (1 << 20)
        return vals, labels, int(np.count_nonzero(~keep))

    jobs = list(enumerate(chunks))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    values = np.concatenate([p[0] for p in parts], axis=0)
    labels = np.concatenate([p[1] for p in parts]) if has_labels else None
    rejected = sum(p[2] for p in parts)
    if values.shape[0] == 0:
        raise AllRejected(f"all {n} samples fell on the singular set")
    return values, labels, rejected


def mean_and_cov(values: np.ndarray, labels: np.ndarray | None = None):
    """Column means and the covariance matrix of those means.

    With ``labels``, uses batch means over label groups (one group per
    Markov chain).
    """
    values = np.atleast_2d(values)
    n = values.shape[0]
    mean = values.mean(axis=0)
    if labels is None:
        if n < 2:
            return mean, np.zeros((values.shape[1], values.shape[1]))
        return mean, np.atleast_2d(np.cov(values, rowvar=False, ddof=1)) / n
    groups, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    b = groups.size
    if b < 2:
        raise ValueError("batch-means error needs at least two chains")
    sums = np.zeros((b, values.shape[1]))
    np.add.at(sums, inverse, values)
    dev = sums / counts[:, None] - mean
    w = counts / n
    cov = (b / (b - 1)) * np.einsum("b,bi,bj->ij", w**2, dev, dev)
    return mean, cov


def delta_method(mean: np.ndarray, cov: np.ndarray, fn, grad) -> tuple[float, float]:
    """First-order propagation of ``cov`` through ``fn(mean)``."""
    value = float(fn(mean))
    g = np.asarray(grad(mean), dtype=float)
    var = float(g @ cov @ g)
    return value, math.sqrt(max(var, 0.0))


def mc_mean(
    integrand,
    sampler,
    n: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    singular=near_coincidence,
) -> MCEstimate:
    """Mean of ``integrand`` under ``sampler`` with its standard error."""
    values, labels, rejected = sample_values([integrand], sampler, n, seed, chunk_size, workers, singular)
    mean, cov = mean_and_cov(values, labels)
    return MCEstimate(float(mean[0]), math.sqrt(max(cov[0, 0], 0.0)), values.shape[0], seed, rejected)


def ratio_estimate(values: np.ndarray, labels, seed: int, rejected: int) -> MCEstimate:
    """Delta-method ratio of the means of columns 0 and 1 of ``values``."""
    mean, cov = mean_and_cov(values[:, :2], labels)
    num, den = mean
    den_err = math.sqrt(max(cov[1, 1], 0.0))
    if den == 0 or abs(den) < 5.0 * den_err:
        raise DenominatorNearZero(f"denominator mean {den:g} within 5 sigma ({den_err:g}) of zero")
    value, err = delta_method(
        mean, cov, lambda m: m[0] / m[1], lambda m: np.array([1.0 / m[1], -m[0] / m[1] ** 2])
    )
    return MCEstimate(value, err, values.shape[0], seed, rejected)


def mc_ratio(
    numerator,
    denominator,
    sampler,
    n: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    singular=near_coincidence,
) -> MCEstimate:
    """``E[numerator] / E[denominator]`` on shared samples."""
    values, labels, rejected = sample_values(
        [numerator, denominator], sampler, n, seed, chunk_size, workers, singular
    )
    return ratio_estimate(values, labels, seed, rejected)


# -- Metropolis ---------------------------------------------------------------


class MetropolisSampler:
    """Random-walk Metropolis over configurations, vectorised across walkers.

    Each call runs ``n_walkers`` independent chains from jittered copies of
    ``init``: ``burn_in`` steps (with step-size adaptation when ``tune`` is
    set), then one saved state every ``thinning`` steps. Draws are returned
    step-major, so ``chain_labels`` is ``arange(n) % n_walkers``.

    Proposals that land where the log-density is ``-inf`` (coincidence
    planes, nodal sets) are always rejected.
    """

    def __init__(
        self,
        log_density: Callable[[np.ndarray], np.ndarray],
        init,
        step: float = 0.5,
        burn_in: int = 400,
        thinning: int = 5,
        n_walkers: int = 256,
        target_accept: float = 0.4,
        tune: bool = True,
    ):
        init = np.asarray(getattr(init, "coords", init), dtype=float)
        if init.ndim == 1:
            init = init[:, None]
        lp0 = np.asarray(log_density(init[None]))[0]
        if not np.isfinite(lp0):
            raise ZeroDensityInit("log density is not finite at the initial configuration")
        if step <= 0 or thinning < 1 or n_walkers < 2 or burn_in < 0:
            raise ValueError("invalid Metropolis parameters")
        self.log_density = log_density
        self.init = init
        self.step = float(step)
        self.burn_in = int(burn_in)
        self.thinning = int(thinning)
        self.n_walkers = int(n_walkers)
        self.target_accept = float(target_accept)
        self.tune = tune
        self.history: list[tuple[float, float]] = []

    def chain_labels(self, n: int) -> np.ndarray:
        return np.arange(n) % min(self.n_walkers, n)

    def _step(self, x, lp, step, rng):
        prop = x + step * rng.standard_normal(x.shape)
        lp_prop = np.asarray(self.log_density(prop), dtype=float)
        log_u = np.log(rng.random(x.shape[0]))
        accept = np.isfinite(lp_prop) & (log_u < lp_prop - lp)
        x = np.where(accept[:, None, None], prop, x)
        lp = np.where(accept, lp_prop, lp)
        return x, lp, accept

    def __call__(self, n: int, rng: np.random.Generator) -> np.ndarray:
        w = min(self.n_walkers, n)
        step = self.step
        x = self.init[None] + 0.1 * step * rng.standard_normal((w,) + self.init.shape)
        lp = np.asarray(self.log_density(x), dtype=float)
        bad = ~np.isfinite(lp)
        x[bad] = self.init
        lp[bad] = np.asarray(self.log_density(self.init[None]))[0]

        adapt_until = int(0.8 * self.burn_in) if self.tune else 0
        for t in range(self.burn_in):
            x, lp, acc = self._step(x, lp, step, rng)
            if t < adapt_until:
                step *= math.exp(0.5 * (acc.mean() - self.target_accept))

        rows = math.ceil(n / w)
        out = np.empty((rows, w) + self.init.shape)
        accepted = 0
        for r in range(rows):
            for _ in range(self.thinning):
                x, lp, acc = self._step(x, lp, step, rng)
                accepted += int(acc.sum())
            out[r] = x
        rate = accepted / (rows * self.thinning * w)
        self.history.append((step, rate))
        log.debug("metropolis: step=%.4g acceptance=%.3f walkers=%d", step, rate, w)
        return out.reshape((-1,) + self.init.shape)[:n]

    @property
    def acceptance_rate(self) -> float | None:
        return self.history[-1][1] if self.history else None


def metropolis_sampler(log_density, init, step=0.5, burn_in=400, thinning=5, **kwargs):
    """Build a :class:`MetropolisSampler`; the random stream is supplied per call."""
    return MetropolisSampler(log_density, init, step=step, burn_in=burn_in, thinning=thinning, **kwargs)
