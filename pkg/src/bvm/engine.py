"""Probability-of-agreement estimators.

The central quantity is P(A | M, D): the expectation of the agreement
kernel over the joint uncertainty of the model and data comparison
values. It is estimated here by plain Monte Carlo over chunked,
seed-deterministic streams, or computed exactly as a weighted double sum
over discretised value grids. The module also carries the comparison
value density, the agreement-ratio constructs used for model selection,
and the (gamma, eps) sweep machinery with the precomputation that keeps
large sweeps cheap.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .agreement import AgreementRule, GammaEpsilon
from .comparison import ComparisonFn, get_comparison_fn
from .distributions import DiracDelta, Distribution, IndependentProduct, Normal, PushForward
from .models import InputGrid, ModelFunction
from .rng import CHUNK_SIZE, DATA_STREAM, MODEL_STREAM, num_chunks

__all__ = [
    "EstimationError",
    "Scenario",
    "BvmEstimate",
    "ComparisonDensity",
    "SweepGrid",
    "SweepTemplate",
    "RatioResult",
    "estimate_bvm_mc",
    "estimate_bvm_grid",
    "comparison_density",
    "bvm_from_density",
    "bvm_factor",
    "bvm_ratio",
    "sweep",
    "ratio_grid",
    "averaged_boolean_ratio",
    "discretize_distribution",
]


class EstimationError(Exception):
    """An estimator could not run on its inputs."""


def _max_workers() -> int:
    try:
        return max(1, int(os.environ.get("BVM_THREADS", "1")))
    except ValueError:
        return 1


def _ordered_chunk_map(fn: Callable[[int], tuple], n_chunks: int) -> list:
    """Apply fn to each chunk index, returning results in index order.

    Chunk results are pure functions of their index, so any scheduling of
    the work reproduces the single-threaded answer bit for bit.
    """
    workers = _max_workers()
    if workers == 1 or n_chunks == 1:
        return [fn(c) for c in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_chunks)))


@dataclass(frozen=True)
class Scenario:
    """The four inputs bundled: model and data value distributions, the
    comparison embedded in the rule, and the agreement rule itself.

    ``joint_sampler(seed, n)``, when given, overrides the independent
    marginals to supply correlated (model, data) value pairs.
    """

    model_dist: Distribution
    data_dist: Distribution
    rule: AgreementRule
    joint_sampler: Callable | None = None

    def draw_pairs(self, seed: int, n: int):
        if self.joint_sampler is not None:
            return self.joint_sampler(seed, n)
        zhat = self.model_dist.sample(seed, n, stream=MODEL_STREAM)
        z = self.data_dist.sample(seed, n, stream=DATA_STREAM)
        return zhat, z


@dataclass(frozen=True)
class BvmEstimate:
    """Estimated P(A|M,D) with its uncertainty and provenance."""

    p_hat: float
    std_error: float
    n_samples: int
    seed: int
    method: str

    def __post_init__(self):
        if not -1e-12 <= self.p_hat <= 1.0 + 1e-12:
            raise ValueError("estimate escaped [0, 1]")
        object.__setattr__(self, "p_hat", float(min(1.0, max(0.0, self.p_hat))))


@dataclass(frozen=True)
class ComparisonDensity:
    """Histogram of the comparison value under joint model/data uncertainty."""

    bin_edges: np.ndarray
    masses: np.ndarray
    n_samples: int

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-9:
            raise ValueError("masses must be nonnegative and sum to 1 within 1e-9")
        object.__setattr__(self, "bin_edges", np.asarray(self.bin_edges, dtype=float))
        object.__setattr__(self, "masses", masses)

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def estimate_bvm_mc(scenario: Scenario, k: int, seed: int) -> BvmEstimate:
    """Monte Carlo estimate over k independent (model, data) value pairs.

    Deterministic for fixed (seed, k) regardless of BVM_THREADS: sampling
    is chunk-keyed and per-chunk kernel sums are combined in index order.
    """
    if k < 1:
        raise EstimationError("sample count must be at least 1")
    zhat, z = scenario.draw_pairs(seed, k)

    def chunk_sums(c: int):
        sl = slice(c * CHUNK_SIZE, min((c + 1) * CHUNK_SIZE, k))
        w = np.asarray(scenario.rule.kernel_many(zhat[sl], z[sl]), dtype=float)
        if w.min() < -1e-12 or w.max() > 1.0 + 1e-12:
            raise EstimationError("kernel weight escaped [0, 1]")
        return float(np.sum(w)), float(np.sum(w * w))

    sums = _ordered_chunk_map(chunk_sums, num_chunks(k))
    total = sum(s for s, _ in sums)
    total_sq = sum(s2 for _, s2 in sums)
    p = total / k
    if scenario.rule.is_soft:
        var = max(0.0, total_sq / k - p * p)
        se = float(np.sqrt(var / k))
    else:
        se = float(np.sqrt(max(0.0, p * (1.0 - p)) / k))
    return BvmEstimate(p_hat=p, std_error=se, n_samples=k, seed=seed, method="mc")


def _check_weights(weights, label: str) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise EstimationError(f"{label} weights must be nonnegative and sum to 1 within 1e-9")
    return w


def estimate_bvm_grid(scenario: Scenario, model_grid, data_grid) -> BvmEstimate:
    """Exact double sum over weighted value lists.

    Each grid is ``(values, weights)``; a certain data path is the
    one-element grid with weight 1.
    """
    model_values, model_weights = model_grid
    data_values, data_weights = data_grid
    wm = _check_weights(model_weights, "model grid")
    wd = _check_weights(data_weights, "data grid")
    model_values = list(model_values) if not isinstance(model_values, np.ndarray) else model_values
    total = 0.0
    for zv, wz in zip(data_values, wd):
        if wz == 0.0:
            continue
        batch_z = _broadcast_value(zv, len(model_values))
        w = np.asarray(scenario.rule.kernel_many(model_values, batch_z), dtype=float)
        total += wz * float(np.dot(wm, w))
    p = min(1.0, max(0.0, total))
    return BvmEstimate(p_hat=p, std_error=0.0, n_samples=len(model_values) * len(data_values), seed=0, method="grid")


def _broadcast_value(value, n: int):
    arr = np.asarray(value)
    if arr.ndim == 0:
        dtype = float if arr.dtype.kind in "fiub" else object
        return np.full(n, value, dtype=dtype)
    if arr.dtype == object:
        return np.full(n, value, dtype=object)
    return np.tile(arr, (n, 1))


def comparison_density(
    scenario: Scenario,
    fn: ComparisonFn | str,
    k: int,
    bins: int,
    seed: int,
) -> ComparisonDensity:
    """Histogram of f(model value, data value) over k sampled pairs."""
    if k < bins:
        raise EstimationError("need at least as many samples as bins")
    fn = fn if isinstance(fn, ComparisonFn) else get_comparison_fn(fn)
    zhat, z = scenario.draw_pairs(seed, k)
    f = np.asarray(fn.on_batch(zhat, z), dtype=float).ravel()
    lo, hi = float(f.min()), float(f.max())
    if not hi > lo:
        # Degenerate spread: a single bin pinned around the observed value.
        pad = max(1e-12, abs(lo) * 1e-12)
        edges = np.linspace(lo - pad, hi + pad, bins + 1)
    else:
        edges = np.linspace(lo, hi, bins + 1)
    counts, edges = np.histogram(f, bins=edges)
    return ComparisonDensity(bin_edges=edges, masses=counts / k, n_samples=k)


def bvm_from_density(density: ComparisonDensity, rule: AgreementRule) -> float:
    """Accumulate bin mass through a rule defined on the comparison value.

    The rule must read the value itself (an 'identity' comparison);
    kernels are evaluated at bin midpoints.
    """
    mids = density.midpoints()
    w = np.asarray(rule.kernel_many(mids, mids), dtype=float)
    return float(np.dot(density.masses, w))


# ---------------------------------------------------------------------------
# Ratios


@dataclass(frozen=True)
class RatioResult:
    """A ratio of agreement probabilities with explicit degenerate states.

    ``status`` is 'ok', 'indeterminate' (0/0) or 'infinite' (x/0, x > 0);
    ``value`` is None unless status is 'ok'.
    """

    status: str
    value: float | None

    @classmethod
    def of(cls, num: float, den: float) -> "RatioResult":
        if den == 0.0 and num == 0.0:
            return cls("indeterminate", None)
        if den == 0.0:
            return cls("infinite", None)
        return cls("ok", num / den)

    def scaled(self, factor: float) -> "RatioResult":
        if self.status != "ok":
            return self
        return RatioResult("ok", self.value * factor)


def _p_of(est) -> float:
    return est.p_hat if isinstance(est, BvmEstimate) else float(est)


def bvm_factor(p_agree: BvmEstimate | float, p_agree_other: BvmEstimate | float) -> RatioResult:
    """Ratio of two agreement probabilities under the same rule."""
    return RatioResult.of(_p_of(p_agree), _p_of(p_agree_other))


def bvm_ratio(factor: RatioResult, prior_m: float, prior_m_other: float) -> RatioResult:
    """Factor times prior odds; equals the factor under equal priors."""
    if prior_m <= 0 or prior_m_other <= 0:
        raise ValueError("model priors must be positive")
    return factor.scaled(prior_m / prior_m_other)


# ---------------------------------------------------------------------------
# (gamma, eps) sweeps


@dataclass(frozen=True)
class SweepGrid:
    """P(agree) over the (gamma, eps) axis product; shape (len(gammas), len(epsilons))."""

    gammas: np.ndarray
    epsilons: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        e = np.asarray(self.epsilons, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (g.size, e.size):
            raise ValueError("values must have shape (len(gammas), len(epsilons))")
        if v.size and (v.min() < -1e-12 or v.max() > 1 + 1e-12):
            raise ValueError("sweep entries must lie in [0, 1]")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "epsilons", e)
        object.__setattr__(self, "values", np.clip(v, 0.0, 1.0))

    def total(self) -> float:
        return float(self.values.sum())


@dataclass(frozen=True)
class SweepTemplate:
    """Everything a sweep needs except the (gamma, eps) axes: the model,
    its parameter prior, the comparison grid, the certain data path, and
    the worst-point multiplier m.
    """

    model: ModelFunction
    prior: Distribution
    grid: InputGrid
    data_path: np.ndarray
    grid_points_per_param: int = 20
    span_sigmas: float = 3.0

    def __post_init__(self):
        object.__setattr__(self, "data_path", np.asarray(self.data_path, dtype=float))
        if self.data_path.shape != (len(self.grid),):
            raise ValueError("data path length must match the grid")


def discretize_distribution(dist: Distribution, n: int, span_sigmas: float = 3.0):
    """Weighted support points for a scalar prior component.

    Normals become n equally spaced points over mean +/- span_sigmas
    standard deviations with renormalised Gaussian weights; point masses
    stay a single certain value.
    """
    if isinstance(dist, DiracDelta):
        dist._require_scalar()
        return np.asarray([float(dist.value)]), np.asarray([1.0])
    if isinstance(dist, Normal):
        xs = np.linspace(dist.mean - span_sigmas * dist.std, dist.mean + span_sigmas * dist.std, n)
        w = np.exp(-0.5 * ((xs - dist.mean) / dist.std) ** 2)
        return xs, w / w.sum()
    raise EstimationError(f"no grid discretisation for {type(dist).__name__}")


def weighted_paths(template: SweepTemplate, estimator: str, k: int = 10_000, seed: int = 0):
    """Model output paths with weights under the requested estimator."""
    if estimator == "grid":
        if isinstance(template.prior, IndependentProduct):
            comps = template.prior.components
        else:
            comps = (template.prior,)
        supports = [
            discretize_distribution(c, template.grid_points_per_param, template.span_sigmas)
            for c in comps
        ]
        mesh = np.meshgrid(*[s[0] for s in supports], indexing="ij")
        params = np.column_stack([m.ravel() for m in mesh])
        weight_mesh = np.meshgrid(*[s[1] for s in supports], indexing="ij")
        weights = np.ones(params.shape[0])
        for wm in weight_mesh:
            weights = weights * wm.ravel()
        weights = weights / weights.sum()
        paths = template.model.evaluate(params, template.grid)
        return paths, weights
    if estimator == "mc":
        pf = PushForward(template.prior, template.model, template.grid)
        paths = pf.sample(seed, k, stream=MODEL_STREAM)
        return paths, np.full(k, 1.0 / k)
    raise EstimationError(f"unknown sweep estimator '{estimator}'")


def sweep(
    template: SweepTemplate,
    gammas,
    epsilons,
    m: float,
    estimator: str = "grid",
    k: int = 10_000,
    seed: int = 0,
) -> SweepGrid:
    """P(agree) under the (gamma, eps) rule at every axis combination.

    The per-path absolute errors against the data path are sorted once;
    each eps column then costs one pass of counting and a weighted
    histogram, and every gamma row reads the same tail sums. This is what
    makes path ensembles in the 10^5 range sweepable in seconds.
    """
    gammas = np.asarray(gammas, dtype=float)
    epsilons = np.asarray(epsilons, dtype=float)
    if gammas.size == 0 or epsilons.size == 0:
        raise EstimationError("sweep axes must be nonempty")
    paths, weights = weighted_paths(template, estimator, k, seed)
    err = np.abs(paths - template.data_path)
    err.sort(axis=1)
    max_err = err[:, -1]
    n = err.shape[1]

    # Smallest in-tolerance count c with c/n >= gamma, matching the float
    # comparison used by GammaEpsilon.kernel exactly.
    fractions = np.arange(n + 1) / n
    needed = np.asarray([int(np.searchsorted(fractions >= g, True)) for g in gammas])

    values = np.empty((gammas.size, epsilons.size))
    for j, eps in enumerate(epsilons):
        counts = np.sum(err <= eps, axis=1)
        w_ok = np.where(max_err <= m * eps, weights, 0.0)
        hist = np.bincount(counts, weights=w_ok, minlength=n + 1)
        tails = np.cumsum(hist[::-1])[::-1]
        for i, need in enumerate(needed):
            values[i, j] = tails[need] if need <= n else 0.0
    return SweepGrid(gammas=gammas, epsilons=epsilons, values=values)


def gamma_epsilon_rule(gamma: float, eps: float, m: float) -> GammaEpsilon:
    """The rule a sweep cell evaluates; exposed for cross-checking."""
    return GammaEpsilon(gamma=gamma, eps=eps, m=m)


def _check_axes(g1: SweepGrid, g2: SweepGrid):
    if not (np.array_equal(g1.gammas, g2.gammas) and np.array_equal(g1.epsilons, g2.epsilons)):
        raise EstimationError("sweep grids must share identical axes")


def ratio_grid(g1: SweepGrid, g2: SweepGrid) -> list[list[RatioResult]]:
    """Cellwise agreement ratio of two sweeps over identical axes."""
    _check_axes(g1, g2)
    return [
        [RatioResult.of(float(a), float(b)) for a, b in zip(row1, row2)]
        for row1, row2 in zip(g1.values, g2.values)
    ]


def averaged_boolean_ratio(g1: SweepGrid, g2: SweepGrid) -> RatioResult:
    """Ratio of summed agreement probabilities over the whole axis volume."""
    _check_axes(g1, g2)
    return RatioResult.of(g1.total(), g2.total())
