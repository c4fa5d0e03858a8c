"""Comparison value functions: path errors, ECDF area, binned-pdf distances.

Each registered function maps a (model value, data value) pair to the
quantitative measure an agreement rule thresholds. Pair variants take a
single pair; the vectorised variants used by the estimators take stacked
batches along axis 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Ecdf",
    "BinnedPdf",
    "ComparisonFn",
    "get_comparison_fn",
    "comparison_fn_names",
    "abs_diff",
    "sq_diff",
    "mean_abs_error",
    "max_abs_error",
    "per_point_abs_error",
    "fraction_within",
    "coverage_fraction",
    "ecdf",
    "area_metric",
    "binned_prob_diff",
    "kl_divergence",
    "symmetrized_kl",
    "js_divergence",
    "hellinger",
    "divergence",
]


def abs_diff(zhat, z):
    return np.abs(np.asarray(zhat, dtype=float) - np.asarray(z, dtype=float))


def sq_diff(zhat, z):
    d = np.asarray(zhat, dtype=float) - np.asarray(z, dtype=float)
    return d * d


def _check_paths(yhat, y):
    yhat = np.asarray(yhat, dtype=float)
    y = np.asarray(y, dtype=float)
    if yhat.shape[-1] != y.shape[-1]:
        raise ValueError(f"path length mismatch: {yhat.shape[-1]} vs {y.shape[-1]}")
    return yhat, y


def mean_abs_error(yhat, y):
    """(1/N) * sum_i |yhat_i - y_i| along the last axis."""
    yhat, y = _check_paths(yhat, y)
    return np.mean(np.abs(yhat - y), axis=-1)


def max_abs_error(yhat, y):
    yhat, y = _check_paths(yhat, y)
    return np.max(np.abs(yhat - y), axis=-1)


def per_point_abs_error(yhat, y):
    yhat, y = _check_paths(yhat, y)
    return np.abs(yhat - y)


def fraction_within(yhat, y, eps):
    """Fraction of points with |yhat_i - y_i| <= eps (scalar or per-point)."""
    yhat, y = _check_paths(yhat, y)
    return np.mean(np.abs(yhat - y) <= eps, axis=-1)


def coverage_fraction(y, band) -> float:
    """Fraction of data points inside per-point confidence regions.

    ``band`` is a sequence of N interval regions, or an ``(lo, hi)`` pair
    of length-N arrays.
    """
    y = np.asarray(y, dtype=float)
    lo, hi = band_arrays(band, y.shape[-1])
    return float(np.mean((y >= lo) & (y <= hi), axis=-1))


def band_arrays(band, n: int):
    """Normalise a per-point band to (lo, hi) arrays of length n."""
    if isinstance(band, tuple) and len(band) == 2 and np.ndim(band[0]) == 1:
        lo, hi = (np.asarray(b, dtype=float) for b in band)
    else:
        lo = np.asarray([r.lo for r in band], dtype=float)
        hi = np.asarray([r.hi for r in band], dtype=float)
    if lo.shape != (n,) or hi.shape != (n,):
        raise ValueError(f"band length mismatch: expected {n} regions")
    return lo, hi


# ---------------------------------------------------------------------------
# Empirical CDFs and the area between them


@dataclass(frozen=True)
class Ecdf:
    """Right-continuous empirical step CDF over a sorted sample copy."""

    xs: np.ndarray

    def __post_init__(self):
        xs = np.sort(np.asarray(self.xs, dtype=float))
        if xs.size == 0:
            raise ValueError("ecdf needs at least one sample")
        object.__setattr__(self, "xs", xs)

    def __call__(self, x):
        return np.searchsorted(self.xs, np.asarray(x, dtype=float), side="right") / self.xs.size


def ecdf(samples) -> Ecdf:
    return Ecdf(np.asarray(samples, dtype=float))


def area_metric(f1, f2) -> float:
    """Exact integral of |F1 - F2| between two empirical CDFs.

    Both CDFs are piecewise constant, so the integral is summed exactly
    over the merged breakpoint set; no quadrature is involved. For equal
    sample counts this equals the mean absolute difference of the sorted
    samples (the 1-d optimal-transport distance).
    """
    f1 = f1 if isinstance(f1, Ecdf) else ecdf(f1)
    f2 = f2 if isinstance(f2, Ecdf) else ecdf(f2)
    breaks = np.union1d(f1.xs, f2.xs)
    if breaks.size == 1:
        return 0.0
    gaps = np.diff(breaks)
    left = breaks[:-1]
    return float(np.sum(np.abs(f1(left) - f2(left)) * gaps))


# ---------------------------------------------------------------------------
# Binned probability vectors and their distances


@dataclass(frozen=True)
class BinnedPdf:
    """Histogram probabilities: bin edges plus masses summing to one."""

    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if edges.ndim != 1 or masses.ndim != 1 or edges.size != masses.size + 1:
            raise ValueError("need len(edges) == len(masses) + 1")
        if masses.size < 1 or np.any(masses < 0):
            raise ValueError("masses must be nonnegative")
        if abs(masses.sum() - 1.0) > 1e-9:
            raise ValueError("masses must sum to 1 within 1e-9")
        if not np.all(np.diff(edges) > 0):
            raise ValueError("edges must be strictly increasing")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_samples(cls, samples, bins: int, lo: float | None = None, hi: float | None = None) -> "BinnedPdf":
        """Equal-width histogram; default range is the sample range padded 1%."""
        x = np.asarray(samples, dtype=float)
        if lo is None or hi is None:
            span = x.max() - x.min()
            pad = 0.01 * span if span > 0 else max(1e-9, 0.01 * abs(x.max()) + 1e-9)
            lo = x.min() - pad if lo is None else lo
            hi = x.max() + pad if hi is None else hi
        counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
        total = counts.sum()
        if total == 0:
            raise ValueError("no samples fall inside the histogram range")
        return cls(edges, counts / total)

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def _paired_masses(p, q):
    if isinstance(p, BinnedPdf) and isinstance(q, BinnedPdf):
        if p.edges.shape != q.edges.shape or not np.allclose(p.edges, q.edges, rtol=0, atol=0):
            raise ValueError("binned pdfs must share identical bin edges")
        return p.masses, q.masses
    p = np.asarray(p.masses if isinstance(p, BinnedPdf) else p, dtype=float)
    q = np.asarray(q.masses if isinstance(q, BinnedPdf) else q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("mass vectors must have identical length")
    return p, q


def binned_prob_diff(p, q) -> float:
    """Sum over bins of |p_i - q_i|; ranges over [0, 2]."""
    pm, qm = _paired_masses(p, q)
    return float(np.sum(np.abs(pm - qm)))


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats with 0*ln(0) := 0; +inf when q misses p's support."""
    pm, qm = _paired_masses(p, q)
    support = pm > 0
    if np.any(qm[support] == 0):
        return float("inf")
    return float(np.sum(pm[support] * np.log(pm[support] / qm[support])))


def symmetrized_kl(p, q) -> float:
    return kl_divergence(p, q) + kl_divergence(q, p)


def js_divergence(p, q) -> float:
    """Jensen-Shannon divergence in nats; bounded by ln 2."""
    pm, qm = _paired_masses(p, q)
    m = 0.5 * (pm + qm)
    return 0.5 * kl_divergence(pm, m) + 0.5 * kl_divergence(qm, m)


def hellinger(p, q) -> float:
    """Hellinger distance with the convention H^2 = 1 - sum_i sqrt(p_i q_i)."""
    pm, qm = _paired_masses(p, q)
    if np.array_equal(pm, qm):
        return 0.0  # sqrt(p*q) can lose an ulp; equal masses are exactly zero
    return float(np.sqrt(max(0.0, 1.0 - np.sum(np.sqrt(pm * qm)))))


_DIVERGENCES = {
    "kl": kl_divergence,
    "sym_kl": symmetrized_kl,
    "js": js_divergence,
    "hellinger": hellinger,
}


def divergence(kind: str, p, q) -> float:
    try:
        fn = _DIVERGENCES[kind]
    except KeyError:
        raise ValueError(f"unknown divergence '{kind}'; choose from {sorted(_DIVERGENCES)}") from None
    return fn(p, q)


def identity_statistic(zhat, z=None):
    """Passes the model-side value through untouched."""
    return np.asarray(zhat, dtype=float)


# ---------------------------------------------------------------------------
# Registry used by agreement rules and scenario configs


@dataclass(frozen=True)
class ComparisonFn:
    """Named comparison function with paired and batched entry points."""

    name: str
    pair: Callable
    batch: Callable | None = None
    symmetric: bool = False

    def on_batch(self, zhat_batch, z_batch) -> np.ndarray:
        if self.batch is not None:
            return np.asarray(self.batch(zhat_batch, z_batch), dtype=float)
        return np.asarray(
            [self.pair(zh, zv) for zh, zv in zip(zhat_batch, z_batch)], dtype=float
        )


def _path_batch(fn):
    def run(zh, zv):
        zh = np.atleast_2d(np.asarray(zh, dtype=float))
        zv = np.atleast_2d(np.asarray(zv, dtype=float))
        return fn(zh, zv)

    return run


_REGISTRY: dict[str, ComparisonFn] = {}


def _register(fn: ComparisonFn, *aliases: str):
    _REGISTRY[fn.name] = fn
    for alias in aliases:
        _REGISTRY[alias] = fn


_register(ComparisonFn("abs_diff", abs_diff, batch=abs_diff, symmetric=True))
_register(ComparisonFn("sq_diff", sq_diff, batch=sq_diff, symmetric=True))
_register(ComparisonFn("mean_abs_error", mean_abs_error, batch=_path_batch(mean_abs_error), symmetric=True))
_register(ComparisonFn("max_abs_error", max_abs_error, batch=_path_batch(max_abs_error), symmetric=True))
_register(ComparisonFn("per_point_abs_error", per_point_abs_error, batch=_path_batch(per_point_abs_error), symmetric=True))
_register(ComparisonFn("area_metric", area_metric, symmetric=True))
_register(ComparisonFn("kl", kl_divergence), "kl_divergence")
_register(ComparisonFn("sym_kl", symmetrized_kl, symmetric=True), "symmetrized_kl")
_register(ComparisonFn("js", js_divergence, symmetric=True), "js_divergence")
_register(ComparisonFn("hellinger", hellinger, symmetric=True))
_register(ComparisonFn("identity", identity_statistic, batch=lambda zh, z: identity_statistic(zh)))
_register(ComparisonFn("abs_value", lambda zh, z=None: np.abs(np.asarray(zh, dtype=float)), batch=lambda zh, z: np.abs(np.asarray(zh, dtype=float))))


def make_binned_prob_diff_fn(bins: int) -> ComparisonFn:
    """Comparison on raw sample paths: bin both over the pooled range, then
    sum the absolute mass differences."""

    def pair(zh, zv):
        zh = np.asarray(zh, dtype=float)
        zv = np.asarray(zv, dtype=float)
        pooled = np.concatenate([zh.ravel(), zv.ravel()])
        span = pooled.max() - pooled.min()
        pad = 0.01 * span if span > 0 else 1e-9
        lo, hi = pooled.min() - pad, pooled.max() + pad
        p = BinnedPdf.from_samples(zh, bins, lo, hi)
        q = BinnedPdf.from_samples(zv, bins, lo, hi)
        return binned_prob_diff(p, q)

    return ComparisonFn(f"binned_prob_diff_{bins}", pair, symmetric=True)


def get_comparison_fn(name: str, **params) -> ComparisonFn:
    """Look up a comparison function by its config name."""
    if name == "binned_prob_diff":
        return make_binned_prob_diff_fn(int(params.get("bins", 16)))
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown comparison function '{name}'") from None


def comparison_fn_names() -> list[str]:
    return sorted(_REGISTRY) + ["binned_prob_diff"]
