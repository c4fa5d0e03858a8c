"""Agreement rules: Boolean predicates over comparison values, composable
with and/or/not, plus soft exponentially-decaying acceptance.

Every rule maps a (model value, data value) pair to a kernel weight in
[0, 1]. Hard rules return exactly 0 or 1; :class:`SoftExponential` returns
1 up to its tolerance and then decays continuously. Under composition,
soft weights combine as independent probabilities (product for ``and``,
complement-product for ``or``), which reduces to ordinary Boolean logic
on {0, 1} indicators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .comparison import ComparisonFn, band_arrays, get_comparison_fn
from .distributions import ConfidenceRegion

__all__ = [
    "AgreementRule",
    "AlwaysTrue",
    "AlwaysFalse",
    "Threshold",
    "Interval",
    "SetMembership",
    "InRegion",
    "SoftExponential",
    "GammaEpsilon",
    "EpsilonBeta",
    "And",
    "Or",
    "Not",
    "compose",
    "evaluate_kernel",
]


def _resolve_fn(fn) -> ComparisonFn:
    return fn if isinstance(fn, ComparisonFn) else get_comparison_fn(fn)


def _as_weight(flag) -> float:
    return 1.0 if flag else 0.0


class AgreementRule:
    """Base class; subclasses implement ``kernel`` and usually ``kernel_many``."""

    is_soft = False

    def kernel(self, zhat, z) -> float:
        raise NotImplementedError

    def kernel_many(self, zhat_batch, z_batch) -> np.ndarray:
        return np.asarray(
            [self.kernel(zh, zv) for zh, zv in zip(zhat_batch, z_batch)], dtype=float
        )


def evaluate_kernel(rule: AgreementRule, zhat, z) -> float:
    """Agreement-kernel weight in [0, 1] for one value pair."""
    w = float(rule.kernel(zhat, z))
    if not 0.0 <= w <= 1.0:
        raise AssertionError(f"kernel weight {w} escaped [0, 1]")
    return w


@dataclass(frozen=True)
class AlwaysTrue(AgreementRule):
    def kernel(self, zhat, z) -> float:
        return 1.0

    def kernel_many(self, zhat_batch, z_batch):
        return np.ones(len(zhat_batch))


@dataclass(frozen=True)
class AlwaysFalse(AgreementRule):
    def kernel(self, zhat, z) -> float:
        return 0.0

    def kernel_many(self, zhat_batch, z_batch):
        return np.zeros(len(zhat_batch))


def _indicator_from_values(vals, predicate) -> np.ndarray:
    vals = np.asarray(vals, dtype=float)
    ok = predicate(vals)
    if vals.ndim > 1:
        # Vector-valued comparison (e.g. per-point errors): require all
        # components to satisfy the predicate.
        ok = np.all(ok, axis=-1)
    return ok.astype(float)


@dataclass(frozen=True)
class Threshold(AgreementRule):
    """True iff f(zhat, z) <= eps. The boundary is closed."""

    fn: ComparisonFn | str
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "fn", _resolve_fn(self.fn))

    def kernel(self, zhat, z) -> float:
        # Vector-valued f (per-point errors) must satisfy the bound everywhere.
        return float(np.all(np.asarray(self.fn.pair(zhat, z), dtype=float) <= self.eps))

    def kernel_many(self, zhat_batch, z_batch):
        return _indicator_from_values(self.fn.on_batch(zhat_batch, z_batch), lambda f: f <= self.eps)


@dataclass(frozen=True)
class Interval(AgreementRule):
    """True iff lo <= f(zhat, z) <= hi."""

    fn: ComparisonFn | str
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("Interval requires lo <= hi")
        object.__setattr__(self, "fn", _resolve_fn(self.fn))

    def kernel(self, zhat, z) -> float:
        f = np.asarray(self.fn.pair(zhat, z), dtype=float)
        return float(np.all((f >= self.lo) & (f <= self.hi)))

    def kernel_many(self, zhat_batch, z_batch):
        return _indicator_from_values(
            self.fn.on_batch(zhat_batch, z_batch), lambda f: (f >= self.lo) & (f <= self.hi)
        )


@dataclass(frozen=True)
class SetMembership(AgreementRule):
    """True iff the model label lies in the agreeing set of the data label.

    Labels absent from the synonym map agree only with themselves.
    """

    synonyms: Mapping

    def _agrees(self, zhat, z) -> bool:
        agreeing = self.synonyms.get(z, (z,))
        return zhat in agreeing or zhat == z

    def kernel(self, zhat, z) -> float:
        return _as_weight(self._agrees(zhat, z))


@dataclass(frozen=True)
class InRegion(AgreementRule):
    """True iff the chosen side's value lies in a fixed confidence region."""

    region: ConfidenceRegion
    side: str = "model"

    def __post_init__(self):
        if self.side not in ("model", "data"):
            raise ValueError("side must be 'model' or 'data'")

    def kernel(self, zhat, z) -> float:
        v = zhat if self.side == "model" else z
        return _as_weight(bool(self.region.contains(v)))

    def kernel_many(self, zhat_batch, z_batch):
        v = zhat_batch if self.side == "model" else z_batch
        return np.asarray(self.region.contains(np.asarray(v)), dtype=float)


@dataclass(frozen=True)
class SoftExponential(AgreementRule):
    """Full acceptance up to eps_prime, then weight exp(-lam*(f - eps_prime)).

    Equivalent to a hard threshold whose tolerance is itself uncertain
    with a shifted-exponential distribution of rate lam above eps_prime,
    marginalised in closed form.
    """

    fn: ComparisonFn | str
    eps_prime: float
    lam: float

    is_soft = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("SoftExponential rate must be positive")
        object.__setattr__(self, "fn", _resolve_fn(self.fn))

    def _weights(self, f):
        f = np.asarray(f, dtype=float)
        w = np.where(f <= self.eps_prime, 1.0, np.exp(-self.lam * np.maximum(f - self.eps_prime, 0.0)))
        if f.ndim > 1:
            w = np.prod(w, axis=-1)
        return w

    def kernel(self, zhat, z) -> float:
        return float(np.prod(self._weights(self.fn.pair(zhat, z))))

    def kernel_many(self, zhat_batch, z_batch):
        return self._weights(self.fn.on_batch(zhat_batch, z_batch))


@dataclass(frozen=True, eq=False)
class GammaEpsilon(AgreementRule):
    """Visual-inspection compound over paths: at least a fraction gamma of
    points within eps of the data, and no point farther than m*eps.

    ``eps`` may be a scalar or a per-point tolerance vector.
    """

    gamma: float
    eps: float | np.ndarray
    m: float = 5.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.m < 1.0:
            raise ValueError("m must be at least 1")
        eps = np.asarray(self.eps, dtype=float)
        if np.any(eps < 0):
            raise ValueError("eps must be nonnegative")
        object.__setattr__(self, "eps", float(eps) if eps.ndim == 0 else eps)

    def kernel(self, yhat, y) -> float:
        return float(self.kernel_many(np.atleast_2d(yhat), np.atleast_2d(y))[0])

    def kernel_many(self, yhat_batch, y_batch):
        yhat = np.atleast_2d(np.asarray(yhat_batch, dtype=float))
        y = np.atleast_2d(np.asarray(y_batch, dtype=float))
        if yhat.shape[-1] != y.shape[-1]:
            raise ValueError("path length mismatch")
        err = np.abs(yhat - y)
        frac = np.mean(err <= self.eps, axis=-1)
        worst_ok = np.all(err <= self.m * np.asarray(self.eps), axis=-1)
        return ((frac >= self.gamma) & worst_ok).astype(float)


@dataclass(frozen=True, eq=False)
class EpsilonBeta(AgreementRule):
    """Mean-error bound plus a probabilistic-representation check: the mean
    absolute error must not exceed ``mean_tol`` and the fraction of data
    points inside the model's per-point band must land in
    [coverage_lo, coverage_hi]. Over-coverage is rejected on purpose, so a
    model cannot pass by being arbitrarily uncertain.
    """

    mean_tol: float
    band: tuple
    coverage_lo: float = 0.91
    coverage_hi: float = 0.99

    def __init__(self, mean_tol, band, coverage_lo=0.91, coverage_hi=0.99):
        if not 0.0 <= coverage_lo <= coverage_hi <= 1.0:
            raise ValueError("coverage bounds must satisfy 0 <= lo <= hi <= 1")
        n = len(band[0]) if isinstance(band, tuple) and np.ndim(band[0]) == 1 else len(band)
        lo, hi = band_arrays(band, n)
        object.__setattr__(self, "mean_tol", float(mean_tol))
        object.__setattr__(self, "band", (lo, hi))
        object.__setattr__(self, "coverage_lo", float(coverage_lo))
        object.__setattr__(self, "coverage_hi", float(coverage_hi))

    def kernel(self, yhat, y) -> float:
        return float(self.kernel_many(np.atleast_2d(yhat), np.atleast_2d(y))[0])

    def kernel_many(self, yhat_batch, y_batch):
        yhat = np.atleast_2d(np.asarray(yhat_batch, dtype=float))
        y = np.atleast_2d(np.asarray(y_batch, dtype=float))
        lo, hi = self.band
        if yhat.shape[-1] != y.shape[-1] or y.shape[-1] != lo.shape[0]:
            raise ValueError("band, model path and data path lengths must match")
        mae_ok = np.mean(np.abs(yhat - y), axis=-1) <= self.mean_tol
        cov = np.mean((y >= lo) & (y <= hi), axis=-1)
        cov_ok = (cov >= self.coverage_lo) & (cov <= self.coverage_hi)
        return (mae_ok & cov_ok).astype(float)


def _flatten_weights(children, zhat, z):
    return [evaluate_kernel(c, zhat, z) for c in children]


@dataclass(frozen=True)
class And(AgreementRule):
    children: tuple

    def __init__(self, children: Sequence[AgreementRule]):
        children = tuple(children)
        if not children:
            raise ValueError("And needs at least one child")
        object.__setattr__(self, "children", children)

    @property
    def is_soft(self):
        return any(c.is_soft for c in self.children)

    def kernel(self, zhat, z) -> float:
        out = 1.0
        for w in _flatten_weights(self.children, zhat, z):
            out *= w
        return out

    def kernel_many(self, zhat_batch, z_batch):
        out = np.ones(len(zhat_batch))
        for c in self.children:
            out *= c.kernel_many(zhat_batch, z_batch)
        return out


@dataclass(frozen=True)
class Or(AgreementRule):
    children: tuple

    def __init__(self, children: Sequence[AgreementRule]):
        children = tuple(children)
        if not children:
            raise ValueError("Or needs at least one child")
        object.__setattr__(self, "children", children)

    @property
    def is_soft(self):
        return any(c.is_soft for c in self.children)

    def kernel(self, zhat, z) -> float:
        miss = 1.0
        for w in _flatten_weights(self.children, zhat, z):
            miss *= 1.0 - w
        return 1.0 - miss

    def kernel_many(self, zhat_batch, z_batch):
        miss = np.ones(len(zhat_batch))
        for c in self.children:
            miss *= 1.0 - c.kernel_many(zhat_batch, z_batch)
        return 1.0 - miss


@dataclass(frozen=True)
class Not(AgreementRule):
    child: AgreementRule

    def __post_init__(self):
        if self.child.is_soft:
            raise ValueError("negation of a soft rule is undefined; negate hard rules only")

    def kernel(self, zhat, z) -> float:
        return 1.0 - evaluate_kernel(self.child, zhat, z)

    def kernel_many(self, zhat_batch, z_batch):
        return 1.0 - self.child.kernel_many(zhat_batch, z_batch)


def compose(op: str, children: Sequence[AgreementRule]) -> AgreementRule:
    """Build a compound rule: ``compose('and', [...])`` etc."""
    children = list(children)
    if op == "and":
        return And(children)
    if op == "or":
        return Or(children)
    if op == "not":
        if len(children) != 1:
            raise ValueError("not takes exactly one child")
        return Not(children[0])
    raise ValueError(f"unknown composition '{op}'")
