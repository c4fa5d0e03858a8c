"""The classical validation metrics, each as a configuration of the
probability-of-agreement estimator plus a closed form where one exists.

Covered here: reliability and its per-point improvement, the frequentist
metric over a Student-t data mean, the ECDF area metric (optionally with
bootstrap data uncertainty), binned-pdf distance with Dirichlet-uncertain
data bins, pdf-divergence acceptance, the classical hypothesis test and
its two-sided power improvement, and Gaussian-likelihood model evidence
with the Bayes factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm as _norm

from .agreement import AgreementRule, GammaEpsilon, Threshold
from .comparison import BinnedPdf, area_metric, divergence, ecdf
from .distributions import (
    ConfidenceRegion,
    DiracDelta,
    Distribution,
    Normal,
    ShiftedExponential,
    StudentT,
    Uniform,
    confidence_interval,
    confidence_set,
    probability_in_region,
)
from .engine import BvmEstimate, EstimationError, Scenario, estimate_bvm_mc
from .models import InputGrid, ModelFunction
from .rng import CHUNK_SIZE, MODEL_STREAM, RESAMPLE_STREAM, assemble_chunks

__all__ = [
    "DataSummary",
    "GaussianLikelihoodSpec",
    "EvidenceResult",
    "PowerResult",
    "ClassicalTestResult",
    "reliability",
    "improved_reliability",
    "frequentist",
    "area_metric_validation",
    "binned_pdf_metric",
    "divergence_validation",
    "classical_hypothesis",
    "statistical_power_bvm",
    "bayesian_evidence",
    "bayes_factor",
    "kernel_on_value",
]


@dataclass(frozen=True)
class DataSummary:
    """Sufficient statistics of a measured sample: mean, std, count."""

    sample_mean: float
    sample_std: float
    n: int

    def __post_init__(self):
        if not self.sample_std > 0:
            raise ValueError("sample_std must be positive")
        if self.n < 2:
            raise ValueError("need at least two observations")

    @property
    def dof(self) -> int:
        return self.n - 1


@dataclass(frozen=True)
class GaussianLikelihoodSpec:
    """Observation model: independent Gaussian noise of width sigma around
    the model path, evaluated against ``data_y`` on ``grid``."""

    sigma: float
    data_y: np.ndarray
    grid: InputGrid

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        y = np.asarray(self.data_y, dtype=float)
        if y.shape != (len(self.grid),):
            raise ValueError("data_y length must match the grid")
        object.__setattr__(self, "data_y", y)


def kernel_on_value(rule: AgreementRule, value: float) -> float:
    """Evaluate a rule defined directly on a comparison value.

    The value is passed to both rule sides, so the rule must read it with
    a value comparison ('identity' or 'abs_value').
    """
    return float(rule.kernel(value, value))


# ---------------------------------------------------------------------------
# Reliability family


def _normal_like(dist: Distribution):
    if isinstance(dist, Normal):
        return dist.mean, dist.std
    if isinstance(dist, DiracDelta) and np.ndim(dist.value) == 0:
        return float(dist.value), 0.0
    return None


def reliability(
    model_dist: Distribution,
    data_dist: Distribution,
    eps: float,
    k: int = 100_000,
    seed: int = 0,
) -> BvmEstimate:
    """Probability that the model and data means differ by at most eps.

    Uses the exact Gaussian-difference mass when both inputs are normal
    (or certain), the data cdf when the model is certain, and Monte Carlo
    otherwise.
    """
    if model_dist.kind != "scalar" or data_dist.kind != "scalar":
        raise ValueError("reliability compares scalar expectation values")
    nm, nd = _normal_like(model_dist), _normal_like(data_dist)
    if nm is not None and nd is not None:
        mu = nm[0] - nd[0]
        sd = math.hypot(nm[1], nd[1])
        if sd == 0.0:
            p = 1.0 if abs(mu) <= eps else 0.0
        else:
            p = float(_norm.cdf((eps - mu) / sd) - _norm.cdf((-eps - mu) / sd))
        return BvmEstimate(p_hat=p, std_error=0.0, n_samples=0, seed=seed, method="closedForm")
    continuous = (Normal, StudentT, Uniform, ShiftedExponential)
    for certain, other in ((model_dist, data_dist), (data_dist, model_dist)):
        if isinstance(certain, DiracDelta) and np.ndim(certain.value) == 0 and isinstance(other, continuous):
            v = float(certain.value)
            p = other.cdf(v + eps) - other.cdf(v - eps)
            return BvmEstimate(p_hat=float(p), std_error=0.0, n_samples=0, seed=seed, method="closedForm")
    scenario = Scenario(model_dist, data_dist, Threshold("abs_diff", eps))
    return estimate_bvm_mc(scenario, k, seed)


def improved_reliability(
    model_path_dist: Distribution,
    data_path_dist: Distribution,
    eps,
    k: int = 10_000,
    seed: int = 0,
) -> BvmEstimate:
    """Conjunction of per-point tolerance checks over whole output paths.

    ``eps`` may be one tolerance or a per-point vector.
    """
    if model_path_dist.kind != "path" or data_path_dist.kind != "path":
        raise ValueError("improved reliability compares full output paths")
    rule = GammaEpsilon(gamma=1.0, eps=eps, m=1.0)
    return estimate_bvm_mc(Scenario(model_path_dist, data_path_dist, rule), k, seed)


# ---------------------------------------------------------------------------
# Frequentist metric (certain model mean against a Student-t data mean)


def _adaptive_simpson(f, edges, tol: float, max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature over pre-split panels.

    Panel pre-splitting keeps indicator discontinuities from aliasing a
    whole-interval estimate; recursion then resolves each panel to the
    shared absolute tolerance.
    """

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(lo, hi, flo, fmid, fhi, whole, tol, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(flo, flm, fmid, lo, mid)
        right = simpson(fmid, frm, fhi, mid, hi)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return rec(lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1) + rec(
            mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1
        )

    edges = np.asarray(edges, dtype=float)
    panel_tol = tol / (edges.size - 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        total += rec(lo, hi, flo, fmid, fhi, simpson(flo, fmid, fhi, lo, hi), panel_tol, max_depth)
    return total


def _breakpoints(rule: AgreementRule):
    """Discontinuity locations of a value rule, on the value's own axis.

    Returns None when the tree contains a comparison whose kink structure
    is unknown; callers then fall back to blind panels.
    """
    from .agreement import (
        AlwaysFalse,
        AlwaysTrue,
        And,
        Interval,
        Not,
        Or,
        SoftExponential,
        Threshold,
    )

    def of_fn(fn_name, points):
        if fn_name == "identity":
            return set(points)
        if fn_name == "abs_value":
            return {p for v in points for p in (v, -v)}
        return None

    if isinstance(rule, (AlwaysTrue, AlwaysFalse)):
        return set()
    if isinstance(rule, Threshold):
        return of_fn(rule.fn.name, [rule.eps])
    if isinstance(rule, Interval):
        return of_fn(rule.fn.name, [rule.lo, rule.hi])
    if isinstance(rule, SoftExponential):
        return of_fn(rule.fn.name, [rule.eps_prime])
    if isinstance(rule, Not):
        return _breakpoints(rule.child)
    if isinstance(rule, (And, Or)):
        out = set()
        for child in rule.children:
            pts = _breakpoints(child)
            if pts is None:
                return None
            out |= pts
        return out
    return None


def frequentist(model_mean: float, data: DataSummary, rule: AgreementRule) -> BvmEstimate:
    """Student-t mass of the data mean over the rule's acceptance region.

    The rule reads the signed error E = model_mean - mu_y through a value
    comparison. Integration is adaptive Simpson at absolute tolerance
    1e-9 over equal-probability quantile panels, with panel edges pinned
    at the rule's own discontinuities so no acceptance window can slip
    between probe points; only ~1e-13 of tail mass is truncated.
    """
    scale = data.sample_std / math.sqrt(data.n)
    t = StudentT(location=data.sample_mean, dof=data.dof, scale=scale)

    def integrand(mu: float) -> float:
        return kernel_on_value(rule, model_mean - mu) * t.density(mu)

    edges = [t.quantile(q) for q in np.linspace(1e-13, 1.0 - 1e-13, 129)]
    breaks = _breakpoints(rule)
    if breaks is not None:
        # E = model_mean - mu is linear, so value-axis kinks map directly.
        edges.extend(model_mean - b for b in breaks if edges[0] < model_mean - b < edges[-1])
    p = _adaptive_simpson(integrand, np.unique(np.asarray(edges)), tol=1e-9)
    return BvmEstimate(p_hat=min(1.0, max(0.0, p)), std_error=0.0, n_samples=0, seed=0, method="closedForm")


# ---------------------------------------------------------------------------
# Area and binned-pdf metrics


def area_metric_validation(
    samples_m,
    samples_d,
    rule: AgreementRule,
    bootstrap: int = 0,
    seed: int = 0,
) -> BvmEstimate:
    """Accept/reject on the area between the two empirical CDFs.

    With ``bootstrap`` > 0 the data sample is treated as uncertain:
    the indicator is averaged over that many resamples of the data.
    """
    xm = np.asarray(samples_m, dtype=float)
    xd = np.asarray(samples_d, dtype=float)
    if xm.size == 0 or xd.size == 0:
        raise ValueError("need at least one sample on each side")
    fm = ecdf(xm)
    if bootstrap <= 0:
        p = kernel_on_value(rule, area_metric(fm, ecdf(xd)))
        return BvmEstimate(p_hat=p, std_error=0.0, n_samples=0, seed=seed, method="closedForm")

    def draw_weights(rng):
        idx = rng.integers(0, xd.size, (CHUNK_SIZE, xd.size))
        return np.asarray(
            [kernel_on_value(rule, area_metric(fm, ecdf(xd[row]))) for row in idx], dtype=float
        )

    w = assemble_chunks(draw_weights, seed, bootstrap, stream=RESAMPLE_STREAM)
    p = float(np.mean(w))
    se = float(np.sqrt(max(0.0, p * (1.0 - p)) / bootstrap))
    return BvmEstimate(p_hat=p, std_error=se, n_samples=bootstrap, seed=seed, method="mc")


def binned_pdf_metric(
    model_pdf: BinnedPdf,
    data_counts,
    rule: AgreementRule,
    r: int = 10_000,
    seed: int = 0,
) -> BvmEstimate:
    """Binned probability-difference acceptance under Dirichlet-uncertain
    data bin probabilities (uniform prior plus observed counts)."""
    counts = np.asarray(data_counts, dtype=float)
    if counts.shape != model_pdf.masses.shape:
        raise ValueError("data counts must match the model's bins")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    alpha = counts + 1.0

    def draw_weights(rng):
        draws = rng.dirichlet(alpha, CHUNK_SIZE)
        dm = np.sum(np.abs(model_pdf.masses - draws), axis=1)
        return np.asarray([kernel_on_value(rule, v) for v in dm], dtype=float)

    w = assemble_chunks(draw_weights, seed, r, stream=RESAMPLE_STREAM)
    p = float(np.mean(w))
    if rule.is_soft:
        se = float(np.std(w) / math.sqrt(r))
    else:
        se = float(math.sqrt(max(0.0, p * (1.0 - p)) / r))
    return BvmEstimate(p_hat=p, std_error=se, n_samples=r, seed=seed, method="mc")


def divergence_validation(
    p_model: BinnedPdf,
    p_data: BinnedPdf,
    kind: str,
    rule: AgreementRule,
    sampler=None,
    r: int = 1000,
    seed: int = 0,
) -> BvmEstimate:
    """Accept/reject on a pdf divergence G(data || model).

    An infinite divergence simply fails any finite threshold. With
    ``sampler(rng) -> (model_pdf, data_pdf)`` the pdfs themselves are
    uncertain and the indicator is averaged over r draws.
    """
    if sampler is None:
        g = divergence(kind, p_data, p_model)
        p = kernel_on_value(rule, g)
        return BvmEstimate(p_hat=p, std_error=0.0, n_samples=0, seed=seed, method="closedForm")

    def draw_weights(rng):
        out = np.empty(CHUNK_SIZE)
        for i in range(CHUNK_SIZE):
            pm, pd = sampler(rng)
            out[i] = kernel_on_value(rule, divergence(kind, pd, pm))
        return out

    w = assemble_chunks(draw_weights, seed, r, stream=RESAMPLE_STREAM)
    p = float(np.mean(w))
    se = float(math.sqrt(max(0.0, p * (1.0 - p)) / r))
    return BvmEstimate(p_hat=p, std_error=se, n_samples=r, seed=seed, method="mc")


# ---------------------------------------------------------------------------
# Hypothesis testing


@dataclass(frozen=True)
class ClassicalTestResult:
    estimate: BvmEstimate
    interval: ConfidenceRegion


def classical_hypothesis(data_dist: Distribution, alpha: float) -> ClassicalTestResult:
    """The classical test under the null assumption that the model equals
    the data: the non-rejection probability is 1 - alpha by construction,
    for every candidate model. The data's critical interval is returned
    for reporting.
    """
    if data_dist.kind != "scalar":
        raise ValueError("classical test needs a scalar test-statistic distribution")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    interval = confidence_interval(data_dist, 1.0 - alpha)
    est = BvmEstimate(p_hat=1.0 - alpha, std_error=0.0, n_samples=0, seed=0, method="closedForm")
    return ClassicalTestResult(estimate=est, interval=interval)


@dataclass(frozen=True)
class PowerResult:
    """Two-sided power product with its factors and regions."""

    estimate: BvmEstimate
    power_model_in_data: float
    power_data_in_model: float
    systematic_error: float
    model_region: ConfidenceRegion
    data_region: ConfidenceRegion


def statistical_power_bvm(
    model_dist: Distribution,
    data_dist: Distribution,
    alpha: float,
    alpha_hat: float,
    region_kind: str = "interval",
    bins: int = 512,
    seed: int = 0,
) -> PowerResult:
    """Agreement as mutual containment: the model statistic must land in
    the data's 1-alpha region and the data statistic in the model's
    1-alpha_hat region. The probability factorises into the product of
    the two statistical powers. Regions are central intervals or
    highest-density sets.
    """
    if model_dist.kind != "scalar" or data_dist.kind != "scalar":
        raise ValueError("power metric needs scalar statistic distributions")
    if not (0.0 <= alpha < 1.0 and 0.0 <= alpha_hat < 1.0):
        raise ValueError("alpha and alpha_hat must lie in [0, 1)")

    def region(dist, level):
        if region_kind == "interval":
            return confidence_interval(dist, level, seed=seed)
        if region_kind == "set":
            return confidence_set(dist, level, bins, seed=seed)
        raise ValueError("region_kind must be 'interval' or 'set'")

    data_region = region(data_dist, 1.0 - alpha)
    model_region = region(model_dist, 1.0 - alpha_hat)
    power_model = probability_in_region(model_dist, data_region, seed=seed)
    power_data = probability_in_region(data_dist, model_region, seed=seed)
    product = power_model * power_data
    est = BvmEstimate(p_hat=product, std_error=0.0, n_samples=0, seed=seed, method="closedForm")
    return PowerResult(
        estimate=est,
        power_model_in_data=power_model,
        power_data_in_model=power_data,
        systematic_error=alpha + alpha_hat - alpha * alpha_hat,
        model_region=model_region,
        data_region=data_region,
    )


# ---------------------------------------------------------------------------
# Model evidence


@dataclass(frozen=True)
class EvidenceResult:
    """Marginal likelihood of the data under the parameter prior, kept in
    log space; the standard error of the log comes from the delta method."""

    log_evidence: float
    std_error_log: float
    n_samples: int
    seed: int

    @property
    def evidence(self) -> float:
        return math.exp(self.log_evidence)


def bayesian_evidence(
    model: ModelFunction,
    prior: Distribution,
    lik: GaussianLikelihoodSpec,
    k: int = 100_000,
    seed: int = 0,
) -> EvidenceResult:
    """Monte Carlo marginalisation of the Gaussian likelihood over the prior.

    The likelihood of a parameter draw theta is
    ``(2 pi sigma^2)^(-N/2) exp(-sum_i (M(x_i; theta) - y_i)^2 / (2 sigma^2))``.
    """
    if k < 1:
        raise EstimationError("sample count must be at least 1")
    theta = prior.sample(seed, k, stream=MODEL_STREAM)
    if np.ndim(theta) == 1:
        theta = np.asarray(theta, dtype=float)[:, None]
    paths = model.evaluate(theta, lik.grid)
    n = len(lik.grid)
    sq = np.sum((paths - lik.data_y) ** 2, axis=1)
    log_l = -0.5 * n * math.log(2.0 * math.pi * lik.sigma**2) - sq / (2.0 * lik.sigma**2)
    peak = float(np.max(log_l))
    w = np.exp(log_l - peak)
    mean_w = float(np.mean(w))
    log_ev = peak + math.log(mean_w) if mean_w > 0 else -math.inf
    se_log = float(np.std(w) / (mean_w * math.sqrt(k))) if mean_w > 0 else math.inf
    return EvidenceResult(log_evidence=log_ev, std_error_log=se_log, n_samples=k, seed=seed)


@dataclass(frozen=True)
class BayesFactorResult:
    status: str
    log_factor: float | None

    @property
    def factor(self) -> float | None:
        return None if self.log_factor is None else math.exp(self.log_factor)


def _log_evidence_of(ev) -> float:
    if isinstance(ev, EvidenceResult):
        return ev.log_evidence
    ev = float(ev)
    if ev < 0:
        raise ValueError("evidence must be nonnegative")
    return math.log(ev) if ev > 0 else -math.inf


def bayes_factor(ev1, ev2) -> BayesFactorResult:
    """Evidence ratio computed in log space; 0/0 is flagged, not NaN."""
    l1, l2 = _log_evidence_of(ev1), _log_evidence_of(ev2)
    if l1 == -math.inf and l2 == -math.inf:
        return BayesFactorResult(status="indeterminate", log_factor=None)
    if l2 == -math.inf:
        return BayesFactorResult(status="infinite", log_factor=None)
    return BayesFactorResult(status="ok", log_factor=l1 - l2)
