"""Posterior causal-effect summaries computed from retained traces.

Every estimand is an average of per-draw effects; no separate model-average
step exists. Intervals are equal-tailed 95% posterior percentiles whose
endpoints are order statistics of the per-draw vector.
"""

import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .data import BINARY, CONTINUOUS, MARGINAL, SEPARATE
from .errors import (EmptyGrid, EmptyTrace, OutOfSupport, SchemeMismatch,
                     UnsupportedForBinary)
from .trees import snapshot_forest_fit


@dataclass(frozen=True)
class EffectSummary:
    """Posterior mean, equal-tailed 95% interval, and the per-draw effects."""

    posterior_mean: float
    ci_low: float
    ci_high: float
    draws: np.ndarray

    @classmethod
    def from_draws(cls, draws: np.ndarray) -> "EffectSummary":
        draws = np.asarray(draws, dtype=np.float64)
        if draws.size == 0:
            raise EmptyTrace("no retained draws to summarize")
        lo, hi = np.quantile(draws, [0.025, 0.975], method="inverted_cdf")
        return cls(posterior_mean=float(draws.mean()),
                   ci_low=float(lo), ci_high=float(hi), draws=draws)


def _require_records(trace):
    if len(trace.records) == 0:
        raise EmptyTrace("trace holds no retained draws")


def ate_separate(trace, n: Optional[int] = None) -> EffectSummary:
    """Average treatment effect from the two arm-specific forests."""
    if trace.meta.scheme != SEPARATE:
        raise SchemeMismatch("trace was not produced by the separate scheme")
    _require_records(trace)
    draws = np.array([float(np.mean(rec.cf1 - rec.cf0))
                      for rec in trace.records])
    return EffectSummary.from_draws(draws)


def ate_marginal(trace, n: Optional[int] = None) -> EffectSummary:
    """Average treatment effect from the single-forest counterfactual fits."""
    if trace.meta.scheme != MARGINAL:
        raise SchemeMismatch("trace was not produced by the marginal scheme")
    if trace.meta.exposure_kind != BINARY:
        raise SchemeMismatch("binary-exposure ATE requested on a continuous-"
                             "exposure trace; use contrast_continuous")
    _require_records(trace)
    draws = np.array([float(np.mean(rec.cf1 - rec.cf0))
                      for rec in trace.records])
    return EffectSummary.from_draws(draws)


def _continuous_guard(trace):
    if trace.meta.scheme != MARGINAL:
        raise SchemeMismatch("continuous-exposure estimands require the "
                             "marginal scheme")
    if trace.meta.exposure_kind != CONTINUOUS:
        raise UnsupportedForBinary("exposure is binary; use the ATE")
    _require_records(trace)


def _check_support(trace, value: float, strict: bool):
    lo, hi = trace.meta.a_min, trace.meta.a_max
    if value < lo or value > hi:
        msg = (f"exposure level {value!r} lies outside the observed range "
               f"[{lo!r}, {hi!r}]")
        if strict:
            raise OutOfSupport(msg)
        warnings.warn(msg)


def _grid_means(trace, X: np.ndarray, a_value: float) -> np.ndarray:
    """Per-draw mean outcome fit with every row's exposure set to a_value."""
    n = X.shape[0]
    design = np.empty((n, X.shape[1] + 1))
    design[:, 0] = a_value
    design[:, 1:] = X
    return np.array([float(snapshot_forest_fit(rec.snapshots, design).mean())
                     for rec in trace.records])


def contrast_continuous(trace, X: np.ndarray, a: float, a_prime: float,
                        strict: bool = True) -> EffectSummary:
    """Posterior contrast E[Y(a)] - E[Y(a')] for a continuous exposure.

    X is the covariate matrix the chain was fitted on; the stored forests
    are evaluated with the exposure coordinate forced to each level.
    """
    _continuous_guard(trace)
    _check_support(trace, a, strict)
    _check_support(trace, a_prime, strict)
    draws = _grid_means(trace, X, a) - _grid_means(trace, X, a_prime)
    return EffectSummary.from_draws(draws)


def exposure_response(trace, X: np.ndarray,
                      grid: Sequence[float]) -> List[EffectSummary]:
    """Partial-dependence curve of E[Y(a)] over an exposure grid."""
    _continuous_guard(trace)
    grid = list(grid)
    if not grid:
        raise EmptyGrid("exposure grid is empty")
    for value in grid:
        _check_support(trace, value, strict=False)
    return [EffectSummary.from_draws(_grid_means(trace, X, value))
            for value in grid]
