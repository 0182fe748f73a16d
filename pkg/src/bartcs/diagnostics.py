"""Posterior inclusion probabilities, model-class decomposition,
Gelman-Rubin diagnostic, and posterior predictive replicates."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .backfit import OUTCOME_ARM0, OUTCOME_ARM1, OUTCOME_MARGINAL
from .data import BINARY, MARGINAL, SEPARATE
from .errors import ChainLengthMismatch, EmptyTrace, SetNesting
from .trees import snapshot_forest_fit

OUTCOME_MODELS = "outcome"
EXPOSURE_MODEL = "exposure"
ANY_MODEL = "any"


@dataclass(frozen=True)
class InclusionReport:
    """Per-covariate split-inclusion probabilities over retained draws."""

    selector: str
    n_draws: int
    names: tuple
    probs: np.ndarray
    exposure_prob: Optional[float]


@dataclass(frozen=True)
class ClassDecomposition:
    """Fractions of draws whose outcome model covers the required sets."""

    fraction_r_cap: float
    fraction_r_star: float
    x_cap: tuple
    x_star: tuple


def _covariate_outcome_counts(record) -> np.ndarray:
    if record.n is not None:
        return record.n[1:]
    return record.n0 + record.n1


def pip(trace, selector: str = OUTCOME_MODELS) -> InclusionReport:
    """Fraction of retained draws where each covariate has >= 1 split.

    selector picks the counted model(s): the outcome model(s), the exposure
    model, or any of them. In the marginal scheme the outcome selectors also
    report the exposure variable's own inclusion.
    """
    if len(trace.records) == 0:
        raise EmptyTrace("cannot compute inclusion from an empty trace")
    if selector not in (OUTCOME_MODELS, EXPOSURE_MODEL, ANY_MODEL):
        raise ValueError(f"unknown selector {selector!r}")

    hits = np.zeros(trace.meta.p)
    exposure_hits = 0
    track_exposure = (trace.meta.scheme == MARGINAL
                      and selector != EXPOSURE_MODEL)
    for rec in trace.records:
        if selector == OUTCOME_MODELS:
            counts = _covariate_outcome_counts(rec)
        elif selector == EXPOSURE_MODEL:
            counts = rec.m
        else:
            counts = rec.m + _covariate_outcome_counts(rec)
        hits += counts >= 1
        if track_exposure and rec.n[0] >= 1:
            exposure_hits += 1

    n_draws = len(trace.records)
    return InclusionReport(
        selector=selector, n_draws=n_draws, names=trace.meta.names,
        probs=hits / n_draws,
        exposure_prob=exposure_hits / n_draws if track_exposure else None)


def class_decomposition(trace, x_cap: Sequence[int],
                        x_star: Sequence[int]) -> ClassDecomposition:
    """Fractions of draws whose outcome model splits on all of each set.

    x_cap and x_star are 0-based covariate indices with x_cap a subset of
    x_star, so the star fraction can never exceed the cap fraction.
    """
    if len(trace.records) == 0:
        raise EmptyTrace("cannot decompose an empty trace")
    cap = tuple(sorted(set(int(j) for j in x_cap)))
    star = tuple(sorted(set(int(j) for j in x_star)))
    if not set(cap) <= set(star):
        raise SetNesting("x_cap must be a subset of x_star")
    for j in star:
        if j < 0 or j >= trace.meta.p:
            raise SetNesting(f"covariate index {j} out of range")

    cap_idx = np.array(cap, dtype=np.int64)
    star_idx = np.array(star, dtype=np.int64)
    in_cap = in_star = 0
    for rec in trace.records:
        counts = _covariate_outcome_counts(rec)
        if cap_idx.size == 0 or np.all(counts[cap_idx] >= 1):
            in_cap += 1
        if star_idx.size == 0 or np.all(counts[star_idx] >= 1):
            in_star += 1
    n_draws = len(trace.records)
    return ClassDecomposition(fraction_r_cap=in_cap / n_draws,
                              fraction_r_star=in_star / n_draws,
                              x_cap=cap, x_star=star)


def gelman_rubin(chains: Sequence[np.ndarray]) -> float:
    """Classic potential-scale-reduction factor over scalar chains."""
    if len(chains) < 2:
        raise ChainLengthMismatch("need at least two chains")
    arrays = [np.asarray(c, dtype=np.float64) for c in chains]
    n = arrays[0].shape[0]
    if n < 2:
        raise ChainLengthMismatch("chains must hold at least two draws")
    for arr in arrays[1:]:
        if arr.shape[0] != n:
            raise ChainLengthMismatch("chains differ in retained length")

    within = float(np.mean([np.var(arr, ddof=1) for arr in arrays]))
    means = np.array([arr.mean() for arr in arrays])
    between_over_n = float(np.var(means, ddof=1))
    if within == 0.0:
        return math.inf
    return math.sqrt(((n - 1) / n * within + between_over_n) / within)


def posterior_predictive(trace, dataset, k: int, rng) -> np.ndarray:
    """k replicated outcome vectors from uniformly chosen retained draws.

    Each replicate adds draw-specific Gaussian noise to the outcome fit at
    the observed exposure (arm-appropriate fit and variance for the
    separate scheme).
    """
    if len(trace.records) == 0:
        raise EmptyTrace("cannot replicate from an empty trace")
    if k < 1:
        raise ValueError("k must be at least 1")

    n = dataset.n
    a = dataset.a
    reps = np.empty((k, n))
    picks = rng.integers(len(trace.records), size=k)

    if (trace.meta.scheme == MARGINAL
            and trace.meta.exposure_kind != BINARY):
        design = np.column_stack([dataset.a, dataset.X])
    else:
        design = None

    for row, idx in enumerate(picks):
        rec = trace.records[int(idx)]
        if trace.meta.scheme == SEPARATE:
            fit = np.where(a == 1.0, rec.cf1, rec.cf0)
            sd = np.where(a == 1.0,
                          math.sqrt(rec.sigma2[OUTCOME_ARM1]),
                          math.sqrt(rec.sigma2[OUTCOME_ARM0]))
        elif trace.meta.exposure_kind == BINARY:
            fit = np.where(a == 1.0, rec.cf1, rec.cf0)
            sd = math.sqrt(rec.sigma2[OUTCOME_MARGINAL])
        else:
            fit = snapshot_forest_fit(rec.snapshots, design)
            sd = math.sqrt(rec.sigma2[OUTCOME_MARGINAL])
        reps[row] = fit + sd * rng.standard_normal(n)
    return reps
