"""Parameter updates outside the tree moves.

Covers leaf-prior calibration, leaf-mean posteriors, the inverse-gamma
variance update, the Dirichlet / MH updates of the split-selection simplex,
the MH update of its concentration alpha, and the truncated-normal latent
draw for the probit exposure model.

Selection probabilities are carried in log space: concentrations near zero
produce Dirichlet draws far below the smallest positive double, and the MH
ratio for the marginal scheme needs their logs exactly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, log_ndtr, logsumexp, ndtri_exp

from .data import MARGINAL, SEPARATE
from .errors import ConstantOutcome
from .trees import SplitCounts

TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class LeafPrior:
    """Leaf-mean prior: each leaf is Normal(mu_mu / h, sigma_mu**2).

    Calibrated so the h-tree sum has prior mean mu_mu and +-2 sd range
    exactly [y_min, y_max].
    """

    mu_mu: float
    sigma_mu: float
    h: int

    @property
    def leaf_mean(self) -> float:
        return self.mu_mu / self.h

    @property
    def leaf_var(self) -> float:
        return self.sigma_mu * self.sigma_mu


def calibrate_leaf_prior(y_min: float, y_max: float, h: int,
                         k_leaf: float = 2.0) -> LeafPrior:
    """Solve h*mu_mu/h = center and 2*k_leaf*sqrt(h)*sigma_mu = range."""
    if not y_max > y_min:
        raise ConstantOutcome("outcome range is empty; cannot calibrate leaf prior")
    mu_mu = 0.5 * (y_min + y_max)
    sigma_mu = (y_max - y_min) / (2.0 * k_leaf * math.sqrt(h))
    return LeafPrior(mu_mu=mu_mu, sigma_mu=sigma_mu, h=h)


def leaf_posterior_params(residual_sum: float, n_eta: int, sigma2: float,
                          prior: LeafPrior) -> tuple:
    """Normal posterior (mean, variance) of one leaf mean.

    residual_sum is the partial-residual total over the leaf's rows.
    """
    prec = 1.0 / prior.leaf_var + n_eta / sigma2
    var = 1.0 / prec
    mean = var * (prior.leaf_mean / prior.leaf_var + residual_sum / sigma2)
    return mean, var


def sigma2_posterior_params(residuals: np.ndarray, a_sigma: float,
                            b_sigma: float) -> tuple:
    """Inverse-gamma (shape, rate) given full-model residuals."""
    n = residuals.shape[0]
    ssr = float(residuals @ residuals)
    return a_sigma + 0.5 * n, b_sigma + 0.5 * ssr


def draw_inverse_gamma(rng, shape: float, rate: float) -> float:
    """Draw X with density proportional to x^(-shape-1) exp(-rate/x)."""
    return rate / rng.standard_gamma(shape)


@dataclass(frozen=True)
class SplitProbVector:
    """Split-selection simplex with matching log values.

    In the marginal scheme index 0 is the exposure coordinate s0 and the
    exposure-model predictor probabilities are probs[1:] / (1 - s0); sampling
    proportional to probs[1:] realizes that renormalization implicitly.
    """

    probs: np.ndarray
    log_probs: np.ndarray
    scheme: str

    def __post_init__(self):
        total = float(self.probs.sum())
        if not math.isclose(total, 1.0, abs_tol=1e-12):
            raise ValueError(f"simplex sums to {total!r}")

    @property
    def k(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, k: int, scheme: str) -> "SplitProbVector":
        probs = np.full(k, 1.0 / k)
        return cls(probs=probs, log_probs=np.log(probs), scheme=scheme)

    @classmethod
    def from_log(cls, log_weights: np.ndarray, scheme: str) -> "SplitProbVector":
        log_probs = log_weights - logsumexp(log_weights)
        probs = np.exp(log_probs)
        probs /= probs.sum()
        return cls(probs=probs, log_probs=log_probs, scheme=scheme)


@dataclass(frozen=True)
class AlphaState:
    """Current Dirichlet concentration parameter."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def _dirichlet_log_draw(rng, concentration: np.ndarray) -> np.ndarray:
    """Log of a Dirichlet draw, stable for concentrations near zero.

    Uses Gamma(a) = Gamma(a+1) * U^(1/a): the log of a tiny gamma variate
    stays finite where the variate itself would underflow.
    """
    g = rng.standard_gamma(concentration + 1.0)
    u = rng.random(concentration.shape[0])
    log_g = np.log(g) + np.log1p(-u) / concentration
    return log_g - logsumexp(log_g)


def _separate_concentration(counts: SplitCounts, alpha: float,
                            p: int) -> np.ndarray:
    base = np.full(p, alpha / p)
    return base + counts.m + counts.n0 + counts.n1


def update_s_separate(counts: SplitCounts, alpha: float, p: int,
                      rng) -> SplitProbVector:
    """Conjugate draw s ~ Dirichlet(alpha/P + m_j + n_j0 + n_j1)."""
    conc = _separate_concentration(counts, alpha, p)
    return SplitProbVector.from_log(_dirichlet_log_draw(rng, conc), SEPARATE)


def dirichlet_moments(counts: SplitCounts, alpha: float, p: int) -> tuple:
    """Closed-form (mean, variance) vectors of the separate-scheme update."""
    conc = _separate_concentration(counts, alpha, p)
    total = conc.sum()
    mean = conc / total
    var = conc * (total - conc) / (total * total * (total + 1.0))
    return mean, var


def marginal_log_accept(log_s0_cur: float, log_one_minus_s0_cur: float,
                        log_s0_new: float, log_one_minus_s0_new: float,
                        m_total: int, c: float) -> float:
    """Log MH ratio for the marginal-scheme simplex proposal.

    log of ((1-s0)/(1-s0_new))^M * (s0/s0_new)^c; the c term corrects for
    the offset added to the exposure coordinate of the proposal.
    """
    return (m_total * (log_one_minus_s0_cur - log_one_minus_s0_new)
            + c * (log_s0_cur - log_s0_new))


def update_s_marginal(counts: SplitCounts, alpha: float, p: int, c: float,
                      current: SplitProbVector, rng) -> tuple:
    """One independence-MH step on the marginal-scheme simplex.

    Proposes Dirichlet(n0 + c + alpha/P, {m_j + n_j + alpha/P}) over P+1
    coordinates and accepts with probability
    min{1, ((1-s0)/(1-s0_new))^M * (s0/s0_new)^c}, M = total exposure-model
    splits. Returns (vector, accepted); on rejection the current vector is
    returned unchanged. A proposal whose off-exposure mass underflows cannot
    be scored and is rejected.
    """
    base = alpha / p
    conc = np.empty(p + 1)
    conc[0] = counts.n[0] + c + base
    conc[1:] = counts.m + counts.n[1:] + base

    log_new = _dirichlet_log_draw(rng, conc)
    u = rng.random()

    big_m = counts.total_m
    log_one_minus_s0_new = logsumexp(log_new[1:])
    if np.isinf(log_one_minus_s0_new):
        return current, False
    log_one_minus_s0_cur = logsumexp(current.log_probs[1:])

    log_ratio = marginal_log_accept(
        current.log_probs[0], log_one_minus_s0_cur,
        log_new[0], log_one_minus_s0_new, big_m, c)
    if math.isnan(log_ratio):
        return current, False
    if log_ratio >= 0.0 or u < math.exp(log_ratio):
        return SplitProbVector.from_log(log_new, MARGINAL), True
    return current, False


def _log_alpha_target(alpha: float, sum_log_s: float, k: int, p: int,
                      a0: float, b0: float) -> float:
    """Unnormalized log density of alpha given s, on the log-alpha scale.

    Dirichlet(alpha/P) likelihood of s (K coordinates), the Beta(a0, b0)
    prior on alpha/(alpha+P), and the log-scale Jacobian.
    """
    a = alpha / p
    log_lik = gammaln(k * a) - k * gammaln(a) + (a - 1.0) * sum_log_s
    log_prior = (a0 - 1.0) * math.log(alpha) - (a0 + b0) * math.log(alpha + p)
    return log_lik + log_prior + math.log(alpha)


def update_alpha(s: SplitProbVector, alpha: float, p: int, a0: float,
                 b0: float, rng, step: float = 0.3) -> float:
    """Gaussian random walk on log(alpha), one MH step."""
    sum_log_s = float(s.log_probs.sum())
    proposal = alpha * math.exp(step * rng.standard_normal())
    u = rng.random()
    delta = (_log_alpha_target(proposal, sum_log_s, s.k, p, a0, b0)
             - _log_alpha_target(alpha, sum_log_s, s.k, p, a0, b0))
    if math.isnan(delta):
        return alpha
    if delta >= 0.0 or u < math.exp(delta):
        return proposal
    return alpha


def probit_latent_update(a: np.ndarray, fitted: np.ndarray, rng) -> np.ndarray:
    """Truncated-normal latents: Z_i ~ N(fitted_i, 1) on the side given by a_i.

    a_i = 1 truncates to (0, inf), a_i = 0 to (-inf, 0]. The cdf inversion
    runs in log space through the tail nearest the truncation boundary, so
    fits far on the wrong side of it stay finite.
    """
    u = rng.random(a.shape[0])
    z = np.empty_like(fitted)

    pos = a == 1.0
    neg = ~pos
    # a=1: 1 - F(z) = (1-u) * Phi(f), inverted through the upper tail
    z[pos] = fitted[pos] - ndtri_exp(np.log1p(-u[pos])
                                     + log_ndtr(fitted[pos]))
    # a=0: F(z) = u * Phi(-f)
    z[neg] = fitted[neg] + ndtri_exp(np.log(np.maximum(u[neg], TINY))
                                     + log_ndtr(-fitted[neg]))

    z[pos] = np.maximum(z[pos], TINY)
    z[neg] = np.minimum(z[neg], 0.0)
    return z
