"""Bayesian backfitting: one Gibbs sweep over a single BART model.

A sweep walks the trees in fixed index order. For each tree it forms the
partial residuals from the fit caches, proposes one structural move, accepts
or rejects it, then redraws every leaf mean conjugately. Continuous-response
models redraw sigma2 once after all trees; the probit exposure model keeps
sigma2 fixed at 1 and refreshes its truncated-normal latents before the
sweep.

RNG consumption per tree is fixed (kind, proposal draws, one acceptance
uniform, one normal per leaf) so a state is bit-reproducible from the seed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .data import Hyperparams
from .errors import NoApplicableMove, NoGrowableNode
from .moves import (CHANGE, GROW, PRUNE, apply_move, log_accept_change,
                    log_accept_grow, log_accept_prune, propose_change,
                    propose_grow, propose_prune, sample_move_kind)
from .priors import (LeafPrior, draw_inverse_gamma, leaf_posterior_params,
                     probit_latent_update, sigma2_posterior_params)
from .trees import Tree

EXPOSURE = "exposure"
OUTCOME_MARGINAL = "outcome_marginal"
OUTCOME_ARM0 = "outcome_arm0"
OUTCOME_ARM1 = "outcome_arm1"


@dataclass
class MoveLog:
    """Per-sweep counts of proposed and accepted moves by kind."""

    proposed: dict = field(default_factory=lambda: {GROW: 0, PRUNE: 0, CHANGE: 0})
    accepted: dict = field(default_factory=lambda: {GROW: 0, PRUNE: 0, CHANGE: 0})
    skipped: int = 0

    def merge(self, other: "MoveLog") -> None:
        for kind in self.proposed:
            self.proposed[kind] += other.proposed[kind]
            self.accepted[kind] += other.accepted[kind]
        self.skipped += other.skipped


@dataclass
class ModelState:
    """One BART model: its forest, fit caches, response, and variance."""

    forest: list
    fits: np.ndarray
    total_fit: np.ndarray
    response: np.ndarray
    sigma2: float
    leaf_prior: LeafPrior
    role: str
    X: np.ndarray
    sigma2_free: bool

    @classmethod
    def create(cls, X: np.ndarray, response: np.ndarray, leaf_prior: LeafPrior,
               role: str, sigma2: float, sigma2_free: bool) -> "ModelState":
        X = np.asfortranarray(X, dtype=np.float64)
        n = X.shape[0]
        h = leaf_prior.h
        forest = [Tree(X) for _ in range(h)]
        for tree in forest:
            tree.root.mu = leaf_prior.leaf_mean
        fits = np.full((h, n), leaf_prior.leaf_mean)
        total_fit = fits.sum(axis=0)
        return cls(forest=forest, fits=fits, total_fit=total_fit,
                   response=np.array(response, dtype=np.float64),
                   sigma2=sigma2, leaf_prior=leaf_prior, role=role, X=X,
                   sigma2_free=sigma2_free)

    @property
    def n(self) -> int:
        return self.X.shape[0]


def partial_residuals(state: ModelState, j: int) -> np.ndarray:
    """Response minus the fit of every tree except tree j."""
    return state.response - state.total_fit + state.fits[j]


def _propose(tree: Tree, kind: str, rng, s_local: np.ndarray):
    if kind == GROW:
        return propose_grow(tree, rng, s_local)
    if kind == PRUNE:
        return propose_prune(tree, rng)
    return propose_change(tree, rng, s_local)


def _log_accept(proposal, sigma2: float, sigma_mu2: float,
                residuals: np.ndarray, hyper: Hyperparams) -> float:
    if proposal.kind == GROW:
        return log_accept_grow(proposal, sigma2, sigma_mu2, residuals,
                               hyper.p_grow, hyper.p_prune,
                               hyper.beta1, hyper.beta2)
    if proposal.kind == PRUNE:
        return log_accept_prune(proposal, sigma2, sigma_mu2, residuals,
                                hyper.p_grow, hyper.p_prune,
                                hyper.beta1, hyper.beta2)
    return log_accept_change(proposal, sigma2, sigma_mu2, residuals)


def sweep(state: ModelState, s_local: np.ndarray, rng,
          hyper: Hyperparams) -> MoveLog:
    """One backfitting pass over every tree, then the variance draw."""
    log = MoveLog()
    prior = state.leaf_prior
    sigma_mu2 = prior.leaf_var

    for j, tree in enumerate(state.forest):
        residuals = state.response - state.total_fit + state.fits[j]

        kind = sample_move_kind(rng, tree, hyper.p_grow, hyper.p_prune)
        try:
            proposal = _propose(tree, kind, rng, s_local)
        except (NoGrowableNode, NoApplicableMove):
            log.skipped += 1
            proposal = None
        if proposal is not None:
            log.proposed[kind] += 1
            log_r = _log_accept(proposal, state.sigma2, sigma_mu2,
                                residuals, hyper)
            u = rng.random()
            if not math.isnan(log_r) and (log_r >= 0.0 or u < math.exp(log_r)):
                apply_move(tree, proposal)
                log.accepted[kind] += 1

        # conjugate leaf redraw on the (possibly new) structure
        state.total_fit -= state.fits[j]
        row_fit = state.fits[j]
        for leaf in tree.terminal_nodes():
            r_sum = K.subset_sum(residuals, leaf.rows)
            mean, var = leaf_posterior_params(r_sum, leaf.n_rows,
                                              state.sigma2, prior)
            leaf.mu = mean + math.sqrt(var) * rng.standard_normal()
            K.assign_leaf(row_fit, leaf.rows, leaf.mu)
        state.total_fit += state.fits[j]

    # drop the incremental roundoff accumulated by the subtract/add updates
    state.total_fit = state.fits.sum(axis=0)

    if state.sigma2_free:
        shape, rate = sigma2_posterior_params(state.response - state.total_fit,
                                              hyper.a_sigma, hyper.b_sigma)
        state.sigma2 = draw_inverse_gamma(rng, shape, rate)
    return log


def probit_sweep(state: ModelState, a: np.ndarray, s_local: np.ndarray, rng,
                 hyper: Hyperparams) -> MoveLog:
    """Latent refresh plus one sweep for the binary exposure model."""
    state.response = probit_latent_update(a, state.total_fit, rng)
    return sweep(state, s_local, rng, hyper)
