"""Full MCMC chains linking the exposure and outcome models through a
shared split-selection simplex.

Separate scheme: probit exposure model plus one outcome forest per arm, all
over the P covariates; s is a P-simplex with a conjugate Dirichlet update.
Marginal scheme: exposure model over the P covariates plus a single outcome
forest over (exposure, covariates); s is a (P+1)-simplex updated by
independence MH, coordinate 0 belonging to the exposure.

Iteration order is fixed: exposure sweep, outcome sweep(s), s update, alpha
update. Retention keeps iterations past burn_in at the thinning stride.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .backfit import (EXPOSURE, OUTCOME_ARM0, OUTCOME_ARM1, OUTCOME_MARGINAL,
                      ModelState, MoveLog, probit_sweep, sweep)
from .data import (BINARY, CONTINUOUS, MARGINAL, SEPARATE, ChainConfig,
                   Dataset, Hyperparams, arm_indices, standardize_outcome)
from .errors import SchemeMismatch
from .priors import SplitProbVector, calibrate_leaf_prior, update_alpha, \
    update_s_marginal, update_s_separate
from .trees import SplitCounts, forest_fit, split_counts

# prior range of the probit latents; fits live a couple of sd around 0
LATENT_RANGE = (-3.0, 3.0)


@dataclass(frozen=True)
class TraceRecord:
    """One retained draw.

    cf1/cf0 hold counterfactual fits over all N rows for binary exposure.
    For continuous exposure the outcome forest is stored as snapshots and
    evaluated on demand instead.
    """

    iteration: int
    m: np.ndarray
    n: Optional[np.ndarray]
    n0: Optional[np.ndarray]
    n1: Optional[np.ndarray]
    cf1: Optional[np.ndarray]
    cf0: Optional[np.ndarray]
    snapshots: Optional[list]
    sigma2: dict
    alpha: float
    s: np.ndarray

    @property
    def counts(self) -> SplitCounts:
        return SplitCounts(m=self.m, n=self.n, n0=self.n0, n1=self.n1)


@dataclass
class TraceMeta:
    """Chain-level context a consumer needs to interpret the records."""

    scheme: str
    exposure_kind: str
    n: int
    p: int
    names: tuple
    seed: int
    n_iter: int
    burn_in: int
    thin: int
    chain_index: int
    y_min: float
    y_max: float
    a_min: float
    a_max: float
    move_totals: dict = field(default_factory=dict)


@dataclass
class Trace:
    """Sequence of retained draws plus interpretation metadata."""

    meta: TraceMeta
    records: List[TraceRecord]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


@dataclass
class ChainState:
    """All mutable state of one chain between iterations."""

    scheme: str
    exposure: ModelState
    outcomes: List[ModelState]
    s: SplitProbVector
    alpha: float
    rng: np.random.Generator
    iteration: int = 0


@dataclass(frozen=True)
class InclusionFlag:
    """Per-draw exposure-inclusion readout for the marginal scheme."""

    n0: int
    s0: float
    flagged: bool


def exposure_inclusion_guard(counts: SplitCounts, s: SplitProbVector) -> InclusionFlag:
    """Flag (without altering) draws whose outcome forest ignores the exposure."""
    if counts.n is None:
        raise SchemeMismatch("exposure-inclusion readout requires marginal counts")
    n0 = int(counts.n[0])
    return InclusionFlag(n0=n0, s0=float(s.probs[0]), flagged=n0 == 0)


def counterfactual_fits_marginal(forest, X_design: np.ndarray,
                                 a_value: float) -> np.ndarray:
    """Outcome-forest fit with the exposure column forced to a_value."""
    X_cf = X_design.copy()
    X_cf[:, 0] = a_value
    return forest_fit(forest, X_cf)


def _arm_variance(y_arm: np.ndarray) -> float:
    if y_arm.shape[0] < 2:
        return 1.0
    v = float(np.var(y_arm, ddof=1))
    return v if math.isfinite(v) and v > 0 else 1.0


def _init_state(dataset: Dataset, hyper: Hyperparams, config: ChainConfig,
                rng: np.random.Generator) -> ChainState:
    scheme = config.scheme
    binary = dataset.exposure_kind == BINARY
    if scheme == SEPARATE and not binary:
        raise SchemeMismatch("separate scheme requires a binary exposure")

    _, y_rec = standardize_outcome(dataset.y)
    y_prior = calibrate_leaf_prior(y_rec.y_min, y_rec.y_max, hyper.h,
                                   hyper.k_leaf)

    if binary:
        exp_prior = calibrate_leaf_prior(LATENT_RANGE[0], LATENT_RANGE[1],
                                         hyper.h, hyper.k_leaf)
        exposure = ModelState.create(dataset.X, np.zeros(dataset.n),
                                     exp_prior, EXPOSURE, sigma2=1.0,
                                     sigma2_free=False)
    else:
        a_min, a_max = float(dataset.a.min()), float(dataset.a.max())
        exp_prior = calibrate_leaf_prior(a_min, a_max, hyper.h, hyper.k_leaf)
        exposure = ModelState.create(dataset.X, dataset.a, exp_prior,
                                     EXPOSURE, sigma2=_arm_variance(dataset.a),
                                     sigma2_free=True)

    if scheme == SEPARATE:
        i0, i1 = arm_indices(dataset)
        outcomes = []
        for rows, role in ((i0, OUTCOME_ARM0), (i1, OUTCOME_ARM1)):
            X_arm = np.asfortranarray(dataset.X[rows])
            y_arm = dataset.y[rows]
            outcomes.append(ModelState.create(
                X_arm, y_arm, y_prior, role,
                sigma2=_arm_variance(y_arm), sigma2_free=True))
        k = dataset.p
    else:
        X_design = np.asfortranarray(
            np.column_stack([dataset.a, dataset.X]))
        outcomes = [ModelState.create(
            X_design, dataset.y, y_prior, OUTCOME_MARGINAL,
            sigma2=_arm_variance(dataset.y), sigma2_free=True)]
        k = dataset.p + 1

    # alpha = P makes the initial concentration alpha/P = 1 per coordinate
    return ChainState(scheme=scheme, exposure=exposure, outcomes=outcomes,
                      s=SplitProbVector.uniform(k, scheme),
                      alpha=float(dataset.p), rng=rng)


def _record(state: ChainState, dataset: Dataset, counts: SplitCounts,
            binary: bool) -> TraceRecord:
    sigma2 = {}
    if state.exposure.sigma2_free:
        sigma2[EXPOSURE] = state.exposure.sigma2
    for model in state.outcomes:
        sigma2[model.role] = model.sigma2

    cf1 = cf0 = None
    snapshots = None
    if state.scheme == SEPARATE:
        cf0 = forest_fit(state.outcomes[0].forest, dataset.X)
        cf1 = forest_fit(state.outcomes[1].forest, dataset.X)
    elif binary:
        design = state.outcomes[0].X
        cf1 = counterfactual_fits_marginal(state.outcomes[0].forest, design, 1.0)
        cf0 = counterfactual_fits_marginal(state.outcomes[0].forest, design, 0.0)
    else:
        snapshots = [tree.snapshot() for tree in state.outcomes[0].forest]

    return TraceRecord(
        iteration=state.iteration,
        m=counts.m.copy(),
        n=None if counts.n is None else counts.n.copy(),
        n0=None if counts.n0 is None else counts.n0.copy(),
        n1=None if counts.n1 is None else counts.n1.copy(),
        cf1=cf1, cf0=cf0, snapshots=snapshots,
        sigma2=sigma2, alpha=state.alpha, s=state.s.probs.copy())


def run_chain(dataset: Dataset, hyper: Hyperparams, config: ChainConfig,
              seed_seq: Optional[np.random.SeedSequence] = None,
              chain_index: int = 0) -> Trace:
    """Run one chain and return its retained trace."""
    if seed_seq is None:
        seed_seq = np.random.SeedSequence(config.seed)
    rng = np.random.Generator(np.random.PCG64(seed_seq))

    state = _init_state(dataset, hyper, config, rng)
    binary = dataset.exposure_kind == BINARY
    p = dataset.p

    move_totals = {state.exposure.role: MoveLog()}
    for model in state.outcomes:
        move_totals[model.role] = MoveLog()

    if state.scheme == MARGINAL:
        s_exposure_view = lambda s: s.probs[1:]
    else:
        s_exposure_view = lambda s: s.probs

    records = []
    for it in range(1, config.n_iter + 1):
        state.iteration = it

        if binary:
            log = probit_sweep(state.exposure, dataset.a,
                               s_exposure_view(state.s), state.rng, hyper)
        else:
            log = sweep(state.exposure, s_exposure_view(state.s),
                        state.rng, hyper)
        move_totals[state.exposure.role].merge(log)

        for model in state.outcomes:
            log = sweep(model, state.s.probs, state.rng, hyper)
            move_totals[model.role].merge(log)

        counts = split_counts(state.exposure.forest,
                              [m.forest for m in state.outcomes],
                              p, state.scheme)

        if state.scheme == SEPARATE:
            state.s = update_s_separate(counts, state.alpha, p, state.rng)
        else:
            if hyper.c_offset_mode == "n0":
                c = float(counts.n[0])
            else:
                c = hyper.c_offset_value
            state.s, _ = update_s_marginal(counts, state.alpha, p, c,
                                           state.s, state.rng)

        state.alpha = update_alpha(state.s, state.alpha, p, hyper.a0,
                                   hyper.b0, state.rng,
                                   step=hyper.alpha_step)

        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            records.append(_record(state, dataset, counts, binary))

    _, y_rec = standardize_outcome(dataset.y)
    meta = TraceMeta(
        scheme=state.scheme, exposure_kind=dataset.exposure_kind,
        n=dataset.n, p=p, names=dataset.names, seed=config.seed,
        n_iter=config.n_iter, burn_in=config.burn_in, thin=config.thin,
        chain_index=chain_index,
        y_min=y_rec.y_min, y_max=y_rec.y_max,
        a_min=float(dataset.a.min()), a_max=float(dataset.a.max()),
        move_totals=move_totals)
    return Trace(meta=meta, records=records)


def run_chains(dataset: Dataset, hyper: Hyperparams,
               config: ChainConfig) -> List[Trace]:
    """Run config.n_chains chains with independent spawned substreams."""
    root = np.random.SeedSequence(config.seed)
    children = root.spawn(config.n_chains)
    return [run_chain(dataset, hyper, config, seed_seq=child, chain_index=i)
            for i, child in enumerate(children)]
