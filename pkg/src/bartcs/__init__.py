"""Confounder-selecting BART for causal effect estimation.

Two linked-model schemes share a Dirichlet prior over splitting variables:
the separate scheme fits an exposure forest plus one outcome forest per
treatment arm; the marginal scheme fits an exposure forest plus a single
outcome forest that carries the exposure as covariate index 0.
"""

from ._kernels import BACKEND
from .backfit import ModelState, MoveLog, partial_residuals, probit_sweep, sweep
from .chain import (ChainState, InclusionFlag, Trace, TraceMeta, TraceRecord,
                    counterfactual_fits_marginal, exposure_inclusion_guard,
                    run_chain, run_chains)
from .data import (BINARY, CONTINUOUS, MARGINAL, SEPARATE, ChainConfig,
                   Dataset, Hyperparams, OutcomeRecord, arm_indices,
                   standardize_outcome)
from .diagnostics import (ClassDecomposition, InclusionReport,
                          class_decomposition, gelman_rubin, pip,
                          posterior_predictive)
from .effects import (EffectSummary, ate_marginal, ate_separate,
                      contrast_continuous, exposure_response)
from .errors import BartcsError
from .moves import (MoveProposal, depth_split_prob, log_accept_change,
                    log_accept_grow, log_accept_prune, propose_change,
                    propose_grow, propose_prune, prune_proposal_at,
                    sample_move_kind)
from .priors import (AlphaState, LeafPrior, SplitProbVector,
                     calibrate_leaf_prior, dirichlet_moments,
                     leaf_posterior_params, marginal_log_accept,
                     probit_latent_update,
                     sigma2_posterior_params, update_alpha,
                     update_s_marginal, update_s_separate)
from .sim import (ScenarioSpec, SimulationResult, gen_scenario,
                  make_scenario, run_replicates, true_effect, worker_count)
from .trees import (SplitCounts, SplitRule, Tree, available_predictors,
                    evaluate, forest_fit, singly_internal_count,
                    split_counts, valid_cutpoints)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
