"""GROW / PRUNE / CHANGE proposals and their log acceptance ratios.

The three ratios share one core expression: a PRUNE is scored as the exact
negation of the GROW that would undo it, with the structural inputs (terminal
count, singly-internal counts, predictor availability) derived independently
from the tree at hand. Acceptance uses min(1, exp(log_r)).

Splitting variables are drawn from the shared selection simplex restricted to
the predictors available at the target node; the ratios keep the printed
uniform-proposal terms p_eta * n_{p,eta}.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import NoApplicableMove, NoGrowableNode
from .trees import Node, SplitRule, Tree, available_predictors, valid_cutpoints

GROW = "grow"
PRUNE = "prune"
CHANGE = "change"


@dataclass
class MoveProposal:
    """One applicable move with the cached inputs its ratio needs.

    For GROW, node is the terminal node being split and left/right_rows the
    new partition. For PRUNE, node is the singly internal node being
    collapsed and left/right_rows its existing children's rows. For CHANGE,
    node is the singly internal node whose rule is replaced and
    left/right_rows the partition under the proposed rule.
    """

    kind: str
    node: Node
    rule: Optional[SplitRule]
    left_rows: np.ndarray
    right_rows: np.ndarray
    b: int
    w: int
    w_star: int
    p_eta: int
    n_p_eta: int
    depth: int


def depth_split_prob(d: int, beta1: float = 0.95, beta2: float = 2.0) -> float:
    """Prior probability that a depth-d node is internal: beta1/(1+d)^beta2."""
    return beta1 / (1.0 + d) ** beta2


def sample_move_kind(rng, tree: Tree, p_grow: float = 0.28,
                     p_prune: float = 0.28) -> str:
    """Draw a move kind; a stump admits only GROW."""
    if tree.is_stump:
        return GROW
    u = rng.random()
    if u < p_grow:
        return GROW
    if u < p_grow + p_prune:
        return PRUNE
    return CHANGE


def _weighted_index(rng, avail: np.ndarray, s_local: np.ndarray) -> int:
    """Sample an entry of avail with probability proportional to s_local."""
    weights = s_local[avail]
    total = weights.sum()
    if total <= 0.0:
        # restricted simplex carries no mass; degrade to a uniform choice
        return int(avail[rng.integers(avail.shape[0])])
    cdf = np.cumsum(weights)
    u = rng.random() * total
    k = int(np.searchsorted(cdf, u, side="right"))
    return int(avail[min(k, avail.shape[0] - 1)])


def propose_grow(tree: Tree, rng, s_local: np.ndarray) -> MoveProposal:
    """Propose splitting a uniformly chosen growable terminal node.

    The splitting variable is drawn from s_local restricted to the predictors
    available at the node; the cutpoint uniformly from the admissible pool.
    """
    terminals = tree.terminal_nodes()
    growable = []
    avail_sets = []
    for leaf in terminals:
        if leaf.n_rows < 2:
            continue
        avail = available_predictors(tree, leaf)
        if avail.shape[0] > 0:
            growable.append(leaf)
            avail_sets.append(avail)
    if not growable:
        raise NoGrowableNode("no terminal node admits a split")

    k = int(rng.integers(len(growable)))
    leaf, avail = growable[k], avail_sets[k]
    var = _weighted_index(rng, avail, s_local)
    pool = valid_cutpoints(tree, leaf, var)
    cut = float(pool[int(rng.integers(pool.shape[0]))])
    left_rows, right_rows = K.partition_rows(tree.X[:, var], leaf.rows, cut)

    w = len(tree.singly_internal_nodes())
    parent = leaf.parent
    # growing a leaf creates one singly internal node and demotes its parent
    # if that parent was singly internal
    w_star = w + 1 - (1 if parent is not None and parent.is_singly_internal else 0)
    return MoveProposal(
        kind=GROW, node=leaf, rule=SplitRule(var, cut),
        left_rows=left_rows, right_rows=right_rows,
        b=len(terminals), w=w, w_star=w_star,
        p_eta=avail.shape[0], n_p_eta=pool.shape[0], depth=leaf.depth,
    )


def prune_proposal_at(tree: Tree, node: Node) -> MoveProposal:
    """Build the PRUNE proposal that collapses a given singly internal node.

    p_eta and n_p_eta describe the reverse GROW at the collapsed node: the
    predictors available over its rows and the cutpoint pool of its current
    splitting variable.
    """
    avail = available_predictors(tree, node)
    pool = valid_cutpoints(tree, node, node.var)
    return MoveProposal(
        kind=PRUNE, node=node, rule=None,
        left_rows=node.left.rows, right_rows=node.right.rows,
        b=len(tree.terminal_nodes()), w=len(tree.singly_internal_nodes()),
        w_star=0, p_eta=avail.shape[0], n_p_eta=pool.shape[0],
        depth=node.depth,
    )


def propose_prune(tree: Tree, rng) -> MoveProposal:
    """Propose collapsing a uniformly chosen singly internal node."""
    candidates = tree.singly_internal_nodes()
    if not candidates:
        raise NoApplicableMove("tree has no singly internal node")
    node = candidates[int(rng.integers(len(candidates)))]
    return prune_proposal_at(tree, node)


def propose_change(tree: Tree, rng, s_local: np.ndarray) -> MoveProposal:
    """Propose a replacement rule at a uniformly chosen singly internal node."""
    candidates = tree.singly_internal_nodes()
    if not candidates:
        raise NoApplicableMove("tree has no singly internal node")
    node = candidates[int(rng.integers(len(candidates)))]
    avail = available_predictors(tree, node)
    var = _weighted_index(rng, avail, s_local)
    pool = valid_cutpoints(tree, node, var)
    cut = float(pool[int(rng.integers(pool.shape[0]))])
    left_rows, right_rows = K.partition_rows(tree.X[:, var], node.rows, cut)
    return MoveProposal(
        kind=CHANGE, node=node, rule=SplitRule(var, cut),
        left_rows=left_rows, right_rows=right_rows,
        b=len(tree.terminal_nodes()), w=len(candidates), w_star=0,
        p_eta=avail.shape[0], n_p_eta=pool.shape[0], depth=node.depth,
    )


def _log_grow_core(b, w_star, p_eta, n_p_eta, depth, n_l, n_r, sum_l, sum_r,
                   sigma2, sigma_mu2, p_grow, p_prune, beta1, beta2):
    """Log acceptance ratio of a GROW with the given structural inputs."""
    n_eta = n_l + n_r
    sum_eta = sum_l + sum_r
    v_eta = sigma2 + n_eta * sigma_mu2
    v_l = sigma2 + n_l * sigma_mu2
    v_r = sigma2 + n_r * sigma_mu2

    log_transition = (math.log(p_prune / p_grow)
                      + math.log(b * p_eta * n_p_eta / w_star))
    log_likelihood = (
        0.5 * (math.log(sigma2) + math.log(v_eta) - math.log(v_l) - math.log(v_r))
        + (sigma_mu2 / (2.0 * sigma2))
        * (sum_l * sum_l / v_l + sum_r * sum_r / v_r - sum_eta * sum_eta / v_eta)
    )
    one_minus_child = 1.0 - beta1 / (2.0 + depth) ** beta2
    log_structure = (math.log(beta1) + 2.0 * math.log(one_minus_child)
                     - math.log((1.0 + depth) ** beta2 - beta1)
                     - math.log(p_eta) - math.log(n_p_eta))
    return log_transition + log_likelihood + log_structure


def log_accept_grow(proposal: MoveProposal, sigma2: float, sigma_mu2: float,
                    residuals: np.ndarray, p_grow: float = 0.28,
                    p_prune: float = 0.28, beta1: float = 0.95,
                    beta2: float = 2.0) -> float:
    """Log acceptance ratio for a GROW proposal given partial residuals."""
    sum_l = K.subset_sum(residuals, proposal.left_rows)
    sum_r = K.subset_sum(residuals, proposal.right_rows)
    return _log_grow_core(
        proposal.b, proposal.w_star, proposal.p_eta, proposal.n_p_eta,
        proposal.depth, proposal.left_rows.shape[0],
        proposal.right_rows.shape[0], sum_l, sum_r,
        sigma2, sigma_mu2, p_grow, p_prune, beta1, beta2)


def log_accept_prune(proposal: MoveProposal, sigma2: float, sigma_mu2: float,
                     residuals: np.ndarray, p_grow: float = 0.28,
                     p_prune: float = 0.28, beta1: float = 0.95,
                     beta2: float = 2.0) -> float:
    """Log acceptance ratio for a PRUNE proposal.

    Scored as the negation of the reverse GROW: the reverse move splits a
    tree with b - 1 terminal nodes and lands on the current tree, so its
    singly-internal count is the current w.
    """
    sum_l = K.subset_sum(residuals, proposal.left_rows)
    sum_r = K.subset_sum(residuals, proposal.right_rows)
    return -_log_grow_core(
        proposal.b - 1, proposal.w, proposal.p_eta, proposal.n_p_eta,
        proposal.depth, proposal.left_rows.shape[0],
        proposal.right_rows.shape[0], sum_l, sum_r,
        sigma2, sigma_mu2, p_grow, p_prune, beta1, beta2)


def log_accept_change(proposal: MoveProposal, sigma2: float, sigma_mu2: float,
                      residuals: np.ndarray) -> float:
    """Log acceptance ratio for a CHANGE proposal.

    Compares the proposed child partition (1*, 2*) against the current
    children of the target node; symmetric in child order.
    """
    node = proposal.node
    ratio = sigma2 / sigma_mu2

    n1s = proposal.left_rows.shape[0]
    n2s = proposal.right_rows.shape[0]
    n1 = node.left.rows.shape[0]
    n2 = node.right.rows.shape[0]
    sum1s = K.subset_sum(residuals, proposal.left_rows)
    sum2s = K.subset_sum(residuals, proposal.right_rows)
    sum1 = K.subset_sum(residuals, node.left.rows)
    sum2 = K.subset_sum(residuals, node.right.rows)

    log_sqrt = 0.5 * (math.log(ratio + n1) + math.log(ratio + n2)
                      - math.log(ratio + n1s) - math.log(ratio + n2s))
    log_exp = (1.0 / (2.0 * sigma2)) * (
        sum1s * sum1s / (n1s + ratio) + sum2s * sum2s / (n2s + ratio)
        - sum1 * sum1 / (n1 + ratio) - sum2 * sum2 / (n2 + ratio))
    return log_sqrt + log_exp


def apply_move(tree: Tree, proposal: MoveProposal):
    """Mutate the tree according to an accepted proposal."""
    if proposal.kind == GROW:
        tree.grow(proposal.node, proposal.rule.var, proposal.rule.cut,
                  proposal.left_rows, proposal.right_rows)
    elif proposal.kind == PRUNE:
        tree.prune(proposal.node)
    else:
        tree.change(proposal.node, proposal.rule.var, proposal.rule.cut,
                    proposal.left_rows, proposal.right_rows)
