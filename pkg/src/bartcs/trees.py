"""Binary decision trees with per-node row tracking.

A tree is a linked arena of nodes. Terminal nodes carry a scalar leaf value;
internal nodes carry a split rule (variable index, cutpoint). Rows route left
when x[var] <= cut. Every node keeps the training-row indices that reach it,
so move proposals and leaf updates never rescan the design matrix: a GROW,
PRUNE, or CHANGE only touches the row sets of the children it creates.

Cutpoint pools are the unique in-node values of the splitting variable minus
the maximum, which makes empty children impossible by construction.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import _kernels as K


@dataclass(frozen=True)
class SplitRule:
    """Splitting rule: rows with x[var] <= cut go left."""

    var: int
    cut: float


class Node:
    __slots__ = ("depth", "parent", "left", "right", "var", "cut", "mu", "rows")

    def __init__(self, depth, rows, mu=0.0, parent=None):
        self.depth = depth
        self.parent = parent
        self.left = None
        self.right = None
        self.var = -1
        self.cut = 0.0
        self.mu = mu
        self.rows = rows

    @property
    def is_terminal(self):
        return self.left is None

    @property
    def is_singly_internal(self):
        return (self.left is not None
                and self.left.is_terminal and self.right.is_terminal)

    @property
    def n_rows(self):
        return self.rows.shape[0]


class Tree:
    """One regression tree bound to a fixed design matrix.

    The design matrix is shared by reference; only row indices are stored per
    node. A fresh tree is a stump holding every row.
    """

    def __init__(self, X: np.ndarray, mu: float = 0.0, rows=None):
        # column-major so per-variable slices are contiguous for the kernels
        self.X = np.asfortranarray(X, dtype=np.float64)
        if rows is None:
            rows = np.arange(X.shape[0], dtype=np.int64)
        self.root = Node(0, rows, mu=mu)

    # -- structural queries ------------------------------------------------

    def iter_nodes(self):
        """All nodes in preorder (parent, left subtree, right subtree)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_terminal:
                stack.append(node.right)
                stack.append(node.left)

    def terminal_nodes(self) -> List[Node]:
        return [n for n in self.iter_nodes() if n.is_terminal]

    def internal_nodes(self) -> List[Node]:
        return [n for n in self.iter_nodes() if not n.is_terminal]

    def singly_internal_nodes(self) -> List[Node]:
        return [n for n in self.iter_nodes() if n.is_singly_internal]

    @property
    def is_stump(self):
        return self.root.is_terminal

    # -- mutation ----------------------------------------------------------

    def grow(self, leaf: Node, var: int, cut: float, left_rows, right_rows):
        """Split a terminal node; children inherit the old leaf value."""
        leaf.var = var
        leaf.cut = float(cut)
        leaf.left = Node(leaf.depth + 1, left_rows, mu=leaf.mu, parent=leaf)
        leaf.right = Node(leaf.depth + 1, right_rows, mu=leaf.mu, parent=leaf)
        leaf.mu = 0.0

    def prune(self, node: Node):
        """Collapse a singly internal node back to a terminal node."""
        node.mu = node.left.mu
        node.left = None
        node.right = None
        node.var = -1

    def change(self, node: Node, var: int, cut: float, left_rows, right_rows):
        """Replace the rule of a singly internal node and re-route its rows."""
        node.var = var
        node.cut = float(cut)
        node.left.rows = left_rows
        node.right.rows = right_rows

    # -- evaluation ----------------------------------------------------------

    def fill_fit(self, out: np.ndarray):
        """Write each leaf's value into out at that leaf's rows."""
        for node in self.iter_nodes():
            if node.is_terminal:
                K.assign_leaf(out, node.rows, node.mu)

    def evaluate_matrix(self, X: np.ndarray) -> np.ndarray:
        """Leaf value reached by every row of an arbitrary matrix."""
        out = np.empty(X.shape[0], dtype=np.float64)
        idx = np.arange(X.shape[0])
        stack = [(self.root, idx)]
        while stack:
            node, idx = stack.pop()
            if node.is_terminal:
                out[idx] = node.mu
            else:
                mask = X[idx, node.var] <= node.cut
                stack.append((node.left, idx[mask]))
                stack.append((node.right, idx[~mask]))
        return out

    def snapshot(self):
        """Compact structure-only copy: parallel preorder node arrays."""
        var, cut, left, right, mu = [], [], [], [], []

        def visit(node):
            i = len(var)
            var.append(node.var)
            cut.append(node.cut)
            mu.append(node.mu)
            left.append(-1)
            right.append(-1)
            if not node.is_terminal:
                left[i] = visit(node.left)
                right[i] = visit(node.right)
            return i

        visit(self.root)
        return {"var": var, "cut": cut, "left": left, "right": right, "mu": mu}

    def dump(self) -> str:
        """Indented text form for golden-file comparisons."""
        lines = []

        def visit(node):
            pad = "  " * node.depth
            if node.is_terminal:
                lines.append(f"{pad}L(mu={node.mu!r})")
            else:
                lines.append(f"{pad}I(var={node.var}, cut={node.cut!r})")
                visit(node.left)
                visit(node.right)

        visit(self.root)
        return "\n".join(lines)


def evaluate(tree: Tree, x) -> float:
    """Leaf value that a single covariate row routes to."""
    node = tree.root
    while not node.is_terminal:
        node = node.left if x[node.var] <= node.cut else node.right
    return node.mu


def forest_fit(forest: List[Tree], X: np.ndarray) -> np.ndarray:
    """Elementwise sum of every tree's fit over the rows of X."""
    out = np.zeros(X.shape[0], dtype=np.float64)
    for tree in forest:
        out += tree.evaluate_matrix(X)
    return out


def snapshot_evaluate(snap, X: np.ndarray) -> np.ndarray:
    """Evaluate a tree snapshot on a matrix."""
    var, cut = snap["var"], snap["cut"]
    left, right, mu = snap["left"], snap["right"], snap["mu"]
    out = np.empty(X.shape[0], dtype=np.float64)
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        i, idx = stack.pop()
        if left[i] < 0:
            out[idx] = mu[i]
        else:
            mask = X[idx, var[i]] <= cut[i]
            stack.append((left[i], idx[mask]))
            stack.append((right[i], idx[~mask]))
    return out


def snapshot_forest_fit(snaps, X: np.ndarray) -> np.ndarray:
    """Sum of snapshot fits over the rows of X."""
    out = np.zeros(X.shape[0], dtype=np.float64)
    for snap in snaps:
        out += snapshot_evaluate(snap, X)
    return out


def valid_cutpoints(tree: Tree, node: Node, var: int) -> np.ndarray:
    """Admissible cutpoints for var at a node.

    The unique observed values of the variable among rows reaching the node,
    excluding the maximum; splitting at any of them leaves both children
    non-empty. May be empty.
    """
    return K.cutpoint_pool(tree.X[:, var], node.rows)


def available_predictors(tree: Tree, node: Node) -> np.ndarray:
    """Variables with at least one admissible cutpoint at a node."""
    return K.available_predictors(tree.X, node.rows)


def singly_internal_count(tree: Tree) -> int:
    """Number of internal nodes whose two children are both terminal."""
    return len(tree.singly_internal_nodes())


def count_splits(forest: List[Tree], n_vars: int) -> np.ndarray:
    """Per-variable split counts summed over a forest's internal nodes."""
    counts = np.zeros(n_vars, dtype=np.int64)
    for tree in forest:
        for node in tree.iter_nodes():
            if not node.is_terminal:
                counts[node.var] += 1
    return counts


@dataclass(frozen=True)
class SplitCounts:
    """Joint split-count bookkeeping across the fitted models.

    m counts exposure-model splits per covariate (length P). For the marginal
    scheme, n counts outcome-model splits over P+1 coordinates with the
    exposure at index 0. For the separate scheme, n0 and n1 count splits in
    the two arm-specific outcome forests (length P each).
    """

    m: np.ndarray
    n: Optional[np.ndarray] = None
    n0: Optional[np.ndarray] = None
    n1: Optional[np.ndarray] = None

    @property
    def total_m(self) -> int:
        return int(self.m.sum())

    @property
    def total_n(self) -> int:
        return int(self.n.sum())

    @property
    def total_n0(self) -> int:
        return int(self.n0.sum())

    @property
    def total_n1(self) -> int:
        return int(self.n1.sum())

    @property
    def n_exposure(self) -> int:
        """Outcome-model splits on the exposure coordinate (marginal only)."""
        return int(self.n[0])


def split_counts(exposure_forest, outcome_forests, p: int, scheme: str) -> SplitCounts:
    """Recount splits from scratch across a chain state's forests."""
    m = count_splits(exposure_forest, p)
    if scheme == "marginal":
        (outcome,) = outcome_forests
        return SplitCounts(m=m, n=count_splits(outcome, p + 1))
    f0, f1 = outcome_forests
    return SplitCounts(m=m, n0=count_splits(f0, p), n1=count_splits(f1, p))
