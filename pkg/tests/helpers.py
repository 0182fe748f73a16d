"""Builders shared across test modules."""

import numpy as np

from bartcs.chain import Trace, TraceMeta, TraceRecord
from bartcs.data import BINARY, MARGINAL, SEPARATE, Dataset
from bartcs.errors import NoGrowableNode
from bartcs.moves import apply_move, propose_grow
from bartcs.trees import Tree


def make_binary_dataset(n=40, p=3, seed=7, effect=-1.0):
    """Small binary-exposure dataset with both arms guaranteed non-empty."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    a = np.zeros(n)
    a[: n // 2] = 1.0
    rng.shuffle(a)
    y = 1.5 * X[:, 0] + effect * a + rng.normal(scale=0.5, size=n)
    names = tuple(f"X{j + 1}" for j in range(p))
    return Dataset(y=y, a=a, X=X, names=names)


def grow_random_tree(X, rng, n_grows, s=None):
    """Tree built by repeatedly applying random GROW proposals."""
    tree = Tree(X)
    if s is None:
        s = np.full(X.shape[1], 1.0 / X.shape[1])
    for _ in range(n_grows):
        try:
            proposal = propose_grow(tree, rng, s)
        except NoGrowableNode:
            break
        apply_move(tree, proposal)
    return tree


def _meta(scheme, n, p, exposure_kind=BINARY, names=None):
    if names is None:
        names = tuple(f"X{j + 1}" for j in range(p))
    return TraceMeta(scheme=scheme, exposure_kind=exposure_kind, n=n, p=p,
                     names=names, seed=0, n_iter=1, burn_in=0, thin=1,
                     chain_index=0, y_min=0.0, y_max=1.0,
                     a_min=0.0, a_max=1.0)


def make_marginal_trace(cf_pairs, p=2, n_vec=None, m_vec=None, s=None,
                        sigma2=1.0, alpha=1.0):
    """Marginal-scheme trace from a list of (cf1, cf0) fit-vector pairs."""
    cf_pairs = [(np.asarray(c1, dtype=float), np.asarray(c0, dtype=float))
                for c1, c0 in cf_pairs]
    n_rows = cf_pairs[0][0].shape[0]
    records = []
    for i, (c1, c0) in enumerate(cf_pairs):
        records.append(TraceRecord(
            iteration=i + 1,
            m=np.zeros(p, dtype=np.int64) if m_vec is None
            else np.asarray(m_vec[i], dtype=np.int64),
            n=np.zeros(p + 1, dtype=np.int64) if n_vec is None
            else np.asarray(n_vec[i], dtype=np.int64),
            n0=None, n1=None, cf1=c1, cf0=c0, snapshots=None,
            sigma2={"outcome_marginal": sigma2}, alpha=alpha,
            s=np.full(p + 1, 1.0 / (p + 1)) if s is None else np.asarray(s)))
    return Trace(meta=_meta(MARGINAL, n_rows, p), records=records)


def make_separate_trace(cf_pairs, p=2, n0_vec=None, n1_vec=None, m_vec=None,
                        sigma2_arm0=1.0, sigma2_arm1=1.0):
    """Separate-scheme trace from a list of (cf1, cf0) fit-vector pairs."""
    cf_pairs = [(np.asarray(c1, dtype=float), np.asarray(c0, dtype=float))
                for c1, c0 in cf_pairs]
    n_rows = cf_pairs[0][0].shape[0]
    records = []
    for i, (c1, c0) in enumerate(cf_pairs):
        records.append(TraceRecord(
            iteration=i + 1,
            m=np.zeros(p, dtype=np.int64) if m_vec is None
            else np.asarray(m_vec[i], dtype=np.int64),
            n=None,
            n0=np.zeros(p, dtype=np.int64) if n0_vec is None
            else np.asarray(n0_vec[i], dtype=np.int64),
            n1=np.zeros(p, dtype=np.int64) if n1_vec is None
            else np.asarray(n1_vec[i], dtype=np.int64),
            cf1=c1, cf0=c0, snapshots=None,
            sigma2={"outcome_arm0": sigma2_arm0,
                    "outcome_arm1": sigma2_arm1},
            alpha=1.0, s=np.full(p, 1.0 / p)))
    return Trace(meta=_meta(SEPARATE, n_rows, p), records=records)
