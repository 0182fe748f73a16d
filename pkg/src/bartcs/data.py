"""Dataset container, hyperparameter bundle, and chain configuration.

These types are shared by every other module. ``Dataset`` is immutable after
construction and safe to share across concurrently running chains.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import BadConfig, ConstantOutcome, EmptyArm, NotBinary

BINARY = "binary"
CONTINUOUS = "continuous"

SEPARATE = "separate"
MARGINAL = "marginal"


@dataclass(frozen=True)
class Dataset:
    """Outcome vector, exposure vector, and named covariate matrix.

    Attributes:
        y: real outcomes, shape (N,).
        a: exposures, shape (N,). Binary exposures are encoded as {0.0, 1.0}
           reals so the marginal scheme can treat the exposure as an ordinary
           splitting coordinate.
        X: covariate matrix, shape (N, P), C-contiguous float64.
        names: P unique covariate labels.
        exposure_kind: "binary" or "continuous".
    """

    y: np.ndarray
    a: np.ndarray
    X: np.ndarray
    names: Tuple[str, ...]
    exposure_kind: str = BINARY

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if X.ndim != 2:
            raise BadConfig("X must be a 2-D matrix")
        n, p = X.shape
        if n < 2 or p < 1:
            raise BadConfig(f"need N >= 2 and P >= 1, got N={n}, P={p}")
        if y.shape != (n,) or a.shape != (n,):
            raise BadConfig("y, a, and X row counts disagree")
        if len(self.names) != p:
            raise BadConfig(f"{len(self.names)} names for {p} columns")
        if len(set(self.names)) != p:
            raise BadConfig("covariate names must be unique")
        for label, arr in (("y", y), ("a", a), ("X", X)):
            if not np.isfinite(arr).all():
                raise BadConfig(f"{label} contains missing or non-finite values")
        if self.exposure_kind not in (BINARY, CONTINUOUS):
            raise BadConfig(f"unknown exposure kind {self.exposure_kind!r}")
        if self.exposure_kind == BINARY:
            if not np.isin(a, (0.0, 1.0)).all():
                raise NotBinary("binary exposure values must be 0 or 1")
            if not (a == 0.0).any() or not (a == 1.0).any():
                raise EmptyArm("both exposure arms must be non-empty")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class OutcomeRecord:
    """Range of the outcome, kept for leaf-prior calibration."""

    y_min: float
    y_max: float
    center: float


def standardize_outcome(y) -> Tuple[np.ndarray, OutcomeRecord]:
    """Record the outcome range used by prior calibration.

    The outcome itself is returned unchanged; causal estimates are always
    reported on the original scale.
    """
    y = np.asarray(y, dtype=np.float64)
    y_min = float(y.min())
    y_max = float(y.max())
    if y_max <= y_min:
        raise ConstantOutcome(f"outcome is constant at {y_min}")
    return y, OutcomeRecord(y_min, y_max, (y_min + y_max) / 2.0)


def arm_indices(dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """Index sets (I0, I1) partitioning rows by exposure arm."""
    if dataset.exposure_kind != BINARY:
        raise NotBinary("arm indices require a binary exposure")
    i0 = np.flatnonzero(dataset.a == 0.0).astype(np.int64)
    i1 = np.flatnonzero(dataset.a == 1.0).astype(np.int64)
    if i0.size == 0 or i1.size == 0:
        raise EmptyArm("both exposure arms must be non-empty")
    return i0, i1


@dataclass(frozen=True)
class Hyperparams:
    """Sampler hyperparameters.

    c_offset_mode controls the exposure-coordinate offset c in the marginal
    scheme's simplex proposal: "zero", "n0" (recomputed each iteration from
    the current exposure split count), or "fixed" with c_offset_value.
    """

    h: int = 50
    beta1: float = 0.95
    beta2: float = 2.0
    a_sigma: float = 3.0
    b_sigma: float = 3.0
    a0: float = 0.5
    b0: float = 1.0
    p_grow: float = 0.28
    p_prune: float = 0.28
    p_change: float = 0.44
    k_leaf: float = 2.0
    c_offset_mode: str = "n0"
    c_offset_value: float = 0.0
    alpha_step: float = 0.3

    def __post_init__(self):
        if self.h < 1:
            raise BadConfig("tree count must be >= 1")
        if not (0.0 < self.beta1 < 1.0):
            raise BadConfig("beta1 must lie in (0, 1)")
        if self.beta2 < 0.0:
            raise BadConfig("beta2 must be >= 0")
        if self.a_sigma <= 0.0 or self.b_sigma <= 0.0:
            raise BadConfig("a_sigma and b_sigma must be positive")
        if self.a0 <= 0.0 or self.b0 <= 0.0:
            raise BadConfig("a0 and b0 must be positive")
        probs = (self.p_grow, self.p_prune, self.p_change)
        if min(probs) <= 0.0 or abs(sum(probs) - 1.0) > 1e-12:
            raise BadConfig("move probabilities must be positive and sum to 1")
        if self.c_offset_mode not in ("zero", "n0", "fixed"):
            raise BadConfig(f"unknown c offset mode {self.c_offset_mode!r}")
        if self.c_offset_value < 0.0:
            raise BadConfig("fixed c offset must be >= 0")
        if self.alpha_step <= 0.0:
            raise BadConfig("alpha step must be positive")


@dataclass(frozen=True)
class ChainConfig:
    """MCMC schedule, scheme choice, and seeding."""

    n_iter: int = 25000
    burn_in: int = 12500
    thin: int = 10
    seed: int = 0
    scheme: str = MARGINAL
    n_chains: int = 1

    def __post_init__(self):
        if self.burn_in < 0 or self.burn_in >= self.n_iter:
            raise BadConfig("need 0 <= burn_in < n_iter")
        if self.thin < 1:
            raise BadConfig("thin must be >= 1")
        if (self.n_iter - self.burn_in) // self.thin < 1:
            raise BadConfig("schedule retains no draws")
        if self.scheme not in (SEPARATE, MARGINAL):
            raise BadConfig(f"unknown scheme {self.scheme!r}")
        if self.n_chains < 1:
            raise BadConfig("n_chains must be >= 1")

    @property
    def n_retained(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin
