"""Backfitting sweep: partial residuals, invariants, and probit latents."""

import math
import re

import numpy as np
import pytest
from scipy.special import ndtr

from bartcs import (ModelState, MoveLog, partial_residuals, probit_sweep,
                    sweep)
from bartcs.backfit import EXPOSURE, OUTCOME_MARGINAL
from bartcs.data import Hyperparams
from bartcs.priors import LeafPrior, calibrate_leaf_prior

HYPER = Hyperparams()


def make_state(n=50, p=3, h=5, seed=11, linear=False, sigma2_free=True,
               sigma2=1.0, role=OUTCOME_MARGINAL):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    if linear:
        y = 2.0 * X[:, 0] + rng.normal(scale=0.3, size=n)
    else:
        y = rng.normal(size=n)
    prior = calibrate_leaf_prior(float(y.min()), float(y.max()), h)
    state = ModelState.create(X, y, prior, role, sigma2=sigma2,
                              sigma2_free=sigma2_free)
    return state, X, y


def uniform_s(p):
    return np.full(p, 1.0 / p)


class TestPartialResiduals:
    def test_two_tree_example(self):
        # y = 3, both trees fit 1 -> residual for either tree is 3 - 1 = 2
        X = np.array([[0.0], [1.0]])
        y = np.array([3.0, 3.0])
        prior = LeafPrior(mu_mu=0.0, sigma_mu=1.0, h=2)
        state = ModelState.create(X, y, prior, OUTCOME_MARGINAL, 1.0, True)
        state.fits[:] = 1.0
        state.total_fit = state.fits.sum(axis=0)
        np.testing.assert_allclose(partial_residuals(state, 0), [2.0, 2.0])
        np.testing.assert_allclose(partial_residuals(state, 1), [2.0, 2.0])

    def test_single_tree_is_identity(self):
        state, _, y = make_state(h=1)
        state.fits[0] = np.linspace(-1, 1, state.n)
        state.total_fit = state.fits.sum(axis=0)
        np.testing.assert_allclose(partial_residuals(state, 0),
                                   y - state.fits[0] + state.fits[0])
        np.testing.assert_allclose(partial_residuals(state, 0), y)

    def test_cache_matches_direct_sum(self, rng):
        state, _, y = make_state(h=8)
        state.fits[:] = rng.normal(size=state.fits.shape)
        state.total_fit = state.fits.sum(axis=0)
        for j in range(8):
            direct = y - np.delete(state.fits, j, axis=0).sum(axis=0)
            np.testing.assert_allclose(partial_residuals(state, j), direct,
                                       atol=1e-12)


class TestSweepInvariants:
    def test_total_fit_consistency(self):
        state, _, _ = make_state()
        rng = np.random.default_rng(0)
        for _ in range(30):
            sweep(state, uniform_s(3), rng, HYPER)
            np.testing.assert_allclose(state.total_fit,
                                       state.fits.sum(axis=0), atol=1e-10)

    def test_leaf_rows_partition_after_sweeps(self):
        state, _, _ = make_state()
        rng = np.random.default_rng(1)
        for _ in range(50):
            sweep(state, uniform_s(3), rng, HYPER)
        for tree in state.forest:
            rows = np.concatenate([leaf.rows for leaf in tree.terminal_nodes()])
            assert sorted(rows.tolist()) == list(range(state.n))

    def test_sigma2_stays_positive(self):
        state, _, _ = make_state()
        rng = np.random.default_rng(2)
        for _ in range(100):
            sweep(state, uniform_s(3), rng, HYPER)
            assert state.sigma2 > 0.0

    def test_forced_reject_keeps_structure(self, monkeypatch):
        # drive every acceptance ratio to -inf: structure frozen, but the
        # leaf means and sigma2 still move through their conjugate draws
        state, _, _ = make_state()
        rng = np.random.default_rng(3)
        for _ in range(5):
            sweep(state, uniform_s(3), rng, HYPER)
        shapes = [t.dump() for t in state.forest]
        import bartcs.backfit as bf
        monkeypatch.setattr(bf, "_log_accept",
                            lambda *a, **k: -math.inf)
        fit_before = state.total_fit.copy()
        sigma2_before = state.sigma2
        log = sweep(state, uniform_s(3), rng, HYPER)
        assert sum(log.accepted.values()) == 0
        assert [strip_mu(t.dump()) for t in state.forest] == \
            [strip_mu(s) for s in shapes]
        assert state.sigma2 != sigma2_before
        assert not np.array_equal(state.total_fit, fit_before)

    def test_fit_improves_on_linear_signal(self):
        state, _, y = make_state(n=50, h=1, linear=True, seed=21)
        rng = np.random.default_rng(4)
        for _ in range(500):
            sweep(state, uniform_s(3), rng, HYPER)
        rmse = np.sqrt(np.mean((y - state.total_fit) ** 2))
        const_rmse = np.sqrt(np.mean((y - y.mean()) ** 2))
        assert rmse < const_rmse

    def test_all_move_kinds_accepted_sometimes(self):
        state, _, _ = make_state(n=120, h=10, linear=True, seed=22)
        rng = np.random.default_rng(5)
        total = MoveLog()
        for _ in range(1000):
            total.merge(sweep(state, uniform_s(3), rng, HYPER))
        for kind, count in total.accepted.items():
            assert count > 0, f"no accepted {kind} in 1000 sweeps"

    def test_sweep_deterministic(self):
        runs = []
        for _ in range(2):
            state, _, _ = make_state()
            rng = np.random.default_rng(9)
            for _ in range(40):
                sweep(state, uniform_s(3), rng, HYPER)
            runs.append((state.total_fit.copy(), state.sigma2,
                         [t.dump() for t in state.forest]))
        np.testing.assert_array_equal(runs[0][0], runs[1][0])
        assert runs[0][1] == runs[1][1]
        assert runs[0][2] == runs[1][2]


def strip_mu(dump: str) -> str:
    return re.sub(r"mu=[^)]*", "mu=*", dump)


class TestProbitSweep:
    def make_probit_state(self, n=100, seed=31, separated=False):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 3))
        if separated:
            a = (X[:, 0] > 0).astype(float)
        else:
            a = (rng.random(n) < 0.5).astype(float)
        prior = LeafPrior(mu_mu=0.0, sigma_mu=3.0 / (2.0 * math.sqrt(5)), h=5)
        state = ModelState.create(X, np.zeros(n), prior, EXPOSURE,
                                  sigma2=1.0, sigma2_free=False)
        return state, a

    def test_latent_signs_after_every_sweep(self):
        state, a = self.make_probit_state()
        rng = np.random.default_rng(6)
        for _ in range(50):
            probit_sweep(state, a, uniform_s(3), rng, HYPER)
            assert np.all(state.response[a == 1.0] > 0.0)
            assert np.all(state.response[a == 0.0] <= 0.0)

    def test_sigma2_fixed_at_one(self):
        state, a = self.make_probit_state()
        rng = np.random.default_rng(7)
        for _ in range(50):
            probit_sweep(state, a, uniform_s(3), rng, HYPER)
        assert state.sigma2 == 1.0

    def test_learns_separating_covariate(self):
        state, a = self.make_probit_state(separated=True)
        rng = np.random.default_rng(8)
        for _ in range(1000):
            probit_sweep(state, a, uniform_s(3), rng, HYPER)
        probs = ndtr(state.total_fit)
        assert probs[a == 1.0].mean() > 0.9
        assert probs[a == 0.0].mean() < 0.1

    def test_probit_deterministic(self):
        runs = []
        for _ in range(2):
            state, a = self.make_probit_state()
            rng = np.random.default_rng(10)
            for _ in range(30):
                probit_sweep(state, a, uniform_s(3), rng, HYPER)
            runs.append((state.response.copy(), state.total_fit.copy()))
        np.testing.assert_array_equal(runs[0][0], runs[1][0])
        np.testing.assert_array_equal(runs[0][1], runs[1][1])
