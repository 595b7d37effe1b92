import dataclasses
import math

import numpy as np
import pytest

import prbench as pb
from prbench.diagnostics import loo_sequence, loo_threshold, quadratic_parameters
from prbench.errors import CapabilityError
from prbench.objective import hessian
from prbench.solvers import Method

from conftest import make_problem


def capped_defaults(n, norm_x0, method, max_iters=200):
    params = pb.default_params(n, norm_x0, method)
    return dataclasses.replace(params, max_iters=max_iters)


class TestQuadraticOracle:
    def test_exact_convergence_at_kappa_one(self):
        assert pb.quadratic_oracle(1.0, 1.0, Method.GD, steps=100) == 0.0

    def test_gd_rate(self):
        ratio = pb.quadratic_oracle(1.0, 100.0, Method.GD)
        assert ratio == pytest.approx(0.99, abs=0.005)

    def test_hb_rate(self):
        ratio = pb.quadratic_oracle(1.0, 100.0, Method.POLYAK)
        assert ratio <= 9.0 / 11.0 + 0.02

    def test_nesterov_rate(self):
        ratio = pb.quadratic_oracle(1.0, 100.0, Method.NESTEROV)
        assert ratio <= 0.9 + 0.02

    def test_momentum_beats_gd(self):
        gd = pb.quadratic_oracle(1.0, 100.0, Method.GD)
        assert pb.quadratic_oracle(1.0, 100.0, Method.POLYAK) < gd
        assert pb.quadratic_oracle(1.0, 100.0, Method.NESTEROV) < gd

    def test_parameters(self):
        mu, L = 1.0, 100.0
        eta, beta = quadratic_parameters(mu, L, Method.GD)
        assert (eta, beta) == (1.0 / L, 0.0)
        eta, beta = quadratic_parameters(mu, L, Method.POLYAK)
        assert eta == pytest.approx(4.0 / (math.sqrt(mu) + math.sqrt(L)) ** 2)
        assert beta == pytest.approx((9.0 / 11.0) ** 2)
        eta, beta = quadratic_parameters(mu, L, Method.NESTEROV)
        assert (eta, beta) == (1.0 / L, pytest.approx(9.0 / 11.0))

    def test_rejects_bad_curvatures(self):
        with pytest.raises(ValueError):
            pb.quadratic_oracle(2.0, 1.0, Method.GD)


class TestConcentrationReport:
    def test_twenty_seeds_pass(self):
        for seed in range(20):
            ens = pb.sample_ensemble(1000, 100, seed)
            rep = pb.concentration_report(ens, pb.sample_unit_sphere(100, seed))
            assert rep.row_norm_ok and rep.projection_ok

    def test_zero_probe(self):
        ens = pb.sample_ensemble(10, 8, seed=0)
        rep = pb.concentration_report(ens, np.zeros(8))
        assert rep.projection_ok and rep.max_projection == 0.0

    def test_rejects_small_n(self):
        ens = pb.sample_ensemble(10, 2, seed=0)
        with pytest.raises(ValueError):
            pb.concentration_report(ens, np.zeros(2))

    def test_bounds_values(self):
        ens = pb.sample_ensemble(50, 9, seed=1)
        rep = pb.concentration_report(ens, pb.sample_unit_sphere(9, 2))
        assert rep.row_norm_bound == pytest.approx(math.sqrt(54))
        assert rep.projection_bound == pytest.approx(5 * math.sqrt(math.log(9)))


class TestLooRun:
    def setup_method(self):
        self.n, self.m, self.seed = 24, 48, 3
        self.ens, self.gt, self.y, self.x0 = make_problem(self.n, self.m, self.seed)
        self.params = capped_defaults(
            self.n, float(np.linalg.norm(self.x0)), Method.POLYAK, max_iters=80
        )

    def test_zero_proximity_at_start(self):
        bundle = pb.loo_run(self.ens, self.y, self.x0, self.params, self.gt)
        assert bundle.proximity[0] == 0.0
        assert np.array_equal(bundle.dist_main[:, 0], np.zeros(self.m))

    def test_single_measurement_sequence_frozen(self):
        # removing the only row leaves the zero cost; GD never moves
        ens = pb.sample_ensemble(1, 4, seed=0)
        gt = pb.random_ground_truth(4, 0)
        y = pb.observe(ens, gt).y
        x0 = np.array([1.0, -2.0, 0.5, 0.25])
        params = pb.SolverParams(method=Method.GD, eta=0.1, max_iters=10)
        seq = loo_sequence(ens, y, x0, params, 0, 10)
        assert np.array_equal(seq, np.tile(x0, (11, 1)))

    def test_budget_errors(self):
        big = pb.sample_ensemble(300, 4, seed=0)
        gt = pb.random_ground_truth(4, 0)
        y = pb.observe(big, gt).y
        params = pb.SolverParams(method=Method.GD, eta=0.01, max_iters=10)
        with pytest.raises(CapabilityError):
            pb.loo_run(big, y, np.zeros(4), params, gt)
        long_params = pb.SolverParams(method=Method.GD, eta=0.01, max_iters=1000)
        with pytest.raises(CapabilityError):
            pb.loo_run(self.ens, self.y, self.x0, long_params, self.gt)

    def test_nan_poisoning_leaves_own_sequence_unchanged(self):
        steps = 40
        clean = loo_sequence(self.ens, self.y, self.x0, self.params, 5, steps)
        rows = self.ens.rows.copy()
        rows[5] = np.nan
        poisoned = pb.SensingEnsemble(rows=rows, m=self.m, n=self.n, seed=self.seed)
        again = loo_sequence(poisoned, self.y, self.x0, self.params, 5, steps)
        assert np.array_equal(clean, again)
        # any other sequence does read row 5 and is destroyed by the poison
        other = loo_sequence(poisoned, self.y, self.x0, self.params, 6, 3)
        assert np.isnan(other[-1]).all()

    def test_proximity_matches_sequences(self):
        bundle = pb.loo_run(
            self.ens, self.y, self.x0, self.params, self.gt, retain_sequences=True
        )
        trace = pb.run(
            self.ens, self.y, self.x0, self.params, gt=self.gt, keep_history=True
        )
        t = bundle.proximity.shape[0] - 1
        by_hand = max(
            math.hypot(
                np.linalg.norm(trace.history[t] - bundle.sequences[ell, t]),
                np.linalg.norm(trace.history[t - 1] - bundle.sequences[ell, t - 1]),
            )
            for ell in range(self.m)
        )
        assert bundle.proximity[t] == pytest.approx(by_hand, rel=1e-12)

    def test_threshold_value(self):
        cfg = pb.RicConfig()
        assert loo_threshold(100, cfg) == pytest.approx(
            5.0 * math.sqrt(math.log(100) / 100)
        )
        assert loo_threshold(100, cfg) == pytest.approx(1.0729830131446736)


class TestLooIncoherenceChain:
    """Pointwise bound: incoherence of the main run is controlled by the
    leave-one-out proximity plus the projection concentration of the
    independent sequences."""

    def test_inequality_along_trace(self):
        n, m, seed = 32, 64, 1
        ens, gt, y, x0 = make_problem(n, m, seed)
        params = capped_defaults(n, float(np.linalg.norm(x0)), Method.POLYAK, 60)
        trace = pb.run(ens, y, x0, params, gt=gt, keep_history=True)
        bundle = pb.loo_run(ens, y, x0, params, gt)
        target = trace.sign * gt.x_star
        row_norms = np.linalg.norm(ens.rows, axis=1)
        proj_const = 5.0 * math.sqrt(math.log(n))
        for t in range(bundle.proximity.shape[0]):
            lhs = np.abs(ens.rows @ (trace.history[t] - target))
            rhs = row_norms * bundle.dist_main[:, t] + proj_const * bundle.dist_star[:, t]
            assert (lhs <= rhs + 1e-9).all()


class TestContractionConsistency:
    def test_ratio_below_midpoint_matrix_norm(self):
        # trace fully inside the RIC: per-step paired contraction is
        # bounded by the norm of the pair map at the midpoint Hessian
        n = 32
        m = int(round(10 * n * math.log(n)))
        ens, gt, y, x0 = make_problem(n, m, 0)
        params = pb.default_params(n, float(np.linalg.norm(x0)), Method.POLYAK)
        trace = pb.run(ens, y, x0, params, gt=gt, keep_history=True)
        assert trace.converged
        assert trace.loc_ok.all() and trace.inc_ok.all()
        target = trace.sign * gt.x_star
        for t in range(1, trace.n_steps + 1, 7):
            midpoint = 0.5 * (trace.history[t - 1] + target)
            mat = pb.contraction_matrix_hb(
                hessian(ens, y, midpoint), params.eta, params.beta
            )
            assert trace.contraction_ratio[t] <= pb.spectral_norm(mat) + 0.05


class TestLatePhaseImplication:
    def test_small_dist_implies_incoherence(self):
        # once dist is below c2 sqrt(log n) / sqrt(6 n), Cauchy-Schwarz with
        # the row-norm bound forces the incoherence flag
        n, seed = 24, 2
        m = int(round(10 * n * math.log(n)))
        ens, gt, y, x0 = make_problem(n, m, seed)
        assert np.linalg.norm(ens.rows, axis=1).max() <= math.sqrt(6 * n)
        params = pb.default_params(n, float(np.linalg.norm(x0)), Method.NESTEROV)
        trace = pb.run(ens, y, x0, params, gt=gt)
        cutoff = 5.0 * math.sqrt(math.log(n)) / math.sqrt(6 * n)
        late = trace.dist <= cutoff
        assert late.any()
        assert trace.inc_ok[late].all()
