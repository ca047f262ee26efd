"""Convergence inequalities evaluated on recorded traces.

The slow cases replay the full-size acceptance grids: 100 lossy instances
for the forward step, 50 for inertial KM and the closed-form oracle.
"""

import dataclasses
import itertools

import numpy as np
import pytest
import torch

from fixinv.cli.experiment import ExperimentConfig, make_instance
from fixinv.diagnostics import (TheoremReport, identity_deviation, inertia_condition, inertial_epsilon,
                                linear_oracle, reference_solution, theorem_report)
from fixinv.models import MlpPairSpec, build_pair, cocoercivity_constant
from fixinv.solvers import ForwardStep, InertialKM, IterateTrace, SolverConfig, solve
from fixinv.utils.errors import NotLinear, OracleUnavailable, TraceTooShort
from helpers import lossy_instance, pca_instance, vec


def fsm_run(inst, rho, iters):
    cfg = SolverConfig(method=ForwardStep(rho=rho), max_iters=iters, trace_level='full')
    return cfg, solve(inst.pair, inst.x, cfg)


def km_run(inst, alpha, lam, iters, beta=None):
    beta = cocoercivity_constant(inst.pair) if beta is None else beta
    cfg = SolverConfig(method=InertialKM(alpha=alpha, lam=lam, beta=beta), max_iters=iters, trace_level='full')
    return cfg, solve(inst.pair, inst.x, cfg)


class TestInertiaCondition:

    def test_reference_cases(self):
        assert inertia_condition(0.5, 0.2)
        assert inertial_epsilon(0.5, 0.2) == pytest.approx(0.25, abs=1e-12)
        assert not inertia_condition(0.9, 0.01)
        assert inertial_epsilon(0.9, 0.01) < 0

    def test_epsilon_sign_matches_condition(self):
        rng = np.random.default_rng(42)
        for alpha, lam in zip(rng.uniform(0.0, 0.99, 500), rng.uniform(0.001, 0.99, 500)):
            eps = inertial_epsilon(alpha, lam)
            if abs(eps) > 1e-9:
                assert (eps > 0) == inertia_condition(alpha, lam)

    def test_zero_inertia_reduces_to_relaxation(self):
        for lam in (0.1, 0.5, 0.9):
            assert inertia_condition(0.0, lam)
            assert inertial_epsilon(0.0, lam) == pytest.approx(1.0 / lam - 1.0)


class TestOracles:

    def test_identity_deviation(self, diag_pair, identity_pair):
        assert identity_deviation(identity_pair) == 0.0
        assert identity_deviation(diag_pair) == 0.5
        assert identity_deviation(pca_instance(0, pixel_dim=16, latent_dim=4).pair) <= 1e-10

    def test_identity_deviation_needs_composite(self):
        with pytest.raises(NotLinear):
            identity_deviation(build_pair(MlpPairSpec()))

    def test_linear_oracle_is_a_zero(self):
        inst = lossy_instance(0)
        z_star = linear_oracle(inst.pair, inst.x)
        np.testing.assert_allclose(z_star.numpy(), inst.z_true.numpy(), rtol=0, atol=1e-10)

    def test_linear_oracle_needs_composite(self):
        inst = make_instance(MlpPairSpec(), 0)
        with pytest.raises(OracleUnavailable):
            linear_oracle(inst.pair, inst.x)

    def test_reference_solution_for_mlp(self):
        inst = make_instance(ExperimentConfig().model, 0)
        z_ref = reference_solution(inst.pair, inst.x, max_iters=5000, rho=0.5, tol=1e-12)
        assert float(torch.linalg.vector_norm(z_ref - inst.z_true)) <= 1e-8


class TestTheoremReport:

    def test_constant_trace_has_zero_slack(self):
        inst = lossy_instance(0)
        z_star = linear_oracle(inst.pair, inst.x)
        trace = IterateTrace(iterates=[z_star.clone() for _ in range(6)])
        cfg = SolverConfig(method=ForwardStep(rho=1.0), max_iters=5)
        report = theorem_report(inst.pair, trace, cfg, z_star)
        fs = report.forward_step
        assert fs.per_step_descent_ok and fs.summed_bound_ok
        assert abs(fs.worst_slack) <= 1e-12
        assert fs.residual_final <= 1e-12
        assert report.violations == []

    def test_forward_step_report(self):
        inst = lossy_instance(1)
        cfg, result = fsm_run(inst, 1.0, 500)
        report = theorem_report(inst.pair, result.trace, cfg, linear_oracle(inst.pair, inst.x))
        fs = report.forward_step
        assert fs.beta_source == 'composite'
        assert fs.beta == pytest.approx(1.0, rel=1e-12)
        assert fs.steps_checked == 500
        assert fs.per_step_descent_ok and fs.summed_bound_ok
        assert report.inertial is None
        assert report.identity_deviation is not None

    def test_inertial_report_under_condition(self):
        inst = lossy_instance(2)
        cfg, result = km_run(inst, 0.5, 0.2, 2000)
        report = theorem_report(inst.pair, result.trace, cfg, linear_oracle(inst.pair, inst.x))
        km = report.inertial
        assert km.inertia_condition_ok
        assert km.lam == pytest.approx(0.2, rel=1e-12)
        assert km.epsilon == pytest.approx(0.25, rel=1e-9)
        assert km.lyapunov_descent_ok and km.lemma_ok and km.one_step_ok
        assert km.boundedness_ok and km.bound_b_ok
        assert km.step_series.tail_fraction < 1e-3
        assert km.yz_gap_final <= 1e-6
        assert report.forward_step is None

    def test_inertial_report_outside_condition(self):
        inst = lossy_instance(3)
        cfg, result = km_run(inst, 0.9, 0.01, 300)
        report = theorem_report(inst.pair, result.trace, cfg, linear_oracle(inst.pair, inst.x))
        km = report.inertial
        assert not km.inertia_condition_ok
        assert km.epsilon < 0
        assert km.boundedness_ok is None and km.bound_b_ok is None and km.m_constant is None
        assert np.isfinite(km.lyapunov_worst_slack)
        assert km.one_step_ok
        assert report.violations == []

    def test_descent_chain_counts_only_under_condition(self):
        inst = lossy_instance(2)
        cfg, result = km_run(inst, 0.5, 0.2, 200)
        km = theorem_report(inst.pair, result.trace, cfg, linear_oracle(inst.pair, inst.x)).inertial
        broken = dataclasses.replace(km, one_step_ok=True, lyapunov_descent_ok=False, lemma_ok=False,
                                     boundedness_ok=True, bound_b_ok=True)
        assert TheoremReport(inertial=broken).violations == [
            'InertialChecks.lyapunov_descent_ok', 'InertialChecks.lemma_ok']
        outside = dataclasses.replace(broken, inertia_condition_ok=False)
        assert TheoremReport(inertial=outside).violations == []
        assert TheoremReport(inertial=dataclasses.replace(outside, one_step_ok=False)).violations == [
            'InertialChecks.one_step_ok']

    def test_empirical_beta_on_mlp(self):
        inst = make_instance(ExperimentConfig().model, 4)
        cfg, result = fsm_run(inst, 0.5, 200)
        fs = theorem_report(inst.pair, result.trace, cfg, inst.z_true).forward_step
        assert fs.beta_source == 'empirical'
        assert fs.beta > 0
        assert fs.per_step_descent_ok

    def test_needs_z_star(self):
        inst = lossy_instance(0)
        cfg, result = fsm_run(inst, 1.0, 5)
        with pytest.raises(OracleUnavailable):
            theorem_report(inst.pair, result.trace, cfg, None)

    def test_needs_full_trace(self):
        inst = lossy_instance(0)
        cfg = SolverConfig(method=ForwardStep(rho=1.0), max_iters=5)
        result = solve(inst.pair, inst.x, cfg)
        with pytest.raises(TraceTooShort):
            theorem_report(inst.pair, result.trace, cfg, inst.z_true)

    def test_diagonal_pair_forward_step(self, diag_pair):
        x = diag_pair.decode(vec(1.0, 1.0))
        cfg = SolverConfig(method=ForwardStep(rho=1.0), max_iters=40, trace_level='full')
        trace = solve(diag_pair, x, cfg).trace
        fs = theorem_report(diag_pair, trace, cfg, vec(1.0, 1.0)).forward_step
        assert fs.per_step_descent_ok
        assert fs.residual_final == pytest.approx(0.5 ** 42, rel=1e-9)


@pytest.mark.slow
class TestAcceptanceGrids:

    def test_forward_step_descent_over_100_instances(self):
        for seed in range(100):
            inst = lossy_instance(seed)
            beta = cocoercivity_constant(inst.pair)
            cfg, result = fsm_run(inst, beta, 5000)
            fs = theorem_report(inst.pair, result.trace, cfg, linear_oracle(inst.pair, inst.x)).forward_step
            assert fs.per_step_descent_ok, seed
            assert fs.summed_bound_ok, seed
            assert fs.residual_final <= 1e-6, seed

    def test_inertial_lyapunov_descent_over_50_instances(self):
        for seed in range(50):
            inst = lossy_instance(seed)
            cfg, result = km_run(inst, 0.5, 0.2, 2000, beta=1.0)
            km = theorem_report(inst.pair, result.trace, cfg, linear_oracle(inst.pair, inst.x)).inertial
            assert km.lyapunov_descent_ok, seed
            assert km.bound_b_ok, seed

    def test_forward_step_matches_closed_form(self):
        for seed in range(50):
            inst = lossy_instance(seed)
            beta = cocoercivity_constant(inst.pair)
            z = solve(inst.pair, inst.x, SolverConfig(method=ForwardStep(rho=beta / 2), max_iters=10000)).z_final
            z_star = linear_oracle(inst.pair, inst.x)
            rel = float(torch.linalg.vector_norm(z - z_star) / torch.linalg.vector_norm(z_star))
            assert rel <= 1e-6, seed

    @pytest.mark.parametrize('alpha,lam', list(itertools.product((0.1, 0.5), (0.05, 0.2))))
    def test_inertial_checks_hold_where_condition_holds(self, alpha, lam):
        assert inertia_condition(alpha, lam)
        for seed in range(10):
            inst = lossy_instance(seed)
            cfg, result = km_run(inst, alpha, lam, 1000)
            km = theorem_report(inst.pair, result.trace, cfg, linear_oracle(inst.pair, inst.x)).inertial
            assert km.lyapunov_descent_ok and km.lemma_ok and km.one_step_ok
            assert km.boundedness_ok and km.bound_b_ok
