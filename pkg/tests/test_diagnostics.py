"""NMSE, confidence intervals and cocoercivity scans."""

import csv
import math

import numpy as np
import pytest
import torch

from fixinv.diagnostics import NMSE_FLOOR_DB, CocoercivityScan, ci95, cocoercivity_scan, nmse_db, scatter_export
from fixinv.solvers import ForwardStep, IterateTrace, SolverConfig, solve
from fixinv.utils.errors import DimensionMismatch, EmptyInput, TraceTooShort, ZeroReference
from helpers import lossy_instance, pca_instance, vec


def full_trace(inst, rho, iters):
    cfg = SolverConfig(method=ForwardStep(rho=rho), max_iters=iters, trace_level='full')
    return solve(inst.pair, inst.x, cfg).trace


def scan_stub(min_ratio, convergence_norm):
    return CocoercivityScan(ratios=[] if min_ratio is None else [min_ratio], steps=[], excluded=0,
                            min_ratio=min_ratio, reference_iterate=vec(0.0), convergence_norm=convergence_norm)


class TestNmse:

    def test_exact_estimate_hits_floor(self):
        assert nmse_db(vec(1.0, 2.0), vec(1.0, 2.0)) == NMSE_FLOOR_DB == -300.0

    def test_known_values(self):
        assert nmse_db(vec(1.1, 0.0), vec(1.0, 0.0)) == pytest.approx(-20.0, abs=1e-9)
        assert nmse_db(vec(2.0, 0.0), vec(1.0, 0.0)) == pytest.approx(0.0, abs=1e-12)

    def test_scaling_the_error(self):
        rng = np.random.default_rng(42)
        ref = torch.from_numpy(rng.standard_normal(16))
        err = torch.from_numpy(rng.standard_normal(16)) * 1e-3
        assert nmse_db(ref + 10 * err, ref) - nmse_db(ref + err, ref) == pytest.approx(20.0, abs=1e-9)

    def test_zero_reference(self):
        with pytest.raises(ZeroReference):
            nmse_db(vec(1.0, 0.0), vec(0.0, 0.0))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            nmse_db(vec(1.0, 0.0), vec(1.0, 0.0, 0.0))


class TestCi95:

    def test_single_sample(self):
        assert ci95([-12.5]) == 0.0

    def test_known_values(self):
        assert ci95([1.0, 2.0, 3.0]) == pytest.approx(1.96 / math.sqrt(3), rel=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            ci95([])


class TestCocoercivityScan:
    """Ratio <ED z_inf - ED z, z_inf - z> / ||ED z_inf - ED z||^2."""

    def test_ratios_within_spectrum_bounds(self):
        for seed in range(5):
            inst = lossy_instance(seed)
            trace = full_trace(inst, 1.0, 300)
            scan = cocoercivity_scan(inst.pair, trace, trace.iterates[300], window=100)
            lam = torch.linalg.eigvalsh(inst.pair.composite)
            lo, hi = 1.0 / float(lam.max()), 1.0 / float(lam.min())
            assert scan.ratios
            assert min(scan.ratios) >= lo - 1e-9
            assert max(scan.ratios) <= hi + 1e-9

    def test_pca_ratio_is_one(self):
        inst = pca_instance(0)
        gen = torch.Generator().manual_seed(0)
        iterates = [torch.randn(16, generator=gen, dtype=torch.float64) for _ in range(11)]
        z_inf = torch.randn(16, generator=gen, dtype=torch.float64)
        scan = cocoercivity_scan(inst.pair, IterateTrace(iterates=iterates), z_inf, window=10)
        assert scan.excluded == 0
        np.testing.assert_allclose(scan.ratios, 1.0, rtol=0, atol=1e-9)

    def test_diagonal_pair_ratio(self, diag_pair):
        x = diag_pair.decode(vec(1.0, 1.0))
        trace = solve(diag_pair, x, SolverConfig(method=ForwardStep(rho=1.0), max_iters=30,
                                                 trace_level='full')).trace
        scan = cocoercivity_scan(diag_pair, trace, trace.iterates[30], window=10)
        assert all(1.0 - 1e-9 <= r <= 2.0 + 1e-9 for r in scan.ratios)
        assert scan.ratios[-1] == pytest.approx(2.0, abs=1e-9)
        assert scan.convergence_norm == pytest.approx(0.5 ** 11 - 0.5 ** 31, rel=1e-9)

    def test_converged_iterates_are_excluded(self):
        inst = lossy_instance(0)
        z = inst.z_true
        scan = cocoercivity_scan(inst.pair, IterateTrace(iterates=[z.clone() for _ in range(4)]), z, window=3)
        assert scan.excluded == 4
        assert scan.min_ratio is None and scan.ratios == []

    def test_needs_full_trace(self):
        inst = lossy_instance(0)
        trace = solve(inst.pair, inst.x, SolverConfig(method=ForwardStep(rho=1.0), max_iters=5)).trace
        with pytest.raises(TraceTooShort):
            cocoercivity_scan(inst.pair, trace, inst.z_true, window=3)

    def test_window_longer_than_trace(self):
        inst = lossy_instance(0)
        trace = full_trace(inst, 1.0, 5)
        with pytest.raises(TraceTooShort):
            cocoercivity_scan(inst.pair, trace, trace.iterates[-1], window=10)


class TestScatterExport:

    def test_least_squares_line(self):
        scans = [scan_stub(1.0, 2.0), scan_stub(2.0, 4.0), scan_stub(3.0, 7.0)]
        table = scatter_export(scans, [-10.0, -20.0, -30.0])
        assert table.slope == pytest.approx(2.5, abs=1e-12)
        assert table.intercept == pytest.approx(-2.0 / 3.0, abs=1e-12)
        assert table.rows[1] == (2.0, 4.0, -20.0)

    def test_single_point_has_no_fit(self):
        table = scatter_export([scan_stub(1.0, 2.0)], [-10.0])
        assert table.slope is None and table.intercept is None
        assert len(table.rows) == 1

    def test_degenerate_spread_has_no_fit(self):
        table = scatter_export([scan_stub(1.0, 2.0), scan_stub(1.0, 3.0)], [-10.0, -11.0])
        assert table.slope is None

    def test_scans_without_ratio_are_kept_but_not_fitted(self):
        table = scatter_export([scan_stub(None, 0.0), scan_stub(1.0, 2.0), scan_stub(2.0, 3.0)], [0.0, 0.0, 0.0])
        assert len(table.rows) == 3
        assert table.slope == pytest.approx(1.0, abs=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            scatter_export([], [])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            scatter_export([scan_stub(1.0, 2.0)], [-1.0, -2.0])

    def test_csv_layout(self, tmp_path):
        table = scatter_export([scan_stub(1.0, 2.0), scan_stub(None, 4.0)], [-10.0, -20.0])
        table.instance_ids = [7, 8]
        path = tmp_path / 'scatter.csv'
        table.to_csv(str(path))
        with open(path, newline='') as fin:
            rows = list(csv.reader(fin))
        assert rows[0] == ['instance_id', 'min_ratio', 'convergence_norm', 'final_nmse_db']
        assert rows[1] == ['7', '1.0', '2.0', '-10.0']
        assert rows[2][1] == ''
