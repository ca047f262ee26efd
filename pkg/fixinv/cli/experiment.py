# Copyright (c) 2024 fixinv authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Experiment orchestration: seeded instances, Pareto benchmark, theorem
suite and cocoercivity scatter."""

import time
from dataclasses import dataclass
from typing import Annotated, Any, Dict, List, Optional, Union

import torch
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, ValidationError

from fixinv.diagnostics import (ScatterTable, TheoremReport, ci95, cocoercivity_scan, identity_deviation,
                                inertia_condition, linear_oracle, nmse_db, scatter_export, theorem_report)
from fixinv.models import (LinearPairSpec, LossySpectrum, MlpPairSpec, ModelSpec, PcaOptimal, build_pair,
                           cocoercivity_constant)
from fixinv.operators import OperatorPair, PrecisionMode, Vector
from fixinv.solvers import (AdamFree, AdamGrad, ForwardStep, GradDescent, InertialKM, SolveResult,
                            SolverConfig, residual_norm, solve)
from fixinv.utils.common import sample_latent, split_seed
from fixinv.utils.errors import ConfigParse, EmptyGrid
from fixinv.utils.executor import Executor
from fixinv.utils.file_utils import check_writable, load_config, logging, write_csv, write_json
from fixinv.utils.scheduler import CosineWarmupSchedule, FixedSchedule
from fixinv.watermark import WatermarkConfig

PARETO_HEADER = ('method', 'precision', 'iterations', 'runtime_ms_mean', 'nmse_db_mean', 'nmse_db_ci95',
                 'instances')

ModelField = Annotated[Union[LinearPairSpec, MlpPairSpec], Field(discriminator='family')]


def _default_model() -> MlpPairSpec:
    return MlpPairSpec(layer_widths_encoder=[64, 32, 16], layer_widths_decoder=[16, 32, 64],
                       activation='tanh', weight_scale=1.0, init='orthogonal', tied=True)


def _default_solvers() -> List[SolverConfig]:
    return [
        SolverConfig(method=ForwardStep(rho=0.001)),
        SolverConfig(method=InertialKM(alpha=0.9, rho=0.001)),
        SolverConfig(method=AdamFree(lr=0.01), schedule=CosineWarmupSchedule(lr_max=0.01)),
        SolverConfig(method=GradDescent(rho=0.01), schedule=FixedSchedule(lr=0.01)),
        SolverConfig(method=AdamGrad(lr=0.1), schedule=CosineWarmupSchedule(lr_max=0.1)),
    ]


class InertialCase(BaseModel):
    model_config = ConfigDict(extra='forbid')

    alpha: float = Field(ge=0.0, lt=1.0)
    lam: PositiveFloat


def _default_cases() -> List[InertialCase]:
    return [InertialCase(alpha=a, lam=l) for a, l in
            ((0.5, 0.2), (0.5, 0.3), (0.1, 0.5), (0.1, 0.9), (0.9, 0.001), (0.9, 0.01))]


class TheoremSuiteConfig(BaseModel):
    """Seeds default to seed_base .. seed_base + instances - 1."""
    model_config = ConfigDict(extra='forbid')

    model: LinearPairSpec = LinearPairSpec(variant=LossySpectrum(condition_number=100.0))
    identity_model: LinearPairSpec = LinearPairSpec(variant=PcaOptimal())
    instances: NonNegativeInt = 100
    seeds: Optional[List[int]] = None
    forward_step_iters: PositiveInt = 5000
    forward_step_rho_over_beta: PositiveFloat = 1.0
    residual_target: PositiveFloat = 1e-6
    identity_tol: PositiveFloat = 1e-8
    inertial_iters: PositiveInt = 2000
    inertial_cases: List[InertialCase] = Field(default_factory=_default_cases)

    def seed_grid(self, seed_base: int) -> List[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return [seed_base + i for i in range(self.instances)]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    model: ModelField = Field(default_factory=_default_model)
    solvers: List[SolverConfig] = Field(default_factory=_default_solvers)
    iterations: List[PositiveInt] = [20, 30, 50, 100, 200]
    instances: PositiveInt = 100
    seed_base: int = 0
    latent_std: PositiveFloat = 1.0
    output_path: Optional[str] = None
    window: PositiveInt = 100
    z_inf_step: Optional[PositiveInt] = None
    cocoercivity_solver: SolverConfig = SolverConfig(method=ForwardStep(rho=0.001))
    theorems: TheoremSuiteConfig = Field(default_factory=TheoremSuiteConfig)
    watermark: WatermarkConfig = Field(default_factory=WatermarkConfig)
    max_workers: Optional[PositiveInt] = None

    @property
    def reference_step(self) -> int:
        return self.z_inf_step or 3 * self.window

    def with_precision(self, precision: PrecisionMode) -> 'ExperimentConfig':
        wm = self.watermark
        return self.model_copy(update={
            'solvers': [s.with_precision(precision) for s in self.solvers],
            'cocoercivity_solver': self.cocoercivity_solver.with_precision(precision),
            'watermark': wm.model_copy(update={'grad_free': wm.grad_free.with_precision(precision),
                                               'grad_based': wm.grad_based.with_precision(precision)}),
        })


def parse_experiment_config(configs: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(configs)
    except ValidationError as e:
        raise ConfigParse(str(e)) from e


def load_experiment_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return parse_experiment_config(load_config(path))


@dataclass
class Instance:
    seed: int
    pair: OperatorPair
    z_true: Vector
    x: Vector


def make_instance(model: ModelSpec, seed: int, latent_std: float = 1.0) -> Instance:
    """Model weights and z_true both derive from ``seed`` alone."""
    model_seed, latent_seed = split_seed(seed)
    pair = build_pair(model.model_copy(update={'seed': model_seed}))
    z_true = sample_latent(latent_seed, pair.latent_dim, latent_std)
    return Instance(seed=seed, pair=pair, z_true=z_true, x=pair.decode(z_true))


@dataclass
class ParetoRow:
    method: str
    precision: str
    iterations: int
    runtime_ms_mean: float
    nmse_db_mean: float
    nmse_db_ci95: float
    instances: int

    def as_row(self) -> List[Any]:
        return [self.method, self.precision, self.iterations, repr(self.runtime_ms_mean),
                repr(self.nmse_db_mean), repr(self.nmse_db_ci95), self.instances]


def pareto_frontier(rows: List[ParetoRow]) -> List[ParetoRow]:
    """Rows not dominated in (runtime_ms_mean, nmse_db_mean)."""
    def dominated(a: ParetoRow) -> bool:
        return any(b.runtime_ms_mean <= a.runtime_ms_mean and b.nmse_db_mean <= a.nmse_db_mean
                   and (b.runtime_ms_mean < a.runtime_ms_mean or b.nmse_db_mean < a.nmse_db_mean)
                   for b in rows)
    return [r for r in rows if not dominated(r)]


def _timed_solve(instance: Instance, cfg: SolverConfig):
    start = time.perf_counter()
    result = solve(instance.pair, instance.x, cfg)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return result, elapsed_ms


def run_pareto(config: ExperimentConfig, output_path: Optional[str] = None,
               progress: bool = True) -> List[ParetoRow]:
    """Benchmark every (solver, iteration budget) cell over the seeded
    instances; writes the CSV when an output path is known."""
    path = output_path or config.output_path
    if path is not None:
        check_writable(path)
    if not config.solvers or not config.iterations:
        raise EmptyGrid('solver grid is empty')
    executor = Executor(config.max_workers, progress=progress)
    instances = [make_instance(config.model, config.seed_base + i, config.latent_std)
                 for i in range(config.instances)]
    rows = []
    for template in config.solvers:
        for iters in config.iterations:
            cfg = template.with_iterations(iters)
            outcomes = executor.map(lambda inst: _timed_solve(inst, cfg), instances,
                                    desc='{} K={}'.format(cfg.display_name, iters))
            nmse = [nmse_db(r.z_final, inst.z_true) for (r, _), inst in zip(outcomes, instances)]
            runtime = [ms for _, ms in outcomes]
            failed = sum(1 for r, _ in outcomes if not r.ok)
            if failed:
                logging.warning('{} K={}: {} of {} runs ended early'.format(cfg.display_name, iters, failed,
                                                                            len(outcomes)))
            row = ParetoRow(method=cfg.display_name,
                            precision=cfg.precision.value,
                            iterations=iters,
                            runtime_ms_mean=sum(runtime) / len(runtime),
                            nmse_db_mean=sum(nmse) / len(nmse),
                            nmse_db_ci95=ci95(nmse),
                            instances=len(instances))
            logging.info('{} {} K={} runtime {:.3f} ms nmse {:.3f} +- {:.3f} dB'.format(
                row.method, row.precision, iters, row.runtime_ms_mean, row.nmse_db_mean, row.nmse_db_ci95))
            rows.append(row)
    for r in pareto_frontier(rows):
        logging.info('frontier: {} {} K={}'.format(r.method, r.precision, r.iterations))
    if path is not None:
        write_csv(path, PARETO_HEADER, [r.as_row() for r in rows])
    return rows


@dataclass
class TheoremSuiteResult:
    reports: List[Dict[str, Any]]
    summary: Dict[str, Any]

    @property
    def violations(self) -> int:
        return self.summary['total_violations']


def _min(values: List[Optional[float]]) -> Optional[float]:
    values = [v for v in values if v is not None]
    return min(values) if values else None


def _theorem_instance(suite: TheoremSuiteConfig, seed: int) -> Dict[str, Any]:
    inst = make_instance(suite.model, seed)
    z_star = linear_oracle(inst.pair, inst.x)
    beta = cocoercivity_constant(inst.pair)
    fsm_cfg = SolverConfig(method=ForwardStep(rho=suite.forward_step_rho_over_beta * beta),
                           max_iters=suite.forward_step_iters, trace_level='full')
    fsm = solve(inst.pair, inst.x, fsm_cfg)
    out = {'seed': seed,
           'forward_step': theorem_report(inst.pair, fsm.trace, fsm_cfg, z_star).forward_step,
           'inertial': []}
    for case in suite.inertial_cases:
        km_cfg = SolverConfig(method=InertialKM(alpha=case.alpha, lam=case.lam, beta=beta),
                              max_iters=suite.inertial_iters, trace_level='full')
        km = solve(inst.pair, inst.x, km_cfg)
        out['inertial'].append(theorem_report(inst.pair, km.trace, km_cfg, z_star).inertial)
    ident = make_instance(suite.identity_model, seed)
    out['identity_deviation'] = identity_deviation(ident.pair)
    return out


def run_theorem_suite(config: ExperimentConfig, progress: bool = True) -> TheoremSuiteResult:
    """Forward-step and inertial checks over the seed grid; the summary keeps
    the worst slack of every inequality and counts violations where the
    hypotheses hold."""
    suite = config.theorems
    seeds = suite.seed_grid(config.seed_base)
    if not seeds:
        raise EmptyGrid('theorem suite has no seeds')
    per_seed = Executor(config.max_workers, progress=progress).map(
        lambda s: _theorem_instance(suite, s), seeds, desc='theorems')

    fsm = [r['forward_step'] for r in per_seed]
    fsm_summary = {
        'rho_over_beta': suite.forward_step_rho_over_beta,
        'iterations': suite.forward_step_iters,
        'per_step_descent_worst_slack': min(c.worst_slack for c in fsm),
        'summed_bound_worst_slack': min(c.summed_slack for c in fsm),
        'residual_final_max': max(c.residual_final for c in fsm),
        'residual_target': suite.residual_target,
    }
    fsm_summary['violations'] = (sum(1 for c in fsm if not c.per_step_descent_ok)
                                 + sum(1 for c in fsm if not c.summed_bound_ok)
                                 + sum(1 for c in fsm if c.residual_final > suite.residual_target))
    total = fsm_summary['violations']

    inertial_summary = []
    for i, case in enumerate(suite.inertial_cases):
        checks = [r['inertial'][i] for r in per_seed]
        holds = inertia_condition(case.alpha, case.lam)
        entry = {
            'alpha': case.alpha,
            'lam': case.lam,
            'inertia_condition_ok': holds,
            'epsilon': checks[0].epsilon,
            'm_constant': checks[0].m_constant,
            'lyapunov_worst_slack': min(c.lyapunov_worst_slack for c in checks),
            'one_step_worst_slack': min(c.one_step_worst_slack for c in checks),
            'lemma_worst_slack': min(c.lemma_worst_slack for c in checks),
            'boundedness_worst_slack': _min([c.boundedness_worst_slack for c in checks]),
            'bound_b_worst_slack': _min([c.bound_b_worst_slack for c in checks]),
            'yz_gap_final_max': max(c.yz_gap_final for c in checks),
            'step_series_tail_fraction_max': max(c.step_series.tail_fraction for c in checks),
        }
        violations = sum(1 for c in checks for name in c.binding_checks() if getattr(c, name) is False)
        entry['violations'] = violations
        total += violations
        inertial_summary.append(entry)

    ident = [r['identity_deviation'] for r in per_seed]
    identity_violations = sum(1 for d in ident if d > suite.identity_tol)
    total += identity_violations
    summary = {
        'seeds': len(seeds),
        'forward_step': fsm_summary,
        'inertial': inertial_summary,
        'identity_deviation_max': max(ident),
        'identity_violations': identity_violations,
        'total_violations': total,
    }
    logging.info('theorem suite over {} seeds: {} violations'.format(len(seeds), total))
    reports = [{'seed': r['seed'],
                'forward_step': TheoremReport(forward_step=r['forward_step']).to_dict()['forward_step'],
                'inertial': [TheoremReport(inertial=c).to_dict()['inertial'] for c in r['inertial']],
                'identity_deviation': r['identity_deviation']} for r in per_seed]
    return TheoremSuiteResult(reports=reports, summary=summary)


def run_cocoercivity(config: ExperimentConfig, output_path: Optional[str] = None,
                     progress: bool = True) -> ScatterTable:
    """Scan min cocoercivity ratio over [0, window] against
    ||z^window - z^inf||, with z^inf the iterate at ``reference_step``."""
    path = output_path or config.output_path
    if path is not None:
        check_writable(path)
    window, ref_step = config.window, config.reference_step
    cfg = config.cocoercivity_solver.with_iterations(max(ref_step, window)).with_trace('full')

    def scan_one(i: int):
        inst = make_instance(config.model, config.seed_base + i, config.latent_std)
        result = solve(inst.pair, inst.x, cfg)
        iterates = result.trace.iterates
        z_inf = iterates[min(ref_step, len(iterates) - 1)]
        scan = cocoercivity_scan(inst.pair, result.trace, z_inf, min(window, len(iterates) - 1))
        return scan, nmse_db(iterates[min(window, len(iterates) - 1)], inst.z_true)

    out = Executor(config.max_workers, progress=progress).map(scan_one, list(range(config.instances)),
                                                              desc='cocoercivity')
    table = scatter_export([s for s, _ in out], [n for _, n in out])
    table.instance_ids = [config.seed_base + i for i in range(config.instances)]
    if path is not None:
        table.to_csv(path)
    return table


def run_single(config: ExperimentConfig) -> Dict[str, Any]:
    """Invert instance ``seed_base`` with the first configured solver."""
    if not config.solvers:
        raise EmptyGrid('no solver configured')
    cfg = config.solvers[0]
    inst = make_instance(config.model, config.seed_base, config.latent_std)
    result: SolveResult = solve(inst.pair, inst.x, cfg)
    with torch.no_grad():
        res = residual_norm(inst.pair, inst.x, result.z_final)
    return {'method': cfg.display_name,
            'precision': cfg.precision.value,
            'iterations': result.iterations_run,
            'terminated_by': result.terminated_by.value,
            'nmse_db': nmse_db(result.z_final, inst.z_true),
            'residual': res,
            'result': result}
