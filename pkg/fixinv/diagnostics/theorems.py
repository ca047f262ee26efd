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
"""Runtime checks of the forward-step and inertial convergence guarantees.

Every inequality is reported as ``slack = rhs - lhs``; a check passes when
its worst slack is at least ``-SLACK_TOL``. Notation: z* the oracle zero of
T, D_k = ||z^k - z*||^2, d_k = ||z^k - z^{k-1}||^2, s_k =
||z^{k+1} - 2 z^k + z^{k-1}||^2, nu = 1/lam - 1, delta_k = nu (1 - alpha) d_k
and C_k = D_k - alpha D_{k-1} + delta_k, with z^{-1} = z^0.
"""

import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch

from fixinv.models.linear import cocoercivity_constant
from fixinv.operators import OperatorPair, PrecisionMode, Vector, check_dim
from fixinv.solvers import SolverConfig, solve
from fixinv.solvers.config import ForwardStep
from fixinv.solvers.trace import IterateTrace
from fixinv.utils.errors import InvalidSpec, NotLinear, OracleUnavailable, TraceTooShort
from fixinv.utils.scheduler import FixedSchedule, schedule_lr

SLACK_TOL = 1e-9
TAIL_FRACTION = 0.1

FORWARD_STEP_CHECKS = ('per_step_descent_ok', 'summed_bound_ok')
# the one-step bound needs only cocoercivity, the rest need the inertia condition
ALWAYS_BINDING = ('one_step_ok',)
CONDITIONAL_CHECKS = ('lyapunov_descent_ok', 'lemma_ok', 'boundedness_ok', 'bound_b_ok')


@dataclass
class SeriesSummary:
    """Partial sum of a non-negative series and the share of its last tenth."""
    total: float
    tail_fraction: float


@dataclass
class ForwardStepChecks:
    beta: float
    beta_source: str
    per_step_descent_ok: bool
    worst_slack: float
    summed_bound_ok: bool
    summed_slack: float
    residual_final: float
    steps_checked: int


@dataclass
class InertialChecks:
    alpha: float
    lam: float
    rho: float
    beta: float
    beta_source: str
    inertia_condition_ok: bool
    epsilon: float
    lyapunov_descent_ok: bool
    lyapunov_worst_slack: float
    one_step_ok: bool
    one_step_worst_slack: float
    lemma_ok: bool
    lemma_worst_slack: float
    boundedness_ok: Optional[bool]
    boundedness_worst_slack: Optional[float]
    bound_b_ok: Optional[bool]
    bound_b_worst_slack: Optional[float]
    m_constant: Optional[float]
    step_series: SeriesSummary
    second_diff_series: SeriesSummary
    ty_series: SeriesSummary
    limit_exists_estimate: float
    limit_spread: float
    yz_gap_final: float
    steps_checked: int

    def binding_checks(self) -> Tuple[str, ...]:
        if self.inertia_condition_ok:
            return ALWAYS_BINDING + CONDITIONAL_CHECKS
        return ALWAYS_BINDING


@dataclass
class TheoremReport:
    forward_step: Optional[ForwardStepChecks] = None
    inertial: Optional[InertialChecks] = None
    identity_deviation: Optional[float] = None

    @property
    def violations(self) -> List[str]:
        """Failed checks. The inertial descent chain only counts where the
        inertia condition holds; outside it the flags are informational."""
        failed = []
        if self.forward_step is not None:
            failed += ['ForwardStepChecks.{}'.format(name) for name in FORWARD_STEP_CHECKS
                       if getattr(self.forward_step, name) is False]
        if self.inertial is not None:
            failed += ['InertialChecks.{}'.format(name) for name in self.inertial.binding_checks()
                       if getattr(self.inertial, name) is False]
        return failed

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def inertia_condition(alpha: float, lam: float) -> bool:
    """lam (1 - alpha + 2 alpha^2) < (1 - alpha)^2."""
    return lam * (1.0 - alpha + 2.0 * alpha * alpha) < (1.0 - alpha) ** 2


def inertial_epsilon(alpha: float, lam: float) -> float:
    """nu (1 - alpha) - alpha (1 + alpha) - nu alpha (1 - alpha); positive
    exactly when ``inertia_condition`` holds."""
    nu = 1.0 / lam - 1.0
    return nu * (1.0 - alpha) - alpha * (1.0 + alpha) - nu * alpha * (1.0 - alpha)


def identity_deviation(pair: OperatorPair) -> float:
    """max_ij |(E·D)_ij - I_ij| of a linear pair."""
    if pair.composite is None:
        raise NotLinear('{} has no composite matrix'.format(pair))
    eye = torch.eye(pair.latent_dim, dtype=pair.composite.dtype)
    return float((pair.composite - eye).abs().max())


def linear_oracle(pair: OperatorPair, x: Vector) -> Vector:
    """Solve (E·D) z = E x directly."""
    if pair.composite is None:
        raise OracleUnavailable('no closed-form zero for {}'.format(pair))
    return torch.linalg.solve(pair.composite, pair.encode(x))


def reference_solution(pair: OperatorPair, x: Vector, max_iters: int = 20000,
                       rho: float = 0.5, tol: float = 1e-13) -> Vector:
    """Zero of T from the closed form when available, else a long
    full-precision forward-step run."""
    if pair.composite is not None:
        return linear_oracle(pair, x)
    cfg = SolverConfig(method=ForwardStep(rho=rho), max_iters=max_iters, residual_tol=tol)
    return solve(pair, x, cfg).z_final


def _series(terms: torch.Tensor) -> SeriesSummary:
    total = float(terms.sum())
    if terms.numel() == 0 or total == 0.0:
        return SeriesSummary(total=total, tail_fraction=0.0)
    tail = max(1, int(round(TAIL_FRACTION * terms.numel())))
    return SeriesSummary(total=total, tail_fraction=float(terms[-tail:].sum()) / total)


class _TraceGeometry:
    """Squared distances and residuals of a full trace, in full precision."""

    def __init__(self, pair: OperatorPair, trace: IterateTrace, z_star: Vector):
        if not trace.is_full:
            raise TraceTooShort('theorem checks need a full trace')
        if len(trace.iterates) < 2:
            raise TraceTooShort('trace holds no update')
        check_dim(z_star, pair.latent_dim, 'z_star')
        self.pair = pair
        self.z = torch.stack([z.to(torch.float64) for z in trace.iterates])
        self.z_star = z_star
        self.steps = self.z.shape[0] - 1
        self.ed_star = self._ed(z_star.unsqueeze(0))[0]
        self.dist = ((self.z - z_star) ** 2).sum(dim=1)
        self.t_sq = self.residual_sq(self.z)

    def _ed(self, zs: torch.Tensor) -> torch.Tensor:
        # layer stacks accept a batch of latents row-wise
        with torch.no_grad():
            return self.pair.encoder(self.pair.decoder(zs, PrecisionMode.FULL), PrecisionMode.FULL)

    def residual(self, zs: torch.Tensor) -> torch.Tensor:
        # T z = ED z - ED z*, since T z* = 0
        return self._ed(zs) - self.ed_star

    def residual_sq(self, zs: torch.Tensor) -> torch.Tensor:
        return (self.residual(zs) ** 2).sum(dim=1)

    def beta(self):
        try:
            beta = cocoercivity_constant(self.pair)
        except NotLinear:
            beta = None
        if beta is not None:
            return beta, 'composite'
        t = self.residual(self.z)
        den = (t ** 2).sum(dim=1)
        mask = den >= 1e-20
        if not bool(mask.any()):
            raise OracleUnavailable('no usable step to estimate beta')
        ratios = (t * (self.z - self.z_star)).sum(dim=1)[mask] / den[mask]
        return float(ratios.min()), 'empirical'


def _step_sizes(config: SolverConfig, steps: int) -> List[float]:
    schedule = config.resolved_schedule()
    if steps > schedule.total_steps:
        schedule = schedule.model_copy(update={'total_steps': steps})
    return [schedule_lr(schedule, k) for k in range(1, steps + 1)]


def _forward_step_checks(geo: _TraceGeometry, config: SolverConfig) -> ForwardStepChecks:
    beta, source = geo.beta()
    rho = torch.tensor(_step_sizes(config, geo.steps), dtype=torch.float64)
    gain = rho * (2.0 * beta - rho) * geo.t_sq[:-1]
    slack = geo.dist[:-1] - gain - geo.dist[1:]
    summed = float(geo.dist[0] - geo.dist[-1] - gain.sum())
    worst = float(slack.min())
    return ForwardStepChecks(beta=beta,
                             beta_source=source,
                             per_step_descent_ok=worst >= -SLACK_TOL,
                             worst_slack=worst,
                             summed_bound_ok=summed >= -SLACK_TOL,
                             summed_slack=summed,
                             residual_final=float(geo.t_sq[-1].sqrt()),
                             steps_checked=geo.steps)


def _inertial_checks(geo: _TraceGeometry, config: SolverConfig) -> InertialChecks:
    method = config.method
    schedule = config.resolved_schedule()
    if not isinstance(schedule, FixedSchedule):
        raise InvalidSpec('inertial checks need a fixed step')
    beta, source = geo.beta()
    alpha, rho = method.alpha, schedule.lr
    lam = rho / (2.0 * beta)
    nu = 1.0 / lam - 1.0
    eps = inertial_epsilon(alpha, lam)
    n = geo.steps

    z = geo.z
    z_prev = torch.cat([z[:1], z[:-1]])  # z^{-1} = z^0
    dist = geo.dist
    dist_prev = torch.cat([dist[:1], dist[:-1]])
    d = ((z - z_prev) ** 2).sum(dim=1)  # d_0 = 0
    s = ((z[1:] - 2.0 * z[:-1] + z_prev[:-1]) ** 2).sum(dim=1)  # s_0 .. s_{n-1}
    delta = nu * (1.0 - alpha) * d
    c = dist - alpha * dist_prev + delta

    lyap = c[:-1] - (c[1:] + nu * alpha * s + eps * d[:-1])
    coeff = alpha * (1.0 + alpha) + nu * alpha * (1.0 - alpha)
    lemma = coeff * d[:-1] - (dist[1:] - dist[:-1] - alpha * (dist[:-1] - dist_prev[:-1])
                             + delta[1:] + nu * alpha * s)

    y = z + alpha * (z - z_prev)  # y^0 .. y^n
    y_dist = ((y - geo.z_star) ** 2).sum(dim=1)
    ty_sq = geo.residual_sq(y)
    one_step = y_dist[:-1] - rho * (2.0 * beta - rho) * ty_sq[:-1] - dist[1:]

    ok = inertia_condition(alpha, lam)
    bounded_ok = bounded_worst = None
    bound_ok = bound_worst = m_const = None
    if ok and eps > 0:
        bounded = alpha * dist[:-1] + c[0] - dist[1:]
        bounded_worst = float(bounded.min())
        bounded_ok = bounded_worst >= -SLACK_TOL
        m_const = (1.0 + alpha) ** 2 / (eps * rho * rho)
        if n >= 1:
            running_min = torch.cummin(ty_sq[1:], dim=0).values  # k = 1..n
            counts = torch.arange(1, running_min.numel() + 1, dtype=torch.float64)
            bound = m_const * float(dist[1]) / counts - running_min
            bound_worst = float(bound.min())
            bound_ok = bound_worst >= -SLACK_TOL

    tail = max(1, int(round(TAIL_FRACTION * (n + 1))))
    root_dist = dist.sqrt()
    lyap_worst, lemma_worst, one_worst = float(lyap.min()), float(lemma.min()), float(one_step.min())
    return InertialChecks(alpha=alpha, lam=lam, rho=rho, beta=beta, beta_source=source,
                          inertia_condition_ok=ok,
                          epsilon=eps,
                          lyapunov_descent_ok=lyap_worst >= -SLACK_TOL,
                          lyapunov_worst_slack=lyap_worst,
                          one_step_ok=one_worst >= -SLACK_TOL,
                          one_step_worst_slack=one_worst,
                          lemma_ok=lemma_worst >= -SLACK_TOL,
                          lemma_worst_slack=lemma_worst,
                          boundedness_ok=bounded_ok,
                          boundedness_worst_slack=bounded_worst,
                          bound_b_ok=bound_ok,
                          bound_b_worst_slack=bound_worst,
                          m_constant=m_const,
                          step_series=_series(d[1:]),
                          second_diff_series=_series(s),
                          ty_series=_series(ty_sq[:-1]),
                          limit_exists_estimate=float(root_dist[-1]),
                          limit_spread=float(root_dist[-tail:].max() - root_dist[-tail:].min()),
                          yz_gap_final=float(alpha * (z[-1] - z[-2]).norm()),
                          steps_checked=n)


def theorem_report(pair: OperatorPair, trace: IterateTrace, config: SolverConfig,
                   z_star: Optional[Vector]) -> TheoremReport:
    """Evaluate every convergence inequality that applies to ``config.method``
    on ``trace``. Inertial checks are evaluated even when the inertia
    condition fails, so violations are observed rather than assumed."""
    if z_star is None:
        raise OracleUnavailable('theorem checks need the zero z*')
    geo = _TraceGeometry(pair, trace, z_star)
    report = TheoremReport()
    if config.method.name == 'ForwardStep':
        report.forward_step = _forward_step_checks(geo, config)
    elif config.method.name == 'InertialKM':
        report.inertial = _inertial_checks(geo, config)
    if pair.composite is not None:
        report.identity_deviation = identity_deviation(pair)
    return report
