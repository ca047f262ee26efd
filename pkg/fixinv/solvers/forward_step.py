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

import torch

from fixinv.operators import (OperatorPair, PrecisionMode, ResidualOperator, Vector,
                              check_dim, check_finite, maybe_round)
from fixinv.solvers.config import SolverConfig
from fixinv.solvers.trace import SolveResult, TerminatedBy, TraceRecorder
from fixinv.utils.errors import InvalidSpec, NonFiniteOutput
from fixinv.utils.scheduler import schedule_lr


def forward_step(y: Vector, ty: Vector, rho: float, mode: PrecisionMode) -> Vector:
    """z <- y - rho * T(y)."""
    return maybe_round(y - rho * ty, mode)


def initial_latent(op: ResidualOperator, mode: PrecisionMode) -> Vector:
    # z^0 = E(x)
    return maybe_round(op.target_latent.clone(), mode)


def fixed_point_iterate(pair: OperatorPair, x: Vector, cfg: SolverConfig, alpha: float) -> SolveResult:
    """Inertial forward-step loop; ``alpha == 0`` is the plain forward step method.

    y^k = z^k + alpha (z^k - z^{k-1}), z^{k+1} = y^k - rho_k T(y^k), with
    z^{-1} = z^0.
    """
    check_dim(x, pair.pixel_dim, 'x')
    mode = cfg.precision
    schedule = cfg.resolved_schedule()
    op = ResidualOperator.for_target(pair, x, mode)
    z = initial_latent(op, mode)
    z_prev = z
    rec = TraceRecorder(z, cfg.full_trace, inertial=alpha > 0 or cfg.method.name == 'InertialKM',
                        label=cfg.method.name, log_interval=cfg.log_interval)
    need_final_residual = True
    try:
        for k in range(1, cfg.max_iters + 1):
            rho = schedule_lr(schedule, k)
            if alpha == 0.0:
                rec.tic()
                r = op(z, mode)
                z_next = forward_step(z, r, rho, mode)
                wall = rec.toc()
                res = rec.residual(r)
                ty = r
            else:
                r = op(z, mode)
                res = rec.residual(r)
                rec.tic()
                y = maybe_round(z + alpha * (z - z_prev), mode)
                ty = op(y, mode)
                z_next = forward_step(y, ty, rho, mode)
                wall = rec.toc()
            if cfg.residual_tol is not None and res <= cfg.residual_tol:
                rec.terminated_by = TerminatedBy.RESIDUAL_TOL
                need_final_residual = False
                break
            if rec.trace.ty_norms is not None:
                rec.ty(ty)
            check_finite(z_next, 'iterate')
            z_prev, z = z, z_next
            rec.step(z, z_prev, wall, rho)
        if need_final_residual:
            rec.residual(op(z, mode))
    except NonFiniteOutput as e:
        rec.non_finite(e)
    return rec.result(z)


def forward_step_solve(pair: OperatorPair, x: Vector, cfg: SolverConfig) -> SolveResult:
    if cfg.method.name != 'ForwardStep':
        raise InvalidSpec('forward_step_solve got method {}'.format(cfg.method.name))
    return fixed_point_iterate(pair, x, cfg, alpha=0.0)


@torch.no_grad()
def residual_norm(pair: OperatorPair, x: Vector, z: Vector,
                  mode: PrecisionMode = PrecisionMode.FULL) -> float:
    op = ResidualOperator.for_target(pair, x, mode)
    return float(torch.linalg.vector_norm(op(z, mode)))
