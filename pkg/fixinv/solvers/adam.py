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

from typing import Callable, List

import torch

from fixinv.operators import (HALF_TINY, OperatorPair, PrecisionMode, ResidualOperator, Vector,
                              check_dim, check_finite, round_to_half)
from fixinv.solvers.config import SolverConfig
from fixinv.solvers.forward_step import initial_latent
from fixinv.solvers.trace import SolveResult, TerminatedBy, TraceRecorder
from fixinv.utils.errors import InvalidSpec, NoGradient, NonFiniteOutput
from fixinv.utils.scheduler import ScheduledLR, schedule_lr

OptimizerFactory = Callable[[List[torch.Tensor], float], torch.optim.Optimizer]

_STATE_BUFFERS = ('exp_avg', 'exp_avg_sq', 'momentum_buffer')


@torch.no_grad()
def _round_state(optimizer: torch.optim.Optimizer, param: torch.Tensor, keep_buffers: bool):
    param.copy_(round_to_half(param))
    if keep_buffers:
        return
    state = optimizer.state[param]
    for key in _STATE_BUFFERS:
        buf = state.get(key)
        if isinstance(buf, torch.Tensor):
            buf.copy_(round_to_half(buf))


def optimizer_iterate(pair: OperatorPair, x: Vector, cfg: SolverConfig,
                      make_optimizer: OptimizerFactory, use_gradient: bool) -> SolveResult:
    """Drive a torch optimizer on z, feeding either the residual T(z)
    (gradient-free) or the gradient of ||x - D(z)||^2 into ``z.grad``.

    Gradient runs in half precision stop with ``UnderflowStall`` once
    ``cfg.stall_window`` consecutive nonzero updates have all been rounded
    away. A zero update is not a stall.
    """
    check_dim(x, pair.pixel_dim, 'x')
    if use_gradient and not pair.has_gradient:
        raise NoGradient('{} needs a gradient capability, {} has none'.format(cfg.method.name, pair))
    mode = cfg.precision
    half = mode == PrecisionMode.HALF
    schedule = cfg.resolved_schedule()
    op = ResidualOperator.for_target(pair, x, mode)
    z0 = initial_latent(op, mode)
    param = z0.clone().requires_grad_(True)
    optimizer = make_optimizer([param], schedule_lr(schedule, 1))
    scheduler = ScheduledLR(optimizer, schedule)
    rec = TraceRecorder(z0, cfg.full_trace, label=cfg.method.name, log_interval=cfg.log_interval)
    watch_stall = use_gradient and half
    unchanged = 0
    need_final_residual = True
    try:
        for _ in range(cfg.max_iters):
            lr = optimizer.param_groups[0]['lr']
            z = param.detach().clone()
            if use_gradient:
                res = rec.residual(op(z, mode))
                if cfg.residual_tol is not None and res <= cfg.residual_tol:
                    rec.terminated_by = TerminatedBy.RESIDUAL_TOL
                    need_final_residual = False
                    break
                rec.tic()
                param.grad = pair.loss_gradient(x, z, mode)
            else:
                rec.tic()
                r = op(z, mode)
                res = rec.residual(r)
                if cfg.residual_tol is not None and res <= cfg.residual_tol:
                    rec.terminated_by = TerminatedBy.RESIDUAL_TOL
                    need_final_residual = False
                    break
                param.grad = r
            optimizer.step()
            proposed = not torch.equal(param.detach(), z)
            if half:
                _round_state(optimizer, param, cfg.full_precision_buffers)
            wall = rec.toc()
            z_next = param.detach()
            check_finite(z_next, 'iterate')
            rec.step(z_next, z, wall, lr)
            scheduler.step()
            if watch_stall:
                lost = proposed and torch.equal(z_next, z)
                unchanged = unchanged + 1 if lost else 0
                if unchanged >= cfg.stall_window:
                    rec.stalled(cfg.stall_window)
                    break
        if need_final_residual:
            rec.residual(op(param.detach(), mode))
    except NonFiniteOutput as e:
        rec.non_finite(e)
    return rec.result(param.detach())


def _adam_factory(cfg: SolverConfig) -> OptimizerFactory:
    method = cfg.method
    eps = method.eps
    if cfg.precision == PrecisionMode.HALF:
        # 1e-8 is not representable once v is held in binary16
        eps = max(eps, HALF_TINY)

    def make(params, lr):
        return torch.optim.Adam(params, lr=lr, betas=(method.beta1, method.beta2), eps=eps, foreach=False)

    return make


def adam_free_solve(pair: OperatorPair, x: Vector, cfg: SolverConfig) -> SolveResult:
    """Adam with the residual E(D(z)) - E(x) in place of the gradient."""
    if cfg.method.name != 'AdamFree':
        raise InvalidSpec('adam_free_solve got method {}'.format(cfg.method.name))
    return optimizer_iterate(pair, x, cfg, _adam_factory(cfg), use_gradient=False)


def adam_grad_solve(pair: OperatorPair, x: Vector, cfg: SolverConfig) -> SolveResult:
    if cfg.method.name != 'AdamGrad':
        raise InvalidSpec('adam_grad_solve got method {}'.format(cfg.method.name))
    return optimizer_iterate(pair, x, cfg, _adam_factory(cfg), use_gradient=True)
