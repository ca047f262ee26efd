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

import enum
import time
from dataclasses import dataclass, field
from typing import List, Optional

import torch

from fixinv.operators import Vector
from fixinv.utils.errors import NonFiniteOutput, UnderflowStall
from fixinv.utils.file_utils import logging


class TerminatedBy(str, enum.Enum):
    MAX_ITERS = 'MaxIters'
    RESIDUAL_TOL = 'ResidualTol'
    NON_FINITE = 'NonFinite'
    UNDERFLOW_STALL = 'UnderflowStall'


@dataclass
class IterateTrace:
    """Per-iteration record of a solve.

    ``iterates`` holds z^0..z^K (full trace level only); residual_norms has
    one entry per iterate; step_norms, ty_norms, wall_time and lrs one per
    update; second_diff_norms one per interior iterate.
    """
    iterates: Optional[List[Vector]] = None
    residual_norms: List[float] = field(default_factory=list)
    step_norms: List[float] = field(default_factory=list)
    second_diff_norms: List[float] = field(default_factory=list)
    ty_norms: Optional[List[float]] = None
    wall_time: List[float] = field(default_factory=list)
    lrs: List[float] = field(default_factory=list)

    @property
    def is_full(self) -> bool:
        return self.iterates is not None


@dataclass
class SolveResult:
    z_final: Vector
    iterations_run: int
    trace: IterateTrace
    terminated_by: TerminatedBy

    @property
    def ok(self) -> bool:
        return self.terminated_by in (TerminatedBy.MAX_ITERS, TerminatedBy.RESIDUAL_TOL)

    @property
    def seconds_per_iteration(self) -> float:
        if not self.trace.wall_time:
            return 0.0
        return sum(self.trace.wall_time) / len(self.trace.wall_time)

    def raise_for_status(self):
        if self.terminated_by == TerminatedBy.UNDERFLOW_STALL:
            raise UnderflowStall('updates underflowed after {} iterations'.format(self.iterations_run))
        if self.terminated_by == TerminatedBy.NON_FINITE:
            raise NonFiniteOutput('non-finite value after {} iterations'.format(self.iterations_run))


def _norm(v: Vector) -> float:
    return float(torch.linalg.vector_norm(v))


class TraceRecorder:
    """Collects an IterateTrace while a solver runs."""

    def __init__(self, z0: Vector, full: bool, inertial: bool = False,
                 label: str = 'solver', log_interval: int = 0):
        self.trace = IterateTrace(iterates=[z0.clone()] if full else None,
                                  ty_norms=[] if inertial else None)
        self.label = label
        self.log_interval = log_interval
        self.terminated_by = TerminatedBy.MAX_ITERS
        self._last_delta = None
        self._tic = 0.0

    def tic(self):
        self._tic = time.perf_counter()

    def toc(self) -> float:
        return time.perf_counter() - self._tic

    def residual(self, r: Vector) -> float:
        n = _norm(r)
        self.trace.residual_norms.append(n)
        return n

    def ty(self, ty: Vector):
        self.trace.ty_norms.append(_norm(ty))

    def step(self, z_new: Vector, z_old: Vector, wall: float, lr: float):
        delta = z_new - z_old
        self.trace.step_norms.append(_norm(delta))
        if self._last_delta is not None:
            self.trace.second_diff_norms.append(_norm(delta - self._last_delta))
        self._last_delta = delta
        self.trace.wall_time.append(wall)
        self.trace.lrs.append(lr)
        if self.trace.is_full:
            self.trace.iterates.append(z_new.clone())
        k = len(self.trace.step_norms)
        if self.log_interval > 0 and k % self.log_interval == 0:
            last_res = self.trace.residual_norms[-1] if self.trace.residual_norms else float('nan')
            logging.debug('{} step {} residual {:.6e} lr {:.6e}'.format(self.label, k, last_res, lr))

    def non_finite(self, err: Exception):
        self.terminated_by = TerminatedBy.NON_FINITE
        logging.warning('{} stopped after {} steps: {}'.format(
            self.label, len(self.trace.step_norms), err))

    def stalled(self, window: int):
        self.terminated_by = TerminatedBy.UNDERFLOW_STALL
        logging.warning('{} stalled: {} consecutive updates rounded away (step {})'.format(
            self.label, window, len(self.trace.step_norms)))

    def result(self, z_final: Vector) -> SolveResult:
        return SolveResult(z_final=z_final.detach().clone(),
                           iterations_run=len(self.trace.step_norms),
                           trace=self.trace,
                           terminated_by=self.terminated_by)
