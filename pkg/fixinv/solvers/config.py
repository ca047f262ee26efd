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
"""Solver configuration models."""

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from fixinv.operators import PrecisionMode
from fixinv.utils.scheduler import FixedSchedule, Schedule, with_total_steps


class _Method(BaseModel):
    model_config = ConfigDict(extra='forbid')

    @property
    def base_step(self) -> float:
        raise NotImplementedError


class ForwardStep(_Method):
    name: Literal['ForwardStep'] = 'ForwardStep'
    rho: PositiveFloat = 0.001

    @property
    def base_step(self) -> float:
        return self.rho


class InertialKM(_Method):
    """Step is ``rho`` when given, else 2·lam·beta."""
    name: Literal['InertialKM'] = 'InertialKM'
    alpha: float = 0.9
    rho: Optional[PositiveFloat] = None
    lam: Optional[PositiveFloat] = None
    beta: PositiveFloat = 1.0

    @model_validator(mode='after')
    def _check(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError('alpha must lie in [0, 1), got {}'.format(self.alpha))
        if self.rho is None and self.lam is None:
            self.rho = 0.001
        return self

    @property
    def base_step(self) -> float:
        if self.rho is not None:
            return self.rho
        return 2.0 * self.lam * self.beta

    @property
    def relaxation(self) -> float:
        """lambda such that step = 2·lambda·beta."""
        return self.base_step / (2.0 * self.beta)


class _AdamMethod(_Method):
    lr: PositiveFloat = 0.01
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: PositiveFloat = 1e-8

    @property
    def base_step(self) -> float:
        return self.lr


class AdamFree(_AdamMethod):
    name: Literal['AdamFree'] = 'AdamFree'


class AdamGrad(_AdamMethod):
    name: Literal['AdamGrad'] = 'AdamGrad'
    lr: PositiveFloat = 0.1


class GradDescent(_Method):
    name: Literal['GradDescent'] = 'GradDescent'
    rho: PositiveFloat = 0.01

    @property
    def base_step(self) -> float:
        return self.rho


Method = Annotated[Union[ForwardStep, InertialKM, AdamFree, GradDescent, AdamGrad],
                   Field(discriminator='name')]

GRADIENT_METHODS = ('GradDescent', 'AdamGrad')


class SolverConfig(BaseModel):
    """One solver run. Without a schedule the method's base step is used
    for every iteration."""
    model_config = ConfigDict(extra='forbid')

    method: Method
    schedule: Optional[Schedule] = None
    max_iters: PositiveInt = 100
    precision: PrecisionMode = PrecisionMode.FULL
    trace_level: Literal['summary', 'full'] = 'summary'
    residual_tol: Optional[float] = None
    full_precision_buffers: bool = False
    stall_window: PositiveInt = 10
    log_interval: int = 0
    label: Optional[str] = None

    @property
    def full_trace(self) -> bool:
        return self.trace_level == 'full'

    def resolved_schedule(self) -> Schedule:
        if self.schedule is None:
            return FixedSchedule(lr=self.method.base_step, total_steps=self.max_iters)
        return with_total_steps(self.schedule, self.max_iters)

    def with_iterations(self, max_iters: int) -> 'SolverConfig':
        return self.model_copy(update={'max_iters': max_iters})

    def with_precision(self, precision: PrecisionMode) -> 'SolverConfig':
        return self.model_copy(update={'precision': PrecisionMode(precision)})

    def with_trace(self, trace_level: str) -> 'SolverConfig':
        return self.model_copy(update={'trace_level': trace_level})

    @property
    def display_name(self) -> str:
        return self.label or self.method.name
