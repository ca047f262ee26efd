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
# Modified from the NeMo-style warmup/annealing policies
#               (https://github.com/NVIDIA/NeMo)

import math
from typing import Annotated, Literal, Optional, Union

import torch
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt
from torch.optim.lr_scheduler import _LRScheduler

from fixinv.utils.errors import InvalidSpec, OutOfRange


class FixedSchedule(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['fixed'] = 'fixed'
    lr: PositiveFloat
    total_steps: Optional[PositiveInt] = None


class CosineWarmupSchedule(BaseModel):
    """Linear warm-up over the first tenth of the steps, cosine decay with
    period 0.9·K, frozen after eight tenths.

    ``effective_steps`` evaluates the formula as if the run had that many
    steps while still accepting step indices up to ``total_steps``.
    """
    model_config = ConfigDict(extra='forbid')

    kind: Literal['cosine_warmup'] = 'cosine_warmup'
    lr_max: PositiveFloat
    total_steps: Optional[PositiveInt] = None
    effective_steps: Optional[PositiveInt] = None


Schedule = Annotated[Union[FixedSchedule, CosineWarmupSchedule], Field(discriminator='kind')]


def warmup_steps(total_steps: int) -> int:
    return -(-total_steps // 10)


def freeze_step(total_steps: int) -> int:
    return (8 * total_steps) // 10


def _linear_warmup_with_cosine_freeze(max_lr, total_steps, step):
    warmup = warmup_steps(total_steps)
    if step <= warmup:
        return max_lr * step / warmup
    step = min(step, freeze_step(total_steps))
    return max_lr * (1.0 + math.cos(math.pi * (step - warmup) / (0.9 * total_steps))) / 2.0


def with_total_steps(s: Schedule, total_steps: int) -> Schedule:
    if s.total_steps == total_steps:
        return s
    return s.model_copy(update={'total_steps': total_steps})


def schedule_lr(s: Schedule, k: int) -> float:
    """Learning rate of step ``k`` (1-based).

    Args:
        s (Schedule): schedule with ``total_steps`` set.
        k (int): step index, 1 <= k <= total_steps.

    Returns:
        float: the step size.

    Examples:
        >>> s = CosineWarmupSchedule(lr_max=0.01, total_steps=100)
        >>> schedule_lr(s, 5)
        0.005

    """
    if s.total_steps is None:
        raise InvalidSpec('schedule has no total_steps')
    if not 1 <= k <= s.total_steps:
        raise OutOfRange('step {} outside [1, {}]'.format(k, s.total_steps))
    if isinstance(s, FixedSchedule):
        return float(s.lr)
    horizon = s.effective_steps or s.total_steps
    return _linear_warmup_with_cosine_freeze(s.lr_max, horizon, k)


class ScheduledLR(_LRScheduler):
    """Drives a torch optimizer with ``schedule_lr``.

    After construction the optimizer holds lr(1); each ``step()`` advances
    to the next index, clamped at ``total_steps``.
    """

    def __init__(
        self,
        optimizer: torch.optim.Optimizer,
        schedule: Schedule,
        last_epoch: int = -1,
    ):
        if schedule.total_steps is None:
            raise InvalidSpec('schedule has no total_steps')
        self.schedule = schedule

        # must be set before super().__init__, which calls step()
        super().__init__(optimizer, last_epoch)

    def __repr__(self):
        return f"{self.__class__.__name__}(schedule={self.schedule!r})"

    def get_lr(self):
        k = min(self.last_epoch + 1, self.schedule.total_steps)
        return [schedule_lr(self.schedule, k) for _ in self.base_lrs]
