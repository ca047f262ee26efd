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
"""Emulated binary16 evaluation."""

import enum

import numpy as np
import torch


class PrecisionMode(str, enum.Enum):
    FULL = 'full'
    HALF = 'half'


def _nearest_half(v: torch.Tensor) -> torch.Tensor:
    # numpy narrows float64 -> float16 in a single rounding; torch on CPU
    # goes through float32 first and double-rounds just above ties
    with np.errstate(over='ignore'):
        arr = v.detach().cpu().numpy().astype(np.float16)
    return torch.from_numpy(arr.astype(np.float64)).to(dtype=v.dtype, device=v.device)


class _HalfRound(torch.autograd.Function):

    @staticmethod
    def forward(ctx, v):
        return _nearest_half(v)

    @staticmethod
    def backward(ctx, grad):
        return _nearest_half(grad)


def round_to_half(v: torch.Tensor) -> torch.Tensor:
    """Round every entry to the nearest binary16 value and widen back.

    Round-to-nearest-even; magnitudes past the binary16 range become
    +-inf and anything below the smallest subnormal flushes to zero.
    The rounding is differentiable, and gradients flowing back through it
    are rounded the same way.
    """
    return _HalfRound.apply(v)


def maybe_round(v: torch.Tensor, mode: PrecisionMode) -> torch.Tensor:
    if mode == PrecisionMode.HALF:
        return round_to_half(v)
    return v


# smallest normal binary16 value, 2**-14
HALF_TINY = float(torch.finfo(torch.float16).tiny)
