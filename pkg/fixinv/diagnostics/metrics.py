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

import math
from typing import Sequence

import numpy as np
import torch

from fixinv.operators import Vector
from fixinv.utils.errors import DimensionMismatch, EmptyInput, ZeroReference

NMSE_FLOOR_DB = -300.0


def nmse_db(z_est: Vector, z_ref: Vector) -> float:
    """10·log10(||z_est - z_ref||^2 / ||z_ref||^2), clamped at -300 dB."""
    if z_est.shape != z_ref.shape:
        raise DimensionMismatch('shapes {} and {} differ'.format(tuple(z_est.shape), tuple(z_ref.shape)))
    ref = float(torch.dot(z_ref, z_ref))
    if ref == 0.0:
        raise ZeroReference('reference vector has zero norm')
    e = z_est - z_ref
    err = float(torch.dot(e, e))
    if err == 0.0:
        return NMSE_FLOOR_DB
    return max(10.0 * math.log10(err / ref), NMSE_FLOOR_DB)


def ci95(values: Sequence[float]) -> float:
    """Half-width 1.96·s/sqrt(n); zero for a single sample."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput('no samples')
    if arr.size == 1:
        return 0.0
    return float(1.96 * arr.std(ddof=1) / math.sqrt(arr.size))
