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

from fixinv.operators.precision import HALF_TINY, PrecisionMode, maybe_round, round_to_half
from fixinv.operators.pair import (OperatorPair, ResidualOperator, Vector, apply_residual,
                                   as_vector, check_dim, check_finite)

__all__ = [
    'HALF_TINY', 'PrecisionMode', 'maybe_round', 'round_to_half', 'OperatorPair',
    'ResidualOperator', 'Vector', 'apply_residual', 'as_vector', 'check_dim', 'check_finite',
]
