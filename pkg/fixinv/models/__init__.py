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

from typing import Union

from fixinv.models.linear import (LinearPairSpec, LossySpectrum, PcaOptimal, build_linear_pair,
                                  cocoercivity_constant, pair_from_matrices)
from fixinv.models.mlp import MlpPairSpec, build_mlp_pair
from fixinv.operators import OperatorPair

ModelSpec = Union[LinearPairSpec, MlpPairSpec]


def build_pair(spec: ModelSpec) -> OperatorPair:
    if isinstance(spec, LinearPairSpec):
        return build_linear_pair(spec)
    return build_mlp_pair(spec)


__all__ = [
    'LinearPairSpec', 'LossySpectrum', 'PcaOptimal', 'MlpPairSpec', 'ModelSpec', 'build_pair',
    'build_linear_pair', 'build_mlp_pair', 'cocoercivity_constant', 'pair_from_matrices',
]
