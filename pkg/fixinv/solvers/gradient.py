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

from fixinv.operators import OperatorPair, Vector
from fixinv.solvers.adam import optimizer_iterate
from fixinv.solvers.config import SolverConfig
from fixinv.solvers.trace import SolveResult
from fixinv.utils.errors import InvalidSpec


def gradient_descent_solve(pair: OperatorPair, x: Vector, cfg: SolverConfig) -> SolveResult:
    """z <- z - rho_k * grad ||x - D(z)||^2, starting from E(x)."""
    if cfg.method.name != 'GradDescent':
        raise InvalidSpec('gradient_descent_solve got method {}'.format(cfg.method.name))

    def make(params, lr):
        return torch.optim.SGD(params, lr=lr, foreach=False)

    return optimizer_iterate(pair, x, cfg, make, use_gradient=True)
