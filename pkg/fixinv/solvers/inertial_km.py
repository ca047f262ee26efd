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

from fixinv.operators import OperatorPair, Vector
from fixinv.solvers.config import SolverConfig
from fixinv.solvers.forward_step import fixed_point_iterate
from fixinv.solvers.trace import SolveResult
from fixinv.utils.errors import InvalidSpec


def inertial_km_solve(pair: OperatorPair, x: Vector, cfg: SolverConfig) -> SolveResult:
    """Inertial Krasnoselskii-Mann iteration with step rho = 2·lam·beta.

    The schedule, when set, overrides the fixed step; ``ty_norms`` records
    ||T y^k|| for every update.
    """
    if cfg.method.name != 'InertialKM':
        raise InvalidSpec('inertial_km_solve got method {}'.format(cfg.method.name))
    return fixed_point_iterate(pair, x, cfg, alpha=cfg.method.alpha)
