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
from fixinv.solvers.adam import adam_free_solve, adam_grad_solve
from fixinv.solvers.config import (GRADIENT_METHODS, AdamFree, AdamGrad, ForwardStep, GradDescent,
                                   InertialKM, SolverConfig)
from fixinv.solvers.forward_step import forward_step_solve, residual_norm
from fixinv.solvers.gradient import gradient_descent_solve
from fixinv.solvers.inertial_km import inertial_km_solve
from fixinv.solvers.trace import IterateTrace, SolveResult, TerminatedBy

FIXINV_SOLVERS = {
    "ForwardStep": forward_step_solve,
    "InertialKM": inertial_km_solve,
    "AdamFree": adam_free_solve,
    "GradDescent": gradient_descent_solve,
    "AdamGrad": adam_grad_solve,
}


def solve(pair: OperatorPair, x: Vector, cfg: SolverConfig) -> SolveResult:
    return FIXINV_SOLVERS[cfg.method.name](pair, x, cfg)


__all__ = [
    'FIXINV_SOLVERS', 'GRADIENT_METHODS', 'AdamFree', 'AdamGrad', 'ForwardStep', 'GradDescent',
    'InertialKM', 'IterateTrace', 'SolveResult', 'SolverConfig', 'TerminatedBy', 'adam_free_solve',
    'adam_grad_solve', 'forward_step_solve', 'gradient_descent_solve', 'inertial_km_solve',
    'residual_norm', 'solve',
]
