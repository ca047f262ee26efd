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

from fixinv.diagnostics.cocoercivity import CocoercivityScan, ScatterTable, cocoercivity_scan, scatter_export
from fixinv.diagnostics.metrics import NMSE_FLOOR_DB, ci95, nmse_db
from fixinv.diagnostics.theorems import (TheoremReport, identity_deviation, inertia_condition,
                                         inertial_epsilon, linear_oracle, reference_solution,
                                         theorem_report)

__all__ = [
    'CocoercivityScan', 'ScatterTable', 'cocoercivity_scan', 'scatter_export', 'NMSE_FLOOR_DB',
    'ci95', 'nmse_db', 'TheoremReport', 'identity_deviation', 'inertia_condition',
    'inertial_epsilon', 'linear_oracle', 'reference_solution', 'theorem_report',
]
