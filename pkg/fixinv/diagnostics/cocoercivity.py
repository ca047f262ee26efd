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
"""Cocoercivity ratios along a solver trace."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch

from fixinv.operators import OperatorPair, Vector
from fixinv.solvers.trace import IterateTrace
from fixinv.utils.errors import DimensionMismatch, EmptyInput, TraceTooShort
from fixinv.utils.file_utils import logging, write_csv

DENOMINATOR_FLOOR = 1e-20
SCATTER_HEADER = ('instance_id', 'min_ratio', 'convergence_norm', 'final_nmse_db')


@dataclass
class CocoercivityScan:
    ratios: List[float]
    steps: List[int]
    excluded: int
    min_ratio: Optional[float]
    reference_iterate: Vector
    convergence_norm: float


@dataclass
class ScatterTable:
    rows: List[Tuple[Optional[float], float, float]]
    slope: Optional[float] = None
    intercept: Optional[float] = None
    instance_ids: List[int] = field(default_factory=list)

    def to_csv(self, path: str):
        ids = self.instance_ids or list(range(len(self.rows)))
        write_csv(path, SCATTER_HEADER, [(i, '' if m is None else repr(m), repr(c), repr(n))
                                         for i, (m, c, n) in zip(ids, self.rows)])


def cocoercivity_scan(pair: OperatorPair, trace: IterateTrace, z_inf: Vector, window: int) -> CocoercivityScan:
    """Ratio <EDz_inf - EDz^k, z_inf - z^k> / ||EDz_inf - EDz^k||^2 for k in [0, window].

    Steps whose denominator falls below 1e-20 are skipped and counted in
    ``excluded``.
    """
    if not trace.is_full:
        raise TraceTooShort('cocoercivity scan needs a full trace')
    if len(trace.iterates) < window + 1:
        raise TraceTooShort('trace has {} iterates, window needs {}'.format(len(trace.iterates), window + 1))
    ratios, steps, excluded = [], [], 0
    with torch.no_grad():
        ed_inf = pair.encode(pair.decode(z_inf))
        for k in range(window + 1):
            z = trace.iterates[k]
            diff = ed_inf - pair.encode(pair.decode(z))
            den = float(torch.dot(diff, diff))
            if den < DENOMINATOR_FLOOR:
                excluded += 1
                continue
            ratios.append(float(torch.dot(diff, z_inf - z)) / den)
            steps.append(k)
    convergence_norm = float(torch.linalg.vector_norm(trace.iterates[window] - z_inf))
    return CocoercivityScan(ratios=ratios,
                            steps=steps,
                            excluded=excluded,
                            min_ratio=min(ratios) if ratios else None,
                            reference_iterate=z_inf.clone(),
                            convergence_norm=convergence_norm)


def scatter_export(scans: Sequence[CocoercivityScan], nmse: Sequence[float]) -> ScatterTable:
    """One (min_ratio, convergence_norm, nmse) row per instance plus a
    least-squares line of convergence_norm against min_ratio."""
    if len(scans) == 0:
        raise EmptyInput('no scans to export')
    if len(scans) != len(nmse):
        raise DimensionMismatch('{} scans but {} nmse values'.format(len(scans), len(nmse)))
    rows = [(s.min_ratio, s.convergence_norm, float(n)) for s, n in zip(scans, nmse)]
    pts = [(m, c) for m, c, _ in rows if m is not None]
    table = ScatterTable(rows=rows)
    if len(pts) < 2:
        return table
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.ptp(xs) == 0.0:
        return table
    slope, intercept = np.polyfit(xs, ys, 1)
    table.slope, table.intercept = float(slope), float(intercept)
    logging.info('convergence_norm ~ {:.6g} * min_ratio + {:.6g} over {} instances'.format(
        table.slope, table.intercept, len(pts)))
    return table
