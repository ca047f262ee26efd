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

from dataclasses import dataclass
from typing import Annotated, Dict, List, Literal, Optional, Union

import torch
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from fixinv.models import LinearPairSpec, MlpPairSpec, build_pair
from fixinv.operators import OperatorPair
from fixinv.solvers import AdamFree, AdamGrad, SolverConfig, solve
from fixinv.utils.common import sample_latent, split_seed
from fixinv.utils.errors import DimensionMismatch, EmptyStrategies
from fixinv.utils.executor import Executor
from fixinv.utils.file_utils import logging
from fixinv.utils.scheduler import CosineWarmupSchedule
from fixinv.watermark.rings import LatentGrid, RingKey, classify_ring, embed_ring, make_keys

Strategy = Literal['EncoderOnly', 'GradBased', 'GradFree']


def _default_model() -> MlpPairSpec:
    return MlpPairSpec(layer_widths_encoder=[128, 96, 64], layer_widths_decoder=[64, 96, 128],
                       init='orthogonal', tied=True)


class WatermarkConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    grid_height: PositiveInt = 8
    grid_width: PositiveInt = 8
    model: Annotated[Union[LinearPairSpec, MlpPairSpec], Field(discriminator='family')] = Field(
        default_factory=_default_model)
    n_keys: Annotated[int, Field(ge=2)] = 3
    radii: List[int] = [1, 3]
    amplitude: PositiveFloat = 2.0
    latent_std: PositiveFloat = 1.0
    trials: PositiveInt = 100
    seed_base: int = 0
    key_seed_base: int = 1000
    strategies: List[Strategy] = ['EncoderOnly', 'GradBased', 'GradFree']
    grad_free: SolverConfig = SolverConfig(method=AdamFree(lr=0.1),
                                           schedule=CosineWarmupSchedule(lr_max=0.1), max_iters=100)
    grad_based: SolverConfig = SolverConfig(method=AdamGrad(lr=0.1),
                                            schedule=CosineWarmupSchedule(lr_max=0.1), max_iters=100)
    max_workers: Optional[PositiveInt] = None


@dataclass
class StrategyOutcome:
    accuracy: float
    confusion: List[List[int]]

    def to_dict(self) -> dict:
        return {'accuracy': self.accuracy, 'confusion': self.confusion}


def _recover(strategy: str, pair: OperatorPair, x: torch.Tensor, config: WatermarkConfig) -> torch.Tensor:
    if strategy == 'EncoderOnly':
        return pair.encode(x)
    cfg = config.grad_free if strategy == 'GradFree' else config.grad_based
    return solve(pair, x, cfg).z_final


def run_watermark_experiment(config: WatermarkConfig,
                             pair: Optional[OperatorPair] = None) -> Dict[str, StrategyOutcome]:
    """Embed a ring key per trial, decode, recover the latent with each
    strategy and classify the key. Trial t carries key ``t mod n_keys``.

    ``pair`` replaces the one built from ``config.model``.
    """
    if not config.strategies:
        raise EmptyStrategies('no recovery strategy selected')
    if pair is None:
        pair = build_pair(config.model)
    h, w = config.grid_height, config.grid_width
    keys: List[RingKey] = make_keys(config.n_keys, config.radii, config.amplitude, config.key_seed_base)
    grid_dim = h * w
    if grid_dim != pair.latent_dim:
        raise DimensionMismatch('grid {}x{} vs latent_dim {}'.format(h, w, pair.latent_dim))

    def trial(t: int) -> Dict[str, int]:
        _, latent_seed = split_seed(config.seed_base + t)
        z_true = sample_latent(latent_seed, grid_dim, config.latent_std)
        key = keys[t % len(keys)]
        z_wm = embed_ring(LatentGrid.from_vector(z_true, h, w), key).to_vector()
        x = pair.decode(z_wm)
        return {s: classify_ring(LatentGrid.from_vector(_recover(s, pair, x, config), h, w), keys)
                for s in config.strategies}

    predictions = Executor(config.max_workers).map(trial, list(range(config.trials)), desc='watermark')
    outcomes = {}
    for s in config.strategies:
        confusion = [[0] * len(keys) for _ in keys]
        for t, pred in enumerate(predictions):
            confusion[t % len(keys)][pred[s]] += 1
        correct = sum(confusion[i][i] for i in range(len(keys)))
        outcomes[s] = StrategyOutcome(accuracy=correct / config.trials, confusion=confusion)
        logging.info('watermark {} accuracy {}/{}'.format(s, correct, config.trials))
    return outcomes
