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
"""Seed derivation helpers."""

from typing import Tuple

import numpy as np
import torch

MODEL_STREAM = 0
LATENT_STREAM = 1


def instance_seed(seed_base: int, index: int) -> int:
    """Seed of instance ``index``; pinned to ``seed_base + index``."""
    return int(seed_base) + int(index)


def split_seed(seed: int) -> Tuple[int, int]:
    """Derive independent (model, latent) seeds from one instance seed.

    Args:
        seed (int): instance seed.

    Returns:
        Tuple[int, int]: 63-bit seeds for model weights and latent draws.

    Examples:
        >>> split_seed(7) == split_seed(7)
        True

    """
    children = np.random.SeedSequence(int(seed)).spawn(2)
    model_seed, latent_seed = (int(c.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for c in children)
    return model_seed, latent_seed


def make_generator(seed: int) -> torch.Generator:
    gen = torch.Generator(device='cpu')
    gen.manual_seed(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
    return gen


def sample_latent(seed: int, dim: int, std: float = 1.0) -> torch.Tensor:
    gen = make_generator(seed)
    return torch.randn(dim, generator=gen, dtype=torch.float64) * std
