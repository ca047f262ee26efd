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
"""Fourier ring keys on a 2-D view of the latent."""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import torch

from fixinv.operators import Vector, check_dim
from fixinv.utils.common import make_generator
from fixinv.utils.errors import DimensionMismatch, EmptyInput, InvalidRadius, InvalidSpec


@dataclass(frozen=True)
class LatentGrid:
    """H×W real grid; flattening to a Vector is row-major."""
    values: torch.Tensor

    @classmethod
    def from_vector(cls, v: Vector, height: int, width: int) -> 'LatentGrid':
        if height * width != v.numel():
            raise DimensionMismatch('grid {}x{} does not hold {} entries'.format(height, width, v.numel()))
        check_dim(v, height * width, 'latent')
        return cls(v.reshape(height, width).clone())

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.values.shape)

    def to_vector(self) -> Vector:
        return self.values.reshape(-1).clone()


@dataclass(frozen=True)
class RingKey:
    key_id: int
    radii: Tuple[int, ...]
    amplitude: float
    phase_seed: int


def _signed_freq(n: int) -> torch.Tensor:
    return torch.fft.fftfreq(n, d=1.0 / n, dtype=torch.float64).round().long()


def ring_mask(shape: Tuple[int, int], radii: Sequence[int]) -> torch.Tensor:
    """Bins of the unshifted spectrum whose rounded distance to the
    zero-frequency bin is one of ``radii``."""
    h, w = shape
    limit = min(h, w) / 2
    for r in radii:
        if not 1 <= r < limit:
            raise InvalidRadius('radius {} outside [1, {}) for a {}x{} grid'.format(r, limit, h, w))
    fi = _signed_freq(h).to(torch.float64)[:, None]
    fj = _signed_freq(w).to(torch.float64)[None, :]
    radius = torch.sqrt(fi * fi + fj * fj).round().long()
    mask = torch.zeros(h, w, dtype=torch.bool)
    for r in radii:
        mask |= radius == r
    return mask


def key_pattern(key: RingKey, shape: Tuple[int, int]) -> Tuple[torch.Tensor, torch.Tensor]:
    """(mask, complex pattern) for ``key``; the pattern is Hermitian so its
    inverse transform is real."""
    h, w = shape
    mask = ring_mask(shape, key.radii)
    gen = make_generator(key.phase_seed)
    theta = torch.rand(h, w, generator=gen, dtype=torch.float64) * (2.0 * torch.pi)
    ii = torch.arange(h)[:, None].expand(h, w)
    jj = torch.arange(w)[None, :].expand(h, w)
    mi, mj = (-ii) % h, (-jj) % w
    flat, mirror = ii * w + jj, mi * w + mj
    phase = torch.where(flat < mirror, theta, -theta[mi, mj])
    # self-conjugate bins must stay real
    phase = torch.where(flat == mirror, torch.where(theta < torch.pi, 0.0, torch.pi), phase)
    pattern = key.amplitude * torch.polar(torch.ones_like(phase), phase)
    return mask, torch.where(mask, pattern, torch.zeros_like(pattern))


def embed_ring(z: LatentGrid, key: RingKey) -> LatentGrid:
    """Overwrite the key's ring bins with its pattern; a zero amplitude
    embeds nothing."""
    mask, pattern = key_pattern(key, z.shape)
    spec = torch.fft.fft2(z.values)
    if key.amplitude != 0:
        spec = torch.where(mask, pattern, spec)
    return LatentGrid(torch.fft.ifft2(spec).real.contiguous())


def ring_distance(z: LatentGrid, key: RingKey) -> float:
    mask, pattern = key_pattern(key, z.shape)
    spec = torch.fft.fft2(z.values)
    return float(torch.linalg.vector_norm(spec[mask] - pattern[mask]))


def classify_ring(z_est: LatentGrid, keys: Sequence[RingKey]) -> int:
    """key_id of the closest key pattern; ties go to the lowest key_id."""
    if not keys:
        raise EmptyInput('no keys to classify against')
    if len(keys) < 2:
        raise InvalidSpec('classification needs at least two keys, got {}'.format(len(keys)))
    scored = sorted((ring_distance(z_est, k), k.key_id) for k in keys)
    return scored[0][1]


def make_keys(n_keys: int, radii: Sequence[int], amplitude: float, seed_base: int) -> List[RingKey]:
    return [RingKey(key_id=i, radii=tuple(radii), amplitude=amplitude, phase_seed=seed_base + i)
            for i in range(n_keys)]
