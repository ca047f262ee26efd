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
from typing import Callable, Iterable, Optional, Union

import torch

from fixinv.operators.precision import PrecisionMode, maybe_round
from fixinv.utils.errors import DimensionMismatch, NoGradient, NonFiniteOutput

# a Vector is a 1-D float64 tensor
Vector = torch.Tensor
MapFn = Callable[[Vector, PrecisionMode], Vector]
GradFn = Callable[[Vector, Vector, PrecisionMode], Vector]


def as_vector(values: Union[Vector, Iterable[float]]) -> Vector:
    v = torch.as_tensor(values, dtype=torch.float64)
    if v.dim() != 1 or v.numel() == 0:
        raise DimensionMismatch('expected a non-empty 1-D vector, got shape {}'.format(tuple(v.shape)))
    return v


def check_dim(v: Vector, dim: int, name: str = 'vector'):
    if v.dim() != 1 or v.shape[0] != dim:
        raise DimensionMismatch('{} has shape {}, expected ({},)'.format(name, tuple(v.shape), dim))


def check_finite(v: Vector, what: str = 'output'):
    if not bool(torch.isfinite(v).all()):
        raise NonFiniteOutput('{} contains NaN/Inf'.format(what))


class OperatorPair:
    """Encoder E: R^N -> R^F and decoder D: R^F -> R^N.

    ``kind`` is ``linear`` when ``composite`` holds the matrix E·D,
    ``mlp`` for the fixed-weight networks and ``custom`` otherwise.
    """

    def __init__(self,
                 encoder: MapFn,
                 decoder: MapFn,
                 pixel_dim: int,
                 latent_dim: int,
                 gradient: Optional[GradFn] = None,
                 composite: Optional[torch.Tensor] = None,
                 kind: str = 'custom'):
        self.encoder = encoder
        self.decoder = decoder
        self.pixel_dim = pixel_dim
        self.latent_dim = latent_dim
        self.gradient = gradient
        self.composite = composite
        self.kind = kind

    def __repr__(self):
        return '{}(kind={}, N={}, F={})'.format(self.__class__.__name__, self.kind, self.pixel_dim, self.latent_dim)

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None

    def encode(self, x: Vector, mode: PrecisionMode = PrecisionMode.FULL) -> Vector:
        check_dim(x, self.pixel_dim, 'x')
        with torch.no_grad():
            return self.encoder(x, mode)

    def decode(self, z: Vector, mode: PrecisionMode = PrecisionMode.FULL) -> Vector:
        check_dim(z, self.latent_dim, 'z')
        with torch.no_grad():
            return self.decoder(z, mode)

    def loss_gradient(self, x: Vector, z: Vector, mode: PrecisionMode = PrecisionMode.FULL) -> Vector:
        """Gradient of ||x - D(z)||^2 with respect to z."""
        if self.gradient is None:
            raise NoGradient('{} has no gradient capability'.format(self))
        check_dim(x, self.pixel_dim, 'x')
        check_dim(z, self.latent_dim, 'z')
        return self.gradient(x, z, mode)


@dataclass(frozen=True)
class ResidualOperator:
    """T(z) = E(D(z)) - E(x)."""
    pair: OperatorPair
    target_latent: Vector

    @classmethod
    def for_target(cls, pair: OperatorPair, x: Vector,
                   mode: PrecisionMode = PrecisionMode.FULL) -> 'ResidualOperator':
        target = pair.encode(x, mode)
        check_finite(target, 'E(x)')
        return cls(pair, target)

    def __call__(self, z: Vector, mode: PrecisionMode = PrecisionMode.FULL) -> Vector:
        return apply_residual(self, z, mode)


def apply_residual(op: ResidualOperator, z: Vector,
                   mode: PrecisionMode = PrecisionMode.FULL) -> Vector:
    latent_dim = op.pair.latent_dim
    check_dim(op.target_latent, latent_dim, 'target_latent')
    check_dim(z, latent_dim, 'z')
    with torch.no_grad():
        out = op.pair.encoder(op.pair.decoder(z, mode), mode)
        out = maybe_round(out - op.target_latent, mode)
    check_finite(out, 'residual')
    return out
