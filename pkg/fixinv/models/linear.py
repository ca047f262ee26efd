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
"""Linear encoder-decoder pairs with a known composite E·D."""

import math
from typing import Annotated, List, Literal, Optional, Union

import torch
from pydantic import BaseModel, ConfigDict, Field

from fixinv.models.layers import LayerStack, autograd_loss_gradient
from fixinv.operators import OperatorPair
from fixinv.utils.common import make_generator
from fixinv.utils.errors import InvalidSpec, NotLinear


class PcaOptimal(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['pca_optimal'] = 'pca_optimal'
    ridge: float = 1e-6


class LossySpectrum(BaseModel):
    """Composite Q·diag(eigenvalues)·Qᵀ.

    Give either ``eigenvalues`` or ``condition_number``; the latter draws
    log-uniform eigenvalues in [1/condition_number, 1] with both ends hit.
    """
    model_config = ConfigDict(extra='forbid')

    kind: Literal['lossy_spectrum'] = 'lossy_spectrum'
    eigenvalues: Optional[List[float]] = None
    condition_number: Optional[float] = None
    rotation: Literal['random', 'identity'] = 'random'


class LinearPairSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    family: Literal['linear'] = 'linear'
    pixel_dim: int = 64
    latent_dim: int = 16
    seed: int = 0
    variant: Annotated[Union[PcaOptimal, LossySpectrum], Field(discriminator='kind')] = PcaOptimal()


def _orthonormal_columns(rows: int, cols: int, gen: torch.Generator) -> torch.Tensor:
    a = torch.randn(rows, cols, generator=gen, dtype=torch.float64)
    q, r = torch.linalg.qr(a)
    # fix column signs so the factor is unique
    signs = torch.sign(torch.diagonal(r))
    signs[signs == 0] = 1.0
    return q * signs


def _spectrum(variant: LossySpectrum, latent_dim: int, gen: torch.Generator) -> torch.Tensor:
    if variant.eigenvalues is not None:
        if variant.condition_number is not None:
            raise InvalidSpec('give eigenvalues or condition_number, not both')
        lam = torch.tensor(variant.eigenvalues, dtype=torch.float64)
        if lam.numel() != latent_dim:
            raise InvalidSpec('{} eigenvalues for latent_dim {}'.format(lam.numel(), latent_dim))
    elif variant.condition_number is not None:
        if variant.condition_number < 1.0:
            raise InvalidSpec('condition_number must be >= 1')
        u = torch.rand(latent_dim, generator=gen, dtype=torch.float64)
        if latent_dim > 1:
            u[0], u[-1] = 0.0, 1.0
        lam = torch.exp(-math.log(variant.condition_number) * u)
    else:
        raise InvalidSpec('lossy spectrum needs eigenvalues or condition_number')
    if not bool(torch.isfinite(lam).all()) or bool((lam <= 0).any()):
        raise InvalidSpec('eigenvalues must be positive, got {}'.format(lam.tolist()))
    return lam


def pair_from_matrices(encoder_matrix: torch.Tensor, decoder_matrix: torch.Tensor,
                       composite: Optional[torch.Tensor] = None) -> OperatorPair:
    """Wrap explicit E (F×N) and D (N×F) matrices as a linear pair."""
    encoder_matrix = torch.as_tensor(encoder_matrix, dtype=torch.float64)
    decoder_matrix = torch.as_tensor(decoder_matrix, dtype=torch.float64)
    latent_dim, pixel_dim = encoder_matrix.shape
    if tuple(decoder_matrix.shape) != (pixel_dim, latent_dim):
        raise InvalidSpec('decoder shape {} does not match encoder shape {}'.format(
            tuple(decoder_matrix.shape), tuple(encoder_matrix.shape)))
    if composite is None:
        composite = encoder_matrix @ decoder_matrix
    encoder = LayerStack([encoder_matrix])
    decoder = LayerStack([decoder_matrix])
    return OperatorPair(encoder, decoder, pixel_dim, latent_dim,
                        gradient=autograd_loss_gradient(decoder),
                        composite=composite, kind='linear')


def build_linear_pair(spec: LinearPairSpec) -> OperatorPair:
    n, f = spec.pixel_dim, spec.latent_dim
    if not 1 <= f <= n:
        raise InvalidSpec('need 1 <= latent_dim <= pixel_dim, got F={} N={}'.format(f, n))
    gen = make_generator(spec.seed)
    variant = spec.variant
    if isinstance(variant, PcaOptimal):
        a = torch.randn(n, n, generator=gen, dtype=torch.float64)
        cov = a @ a.T + variant.ridge * torch.eye(n, dtype=torch.float64)
        _, vecs = torch.linalg.eigh(cov)
        # eigh sorts ascending; keep the top-F directions, largest first
        d = vecs[:, -f:].flip(1).contiguous()
        e = d.T.contiguous()
        return pair_from_matrices(e, d)
    lam = _spectrum(variant, f, gen)
    u = _orthonormal_columns(n, f, gen)
    if variant.rotation == 'identity':
        q = torch.eye(f, dtype=torch.float64)
    else:
        q = _orthonormal_columns(f, f, gen)
    m = q @ torch.diag(lam) @ q.T
    m = (m + m.T) / 2
    return pair_from_matrices(m @ u.T, u, composite=m)


def cocoercivity_constant(pair: OperatorPair) -> Optional[float]:
    """beta = 1 / lambda_max(E·D) for linear pairs, ``None`` for MLP pairs."""
    if pair.kind == 'mlp':
        return None
    if pair.composite is None:
        raise NotLinear('{} has no composite matrix'.format(pair))
    m = pair.composite
    lam_max = float(torch.linalg.eigvalsh((m + m.T) / 2).max())
    if lam_max <= 0:
        raise NotLinear('composite is not positive semidefinite')
    return 1.0 / lam_max
