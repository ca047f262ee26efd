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
"""Fixed-weight MLP autoencoder pair."""

import math
from typing import List, Literal

import torch
from pydantic import BaseModel, ConfigDict, PositiveFloat

from fixinv.models.layers import LayerStack, autograd_loss_gradient
from fixinv.operators import OperatorPair
from fixinv.utils.class_utils import build_activation
from fixinv.utils.common import make_generator
from fixinv.utils.errors import InvalidSpec


class MlpPairSpec(BaseModel):
    """Widths run input to output, e.g. encoder [64, 32, 16], decoder [16, 32, 64].

    ``init='gaussian'`` draws N(0, 1)·weight_scale/sqrt(fan_in);
    ``init='orthogonal'`` keeps the orthonormal factor of the same draw,
    scaled by weight_scale. With ``tied`` only decoder weights are drawn and
    the encoder applies their transposes in reverse order.
    """
    model_config = ConfigDict(extra='forbid')

    family: Literal['mlp'] = 'mlp'
    layer_widths_encoder: List[int] = [64, 32, 16]
    layer_widths_decoder: List[int] = [16, 32, 64]
    activation: Literal['tanh', 'leaky_relu'] = 'tanh'
    negative_slope: float = 0.01
    seed: int = 0
    weight_scale: PositiveFloat = 1.0
    init: Literal['gaussian', 'orthogonal'] = 'gaussian'
    tied: bool = False


def _check_widths(spec: MlpPairSpec):
    enc, dec = spec.layer_widths_encoder, spec.layer_widths_decoder
    if len(enc) < 2 or len(dec) < 2:
        raise InvalidSpec('each side needs at least an input and an output width')
    if any(w < 1 for w in enc + dec):
        raise InvalidSpec('widths must be positive')
    if enc[-1] != dec[0]:
        raise InvalidSpec('encoder output width {} != decoder input width {}'.format(enc[-1], dec[0]))
    if dec[-1] != enc[0]:
        raise InvalidSpec('decoder output width {} != encoder input width {}'.format(dec[-1], enc[0]))
    if spec.tied and enc != dec[::-1]:
        raise InvalidSpec('tied weights need mirrored widths, got {} and {}'.format(enc, dec))


def _draw_layer(fan_out: int, fan_in: int, spec: MlpPairSpec, gen: torch.Generator) -> torch.Tensor:
    w = torch.randn(fan_out, fan_in, generator=gen, dtype=torch.float64)
    if spec.init == 'gaussian':
        return w * (spec.weight_scale / math.sqrt(fan_in))
    tall = fan_out >= fan_in
    q, r = torch.linalg.qr(w if tall else w.T)
    signs = torch.sign(torch.diagonal(r))
    signs[signs == 0] = 1.0
    q = q * signs
    return spec.weight_scale * (q if tall else q.T)


def _draw_stack(widths: List[int], spec: MlpPairSpec, gen: torch.Generator) -> List[torch.Tensor]:
    return [_draw_layer(widths[i + 1], widths[i], spec, gen) for i in range(len(widths) - 1)]


def build_mlp_pair(spec: MlpPairSpec) -> OperatorPair:
    _check_widths(spec)
    gen = make_generator(spec.seed)
    # draw order: encoder layers, then decoder layers, each row-major
    if spec.tied:
        dec_w = _draw_stack(spec.layer_widths_decoder, spec, gen)
        enc_w = [w.T.contiguous() for w in reversed(dec_w)]
    else:
        enc_w = _draw_stack(spec.layer_widths_encoder, spec, gen)
        dec_w = _draw_stack(spec.layer_widths_decoder, spec, gen)
    act = build_activation(spec.activation, spec.negative_slope)
    encoder = LayerStack(enc_w, act)
    decoder = LayerStack(dec_w, act)
    return OperatorPair(encoder, decoder,
                        pixel_dim=spec.layer_widths_encoder[0],
                        latent_dim=spec.layer_widths_encoder[-1],
                        gradient=autograd_loss_gradient(decoder),
                        kind='mlp')
