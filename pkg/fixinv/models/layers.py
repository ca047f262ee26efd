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

from typing import List, Optional

import torch
from torch import nn

from fixinv.operators import PrecisionMode, maybe_round


class LayerStack(nn.Module):
    """Bias-free linear layers with an activation between them.

    In ``PrecisionMode.HALF`` the input and the output of every
    layer (after its activation) are rounded to binary16.
    """

    def __init__(self, weights: List[torch.Tensor], activation: Optional[nn.Module] = None):
        super().__init__()
        self.layers = nn.ModuleList()
        for w in weights:
            layer = nn.Linear(w.shape[1], w.shape[0], bias=False, dtype=torch.float64)
            with torch.no_grad():
                layer.weight.copy_(w)
            layer.weight.requires_grad_(False)
            self.layers.append(layer)
        self.activation = activation

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_features

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_features

    def weights(self) -> List[torch.Tensor]:
        return [layer.weight.detach() for layer in self.layers]

    def forward(self, x: torch.Tensor, precision: PrecisionMode = PrecisionMode.FULL) -> torch.Tensor:
        h = maybe_round(x, precision)
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            h = layer(h)
            if i < last and self.activation is not None:
                h = self.activation(h)
            h = maybe_round(h, precision)
        return h


def autograd_loss_gradient(decoder: LayerStack):
    """Exact gradient of ||x - D(z)||^2 by backpropagation through ``decoder``."""

    def gradient(x: torch.Tensor, z: torch.Tensor, mode: PrecisionMode) -> torch.Tensor:
        with torch.enable_grad():
            z_ = z.detach().clone().requires_grad_(True)
            r = maybe_round(maybe_round(x, mode) - decoder(z_, mode), mode)
            loss = torch.dot(r, r)
            grad, = torch.autograd.grad(loss, z_)
        return maybe_round(grad, mode)

    return gradient
