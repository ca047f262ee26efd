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
import torch


FIXINV_ACTIVATION_CLASSES = {
    "tanh": torch.nn.Tanh,
    "leaky_relu": torch.nn.LeakyReLU,
}


def build_activation(name: str, negative_slope: float = 0.01) -> torch.nn.Module:
    if name not in FIXINV_ACTIVATION_CLASSES:
        raise KeyError('unknown activation {}'.format(name))
    if name == 'leaky_relu':
        return FIXINV_ACTIVATION_CLASSES[name](negative_slope)
    return FIXINV_ACTIVATION_CLASSES[name]()
