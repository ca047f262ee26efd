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

from fixinv.watermark.experiment import StrategyOutcome, WatermarkConfig, run_watermark_experiment
from fixinv.watermark.rings import (LatentGrid, RingKey, classify_ring, embed_ring, key_pattern, make_keys,
                                    ring_distance, ring_mask)

__all__ = [
    'StrategyOutcome', 'WatermarkConfig', 'run_watermark_experiment', 'LatentGrid', 'RingKey',
    'classify_ring', 'embed_ring', 'key_pattern', 'make_keys', 'ring_distance', 'ring_mask',
]
