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

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from tqdm import tqdm

from fixinv.utils.file_utils import logging

T = TypeVar('T')
R = TypeVar('R')


def worker_count(max_workers: Optional[int] = None) -> int:
    """Workers to use: ``max_workers`` if given, capped by FIXINV_THREADS."""
    count = max_workers or os.cpu_count() or 1
    cap = os.environ.get('FIXINV_THREADS')
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            logging.warning('ignoring FIXINV_THREADS={!r}, not an integer'.format(cap))
    return max(1, count)


class Executor:
    """Fans independent instances out over a thread pool.

    Results come back in input order, so aggregation does not depend on
    scheduling.
    """

    def __init__(self, max_workers: Optional[int] = None, progress: bool = True):
        self.workers = worker_count(max_workers)
        self.progress = progress

    def map(self, fn: Callable[[T], R], items: Sequence[T], desc: str = '') -> List[R]:
        logging.debug('{}: {} items on {} workers'.format(desc or 'map', len(items), self.workers))
        bar = tqdm(total=len(items), desc=desc, disable=not self.progress, leave=False)
        try:
            if self.workers == 1 or len(items) <= 1:
                results = []
                for item in items:
                    results.append(fn(item))
                    bar.update(1)
                return results
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = []
                for r in pool.map(fn, items):
                    results.append(r)
                    bar.update(1)
                return results
        finally:
            bar.close()
