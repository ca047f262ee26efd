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

import csv
import json
import logging
import os
import tempfile
from typing import Any, Dict, List, Sequence

from tqdm import tqdm
from hyperpyyaml import load_hyperpyyaml

from fixinv.utils.errors import ConfigParse, IoError


# route log records through tqdm so progress bars stay intact
class TqdmLoggingHandler(logging.Handler):
    def emit(self, record):
        try:
            msg = self.format(record)
            tqdm.write(msg)
        except Exception:
            self.handleError(record)


logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s %(levelname)s %(message)s',
    handlers=[TqdmLoggingHandler()]
)


def set_quiet(quiet: bool):
    logging.getLogger().setLevel(logging.WARNING if quiet else logging.INFO)


def load_config(path: str) -> Dict[str, Any]:
    """Read a JSON (or YAML) experiment document into a plain dict."""
    try:
        with open(path, 'r', encoding='utf8') as fin:
            configs = load_hyperpyyaml(fin)
    except OSError as e:
        raise ConfigParse('cannot read config {}: {}'.format(path, e)) from e
    except Exception as e:
        raise ConfigParse('cannot parse config {}: {}'.format(path, e)) from e
    if configs is None:
        return {}
    if not isinstance(configs, dict):
        raise ConfigParse('config {} must hold a mapping at top level'.format(path))
    return configs


def check_writable(path: str) -> str:
    out_dir = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(out_dir) or not os.access(out_dir, os.W_OK):
        raise IoError('output directory {} is not writable'.format(out_dir))
    return out_dir


def _atomic_write(path: str, write_fn):
    out_dir = check_writable(path)
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix='.fixinv-', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf8', newline='') as fout:
            write_fn(fout)
        os.replace(tmp, path)
    except OSError as e:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise IoError('cannot write {}: {}'.format(path, e)) from e


def write_csv(path: str, header: Sequence[str], rows: List[Sequence[Any]]):
    """Write rows atomically; a failed write leaves no file behind."""
    def _write(fout):
        writer = csv.writer(fout)
        writer.writerow(header)
        writer.writerows(rows)
    _atomic_write(path, _write)
    logging.info('wrote {} rows to {}'.format(len(rows), path))


def write_json(path: str, obj: Any):
    def _write(fout):
        json.dump(obj, fout, indent=2, sort_keys=False)
        fout.write('\n')
    _atomic_write(path, _write)
    logging.info('wrote {}'.format(path))
