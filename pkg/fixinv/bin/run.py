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

from __future__ import print_function

import argparse
import os
import sys
from typing import List, Optional

ROOT_DIR = os.path.dirname(os.path.abspath(__file__))
sys.path.append('{}/../..'.format(ROOT_DIR))

from fixinv.cli.experiment import (load_experiment_config, run_cocoercivity, run_pareto, run_single,
                                   run_theorem_suite)
from fixinv.operators import PrecisionMode
from fixinv.utils.errors import FixinvError, NonFiniteOutput
from fixinv.utils.file_utils import check_writable, logging, set_quiet, write_json
from fixinv.utils.scheduler import CosineWarmupSchedule, schedule_lr
from fixinv.watermark import run_watermark_experiment

SUBCOMMANDS = ('solve', 'pareto', 'theorems', 'cocoercivity', 'watermark', 'schedule-dump')
DEFAULT_OUTPUTS = {
    'pareto': 'pareto.csv',
    'theorems': 'theorem_summary.json',
    'cocoercivity': 'cocoercivity_scatter.csv',
    'watermark': 'watermark_confusion.json',
}


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, '{}: error: {}\n'.format(self.prog, message))


def get_args(argv: Optional[List[str]] = None):
    common = _ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='experiment config (json)')
    common.add_argument('--out', default=None, help='output file')
    common.add_argument('--seed', type=int, default=None, help='seed base, overrides the config')
    common.add_argument('--precision', choices=['full', 'half'], default=None,
                        help='precision of every solver, overrides the config')
    common.add_argument('--quiet', action='store_true', help='only log warnings')

    parser = _ArgumentParser(prog='fixinv', description='gradient-free decoder inversion experiments')
    sub = parser.add_subparsers(dest='command', metavar='{' + ','.join(SUBCOMMANDS) + '}')
    sub.required = True
    sub.add_parser('solve', parents=[common], help='invert one instance and print nmse/residual')
    sub.add_parser('pareto', parents=[common], help='runtime vs nmse benchmark csv')
    sub.add_parser('theorems', parents=[common], help='convergence inequality suite json')
    sub.add_parser('cocoercivity', parents=[common], help='cocoercivity scatter csv')
    sub.add_parser('watermark', parents=[common], help='ring watermark confusion json')
    dump = sub.add_parser('schedule-dump', parents=[common], help='print lr(k) for k = 1..K')
    dump.add_argument('--K', type=int, required=True, help='total steps')
    dump.add_argument('--lr-max', type=float, required=True, help='peak learning rate')
    dump.add_argument('--effective-K', type=int, default=None, help='horizon of the cosine formula')
    return parser.parse_args(argv)


def _schedule_dump(args) -> int:
    s = CosineWarmupSchedule(lr_max=args.lr_max, total_steps=args.K, effective_steps=args.effective_K)
    print('k\tlr')
    for k in range(1, args.K + 1):
        print('{}\t{:.12g}'.format(k, schedule_lr(s, k)))
    return 0


def _run(args) -> int:
    if args.command == 'schedule-dump':
        return _schedule_dump(args)
    config = load_experiment_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={'seed_base': args.seed})
    if args.precision is not None:
        config = config.with_precision(PrecisionMode(args.precision))
    out = args.out or config.output_path or DEFAULT_OUTPUTS.get(args.command)
    progress = not args.quiet
    if args.command != 'solve':
        check_writable(out)

    if args.command == 'solve':
        summary = run_single(config)
        print('method {} precision {} iterations {} terminated_by {} nmse_db {:.4f} residual {:.6e}'.format(
            summary['method'], summary['precision'], summary['iterations'], summary['terminated_by'],
            summary['nmse_db'], summary['residual']))
        summary['result'].raise_for_status()
    elif args.command == 'pareto':
        run_pareto(config, out, progress=progress)
    elif args.command == 'theorems':
        result = run_theorem_suite(config, progress=progress)
        write_json(out, {'summary': result.summary, 'reports': result.reports})
    elif args.command == 'cocoercivity':
        run_cocoercivity(config, out, progress=progress)
    elif args.command == 'watermark':
        wm = config.watermark
        if args.seed is not None:
            wm = wm.model_copy(update={'seed_base': args.seed})
        if wm.max_workers is None:
            wm = wm.model_copy(update={'max_workers': config.max_workers})
        outcomes = run_watermark_experiment(wm)
        write_json(out, {name: o.to_dict() for name, o in outcomes.items()})
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = get_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    set_quiet(args.quiet)
    try:
        return _run(args)
    except NonFiniteOutput as e:
        logging.error('numeric failure: {}'.format(e))
        return 2
    except (FixinvError, OSError) as e:
        logging.error('{}: {}'.format(type(e).__name__, e))
        return 1


if __name__ == '__main__':
    sys.exit(main())
