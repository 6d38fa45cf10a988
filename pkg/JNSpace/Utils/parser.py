# -*- coding: utf-8 -*-
'''
Command-line flags. The flags carry the symbols of the norms and atoms:
--p --q --s --alpha --c0 --v --w --ctilde --gamma --depth --m --n.
'''

import math
import argparse


COMMANDS = ('norm', 'decompose', 'verify', 'gen')


def positive_int(value):
    value = int(value)
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {value}')
    return value


def exponent(value):
    if str(value).lower() in ('inf', 'infinity'):
        return math.inf
    return float(value)


def get_parser():
    parser = argparse.ArgumentParser(prog='jnspace',
                                     description='Dyadic John-Nirenberg-Campanato norms, CZ decompositions '
                                                 'and Hardy-kind atoms on piecewise-constant grids.')
    parser.add_argument('command', choices=COMMANDS)

    group = parser.add_argument_group('Basic-Configuration')
    group.add_argument('--input', type=str, required=False, default=None,
                       help='grid file to read (norm, decompose)')
    group.add_argument('--out', type=str, required=False, default=None,
                       help='report path (norm, decompose, verify) or grid path (gen); stdout when omitted')
    group.add_argument('--dump-dir', dest='dump_dir', type=str, required=False, default=None,
                       help='where decompose writes its CSV dumps')
    group.add_argument('--config', type=str, required=False, default=None,
                       help='suite parameter grid, default JNSpace/Configs/config_<suite>.yml')
    group.add_argument('--log-file', dest='log_file', type=str, required=False, default=None,
                       help='also write the log to this file')
    group.add_argument('--seed', type=int, required=False, default=42,
                       help='Seed')
    group.add_argument('--trials', type=int, required=False, default=None,
                       help='verify: number of trials, default from the suite config')
    group.add_argument('--processes', type=positive_int, required=False, default=1,
                       help='verify: worker processes for the trials')
    group.add_argument('--binary', action='store_true', default=False,
                       help='gen: write the binary grid format')
    group.add_argument('--with-time', dest='with_time', action='store_true', default=False,
                       help='add the wall time to the report')

    group = parser.add_argument_group('Domain-Configuration')
    group.add_argument('--n', type=positive_int, required=False, default=1,
                       help='dimension')
    group.add_argument('--m', type=int, required=False, default=0,
                       help='the base cube is [0, 2^m)^n')
    group.add_argument('--depth', type=int, required=False, default=None,
                       help='tree depth K: 2^{nK} cells (gen)')

    group = parser.add_argument_group('Norm-Configuration')
    group.add_argument('--which', choices=('jn', 'JN', 'campanato', 'lp', 'weak'), default='jn',
                       help='norm: which norm to compute. A polynomial of degree s enters the '
                            'oscillation through its average over each cell, not its value at the cell centre')
    group.add_argument('--p', type=float, required=False, default=2.0)
    group.add_argument('--q', type=float, required=False, default=1.0)
    group.add_argument('--s', type=int, required=False, default=0,
                       help='degree of the projection / vanishing moments')
    group.add_argument('--alpha', type=float, required=False, default=0.0)
    group.add_argument('--c0', type=float, required=False, default=1.0,
                       help='localization scale, snapped down to a power of two')
    group.add_argument('--variant', choices=('localized', 'plain'), default='localized')
    group.add_argument('--shifted-grids', dest='shifted_grids', action='store_true', default=False,
                       help='maximize over the 3^n shifted dyadic systems')

    group = parser.add_argument_group('Atom-Configuration')
    group.add_argument('--mode', choices=('cz', 'atomize', 'refine'), default='cz',
                       help='decompose: what to build')
    group.add_argument('--v', type=exponent, required=False, default=None,
                       help='atom exponent v, default the conjugate of p')
    group.add_argument('--w', type=exponent, required=False, default=None,
                       help='atom size exponent w, default inf')
    group.add_argument('--ctilde', type=float, required=False, default=None,
                       help='CZ threshold ratio, default 2^{n+1}')
    group.add_argument('--gamma', type=float, required=False, default=None,
                       help='CZ base threshold, default the mean of |f|')

    group = parser.add_argument_group('Generator-Configuration')
    group.add_argument('--suite', choices=('oracle', 'projections', 'cz', 'duality', 'limits', 'lebesgue'),
                       default=None, help='verify: which suite to run')
    group.add_argument('--kind', choices=('constant', 'spike', 'step', 'random', 'haar-sum', 'log-sample'),
                       default=None, help='gen: generator kind')
    group.add_argument('--a', type=float, required=False, default=None,
                       help='gen: value of constant and step')
    group.add_argument('--scale', type=float, required=False, default=None,
                       help='gen: scale of spike and random')
    group.add_argument('--terms', type=positive_int, required=False, default=None,
                       help='gen: number of Haar wavelets')
    return parser


def get_basic_configs(argv=None):
    return get_parser().parse_args(argv)
