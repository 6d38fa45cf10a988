# -*- coding: utf-8 -*-
'''
Command layer: norm, decompose, verify and gen. Every command returns a Report
(gen returns the checksum of the grid it wrote); `main` maps outcomes to exit
codes 0 (passed), 1 (an assertion failed) and 2 (usage or input error).
'''

import os
import sys
import time
import hashlib
import logging
import numpy as np

from JNSpace.Grids.dyadic_grid import DomainSpec, GridFunction
from JNSpace.Grids.grid_io import grid_to_bytes, read_grid, write_grid
from JNSpace.Norms.oscillation_norms import NormParams
from JNSpace.Decompositions.cz_decomposition import CZConfig
from JNSpace.Decompositions.atoms_duality import (AtomParams, LocalAtom, Polymer, h1_upper_bound,
                                                  hk_lebesgue_check, pair, validate_atom)
from JNSpace.Experiments.generators import generate, random_function
from JNSpace.Experiments.reports import Report, write_cz_dump, write_decomposition_dump
from JNSpace.Utils.config_from_dict import Config, ExperimentConfig
from JNSpace.Utils.errors import JNSpaceError, ParameterError
from JNSpace.Utils.parser import get_basic_configs
from JNSpace.Utils.utils import create_logger


logger = logging.getLogger(__name__)

PAIRING_TESTS = 10


def cmd_norm(f: GridFunction, params: NormParams, which='jn', echo=None) -> Report:
    compute = Config.parse_norm(which)
    report = Report('norm', echo or {'which': which})
    value, certificate = compute(f, params)
    report.add_result(which, value)
    if certificate is not None:
        report.add_certificate(which, certificate)
    logger.info(f'{which} = {value:.12g}')
    return report


def _cz_report(f, cz_config, report, dump_dir):
    decomposition = Config.parse_decomposition('cz')(f, f.domain.root(), cz_config)
    diagnostics = decomposition.diagnostics
    scale = diagnostics['scale']
    report.add_result('levels', [len(cubes) for cubes in decomposition.levels])
    report.add_result('pieces', len(decomposition.pieces))
    report.add_result('ctilde', decomposition.config.ctilde)
    report.add_result('gamma', decomposition.config.gamma)
    report.add_result('margins', {str(k): v for k, v in diagnostics['margins'].items()})
    report.check('cz_reconstruction', diagnostics['reconstruction_residual'], 1e-9 * scale, rel_tol=0.0,
                 anchor='Calderon-Zygmund decomposition')
    report.check('cz_moments', diagnostics['max_moment_residual'], 1e-9 * scale, rel_tol=0.0,
                 anchor='Calderon-Zygmund decomposition')
    for piece in decomposition.pieces:
        report.check('cz_piece_sup', piece.sup, piece.bound, anchor='Calderon-Zygmund decomposition')
    report.add_certificate('stopping_cubes', [[(cube.level, list(cube.index)) for cube in cubes]
                                              for cubes in decomposition.levels])
    if dump_dir is not None:
        write_cz_dump(decomposition, dump_dir)


def _atoms_report(decomposition, report, atom_params, root):
    budget = decomposition.budget
    report.add_result('budget', budget)
    report.add_result('polymers', len(decomposition))
    report.add_result('atoms', sum(len(polymer) for polymer in decomposition.polymers))
    worst = 0.0
    for _, atom in decomposition.atoms():
        atom_report = validate_atom(atom)
        worst = max(worst, atom_report.size_ratio)
        report.check('atom_valid', 0.0 if atom_report.valid else 1.0, 0.0, rel_tol=0.0, anchor='local atoms')
    report.add_result('max_size_ratio', worst)
    fine, coarse, _ = h1_upper_bound(decomposition, root, atom_params.v, atom_params.w)
    report.check('h1_fine_below_coarse', fine, coarse, anchor='hk embeds in h1')


def _atomize_report(f, atom_params, report, dump_dir):
    decomposition = Config.parse_decomposition('atomize')(f, atom_params)
    _atoms_report(decomposition, report, atom_params, f.domain.root())
    scale = max(float(np.max(np.abs(f.values))), np.finfo(float).tiny)
    residual = float(np.max(np.abs(decomposition.cell_values(f.domain) - f.values)))
    report.check('atomize_reconstruction', residual, 1e-12 * scale, rel_tol=0.0, anchor='local atoms')
    if atom_params.w <= atom_params.v and atom_params.alpha == 0.0:
        report.extend(hk_lebesgue_check(decomposition, f.domain.root(), atom_params.v, atom_params.w))
    if dump_dir is not None:
        write_decomposition_dump(decomposition, dump_dir)


def _refine_report(f, atom_params, cz_config, report, dump_dir, seed):
    d = f.domain
    root = d.root()
    atom = LocalAtom(root, f, atom_params)
    size = atom.function.lebesgue_norm(atom_params.w, root)
    if size == 0.0:
        raise ParameterError('refine needs a nonzero grid')
    coefficient = size / atom.size_bound()
    atom = atom.scaled(1.0 / coefficient)
    checked = validate_atom(atom)
    if not checked.valid:
        raise ParameterError(f'the input grid is not a multiple of an atom: {checked.to_dict()}')
    polymer = Polymer([(coefficient, atom)], atom_params.v)

    refined = Config.parse_decomposition('refine')(polymer, cz_config)
    report.add_result('pass_through', refined.notes.get('pass_through', False))
    report.add_result('input_budget', polymer.budget)
    report.add_result('budget_ratio', refined.notes.get('budget_ratio', 1.0))
    _atoms_report(refined, report, atom_params, root)

    rng = np.random.default_rng(seed)
    for _ in range(PAIRING_TESTS):
        t = random_function(d, rng)
        before, after = polymer.pair(t), pair(refined, t)
        bound = coefficient * atom.function.lebesgue_norm(1.0) * float(np.max(np.abs(t.values)))
        report.check('refinement_preserves_pairing', abs(after - before), 1e-8 * max(bound, np.finfo(float).tiny),
                     rel_tol=0.0, anchor='w-atoms refine into infinity-atoms')
    if dump_dir is not None:
        write_decomposition_dump(refined, dump_dir)


def cmd_decompose(f: GridFunction, mode='cz', cz_config: CZConfig = None, atom_params: AtomParams = None,
                  dump_dir=None, seed=42, echo=None) -> Report:
    Config.parse_decomposition(mode)
    cz_config = cz_config or CZConfig()
    atom_params = atom_params or AtomParams()
    report = Report('decompose', echo or {'mode': mode})
    if mode == 'cz':
        _cz_report(f.with_order(cz_config.s), cz_config, report, dump_dir)
    elif mode == 'atomize':
        _atomize_report(f, atom_params, report, dump_dir)
    else:
        _refine_report(f, atom_params, cz_config, report, dump_dir, seed)
    return report


def cmd_verify(suite, seed=42, trials=None, processes=1, config_file=None, exp_path=None) -> Report:
    suite_class = Config.parse_suite(suite)
    return suite_class(config_file).run(seed=seed, trials=trials, processes=processes, exp_path=exp_path)


def cmd_gen(kind, domain: DomainSpec, seed=42, path=None, binary=False, **options):
    """
    Writes the generated grid to `path` (stdout when None); returns the sha256 of the written bytes.
    """
    Config.parse_generator(kind)
    f = generate(kind, domain, seed=seed, **options)
    if path is None:
        payload = grid_to_bytes(f, binary)
        sys.stdout.buffer.write(payload)
        return hashlib.sha256(payload).hexdigest()
    digest = write_grid(f, path, binary=binary)
    logger.info(f'{kind} grid written to {path}, sha256 {digest}')
    return digest


def _read_input(config):
    if config.input is None:
        raise ParameterError(f'{config.command} needs --input')
    return read_grid(config.input)


def run_command(config: ExperimentConfig, config_file=None):
    echo = config.config_dict
    if config.command == 'norm':
        return cmd_norm(_read_input(config), config.norm, config.options.get('which', 'jn'), echo)
    if config.command == 'decompose':
        return cmd_decompose(_read_input(config), config.options.get('mode', 'cz'), config.cz, config.atom,
                             dump_dir=config.dump_dir, seed=config.seed, echo=echo)
    if config.command == 'verify':
        if 'suite' not in config.options:
            raise ParameterError('verify needs --suite')
        exp_path = os.path.dirname(os.path.abspath(config.out)) if config.out is not None else None
        return cmd_verify(config.options['suite'], config.seed, config.trials, config.processes,
                          config_file, exp_path)
    if config.command == 'gen':
        if 'kind' not in config.options or config.domain is None:
            raise ParameterError('gen needs --kind and --depth')
        options = {key: config.options[key] for key in ('a', 'scale', 'terms') if key in config.options}
        return cmd_gen(config.options['kind'], config.domain, config.seed, config.out,
                       binary=config.options.get('binary', False), order=config.norm.s, **options)
    raise ParameterError(f'Could not find command {config.command}')


def main(argv=None):
    args = get_basic_configs(argv)
    create_logger(args.log_file)
    start = time.perf_counter()
    try:
        config = ExperimentConfig.from_args(args)
        outcome = run_command(config, args.config)
    except (JNSpaceError, AssertionError, OSError) as e:
        logger.error(f'{type(e).__name__}: {e}')
        return 2

    if not isinstance(outcome, Report):
        print(outcome, file=sys.stderr)
        return 0
    outcome.wall_time = time.perf_counter() - start
    if config.out is not None:
        outcome.write(config.out, include_time=args.with_time)
    else:
        print(outcome.to_json(include_time=args.with_time))
    for record in outcome.failures():
        logger.error(f'assertion {record.name} failed: {record.lhs!r} > {record.rhs!r}')
    return 0 if outcome.passed else 1


if __name__ == '__main__':
    sys.exit(main())
