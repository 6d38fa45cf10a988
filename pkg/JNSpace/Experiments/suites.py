# -*- coding: utf-8 -*-
'''
Verify suites. A suite expands its configuration grid, runs seeded trials
(trial i uses configuration i mod len(grid) and rng default_rng([seed, i]))
and collects one AssertionRecord per checked inequality into a Report.
'''

import os
import math
import logging
import numpy as np
import concurrent.futures

from tqdm import tqdm

from JNSpace.Grids.dyadic_grid import DomainSpec, GridFunction, enumerate_cubes
from JNSpace.Norms.oscillation_norms import NormParams, dyadic_norm, lebesgue_norm, oscillation, weak_quasi_norm
from JNSpace.Norms.packing_oracle import packing_oracle
from JNSpace.Norms.experiments import equivalence_experiments, norm_axioms_check, norm_limit_sweep
from JNSpace.Polynomials.patched_function import Patch, PatchedFunction
from JNSpace.Polynomials.poly_projection import project, projection_constant, projection_constants
from JNSpace.Decompositions.cz_decomposition import CZConfig, cz_decompose, tail_bound_check
from JNSpace.Decompositions.atoms_duality import (AtomParams, AtomicDecomposition, LocalAtom, Polymer,
                                                  dual_optimizer, h1_upper_bound, hk_lebesgue_check,
                                                  hk_lower_bound, hk_upper_bound, pair, refine_atoms,
                                                  tile_decomposition)
from JNSpace.Experiments.generators import random_antichain, random_atom_values, random_function
from JNSpace.Experiments.reports import Report, check
from JNSpace.Utils.config_from_dict import Grid
from JNSpace.Utils.errors import ParameterError
from JNSpace.Utils.logger import Logger


logger = logging.getLogger(__name__)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'Configs')


def _domain(config):
    return DomainSpec(n=int(config.get('n', 1)), m=int(config.get('m', 0)), K=int(config.get('K', 3)))


def _norm_params(config, **changes):
    params = NormParams.from_dict(config)
    return params.replace(**changes) if changes else params


def _pick(rng, values):
    return values[int(rng.integers(0, len(values)))]


class Suite:
    """
    Base class: subclasses implement `trial(config, rng) -> (records, reported)`
    and may add `extras(seed)` records that do not depend on the trial count.
    """
    name = None

    def __init__(self, config_file=None):
        self.config_file = config_file
        grid = Grid(config_file or os.path.join(CONFIG_DIR, f'config_{self.name}.yml'))
        self.defaults = grid.defaults
        self.configurations = list(grid)

    def configuration(self, index):
        config = dict(self.defaults)
        config.update(self.configurations[index % len(self.configurations)])
        return config

    def trial(self, config, rng):
        raise NotImplementedError('You must implement this function!')

    def extras(self, seed):
        return [], {}

    def run_trial(self, seed, index):
        rng = np.random.default_rng([seed, index])
        return self.trial(self.configuration(index), rng)

    def run(self, seed=42, trials=None, processes=1, exp_path=None):
        trials = int(self.defaults.get('trials', 100) if trials is None else trials)
        if trials <= 0:
            raise ParameterError(f'trials must be positive, got {trials}')
        report = Report('verify', {'suite': self.name, 'seed': seed, 'trials': trials,
                                   'defaults': self.defaults, 'configurations': self.configurations})
        experiment_logger = Logger(os.path.join(exp_path, 'experiment.log'), mode='w', echo=False) \
            if exp_path is not None else None
        logger.info(f'suite {self.name}: {trials} trials over {len(self.configurations)} configurations')

        if processes > 1:
            pool = concurrent.futures.ProcessPoolExecutor(max_workers=processes)
            futures = [pool.submit(_run_trial, self.name, self.config_file, seed, i) for i in range(trials)]
            outcomes = [future.result() for future in tqdm(futures, desc=self.name, leave=False)]
            pool.shutdown()
        else:
            outcomes = [self.run_trial(seed, i) for i in tqdm(range(trials), desc=self.name, leave=False)]

        reported = {}
        for i, (records, values) in enumerate(outcomes):
            report.extend(records)
            for key, value in values.items():
                reported.setdefault(key, []).append(value)
            if experiment_logger is not None:
                failed = [record.name for record in records if not record.passed]
                experiment_logger.log(f'trial {i}: {len(records)} assertions, failed: {failed}')

        records, values = self.extras(seed)
        report.extend(records)
        report.add_result('extras', values)
        report.add_result('reported', {key: {'min': float(np.min(v)), 'max': float(np.max(v)), 'n': len(v)}
                                       for key, v in reported.items()})
        report.add_result('n_assertions', len(report.assertions))
        if experiment_logger is not None:
            experiment_logger.log(f'suite {self.name}: passed={report.passed}')
        return report


def _run_trial(name, config_file, seed, index):
    return SUITES[name](config_file).run_trial(seed, index)


class OracleSuite(Suite):
    name = 'oracle'

    def trial(self, config, rng):
        d = _domain(config)
        params = _norm_params(config)
        f = random_function(d, rng, order=params.s)
        value, packing = dyadic_norm(f, params)
        brute = packing_oracle(f, params)
        records = [
            check('dp_below_oracle', value, brute, anchor='packing supremum'),
            check('oracle_below_dp', brute, value, anchor='packing supremum'),
        ]
        certified = 0.0
        for cube in packing.cubes:
            certified += cube.measure(d) * oscillation(f, cube, params) ** params.p
        certified = certified ** (1.0 / params.p) if certified > 0 else 0.0
        records.append(check('certificate_reproduces_value', abs(certified - value), 1e-12 * max(value, 1.0),
                             rel_tol=0.0, anchor='packing supremum'))
        records.append(check('certificate_is_antichain', 0.0 if packing.is_antichain() else 1.0, 0.0,
                             rel_tol=0.0, anchor='packing supremum'))
        return records, {}

    def extras(self, seed):
        """
        f = 3 on [0, 2^m): JN vanishes and jn = 3 * 2^{m/2} for c0 = 1, p = 2, q = 1.
        """
        records, values = [], {}
        params = NormParams(p=2.0, q=1.0, s=0, alpha=0.0, c0=1.0)
        for m in range(7):
            d = DomainSpec(n=1, m=m, K=m + 1)
            f = GridFunction(d, np.full(d.shape, 3.0))
            jn, _ = dyadic_norm(f, params)
            JN, _ = dyadic_norm(f, params.replace(variant='plain'))
            expected = 3.0 * 2.0 ** (m / 2.0)
            tiling = (d.measure * 3.0 ** 2) ** 0.5
            records.append(check('constant_JN_vanishes', JN, 1e-12, rel_tol=0.0, anchor='jn differs from JN'))
            records.append(check('constant_jn_exact', abs(jn - expected), 1e-12 * expected, rel_tol=0.0,
                                 anchor='jn differs from JN'))
            records.append(check('constant_jn_tiling_certificate', tiling, jn, anchor='jn differs from JN'))
            values[f'm={m}'] = jn
        return records, values


class ProjectionSuite(Suite):
    name = 'projections'

    def trial(self, config, rng):
        d = _domain(config)
        params = _norm_params(config)
        s = params.s
        f = random_function(d, rng, order=s)
        cube = _pick(rng, list(enumerate_cubes(d)))
        P = project(f, cube, s)
        box = cube.box(d)
        scale = max(float(np.max(np.abs(f.block(cube)))), np.finfo(float).tiny)
        values = np.zeros(d.shape)
        values[box.slices()] = f.block(cube)
        moments = PatchedFunction(d, values, [Patch(box, -P)]).local_moments(box, s)
        C = projection_constant(s, d.n)
        records = [
            check('projection_orthogonality', float(np.max(np.abs(moments))), 1e-9 * scale, rel_tol=0.0,
                  anchor='polynomial projection'),
            check('projection_sup_bound', float(np.max(np.abs(P.cell_averages(d, box)))), C * f.abs_mean(cube),
                  rel_tol=1e-9, anchor='polynomial projection'),
        ]

        g = random_function(d, rng, order=s)
        linear = project(f + g, cube, s).vector() - P.vector() - project(g, cube, s).vector()
        records.append(check('projection_linearity', float(np.max(np.abs(linear))),
                             1e-9 * (scale + float(np.max(np.abs(g.block(cube))))), rel_tol=0.0,
                             anchor='polynomial projection'))

        records.extend(norm_axioms_check(f, g, params, scale=float(rng.uniform(-3.0, 3.0))))
        experiments = equivalence_experiments(f, self.defaults.get('experiments', []), params)
        reported = {}
        for name, outcome in experiments.items():
            records.extend(outcome['assertions'])
            for key, value in outcome['ratios'].items():
                if isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value):
                    reported[f'{name}.{key}'] = float(value)
        return records, reported

    def extras(self, seed):
        """
        C_s and C_sn_q for every (s, n) of the grid; in one dimension C_s = (s + 1)^2.
        """
        records, values = [], {}
        pairs = sorted({(_norm_params(config).s, int(config.get('n', 1)), float(_norm_params(config).q))
                        for config in map(self.configuration, range(len(self.configurations)))})
        for s, n, q in pairs:
            constants = projection_constants(s, n, q=q, seed=seed)
            records.append(check('projection_constant_at_least_one', 1.0, constants.C_s, rel_tol=0.0,
                                 anchor='polynomial projection'))
            records.append(check('norm_ratio_constant_at_least_one', 1.0, constants.C_sn_q, rel_tol=0.0,
                                 anchor='polynomial projection'))
            if n == 1:
                records.append(check('projection_constant_1d', abs(constants.C_s - (s + 1) ** 2),
                                     1e-9 * (s + 1) ** 2, rel_tol=0.0, anchor='polynomial projection'))
            values[f's={s},n={n},q={q}'] = {'C_s': constants.C_s, 'C_sn_q': constants.C_sn_q}
        return records, values


class CZSuite(Suite):
    name = 'cz'

    @staticmethod
    def sample_config(f, config, rng):
        """
        C~ is 2^n + 1 or a factor times 2^{n+1}; gamma is the mean of |f| or a multiple in (1, 3).
        """
        n = f.domain.n
        choices = [2.0 ** n + 1.0] + [2.0 ** (n + 1) * float(c) for c in config.get('ctilde_factors', [1.0])]
        exact = rng.random() < float(config.get('exact_mean_fraction', 0.25))
        gamma = f.abs_mean(f.domain.root()) * (1.0 if exact else rng.uniform(1.0, 3.0))
        return CZConfig(s=int(config.get('s', 0)), ctilde=float(_pick(rng, choices)), gamma=gamma)

    def trial(self, config, rng):
        d = _domain(config)
        s = int(config.get('s', 0))
        f = random_function(d, rng, order=s)
        root = d.root()
        decomposition = cz_decompose(f, root, self.sample_config(f, config, rng))
        diagnostics = decomposition.diagnostics
        scale = diagnostics['scale']
        records = [
            check('cz_reconstruction', diagnostics['reconstruction_residual'], 1e-9 * scale, rel_tol=0.0,
                  anchor='Calderon-Zygmund decomposition'),
            check('cz_moments', diagnostics['max_moment_residual'], 1e-9 * scale, rel_tol=0.0,
                  anchor='Calderon-Zygmund decomposition'),
        ]
        for piece in decomposition.pieces:
            records.append(check('cz_piece_sup', piece.sup, piece.bound, anchor='Calderon-Zygmund decomposition'))

        for _ in range(int(config.get('tail_checks', 5))):
            w = rng.uniform(1.0, 4.0)
            tail = tail_bound_check(f, root, rng.uniform(1.5, 6.0), w, f.abs_mean(root) * rng.uniform(0.2, 2.0))
            records.append(check('tail_bound', tail.lhs, tail.rhs, anchor='level-set tail bound'))
        return records, {'levels': len(decomposition.levels)}


class DualitySuite(Suite):
    name = 'duality'

    def _random_polymer(self, d, params, rng):
        terms = []
        for cube in random_antichain(d, rng):
            values = random_atom_values(d, cube, params, rng)
            terms.append((rng.normal(), LocalAtom(cube, GridFunction(d, values), params)))
        return Polymer(terms, params.v)

    def trial(self, config, rng):
        d = _domain(config)
        params = AtomParams.from_dict(config)
        norm_params = params.dual_norm_params()
        f = random_function(d, rng, order=params.s)
        jn, packing = dyadic_norm(f, norm_params)

        g = AtomicDecomposition([self._random_polymer(d, params, rng)
                                 for _ in range(int(rng.integers(1, 3)))])
        budget = hk_upper_bound(g)
        value = pair(g, f)
        records = [check('pairing_bound', abs(value), budget * jn, anchor='hk-jn duality')]

        lower = hk_lower_bound(g, [f, random_function(d, rng, order=params.s)], norm_params) \
            if jn > 0 else 0.0
        records.append(check('hk_sandwich', lower, budget, anchor='hk-jn duality'))
        fine, coarse, _ = h1_upper_bound(g, d.root(), params.v, params.w)
        records.append(check('h1_fine_below_coarse', fine, coarse, anchor='hk embeds in h1'))

        reported = {}
        if packing.cubes:
            _, ratio = dual_optimizer(f, packing, norm_params)
            C = projection_constant(params.s, d.n)
            records.append(check('dual_ratio_lower', jn / (4.0 * (1.0 + C)), ratio, anchor='hk-jn duality'))
            records.append(check('dual_ratio_upper', ratio, jn, anchor='hk-jn duality'))
            reported['dual_ratio_over_jn'] = ratio / jn
        return records, reported

    def extras(self, seed):
        """
        A fixed number of w-atom refinements, the i-th on configuration i mod len(grid).
        """
        count = int(self.defaults.get('refinements', 50))
        records, ratios = [], []
        for i in range(count):
            config = self.configuration(i)
            rng = np.random.default_rng([seed, 1, i])
            records.extend(self._refinement(_domain(config), AtomParams.from_dict(config), rng, ratios))
        values = {'refinements': count}
        if ratios:
            values['refinement_budget_ratio'] = {'min': float(np.min(ratios)), 'max': float(np.max(ratios))}
        return records, values

    def _refinement(self, d, params, rng, ratios):
        w = float(_pick(rng, [2.0, 4.0]))
        finite = params.replace(w=w, v=w / 2.0 if w > 2.0 else 1.5)
        polymer = self._random_polymer(d, finite, rng)
        refined = refine_atoms(polymer, CZConfig(s=finite.s))
        records = []
        for _ in range(10):
            t = random_function(d, rng)
            before = polymer.pair(t)
            after = pair(refined, t)
            l1 = sum(abs(c) * atom.function.lebesgue_norm(1.0) for c, atom in polymer.terms)
            scale = max(l1 * float(np.max(np.abs(t.values))), np.finfo(float).tiny)
            records.append(check('refinement_preserves_pairing', abs(after - before), 1e-8 * scale, rel_tol=0.0,
                                 anchor='w-atoms refine into infinity-atoms'))
        records.append(check('refinement_budget_finite', 0.0 if math.isfinite(refined.budget) else 1.0, 0.0, rel_tol=0.0,
                             anchor='w-atoms refine into infinity-atoms'))
        ratios.append(float(refined.notes.get('budget_ratio', 1.0)))
        return records


class LimitSuite(Suite):
    name = 'limits'

    def trial(self, config, rng):
        d = _domain(config)
        params = _norm_params(config)
        f = random_function(d, rng, order=params.s)
        p_list = [float(p) for p in self.defaults.get('p_list', [2, 8, 32, 128, 512])]
        frame, summary = norm_limit_sweep(f, params, p_list, gap_tolerance=float(self.defaults.get('gap', 0.02)))
        return summary['assertions'], {'terminal_gap': summary['terminal_gap'],
                                       'monotone': float(summary['monotone'])}


class LebesgueSuite(Suite):
    name = 'lebesgue'

    def trial(self, config, rng):
        d = _domain(config)
        params = _norm_params(config)
        f = random_function(d, rng, order=params.s)
        records, reported = [], {}
        names = ['lebesgue_p', 'weak_type', 'campanato_dominance']
        if params.p <= params.q:
            names.append('lebesgue_q')
        for name, outcome in equivalence_experiments(f, names, params).items():
            records.extend(outcome['assertions'])
        weak = weak_quasi_norm(f, d.root(), params.s, params.p)
        jn = dyadic_norm(f, params.replace(variant='localized'))[0]
        if jn > 0:
            reported['weak_over_jn'] = weak / (d.measure ** params.alpha * jn)

        atom_params = AtomParams(v=float(config.get('v', 2.0)), w=float(config.get('w', 2.0)), s=params.s,
                                 alpha=0.0, c0=min(params.c0, d.side))
        if atom_params.w <= atom_params.v:
            single = tile_decomposition(f, [d.root()], atom_params)
            records.extend(hk_lebesgue_check(single, d.root(), atom_params.v, atom_params.w))
            expected = d.measure ** (1.0 / atom_params.v - 1.0 / atom_params.w) * lebesgue_norm(f, atom_params.w)
            records.append(check('single_tile_budget', abs(single.budget - expected), 1e-12 * max(expected, 1e-300),
                                 rel_tol=0.0, anchor='hk on a cube is Lw'))
            reported['single_tile_budget'] = single.budget
        return records, reported


SUITES = {
    'oracle': OracleSuite,
    'projections': ProjectionSuite,
    'cz': CZSuite,
    'duality': DualitySuite,
    'limits': LimitSuite,
    'lebesgue': LebesgueSuite,
}
