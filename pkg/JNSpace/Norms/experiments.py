# -*- coding: utf-8 -*-
'''
Limit sweeps and the equivalence experiments between jn, JN, Campanato and
Lebesgue norms. Every experiment returns its ratios together with the
AssertionRecords of the directions whose constants are explicit.
'''

import math
import logging
import numpy as np
import pandas as pd

from JNSpace.Grids.dyadic_grid import DomainSpec, GridFunction
from JNSpace.Norms.oscillation_norms import (NormParams, all_oscillations, campanato_norm_dyadic,
                                             dyadic_norm, lebesgue_norm, weak_quasi_norm)
from JNSpace.Polynomials.poly_projection import project, projection_constant
from JNSpace.Experiments.reports import check
from JNSpace.Utils.errors import ParameterError


logger = logging.getLogger(__name__)

DEFAULT_P_LIST = (2, 4, 8, 16, 32, 64, 128, 256, 512)


def _jn(f, params):
    return dyadic_norm(f, params.replace(variant='localized'))[0]


def _JN(f, params):
    return dyadic_norm(f, params.replace(variant='plain'))[0]


def _ratio(a, b):
    return a / b if b > 0 else (math.inf if a > 0 else 1.0)


def single_cube_bound(f, params):
    """
    max over dyadic cubes of |Q|^{1/p} osc(Q), the best one-cube packing.
    """
    d = f.domain
    best = 0.0
    for level, osc in enumerate(all_oscillations(f, params)):
        measure = math.ldexp(1.0, (d.m - level) * d.n)
        best = max(best, measure ** (1.0 / params.p) * float(np.max(osc)))
    return best


def norm_limit_sweep(f: GridFunction, params: NormParams, p_list=DEFAULT_P_LIST, gap_tolerance=0.02):
    """
    jn norms along increasing p against the localized Campanato norm.
    Returns (DataFrame, summary); the summary carries the terminal gap and the
    assertion records.
    """
    p_list = sorted(float(p) for p in p_list)
    if not p_list:
        raise ParameterError('p_list must not be empty')
    d = f.domain
    campanato = campanato_norm_dyadic(f, params.replace(variant='localized'))
    rows, records = [], []
    for p in p_list:
        current = params.replace(p=p, variant='localized')
        jn = _jn(f, current)
        lower = single_cube_bound(f, current)
        upper = d.measure ** (1.0 / p) * campanato
        rows.append({'p': p, 'jn': jn, 'campanato': campanato,
                     'relative_gap': abs(jn - campanato) / campanato if campanato > 0 else abs(jn),
                     'single_cube_bound': lower, 'upper_bound': upper,
                     'single_cube_ok': lower <= jn * (1 + 1e-12)})
        records.append(check('single_cube_lower_bound', lower, jn, anchor='limit of jn as p grows'))
        records.append(check('campanato_dominance', jn, upper, anchor='limit of jn as p grows'))
    frame = pd.DataFrame(rows)

    values = frame['jn'].to_numpy()
    summary = {
        'monotone': bool(np.all(np.diff(values) >= -1e-12 * np.maximum(np.abs(values[1:]), 1.0))),
        'terminal_p': p_list[-1],
        'terminal_gap': float(frame['relative_gap'].iloc[-1]),
        'campanato': campanato,
        'unit_measure': d.measure == 1.0,
    }
    if d.measure == 1.0 and campanato > 0:
        records.append(check('terminal_gap', summary['terminal_gap'], gap_tolerance, rel_tol=0.0,
                             anchor='limit of jn as p grows'))
    summary['assertions'] = records
    logger.info(f'limit sweep: terminal gap {summary["terminal_gap"]:.4g} at p={p_list[-1]}')
    return frame, summary


def pad_into(f: GridFunction, extra_levels: int) -> GridFunction:
    """
    f extended by zero to the domain 2^extra_levels times larger per axis,
    same cell side, f in the lower corner.
    """
    d = f.domain
    domain = DomainSpec(n=d.n, m=d.m + extra_levels, K=d.K + extra_levels)
    values = np.zeros(domain.shape)
    values[tuple(slice(0, d.cells_per_axis) for _ in range(d.n))] = f.values
    return GridFunction(domain, values, order=f.order)


def c0_independence(f, params, c_ratio=2.0, **kwargs):
    C = projection_constant(params.s, f.domain.n)
    small = params.replace(variant='localized')
    large = small.replace(c0=small.c0 * c_ratio)
    jn_small, jn_large = _jn(f, small), _jn(f, large)
    records = [check('c0_larger_bounded', jn_large, (1 + C) * jn_small, anchor='c0 independence')]
    ratios = {'jn_large_over_small': _ratio(jn_large, jn_small),
              'jn_small_over_large': _ratio(jn_small, jn_large),
              'c0_small': small.c0, 'c0_large': large.c0}
    return ratios, records


def q_invariance(f, params, q=2.0, **kwargs):
    base = params.replace(q=1.0, variant='localized')
    other = base.replace(q=q)
    jn_1, jn_q = _jn(f, base), _jn(f, other)
    records = [check('q_monotone', jn_1, jn_q, anchor='q invariance')]
    return {'jn_q_over_jn_1': _ratio(jn_q, jn_1), 'q': q}, records


def jn_vs_JN(f, params, **kwargs):
    C = projection_constant(params.s, f.domain.n)
    jn, JN = _jn(f, params), _JN(f, params)
    lp = lebesgue_norm(f, params.p)
    records = [check('JN_below_jn', JN, (1 + C) * jn, anchor='jn is JN intersected with Lp')]
    ratios = {'jn': jn, 'JN': JN, 'lp': lp, 'jn_over_max_JN_lp': _ratio(jn, max(JN, lp)),
              'c0_factor': params.c0 ** (-f.domain.n * params.alpha)}
    return ratios, records


def quotient(f, params, **kwargs):
    """
    Upper bound of the quotient norm over P_s(Q0): the smaller jn value of f
    and of f - P_{Q0} f.
    """
    C = projection_constant(params.s, f.domain.n)
    g = f.with_order(params.s)
    root = f.domain.root()
    P = project(g, root, params.s)
    shifted = GridFunction(f.domain, g.values - P.cell_averages(f.domain, root), order=g.order)
    candidates, records = [], []
    for h in (g, shifted):
        jn = _jn(h, params)
        candidates.append(jn)
        records.append(check('JN_below_quotient', _JN(h, params), (1 + C) * jn, anchor='quotient norm'))
    return {'quotient_upper_bound': min(candidates), 'JN': _JN(f, params), 'candidates': candidates,
            'upper_bound_only': True}, records


def lebesgue_q(f, params, **kwargs):
    if params.p > params.q:
        raise ParameterError('lebesgue_q needs p <= q')
    C = projection_constant(params.s, f.domain.n)
    current = params.replace(alpha=0.0, variant='localized')
    jn = _jn(f, current)
    lq = lebesgue_norm(f, current.q)
    factor = f.domain.measure ** (1.0 / current.q - 1.0 / current.p)
    records = []
    if current.c0 <= f.domain.side:
        records.append(check('lq_below_jn', lq, factor * jn, anchor='jn on a cube is Lq'))
    records.append(check('jn_below_lq', factor * jn, (1 + C) * lq, anchor='jn on a cube is Lq'))
    return {'lq': lq, 'scaled_jn': factor * jn}, records


def lebesgue_p(f, params, **kwargs):
    C = projection_constant(params.s, f.domain.n)
    current = params.replace(q=params.p, alpha=0.0, variant='localized')
    jn = _jn(f, current)
    lp = lebesgue_norm(f, current.p)
    records = []
    if current.c0 <= f.domain.side:
        records.append(check('lp_below_jn', lp, jn, anchor='jn with q = p is Lp'))
    records.append(check('jn_below_lp', jn, (1 + C) * lp, anchor='jn with q = p is Lp'))
    return {'lp': lp, 'jn': jn, 'ratio': _ratio(jn, lp)}, records


def vanishing(f, params, extra_levels=2, **kwargs):
    """
    The root cube of ever larger domains forces jn >= ||f||_q |Q_N|^{1/p-1/q-alpha}.
    """
    current = params.replace(variant='localized')
    lq = lebesgue_norm(f, current.q)
    exponent = 1.0 / current.p - 1.0 / current.q - current.alpha
    rows, records = [], []
    for j in range(extra_levels + 1):
        g = pad_into(f, j)
        jn = _jn(g, current)
        bound = lq * g.domain.measure ** exponent
        rows.append({'m': g.domain.m, 'jn': jn, 'root_bound': bound,
                     'certificate': jn * g.domain.measure ** (-exponent)})
        if current.c0 <= g.domain.side:
            records.append(check('root_cube_bound', bound, jn, anchor='vanishing for small alpha'))
    return {'sweep': rows, 'exponent': exponent}, records


def weak_type(f, params, **kwargs):
    d = f.domain
    root = d.root()
    weak = weak_quasi_norm(f, root, params.s, params.p)
    g = f.with_order(params.s)
    P = project(g, root, params.s)
    residual = GridFunction(d, g.values - P.cell_averages(d, root))
    strong = lebesgue_norm(residual, params.p)
    jn = _jn(f, params)
    records = [check('weak_below_strong', weak, strong, anchor='weak type inequality')]
    return {'weak': weak, 'strong': strong,
            'weak_over_jn': _ratio(weak, d.measure ** params.alpha * jn)}, records


def campanato_dominance(f, params, **kwargs):
    current = params.replace(variant='localized')
    jn = _jn(f, current)
    campanato = campanato_norm_dyadic(f, current)
    bound = f.domain.measure ** (1.0 / current.p) * campanato
    return {'jn': jn, 'campanato': campanato}, [check('jn_below_campanato', jn, bound,
                                                      anchor='limit of jn as p grows')]


EXPERIMENTS = {
    'c0_independence': c0_independence,
    'q_invariance': q_invariance,
    'jn_vs_JN': jn_vs_JN,
    'quotient': quotient,
    'lebesgue_q': lebesgue_q,
    'lebesgue_p': lebesgue_p,
    'vanishing': vanishing,
    'weak_type': weak_type,
    'campanato_dominance': campanato_dominance,
}


def equivalence_experiments(f: GridFunction, configurations, params: NormParams = None):
    """
    configurations: names from EXPERIMENTS, or dicts {'name': ..., **options}.
    Returns {name: {'ratios': ..., 'assertions': [AssertionRecord]}}.
    """
    params = params or NormParams()
    out = {}
    for configuration in configurations:
        options = dict(configuration) if isinstance(configuration, dict) else {'name': configuration}
        name = options.pop('name')
        if name not in EXPERIMENTS:
            raise ParameterError(f'Could not find {name} in equivalence experiments')
        ratios, records = EXPERIMENTS[name](f, params, **options)
        out[name] = {'ratios': ratios, 'assertions': records}
    return out


def norm_axioms_check(f: GridFunction, g: GridFunction, params: NormParams, scale=-2.5):
    """
    Homogeneity and triangle inequality of the dyadic functional.
    """
    value_f, value_g = dyadic_norm(f, params)[0], dyadic_norm(g, params)[0]
    value_scaled = dyadic_norm(f * scale, params)[0]
    value_sum = dyadic_norm(f + g, params)[0]
    homogeneous = abs(scale) * value_f
    return [
        check('homogeneity_upper', value_scaled, homogeneous, rel_tol=1e-12, anchor='normed space'),
        check('homogeneity_lower', homogeneous, value_scaled, rel_tol=1e-12, anchor='normed space'),
        check('triangle', value_sum, value_f + value_g, rel_tol=1e-10, anchor='normed space'),
    ]
