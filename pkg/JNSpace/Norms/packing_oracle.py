# -*- coding: utf-8 -*-
'''
Brute-force packing maximum: enumerates the value of every antichain of the
dyadic tree. Cube oscillations come from the single-cube `oscillation`, not
from the vectorized level pass the tree fold uses.
'''

import logging
import numpy as np

from JNSpace.Grids.dyadic_grid import GridFunction, cube_children
from JNSpace.Norms.oscillation_norms import NormParams, oscillation
from JNSpace.Utils.errors import OracleLimitError, ParameterError


logger = logging.getLogger(__name__)

# deepest enumerable tree per dimension (458330 antichains in 1-D, 83522 in 2-D)
ORACLE_LIMITS = {1: 4, 2: 2}


def cube_weight(f, cube, params):
    osc = oscillation(f, cube, params)
    if osc == 0.0:
        return 0.0
    return cube.measure(f.domain) * osc ** params.p


def antichain_values(f, cube, params):
    """
    Values sum(w(Q)) of every antichain of the subtree under `cube`, the empty
    antichain included.
    """
    w = cube_weight(f, cube, params)
    if cube.level == f.domain.K:
        return np.array([0.0, w])
    combined = np.zeros(1)
    for child in cube_children(cube, f.domain):
        combined = np.add.outer(combined, antichain_values(f, child, params)).ravel()
    return np.concatenate([[w], combined])


def packing_oracle(f: GridFunction, params: NormParams, max_depth=None) -> float:
    d = f.domain
    if d.n not in ORACLE_LIMITS:
        raise OracleLimitError('oracle limit exceeded')
    limit = ORACLE_LIMITS[d.n] if max_depth is None else min(max_depth, ORACLE_LIMITS[d.n])
    if d.K > limit:
        raise OracleLimitError('oracle limit exceeded')
    if params.shifted_grids:
        raise ParameterError('the packing oracle enumerates the standard dyadic system only')

    values = antichain_values(f.with_order(params.s), d.root(), params)
    logger.debug(f'oracle enumerated {values.size} antichains')
    best = float(np.max(values))
    return best ** (1.0 / params.p) if best > 0 else 0.0
