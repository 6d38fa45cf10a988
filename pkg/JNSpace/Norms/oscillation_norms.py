# -*- coding: utf-8 -*-
'''
Cube oscillations and the dyadic jn / JN / localized Campanato / Lebesgue
norms. Oscillations of every cube of one tree level are computed at once from
a reshaped view of the grid; the packing supremum is a bottom-up tree fold in
log space.
'''

import math
import logging
import itertools
import numpy as np

from dataclasses import dataclass, field, replace
from typing import List
from scipy.special import logsumexp

from JNSpace.Grids.dyadic_grid import (CellBox, DyadicCube, GridFunction, as_box,
                                       multi_indices, unit_cell_moments)
from JNSpace.Polynomials.poly_projection import localized_project, project, solve_gram
from JNSpace.Utils.errors import GridError, ParameterError


logger = logging.getLogger(__name__)

VARIANTS = ('localized', 'plain')


def snap_dyadic(c0):
    """
    Largest power of two not above c0.
    """
    mantissa, exponent = math.frexp(c0)
    return math.ldexp(1.0, exponent - 1)


@dataclass(frozen=True)
class NormParams:
    p: float = 2.0
    q: float = 1.0
    s: int = 0
    alpha: float = 0.0
    c0: float = 1.0
    variant: str = 'localized'
    shifted_grids: bool = False

    def __post_init__(self):
        if not (self.p > 1 and math.isfinite(self.p)):
            raise ParameterError(f'p must lie in (1, inf), got {self.p}')
        if not (self.q >= 1 and math.isfinite(self.q)):
            raise ParameterError(f'q must lie in [1, inf), got {self.q}')
        if int(self.s) != self.s or self.s < 0:
            raise ParameterError(f's must be a non-negative integer, got {self.s}')
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ParameterError(f'alpha must lie in [0, inf), got {self.alpha}')
        if not (self.c0 > 0 and math.isfinite(self.c0)):
            raise ParameterError(f'c0 must be positive, got {self.c0}')
        if self.variant not in VARIANTS:
            raise ParameterError(f'Could not find variant {self.variant} in {VARIANTS}')
        object.__setattr__(self, 's', int(self.s))
        object.__setattr__(self, 'c0', snap_dyadic(self.c0))

    def replace(self, **changes):
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, dict_obj):
        keys = ('p', 'q', 's', 'alpha', 'c0', 'variant', 'shifted_grids')
        return cls(**{key: dict_obj[key] for key in keys if key in dict_obj and dict_obj[key] is not None})


@dataclass
class Packing:
    """
    Antichain of the dyadic tree with the log-weight of every member.
    """
    cubes: List = field(default_factory=list)
    log_weights: List[float] = field(default_factory=list)
    p: float = 2.0

    def __len__(self):
        return len(self.cubes)

    @property
    def weights(self):
        return np.exp(np.asarray(self.log_weights, dtype=float))

    @property
    def total(self):
        if not self.cubes:
            return 0.0
        return float(np.exp(logsumexp(self.log_weights)))

    @property
    def value(self):
        if not self.cubes:
            return 0.0
        return float(np.exp(logsumexp(self.log_weights) / self.p))

    def certificate(self):
        out = []
        for cube in self.cubes:
            if isinstance(cube, DyadicCube):
                out.append((cube.level, list(cube.index)))
            else:
                out.append(('box', list(cube.start), cube.size))
        return out

    def is_antichain(self):
        for a, b in itertools.combinations(self.cubes, 2):
            if a.overlaps(b):
                return False
        return True


def _as_blocks(values, level, depth):
    """
    View a (2^depth,)*n array as (2^level,)*n cubes of (2^{depth-level},)*n cells.
    """
    n = values.ndim
    count, size = 1 << level, 1 << (depth - level)
    shaped = values.reshape(sum(((count, size) for _ in range(n)), ()))
    return shaped.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))


def _cell_pattern(n, beta, size, s):
    A = unit_cell_moments(size, s) * size
    pattern = np.ones(())
    for b in beta:
        pattern = np.multiply.outer(pattern, A[b])
    return pattern


def level_residuals(values, level, depth, project_level, s):
    """
    f - P_Q(f) (cell averages of P) on every cube of a level, shaped
    (2^level,)*n + (cells per axis,)*n.
    """
    blocks = _as_blocks(values, level, depth)
    if not project_level:
        return blocks
    n = values.ndim
    size = 1 << (depth - level)
    W = unit_cell_moments(size, s)
    T = blocks
    for _ in range(n):
        T = np.tensordot(T, W, axes=([n], [1]))
    indices = multi_indices(n, s)
    moments = np.stack([T[(Ellipsis,) + beta] for beta in indices], axis=0)
    lead = moments.shape[1:]
    coefficients = solve_gram(n, s, moments.reshape(len(indices), -1)).reshape((len(indices),) + lead)
    fitted = np.zeros(blocks.shape)
    expand = (Ellipsis,) + (None,) * n
    for a, beta in enumerate(indices):
        fitted += coefficients[a][expand] * _cell_pattern(n, beta, size, s)
    return blocks - fitted


def _power_mean(absolute, n, q):
    # mean of |r|^q over the last n axes, scaled by the max to stay finite
    flat = absolute.reshape(absolute.shape[:absolute.ndim - n] + (-1,))
    top = np.max(flat, axis=-1)
    safe = np.where(top > 0, top, 1.0)
    mean = np.mean((flat / safe[..., None]) ** q, axis=-1)
    return np.where(top > 0, top * mean ** (1.0 / q), 0.0)


def level_raw_oscillations(values, mask, level, depth, cell_side, params):
    """
    (mean over Q of |f - P|^q)^{1/q} for every cube of a level; NaN where the
    cube is not admissible (leaves the mask).
    """
    n = values.ndim
    side = cell_side * (1 << (depth - level))
    plain = params.variant == 'plain'
    project_level = plain or side < params.c0
    residual = level_residuals(values, level, depth, project_level, params.s)
    raw = _power_mean(np.abs(residual), n, params.q)
    if mask is not None:
        admissible = np.all(_as_blocks(mask, level, depth).reshape(raw.shape + (-1,)), axis=-1)
        raw = np.where(admissible, raw, np.nan)
    return raw


def log_weight_levels(values, mask, depth, cell_side, params):
    """
    log w(Q) = (1 - p alpha) log|Q| + p log osc(Q) for every level, -inf for
    zero oscillation and for inadmissible cubes.
    """
    n = values.ndim
    levels = []
    for level in range(depth + 1):
        raw = level_raw_oscillations(values, mask, level, depth, cell_side, params)
        log_measure = n * math.log(cell_side * (1 << (depth - level)))
        with np.errstate(divide='ignore', invalid='ignore'):
            logw = (1.0 - params.p * params.alpha) * log_measure + params.p * np.log(raw)
        logw = np.where(np.isnan(raw) | (raw == 0), -np.inf, logw)
        levels.append(logw)
    return levels


def _children_logsum(best, n):
    count = best.shape[0] // 2
    shaped = best.reshape(sum(((count, 2) for _ in range(n)), ()))
    shaped = shaped.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
    with np.errstate(divide='ignore'):
        return logsumexp(shaped.reshape((count,) * n + (-1,)), axis=-1)


def tree_fold(levels, n):
    """
    best(Q) = max(w(Q), sum of best(children)) in log space, ties to the parent.
    Returns per-level best values and the parent-chosen flags.
    """
    depth = len(levels) - 1
    best = [None] * (depth + 1)
    chosen = [None] * (depth + 1)
    best[depth] = levels[depth]
    chosen[depth] = np.isfinite(levels[depth])
    for level in range(depth - 1, -1, -1):
        children = _children_logsum(best[level + 1], n)
        parent = levels[level]
        take = np.isfinite(parent) & (parent >= children)
        best[level] = np.where(take, parent, children)
        chosen[level] = take
    return best, chosen


def _extract(best, chosen, levels, n, make_cube):
    cubes, log_weights = [], []
    stack = [(0, (0,) * n)]
    depth = len(levels) - 1
    while stack:
        level, index = stack.pop()
        if not np.isfinite(best[level][index]):
            continue
        if chosen[level][index]:
            cubes.append(make_cube(level, index))
            log_weights.append(float(levels[level][index]))
        elif level < depth:
            base = tuple(2 * i for i in index)
            children = [tuple(b + o for b, o in zip(base, offset))
                        for offset in itertools.product((0, 1), repeat=n)]
            stack.extend((level + 1, child) for child in reversed(children))
    return cubes, log_weights


def _shift_offsets(N):
    return sorted(set([0, N // 3, (2 * N) // 3]))


def _shifted_systems(f):
    """
    Yields (values, mask, depth, offset) for the 3^n translated dyadic systems.
    The translated tree has depth K+1 over a doubled box holding the domain at `offset`.
    """
    d = f.domain
    N = d.cells_per_axis
    for offset in itertools.product(_shift_offsets(N), repeat=d.n):
        values = np.zeros((2 * N,) * d.n)
        mask = np.zeros((2 * N,) * d.n, dtype=bool)
        window = tuple(slice(o, o + N) for o in offset)
        values[window] = f.values
        mask[window] = True
        yield values, mask, d.K + 1, offset


def _dyadic_norm(f: GridFunction, params: NormParams):
    d = f.domain
    if d.cell_count == 0:
        raise GridError('empty domain')
    f = f.with_order(params.s)

    if not params.shifted_grids:
        levels = log_weight_levels(f.values, None, d.K, d.cell_side, params)
        best, chosen = tree_fold(levels, d.n)
        cubes, log_weights = _extract(best, chosen, levels, d.n, DyadicCube)
        packing = Packing(cubes, log_weights, params.p)
        return packing.value, packing

    top_value, top_packing = -1.0, None
    for values, mask, depth, offset in _shifted_systems(f):
        levels = log_weight_levels(values, mask, depth, d.cell_side, params)
        best, chosen = tree_fold(levels, d.n)

        def make_box(level, index, depth=depth, offset=offset):
            size = 1 << (depth - level)
            return CellBox(tuple(i * size - o for i, o in zip(index, offset)), size)

        cubes, log_weights = _extract(best, chosen, levels, d.n, make_box)
        packing = Packing(cubes, log_weights, params.p)
        if packing.value > top_value:
            top_value, top_packing = packing.value, packing
    return top_value, top_packing


def jn_norm_dyadic(f: GridFunction, params: NormParams):
    """
    Exact supremum over packings of dyadic cubes of
    (sum |Q_j| (|Q_j|^{-alpha} osc_q(f, Q_j))^p)^{1/p}, localized projection.
    Returns (value, maximizing Packing).
    """
    if params.variant != 'localized':
        raise ParameterError('jn_norm_dyadic needs the localized variant')
    return _dyadic_norm(f, params)


def JN_norm_dyadic(f: GridFunction, params: NormParams):
    """
    Same tree fold with the plain projection on every cube.
    """
    if params.variant != 'plain':
        raise ParameterError('JN_norm_dyadic needs the plain variant')
    return _dyadic_norm(f, params)


def dyadic_norm(f: GridFunction, params: NormParams):
    return _dyadic_norm(f, params)


def oscillation(f: GridFunction, cube, params: NormParams) -> float:
    """
    |Q|^{-alpha} (mean over Q of |f - P|^q)^{1/q}, P localized or plain per variant.
    """
    f = f.with_order(params.s)
    d = f.domain
    box = as_box(cube, d)
    if params.variant == 'plain':
        P = project(f, box, params.s)
    else:
        P = localized_project(f, box, params)
    residual = f.values[box.slices()]
    if not P.is_zero():
        residual = residual - P.cell_averages(d, box)
    raw = float(_power_mean(np.abs(residual), d.n, params.q))
    if raw == 0.0:
        return 0.0
    return float(math.exp(-params.alpha * math.log(box.measure(d))) * raw)


def all_oscillations(f: GridFunction, params: NormParams):
    """
    Per level, the array of |Q|^{-alpha} osc over the standard dyadic cubes.
    """
    f = f.with_order(params.s)
    d = f.domain
    out = []
    for level in range(d.K + 1):
        raw = level_raw_oscillations(f.values, None, level, d.K, d.cell_side, params)
        measure = math.ldexp(1.0, (d.m - level) * d.n)
        out.append(raw * math.exp(-params.alpha * math.log(measure)))
    return out


def campanato_maximizer(f: GridFunction, params: NormParams):
    """
    (max oscillation over dyadic cubes, a maximizing cube).
    """
    f = f.with_order(params.s)
    d = f.domain
    if not params.shifted_grids:
        top, where = 0.0, d.root()
        for level, osc in enumerate(all_oscillations(f, params)):
            index = np.unravel_index(int(np.argmax(osc)), osc.shape)
            if osc[index] > top:
                top, where = float(osc[index]), DyadicCube(level, tuple(int(i) for i in index))
        return top, where

    top, where = 0.0, d.root()
    for values, mask, depth, offset in _shifted_systems(f):
        for level in range(depth + 1):
            raw = level_raw_oscillations(values, mask, level, depth, d.cell_side, params)
            size = 1 << (depth - level)
            measure = (size * d.cell_side) ** d.n
            osc = np.nan_to_num(raw, nan=0.0) * math.exp(-params.alpha * math.log(measure))
            index = np.unravel_index(int(np.argmax(osc)), osc.shape)
            if osc[index] > top:
                top = float(osc[index])
                where = CellBox(tuple(int(i) * size - o for i, o in zip(index, offset)), size)
    return top, where


def campanato_norm_dyadic(f: GridFunction, params: NormParams) -> float:
    return campanato_maximizer(f, params)[0]


def lebesgue_norm(f: GridFunction, p: float, cube=None) -> float:
    if not p >= 1:
        raise ParameterError(f'p must be at least 1, got {p}')
    values = f.values if cube is None else f.block(cube)
    absolute = np.abs(values)
    top = float(np.max(absolute)) if absolute.size else 0.0
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    return float(top * (np.sum((absolute / top) ** p) * f.domain.cell_measure) ** (1.0 / p))


def weak_quasi_norm(f: GridFunction, Q0, s: int, p: float) -> float:
    """
    sup over lambda of lambda |{x in Q0 : |f - P_{Q0} f| > lambda}|^{1/p},
    exact over the finitely many candidate thresholds.
    """
    f = f.with_order(s)
    d = f.domain
    box = as_box(Q0, d)
    P = project(f, box, s)
    residual = np.abs(f.values[box.slices()] - P.cell_averages(d, box)).ravel()
    ordered = np.sort(residual)[::-1]
    if ordered.size == 0 or ordered[0] == 0.0:
        return 0.0
    counts = np.arange(1, ordered.size + 1)
    return float(np.max(ordered * (counts * d.cell_measure) ** (1.0 / p)))


def shifted_norm(f: GridFunction, params: NormParams, kind='jn'):
    """
    Norm maximized over the 3^n translated dyadic systems. `kind` is one of
    jn, JN, campanato; returns (value, certificate).
    """
    params = params.replace(shifted_grids=True)
    if kind == 'jn':
        return _dyadic_norm(f, params.replace(variant='localized'))
    if kind == 'JN':
        return _dyadic_norm(f, params.replace(variant='plain'))
    if kind == 'campanato':
        return campanato_maximizer(f, params)
    raise ParameterError(f'Could not find norm kind {kind} for shifted grids')


def _packing_kind(variant):
    def compute(f, params):
        value, packing = _dyadic_norm(f, params.replace(variant=variant))
        return value, packing.certificate()
    return compute


def _campanato_kind(f, params):
    value, cube = campanato_maximizer(f, params.replace(variant='localized'))
    return value, Packing([cube], [], params.p).certificate()


NORM_KINDS = {
    'jn': _packing_kind('localized'),
    'JN': _packing_kind('plain'),
    'campanato': _campanato_kind,
    'lp': lambda f, params: (lebesgue_norm(f, params.p), None),
    'weak': lambda f, params: (weak_quasi_norm(f, f.domain.root(), params.s, params.p), None),
}
