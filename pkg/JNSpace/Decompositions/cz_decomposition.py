# -*- coding: utf-8 -*-
'''
Dyadic maximal function, stopping cubes and the Calderon-Zygmund splitting
f - P_Q(f) = sum over k, j of A_{k,j}. A decomposition is verified before it
is returned; a violated conclusion raises DecompositionError.
'''

import logging
import numpy as np

from dataclasses import dataclass, field, replace
from typing import List, Optional

from JNSpace.Grids.dyadic_grid import DyadicCube, GridFunction
from JNSpace.Polynomials.patched_function import Patch, PatchedFunction
from JNSpace.Polynomials.poly_projection import SpacePolynomial, project, projection_constant
from JNSpace.Utils.errors import DecompositionError, GridError, ParameterError


logger = logging.getLogger(__name__)

RECONSTRUCTION_TOL = 1e-9
MOMENT_TOL = 1e-9
SUP_TOL = 1e-12


@dataclass(frozen=True)
class CZConfig:
    """
    s: degree of the vanishing moments, ctilde: ratio of successive
    thresholds (default 2^{n+1}), gamma: base threshold (default the mean of |f|).
    """
    s: int = 0
    ctilde: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 0:
            raise ParameterError(f's must be a non-negative integer, got {self.s}')

    def resolve(self, f: GridFunction, cube: DyadicCube):
        n = f.domain.n
        ctilde = float(2 ** (n + 1)) if self.ctilde is None else float(self.ctilde)
        mean = f.abs_mean(cube)
        gamma = mean if self.gamma is None else float(self.gamma)
        if not ctilde > 2 ** n:
            raise DecompositionError('ratio too small')
        if gamma < mean:
            raise DecompositionError('threshold below mean')
        return replace(self, s=int(self.s), ctilde=ctilde, gamma=gamma)

    def threshold(self, k):
        return self.ctilde ** k * self.gamma

    @classmethod
    def from_dict(cls, dict_obj):
        return cls(s=int(dict_obj.get('s', 0)), ctilde=dict_obj.get('ctilde'), gamma=dict_obj.get('gamma'))


def _average_pyramid(block):
    """
    Averages of a (2^L,)*n block over its dyadic sub-blocks, coarsest first.
    """
    n = block.ndim
    levels = [np.asarray(block, dtype=float)]
    while levels[-1].shape[0] > 1:
        current = levels[-1]
        half = current.shape[0] // 2
        shaped = current.reshape(sum(((half, 2) for _ in range(n)), ()))
        levels.append(shaped.mean(axis=tuple(range(1, 2 * n, 2))))
    return levels[::-1]


def _upsample(array, factor):
    for axis in range(array.ndim):
        array = np.repeat(array, factor, axis=axis)
    return array


def _check_root(f, Q):
    if not isinstance(Q, DyadicCube):
        raise GridError(f'the decomposition cube must be dyadic, got {Q!r}')
    return Q.check(f.domain)


def dyadic_maximal(f: GridFunction, Q: DyadicCube) -> GridFunction:
    """
    M(x) = max over dyadic Q' in Q containing x of the mean of |f| on Q'; zero outside Q.
    """
    Q = _check_root(f, Q)
    box = Q.box(f.domain)
    pyramid = _average_pyramid(np.abs(f.values[box.slices()]))
    running = pyramid[0]
    for level in range(1, len(pyramid)):
        running = np.maximum(_upsample(running, 2), pyramid[level])
    values = np.zeros(f.domain.shape)
    values[box.slices()] = running
    return GridFunction(f.domain, values)


def _selected_cubes(pyramid, Q, threshold):
    """
    Maximal dyadic sub-cubes of Q whose mean of |f| exceeds the threshold.
    """
    cubes = []
    covered = np.zeros((1,) * pyramid[0].ndim, dtype=bool)
    for level, averages in enumerate(pyramid):
        if level > 0:
            covered = _upsample(covered, 2)
        hits = (averages > threshold) & ~covered
        for index in zip(*np.nonzero(hits)):
            cubes.append(DyadicCube(Q.level + level,
                                    tuple((i << level) + int(r) for i, r in zip(Q.index, index))))
        covered = covered | hits
    return cubes


def stopping_cubes(f: GridFunction, Q: DyadicCube, config: CZConfig, k: int) -> List[DyadicCube]:
    if k < 1:
        raise ParameterError(f'stopping level must be at least 1, got {k}')
    Q = _check_root(f, Q)
    config = config.resolve(f, Q)
    pyramid = _average_pyramid(np.abs(f.values[Q.box(f.domain).slices()]))
    return _selected_cubes(pyramid, Q, config.threshold(k))


@dataclass
class CZPiece:
    k: int
    j: int
    cube: DyadicCube
    function: PatchedFunction
    sup: float = 0.0
    moment_residual: float = 0.0
    bound: float = 0.0

    @property
    def margin(self):
        return self.sup / self.bound if self.bound > 0 else 0.0


@dataclass
class CZDecomposition:
    cube: DyadicCube
    config: CZConfig
    root_polynomial: SpacePolynomial
    levels: List[List[DyadicCube]] = field(default_factory=list)
    pieces: List[CZPiece] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.pieces)

    def level_union(self, domain, k):
        mask = np.zeros(domain.shape, dtype=bool)
        for cube in self.levels[k] if k < len(self.levels) else []:
            mask[cube.box(domain).slices()] = True
        return mask

    def reconstruction(self, domain):
        total = np.zeros(domain.shape)
        for piece in self.pieces:
            total += piece.function.cell_values()
        return total

    def margins(self):
        out = {}
        for piece in self.pieces:
            out[piece.k] = max(out.get(piece.k, 0.0), piece.margin)
        return out


def _labels(domain, cubes):
    labels = np.full(domain.shape, -1, dtype=int)
    for j, cube in enumerate(cubes):
        labels[cube.box(domain).slices()] = j
    return labels


def cz_decompose(f: GridFunction, Q: DyadicCube, config: CZConfig) -> CZDecomposition:
    d = f.domain
    Q = _check_root(f, Q)
    config = config.resolve(f, Q)
    s = config.s
    f = f.with_order(s)

    box = Q.box(d)
    pyramid = _average_pyramid(np.abs(f.values[box.slices()]))
    levels = [[Q]]
    k = 1
    while True:
        cubes = _selected_cubes(pyramid, Q, config.threshold(k))
        if not cubes:
            break
        levels.append(cubes)
        k += 1
    logger.info(f'CZ decomposition: {len(levels) - 1} stopping levels, '
                f'{sum(len(cubes) for cubes in levels)} cubes')

    projections = [[project(f, cube, s) for cube in cubes] for cubes in levels]
    C = projection_constant(s, d.n)
    pieces = []
    for k, cubes in enumerate(levels):
        children = levels[k + 1] if k + 1 < len(levels) else []
        child_projections = projections[k + 1] if k + 1 < len(levels) else []
        parents = _labels(d, cubes)
        inner = np.zeros(d.shape, dtype=bool)
        for child in children:
            inner[child.box(d).slices()] = True
        grouped = {j: [] for j in range(len(cubes))}
        for child, P_child in zip(children, child_projections):
            grouped[int(parents[child.box(d).start])].append(Patch(child.box(d), P_child))
        for j, cube in enumerate(cubes):
            cube_box = cube.box(d)
            values = np.zeros(d.shape)
            mask = np.zeros(d.shape, dtype=bool)
            mask[cube_box.slices()] = True
            mask &= ~inner
            values[mask] = f.values[mask]
            patches = [Patch(cube_box, -projections[k][j])] + grouped[j]
            function = PatchedFunction(d, values, patches)
            pieces.append(CZPiece(k=k, j=j, cube=cube, function=function,
                                  sup=function.sup_norm(),
                                  moment_residual=float(np.max(np.abs(function.local_moments(cube, s)))),
                                  bound=2 ** (d.n + 1) * C * config.threshold(k + 1)))
    pieces.sort(key=lambda piece: (piece.k, piece.cube.level, piece.cube.index))

    decomposition = CZDecomposition(cube=Q, config=config, root_polynomial=projections[0][0],
                                    levels=levels, pieces=pieces)
    verify_decomposition(f, decomposition)
    return decomposition


def verify_decomposition(f: GridFunction, decomposition: CZDecomposition):
    """
    Reconstruction, vanishing moments, sup bounds and level-set exactness;
    raises DecompositionError naming the first violated conclusion.
    """
    d = f.domain
    Q = decomposition.cube
    box = Q.box(d)
    config = decomposition.config
    scale = max(float(np.max(np.abs(f.values[box.slices()]))), np.finfo(float).tiny)

    target = np.zeros(d.shape)
    target[box.slices()] = f.values[box.slices()] - decomposition.root_polynomial.cell_averages(d, box)
    residual = float(np.max(np.abs(decomposition.reconstruction(d) - target)))
    if residual > RECONSTRUCTION_TOL * scale:
        raise DecompositionError(f'reconstruction residual {residual:.3e} exceeds {RECONSTRUCTION_TOL * scale:.3e}')

    maximal = dyadic_maximal(f, Q).values
    inside = np.zeros(d.shape, dtype=bool)
    inside[box.slices()] = True
    for k in range(1, len(decomposition.levels) + 1):
        level_set = inside & (maximal > config.threshold(k))
        if not np.array_equal(level_set, decomposition.level_union(d, k)):
            raise DecompositionError(f'stopping cubes of level {k} differ from the maximal-function level set')

    for piece in decomposition.pieces:
        if piece.moment_residual > MOMENT_TOL * scale:
            raise DecompositionError(f'piece ({piece.k}, {piece.cube}) has moment residual '
                                     f'{piece.moment_residual:.3e}')
        if piece.sup > piece.bound * (1 + SUP_TOL):
            raise DecompositionError(f'piece ({piece.k}, {piece.cube}) has sup {piece.sup:.6g} '
                                     f'above the bound {piece.bound:.6g}')

    decomposition.diagnostics = {'reconstruction_residual': residual, 'scale': scale,
                                 'max_moment_residual': max(piece.moment_residual for piece in decomposition.pieces),
                                 'margins': decomposition.margins()}
    return decomposition.diagnostics


@dataclass(frozen=True)
class TailBound:
    lhs: float
    rhs: float
    passed: bool


def tail_bound_check(f: GridFunction, Q0: DyadicCube, ctilde: float, w: float, gamma: float) -> TailBound:
    """
    sum_{k>=1} mu_k^w |{|f| > mu_k}| against ||f||_w^w / (1 - ctilde^{-w}), mu_k = ctilde^k gamma.
    """
    if not w >= 1:
        raise ParameterError(f'w must be at least 1, got {w}')
    if not ctilde > 1:
        raise ParameterError(f'ctilde must exceed 1, got {ctilde}')
    if not gamma > 0:
        raise ParameterError(f'gamma must be positive, got {gamma}')
    d = f.domain
    absolute = np.abs(f.block(Q0)).ravel()
    top = float(np.max(absolute)) if absolute.size else 0.0

    lhs = 0.0
    k = 1
    while ctilde ** k * gamma < top:
        mu = ctilde ** k * gamma
        lhs += mu ** w * np.count_nonzero(absolute > mu) * d.cell_measure
        k += 1
    rhs = float(np.sum(absolute ** w) * d.cell_measure) / (1.0 - ctilde ** (-w))
    return TailBound(lhs=float(lhs), rhs=rhs, passed=bool(lhs <= rhs * (1 + 1e-12)))
