# -*- coding: utf-8 -*-
'''
Local atoms, polymers and atomic decompositions of the Hardy-kind space,
their pairing with grid functions, certified upper and lower bounds of the hk
norm, the refinement of w-atoms into infinity-atoms, and the extremal test
decomposition of a jn packing.
'''

import math
import logging
import numpy as np

from dataclasses import dataclass, field, replace
from typing import List
from scipy.special import logsumexp

from JNSpace.Grids.dyadic_grid import DyadicCube, GridFunction, as_box, enumerate_level
from JNSpace.Norms.oscillation_norms import NormParams, Packing, dyadic_norm, lebesgue_norm, snap_dyadic
from JNSpace.Polynomials.patched_function import Patch, PatchedFunction
from JNSpace.Polynomials.poly_projection import localized_project, projection_constant
from JNSpace.Decompositions.cz_decomposition import CZConfig, cz_decompose
from JNSpace.Experiments.reports import check
from JNSpace.Utils.errors import DecompositionError, GridError, ParameterError


logger = logging.getLogger(__name__)

SIZE_TOL = 1e-12
MOMENT_TOL = 1e-9


def conjugate(x):
    if math.isinf(x):
        return 1.0
    if x == 1:
        return math.inf
    return x / (x - 1.0)


@dataclass(frozen=True)
class AtomParams:
    v: float = 2.0
    w: float = math.inf
    s: int = 0
    alpha: float = 0.0
    c0: float = 1.0

    def __post_init__(self):
        if not (self.v > 1 and math.isfinite(self.v)):
            raise ParameterError(f'v must lie in (1, inf), got {self.v}')
        if not self.w > 1:
            raise ParameterError(f'w must lie in (1, inf], got {self.w}')
        if int(self.s) != self.s or self.s < 0:
            raise ParameterError(f's must be a non-negative integer, got {self.s}')
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ParameterError(f'alpha must lie in [0, inf), got {self.alpha}')
        if not (self.c0 > 0 and math.isfinite(self.c0)):
            raise ParameterError(f'c0 must be positive, got {self.c0}')
        object.__setattr__(self, 's', int(self.s))
        object.__setattr__(self, 'c0', snap_dyadic(self.c0))

    @property
    def v_conj(self):
        return conjugate(self.v)

    @property
    def w_conj(self):
        return conjugate(self.w)

    def replace(self, **changes):
        return replace(self, **changes)

    def dual_norm_params(self):
        """
        Indices (v', w', s, alpha, c0) of the jn norm this atom family pairs with.
        """
        return NormParams(p=self.v_conj, q=self.w_conj, s=self.s, alpha=self.alpha, c0=self.c0)

    @classmethod
    def from_norm_params(cls, params: NormParams):
        return cls(v=conjugate(params.p), w=conjugate(params.q), s=params.s, alpha=params.alpha, c0=params.c0)

    @classmethod
    def from_dict(cls, dict_obj):
        keys = ('v', 'w', 's', 'alpha', 'c0')
        return cls(**{key: float(dict_obj[key]) if key != 's' else int(dict_obj[key])
                      for key in keys if key in dict_obj and dict_obj[key] is not None})


class LocalAtom:

    def __init__(self, cube, function, params: AtomParams, tag='grid'):
        self.function = PatchedFunction.from_grid(function)
        self.domain = self.function.domain
        self.cube = cube
        self.box = as_box(cube, self.domain)
        self.params = params
        self.tag = tag

    def __repr__(self):
        return f'<LocalAtom: {self.cube}, tag={self.tag}>'

    @property
    def side(self):
        return self.box.side(self.domain)

    @property
    def measure(self):
        return self.box.measure(self.domain)

    @property
    def needs_moments(self):
        return self.side < self.params.c0

    def size_bound(self):
        p = self.params
        exponent = (0.0 if math.isinf(p.w) else 1.0 / p.w) - 1.0 / p.v - p.alpha
        return self.measure ** exponent

    def pair(self, f: GridFunction) -> float:
        return self.function.pair(f)

    def scaled(self, c):
        return LocalAtom(self.cube, self.function.scaled(c), self.params, self.tag)


@dataclass
class AtomReport:
    valid: bool
    support_ok: bool
    size_ratio: float
    moment_residual: float
    moments_required: bool

    def to_dict(self):
        return {'valid': self.valid, 'support_ok': self.support_ok, 'size_ratio': self.size_ratio,
                'moment_residual': self.moment_residual, 'moments_required': self.moments_required}


def validate_atom(a: LocalAtom) -> AtomReport:
    support_ok = a.function.support_inside(a.box)
    size = a.function.lebesgue_norm(a.params.w, a.box)
    bound = a.size_bound()
    size_ratio = size / bound if bound > 0 else math.inf
    moment_residual = 0.0
    moments_ok = True
    if a.needs_moments:
        moments = a.function.local_moments(a.box, a.params.s)
        moment_residual = float(np.max(np.abs(moments)))
        moments_ok = moment_residual <= MOMENT_TOL * max(a.function.sup_norm(a.box), np.finfo(float).tiny)
    valid = support_ok and size_ratio <= 1.0 + SIZE_TOL and moments_ok
    return AtomReport(valid=bool(valid), support_ok=bool(support_ok), size_ratio=float(size_ratio),
                      moment_residual=moment_residual, moments_required=a.needs_moments)


class Polymer:
    """
    Coefficients and atoms on interior pairwise disjoint cubes.
    """

    def __init__(self, terms=None, v=None):
        self.terms = [(float(c), atom) for c, atom in (terms or [])]
        if v is None:
            v = self.terms[0][1].params.v if self.terms else 2.0
        self.v = float(v)
        boxes = [atom.box for _, atom in self.terms]
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if boxes[i].overlaps(boxes[j]):
                    raise DecompositionError(f'polymer atoms overlap on {boxes[i]} and {boxes[j]}')

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f'<Polymer: {len(self.terms)} atoms, budget={self.budget:.6g}>'

    @property
    def coefficients(self):
        return np.array([c for c, _ in self.terms])

    @property
    def budget(self):
        if not self.terms:
            return 0.0
        c = np.abs(self.coefficients)
        top = float(np.max(c))
        if top == 0.0:
            return 0.0
        return float(top * np.sum((c / top) ** self.v) ** (1.0 / self.v))

    def scaled(self, c):
        return Polymer([(coefficient * c, atom) for coefficient, atom in self.terms], self.v)

    def cell_values(self, domain):
        total = np.zeros(domain.shape)
        for c, atom in self.terms:
            total += c * atom.function.cell_values()
        return total

    def pair(self, f: GridFunction, strict=True):
        total = 0.0
        for c, atom in self.terms:
            if strict and not isinstance(atom.cube, DyadicCube):
                raise GridError(f'non-dyadic atom cube {atom.cube} in strict mode')
            total += c * atom.pair(f)
        return total


@dataclass
class AtomicDecomposition:
    polymers: List[Polymer] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.polymers)

    @property
    def budget(self):
        return float(sum(polymer.budget for polymer in self.polymers))

    def atoms(self):
        for polymer in self.polymers:
            for c, atom in polymer.terms:
                yield c, atom

    def scaled(self, c):
        return AtomicDecomposition([polymer.scaled(c) for polymer in self.polymers], dict(self.notes))

    def cell_values(self, domain):
        total = np.zeros(domain.shape)
        for polymer in self.polymers:
            total += polymer.cell_values(domain)
        return total


def pair(d: AtomicDecomposition, f: GridFunction, strict=True) -> float:
    """
    sum over polymers and atoms of lambda * integral of a * f.
    """
    return float(sum(polymer.pair(f, strict) for polymer in d.polymers))


def hk_upper_bound(d: AtomicDecomposition) -> float:
    return d.budget


def hk_lower_bound(d: AtomicDecomposition, test_functions, params: NormParams) -> float:
    """
    max over the test functions of |pair(d, f)| / jn(f).
    """
    params = params.replace(variant='localized')
    best, any_nonzero = 0.0, False
    for f in test_functions:
        norm = dyadic_norm(f, params)[0]
        if norm <= 0.0:
            continue
        any_nonzero = True
        best = max(best, abs(pair(d, f)) / norm)
    if not any_nonzero:
        raise DecompositionError('all test functions have zero jn norm')
    return best


def h1_upper_bound(d: AtomicDecomposition, Q0, v: float, w: float):
    """
    Returns (fine, coarse, fine <= coarse) with fine = sum |Q_ij|^{1-1/v} |lambda_ij|
    and coarse = |Q0|^{1-1/v} times the hk budget in exponent v.
    """
    if not w > 1:
        raise ParameterError(f'w must exceed 1, got {w}')
    fine, budget, measure = 0.0, 0.0, 0.0
    for polymer in d.polymers:
        for c, atom in polymer.terms:
            root = as_box(Q0, atom.domain)
            if not root.contains(atom.box):
                raise GridError(f'atom cube {atom.cube} is not inside {Q0}')
            measure = root.measure(atom.domain)
            fine += atom.measure ** (1.0 - 1.0 / v) * abs(c)
        budget += Polymer(polymer.terms, v).budget
    coarse = measure ** (1.0 - 1.0 / v) * budget
    return float(fine), float(coarse), bool(fine <= coarse * (1 + 1e-12))


def _infinity_params(params: AtomParams):
    return params.replace(w=math.inf)


def refine_atoms(g: Polymer, config: CZConfig) -> AtomicDecomposition:
    """
    Rewrites every w-atom of the polymer as a sum of infinity-atoms built from
    its Calderon-Zygmund pieces: one polymer per stopping level.
    """
    if all(math.isinf(atom.params.w) for _, atom in g.terms):
        logger.warning('refine_atoms: atoms already have w = inf, passed through')
        return AtomicDecomposition([g], {'pass_through': True, 'budget_ratio': 1.0})

    levels = {}
    skipped = 0
    for coefficient, atom in g.terms:
        p = atom.params
        domain = atom.domain
        n = domain.n
        if not atom.function.is_grid:
            raise DecompositionError('refine_atoms needs grid-valued atoms')
        if not isinstance(atom.cube, DyadicCube):
            raise GridError(f'refine_atoms needs dyadic atom cubes, got {atom.cube}')
        a = atom.function.to_grid(order=p.s)
        if not np.any(a.values):
            logger.warning(f'refine_atoms: zero atom on {atom.cube} skipped')
            skipped += 1
            continue

        gamma_l = atom.function.lebesgue_norm(p.w, atom.box) * atom.measure ** (-1.0 / p.w)
        gamma = max(gamma_l, a.abs_mean(atom.box))
        cz = cz_decompose(a, atom.cube, CZConfig(s=p.s, ctilde=config.ctilde, gamma=gamma))
        C0 = cz.config.ctilde
        C = projection_constant(p.s, n)
        target = _infinity_params(p)

        for piece in cz.pieces:
            if piece.k == 0:
                # A_{0,1} + P_Q a: drop the -P_Q patch
                function = PatchedFunction(domain, piece.function.values, piece.function.patches[1:])
                factor = 2 ** (n + 2) * C * C0
            else:
                function = piece.function
                factor = 2 ** (n + 1) * C * C0 ** (piece.k + 1) * gamma * piece.cube.measure(domain) ** (1.0 / p.v + p.alpha)
            refined = LocalAtom(piece.cube, function.scaled(1.0 / factor), target, tag='cz-piece')
            if refined.function.sup_norm() == 0.0:
                continue
            report = validate_atom(refined)
            if not report.valid:
                raise DecompositionError(f'refined atom on {piece.cube} is not a (v, inf, s) atom: {report.to_dict()}')
            levels.setdefault(piece.k, []).append((coefficient * factor, refined))

    polymers = [Polymer(levels[k], g.v) for k in sorted(levels)]
    decomposition = AtomicDecomposition(polymers)
    decomposition.notes = {'pass_through': False, 'skipped': skipped,
                           'budget_ratio': decomposition.budget / g.budget if g.budget > 0 else 0.0}
    logger.info(f'refine_atoms: {sum(len(p) for p in polymers)} atoms in {len(polymers)} polymers')
    return decomposition


def _residual_values(f, box, params):
    d = f.domain
    P = localized_project(f, box, params)
    block = f.values[box.slices()]
    return block if P.is_zero() else block - P.cell_averages(d, box)


def dual_optimizer(f: GridFunction, packing: Packing, params: NormParams):
    """
    Test decomposition g built from the Holder extremals of f - P_{Q,c0} f on
    the packing cubes. Returns (g, pair(g, f) / hk_upper_bound(g)).
    """
    params = params.replace(variant='localized')
    if not packing.cubes:
        raise DecompositionError('zero oscillation on every cube, the dual ratio is undefined')
    d = f.domain
    f = f.with_order(params.s)
    atom_params = AtomParams.from_norm_params(params)
    C = projection_constant(params.s, d.n)
    p, q = params.p, params.q

    profiles, log_b = [], []
    for cube in packing.cubes:
        box = as_box(cube, d)
        h = _residual_values(f, box, params)
        top = float(np.max(np.abs(h)))
        if top == 0.0:
            continue
        scaled = h / top
        mean_q = float(np.mean(np.abs(scaled) ** q))
        # sign(h) |h|^{q-1} / (mean |h|^q)^{(q-1)/q}, both scaled by top
        a = np.sign(scaled) * np.abs(scaled) ** (q - 1.0) / mean_q ** ((q - 1.0) / q)
        kappa = 1.0 + C if box.side(d) < params.c0 else 1.0
        osc = top * mean_q ** (1.0 / q) * box.measure(d) ** (-params.alpha)
        profiles.append((cube, box, a, kappa))
        log_b.append(math.log(box.measure(d)) / p + math.log(osc) - math.log(kappa))
    if not profiles:
        raise DecompositionError('zero oscillation on every cube, the dual ratio is undefined')

    log_b = np.asarray(log_b)
    log_mu = (p - 1.0) * log_b - logsumexp(p * log_b) / atom_params.v

    terms = []
    for (cube, box, a, kappa), lm in zip(profiles, log_mu):
        values = np.zeros(d.shape)
        values[box.slices()] = a
        profile = GridFunction(d, values, order=params.s)
        P = localized_project(profile, box, params)
        patches = [] if P.is_zero() else [Patch(box, -P)]
        scale = box.measure(d) ** (-1.0 / atom_params.v - params.alpha) / kappa
        atom = LocalAtom(cube, PatchedFunction(d, values, patches).scaled(scale), atom_params, tag='sign-power')
        report = validate_atom(atom)
        if not report.valid:
            raise DecompositionError(f'extremal atom on {cube} is not valid: {report.to_dict()}')
        terms.append((float(np.exp(lm)), atom))

    g = AtomicDecomposition([Polymer(terms, atom_params.v)])
    ratio = pair(g, f, strict=False) / hk_upper_bound(g)
    value = packing.value
    if ratio < value / (4.0 * (1.0 + C)) * (1 - 1e-12):
        raise DecompositionError(f'dual ratio {ratio:.6g} below {value / (4.0 * (1.0 + C)):.6g}')
    return g, ratio


def tile_decomposition(g: GridFunction, tiles, params: AtomParams) -> AtomicDecomposition:
    """
    One atom per tile: g 1_R normalized to the size bound of R. Tiles must
    have side >= c0 so that no moment condition applies.
    """
    d = g.domain
    terms = []
    for tile in tiles:
        box = as_box(tile, d)
        if box.side(d) < params.c0:
            raise ParameterError(f'tile {tile} is smaller than c0 = {params.c0}')
        values = np.zeros(d.shape)
        values[box.slices()] = g.values[box.slices()]
        local = PatchedFunction(d, values)
        size = local.lebesgue_norm(params.w, box)
        if size == 0.0:
            continue
        atom = LocalAtom(tile, local, params, tag='indicator')
        bound = atom.size_bound()
        terms.append((size / bound, atom.scaled(bound / size)))
    return AtomicDecomposition([Polymer(terms, params.v)])


def hk_lebesgue_check(d: AtomicDecomposition, Q0, v: float, w: float):
    """
    ||sum lambda a||_w <= |Q0|^{1/w - 1/v} * budget, for w <= v and alpha = 0.
    """
    if w > v:
        raise ParameterError(f'the Lebesgue bound needs w <= v, got w={w}, v={v}')
    atoms = list(d.atoms())
    if not atoms:
        return [check('hk_lebesgue', 0.0, 0.0, anchor='hk on a cube is Lw')]
    domain = atoms[0][1].domain
    values = d.cell_values(domain)
    norm = lebesgue_norm(GridFunction(domain, values), w)
    measure = as_box(Q0, domain).measure(domain)
    return [check('hk_lebesgue', norm, measure ** (1.0 / w - 1.0 / v) * hk_upper_bound(d),
                  anchor='hk on a cube is Lw')]


def atomize(f: GridFunction, params: AtomParams) -> AtomicDecomposition:
    """
    Canonical decomposition of f over the dyadic tiling at the finest level
    whose side is still >= c0.
    """
    d = f.domain
    if d.side < params.c0:
        raise ParameterError(f'atomize needs c0 <= the domain side {d.side}, got {params.c0}')
    level = min(d.K, d.m - int(math.log2(params.c0)))
    return tile_decomposition(f, enumerate_level(d, level), params)
