# -*- coding: utf-8 -*-
'''
Seeded test-function generators for `gen` and the verify suites, plus random
atoms and polymers on dyadic cubes.
'''

import math
import numpy as np

from JNSpace.Grids.dyadic_grid import DomainSpec, DyadicCube, GridFunction, cube_children
from JNSpace.Polynomials.patched_function import PatchedFunction
from JNSpace.Polynomials.poly_projection import annihilate_moments
from JNSpace.Utils.errors import ParameterError


def constant(domain: DomainSpec, rng, a=1.0, **kwargs):
    return np.full(domain.shape, float(a))


def spike(domain: DomainSpec, rng, scale=1.0, **kwargs):
    """
    Mass at the first cell; the domain mean of |f| equals `scale`.
    """
    values = np.zeros(domain.shape)
    values[(0,) * domain.n] = domain.cell_count * float(scale)
    return values


def step(domain: DomainSpec, rng, a=1.0, **kwargs):
    if domain.K < 1:
        raise ParameterError('step needs depth K >= 1')
    values = np.zeros(domain.shape)
    values[:domain.cells_per_axis // 2] = float(a)
    return values


def uniform(domain: DomainSpec, rng, scale=1.0, **kwargs):
    return rng.uniform(-1.0, 1.0, size=domain.shape) * float(scale)


def haar_sum(domain: DomainSpec, rng, terms=8, **kwargs):
    """
    Sum of random-signed Haar wavelets on random cubes above the cell level.
    """
    if domain.K < 1:
        raise ParameterError('haar-sum needs depth K >= 1')
    values = np.zeros(domain.shape)
    for _ in range(int(terms)):
        level = int(rng.integers(0, domain.K))
        index = tuple(int(i) for i in rng.integers(0, 1 << level, size=domain.n))
        box = DyadicCube(level, index).box(domain)
        axis = int(rng.integers(0, domain.n))
        half = box.size // 2
        wavelet = np.ones((box.size,) * domain.n)
        lower = [slice(None)] * domain.n
        lower[axis] = slice(0, half)
        wavelet[tuple(lower)] = -1.0
        values[box.slices()] += rng.choice((-1.0, 1.0)) * wavelet
    return values


def log_sample(domain: DomainSpec, rng, **kwargs):
    """
    |log |x - x0|| at the cell centers, x0 a random cell corner.
    """
    corner = rng.integers(0, domain.cells_per_axis + 1, size=domain.n) * domain.cell_side
    axes = [(np.arange(domain.cells_per_axis) + 0.5) * domain.cell_side - c for c in corner]
    grids = np.meshgrid(*axes, indexing='ij')
    distance = np.sqrt(sum(g ** 2 for g in grids))
    return np.abs(np.log(distance))


GENERATORS = {
    'constant': constant,
    'spike': spike,
    'step': step,
    'random': uniform,
    'haar-sum': haar_sum,
    'log-sample': log_sample,
}


def generate(kind, domain: DomainSpec, seed=0, order=0, **options) -> GridFunction:
    assert kind in GENERATORS, f'Could not find {kind} in generators'
    rng = np.random.default_rng(seed)
    return GridFunction(domain, GENERATORS[kind](domain, rng, **options), order=order)


def random_function(domain: DomainSpec, rng, order=0) -> GridFunction:
    """
    Random mixture used by the suites: uniform noise, sometimes plus a step,
    a Haar sum or a spike, at a random scale.
    """
    values = uniform(domain, rng)
    if domain.K >= 1 and rng.random() < 0.3:
        values = values + step(domain, rng, a=rng.uniform(-3.0, 3.0))
    if domain.K >= 1 and rng.random() < 0.3:
        values = values + haar_sum(domain, rng, terms=int(rng.integers(1, 6)))
    if rng.random() < 0.2:
        values = values + spike(domain, rng, scale=rng.uniform(0.1, 1.0))
    return GridFunction(domain, values * math.exp(rng.uniform(-2.0, 2.0)), order=order)


def random_antichain(domain: DomainSpec, rng, split=0.6, keep=0.7):
    """
    Random set of pairwise disjoint dyadic cubes by random descent from the root.
    """
    out, stack = [], [domain.root()]
    while stack:
        cube = stack.pop()
        if cube.level < domain.K and rng.random() < split:
            stack.extend(cube_children(cube, domain)[::-1])
        elif rng.random() < keep:
            out.append(cube)
    return out or [domain.root()]


def random_atom_values(domain: DomainSpec, cube, params, rng):
    """
    Grid values of a random (v, w, s) atom on the cube: moments annihilated
    when the side is below c0, size scaled into (0.2, 1] of the bound.
    Cubes with no more cells than monomials of degree <= s only carry the zero atom.
    """
    box = cube.box(domain)
    block = rng.uniform(-1.0, 1.0, size=(box.size,) * domain.n)
    values = np.zeros(domain.shape)
    values[box.slices()] = block
    if box.side(domain) < params.c0:
        values = annihilate_moments(values, domain, box, params.s)
        # only roundoff survives the fit
        if np.linalg.norm(values) <= 1e-12 * np.linalg.norm(block):
            return np.zeros(domain.shape)
    size = PatchedFunction(domain, values).lebesgue_norm(params.w, box)
    if size == 0.0:
        return values
    exponent = (0.0 if math.isinf(params.w) else 1.0 / params.w) - 1.0 / params.v - params.alpha
    return values * rng.uniform(0.2, 1.0) * box.measure(domain) ** exponent / size
