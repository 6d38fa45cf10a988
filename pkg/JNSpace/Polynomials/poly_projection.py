# -*- coding: utf-8 -*-
'''
Moment-orthogonal polynomial projection on cubes.

Polynomials of total degree <= s live in the centered, scaled monomial basis
u^beta, u = (x - center(Q)) / side(Q). The Gram matrix of that basis on the
reference cube [-1/2, 1/2]^n is analytic, so a projection is one small
symmetric positive definite solve.
'''

import math
import logging
import itertools
import numpy as np
import scipy.linalg

from functools import lru_cache
from dataclasses import dataclass
from numpy.polynomial import legendre

from JNSpace.Grids.dyadic_grid import (GridFunction, as_box, multi_indices,
                                       unit_cell_moments)
from JNSpace.Utils.errors import MomentOrderError, ParameterError, ProjectionError


logger = logging.getLogger(__name__)


def reference_moment(k):
    # average of u^k over [-1/2, 1/2]
    return 0.0 if k % 2 else 0.5 ** k / (k + 1)


@lru_cache(maxsize=None)
def reference_gram(n, s):
    indices = multi_indices(n, s)
    G = np.empty((len(indices), len(indices)))
    for a, beta in enumerate(indices):
        for b, gamma in enumerate(indices):
            G[a, b] = np.prod([reference_moment(x + y) for x, y in zip(beta, gamma)])
    G.setflags(write=False)
    return G


@lru_cache(maxsize=None)
def _gram_factor(n, s):
    try:
        return scipy.linalg.cho_factor(reference_gram(n, s), lower=True)
    except np.linalg.LinAlgError as e:
        raise ProjectionError(f'singular Gram system for n={n}, s={s}: {e}')


def solve_gram(n, s, moments):
    """
    Coefficients (multi_indices order) of the polynomial whose normalized
    moments on the reference cube equal `moments`. `moments` may carry extra
    trailing axes, one column per cube.
    """
    factor = _gram_factor(n, s)
    coefficients = scipy.linalg.cho_solve(factor, np.asarray(moments, dtype=float))
    if not np.all(np.isfinite(coefficients)):
        raise ProjectionError('non-finite projection coefficients')
    return coefficients


class SpacePolynomial:
    """
    Element of P_s anchored on a cube frame (lower corner `origin`, `side`).
    Coefficients are stored densely, shape (degree+1,)*n, entries with
    |beta| > degree are zero.
    """

    def __init__(self, coefficients, origin, side, degree=None):
        coefficients = np.array(coefficients, dtype=float)
        self.n = coefficients.ndim
        if degree is None:
            degree = coefficients.shape[0] - 1
        self.degree = int(degree)
        self.coefficients = coefficients
        self.origin = np.asarray(origin, dtype=float).reshape(self.n)
        self.side = float(side)

    @classmethod
    def zero(cls, n, degree, origin, side):
        return cls(np.zeros((degree + 1,) * n), origin, side, degree)

    @classmethod
    def from_vector(cls, n, s, vector, origin, side):
        coefficients = np.zeros((s + 1,) * n)
        for beta, c in zip(multi_indices(n, s), vector):
            coefficients[beta] = c
        return cls(coefficients, origin, side, s)

    @classmethod
    def from_box(cls, n, s, vector, box, domain):
        return cls.from_vector(n, s, vector, box.origin(domain), box.side(domain))

    def __repr__(self):
        return f'<SpacePolynomial: n={self.n} degree={self.degree} origin={self.origin.tolist()} side={self.side}>'

    @property
    def center(self):
        return self.origin + 0.5 * self.side

    def vector(self):
        return np.array([self.coefficients[beta] for beta in multi_indices(self.n, self.degree)])

    def is_zero(self):
        return not np.any(self.coefficients)

    def same_frame(self, other):
        return self.side == other.side and np.array_equal(self.origin, other.origin)

    def _padded(self, degree):
        if degree == self.degree:
            return self.coefficients
        out = np.zeros((degree + 1,) * self.n)
        out[(slice(0, self.degree + 1),) * self.n] = self.coefficients
        return out

    def __add__(self, other):
        if not self.same_frame(other):
            other = other.rebase(self.origin, self.side)
        degree = max(self.degree, other.degree)
        return SpacePolynomial(self._padded(degree) + other._padded(degree), self.origin, self.side, degree)

    def __mul__(self, scalar):
        return SpacePolynomial(self.coefficients * float(scalar), self.origin, self.side, self.degree)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def evaluate(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        u = (points - self.center) / self.side
        result = np.zeros(points.shape[0])
        for beta in multi_indices(self.n, self.degree):
            c = self.coefficients[beta]
            if c != 0.0:
                result += c * np.prod(u ** np.asarray(beta), axis=1)
        return result

    def cell_averages(self, domain, cube):
        """
        Exact average of the polynomial over every cell of the cube, shaped
        like the cube's block of grid values.
        """
        box = as_box(cube, domain)
        h = domain.cell_side
        k = np.arange(self.degree + 1)
        T = self.coefficients
        for i in range(self.n):
            edges = (box.start[i] + np.arange(box.size + 1)) * h
            U = (edges - self.center[i]) / self.side
            powers = U[None, :] ** (k[:, None] + 1)
            A = (self.side / h) * (powers[:, 1:] - powers[:, :-1]) / (k[:, None] + 1)
            T = np.tensordot(T, A, axes=([0], [0]))
        return T

    def rebase(self, origin, side):
        """
        Same polynomial expressed in another cube frame.
        """
        origin = np.asarray(origin, dtype=float).reshape(self.n)
        side = float(side)
        a = side / self.side
        b = (origin + 0.5 * side - self.center) / self.side
        d = self.degree
        C = self.coefficients
        for i in range(self.n):
            T = np.zeros((d + 1, d + 1))
            for k in range(d + 1):
                for j in range(k + 1):
                    T[j, k] = math.comb(k, j) * a ** j * b[i] ** (k - j)
            C = np.moveaxis(np.tensordot(T, C, axes=([1], [i])), 0, i)
        return SpacePolynomial(C, origin, side, d)

    def sup_on_frame(self, resolution=65):
        axis = np.linspace(0.0, 1.0, resolution) * self.side
        points = np.array(list(itertools.product(axis, repeat=self.n))) + self.origin
        return float(np.max(np.abs(self.evaluate(points))))


def project_moments(moments, n, s, origin, side) -> SpacePolynomial:
    """
    Projection from explicit normalized moments (average of g * u^beta over the cube).
    """
    coefficients = solve_gram(n, s, moments)
    return SpacePolynomial.from_vector(n, s, coefficients, origin, side)


def project(f: GridFunction, cube, s: int) -> SpacePolynomial:
    """
    The unique P in P_s(Q) with integral over Q of (f - P) x^beta = 0 for all |beta| <= s.
    """
    if int(s) != s or s < 0:
        raise ParameterError(f'degree must be a non-negative integer, got {s}')
    if s > f.order:
        raise MomentOrderError('moment order not prepared')
    domain = f.domain
    box = as_box(cube, domain)
    return project_moments(f.local_moments(box, s), domain.n, s, box.origin(domain), box.side(domain))


def localized_project(f: GridFunction, cube, params) -> SpacePolynomial:
    """
    project(f, Q, s) on cubes with side < c0, the zero polynomial otherwise.
    """
    domain = f.domain
    box = as_box(cube, domain)
    if box.side(domain) < params.c0:
        return project(f, box, params.s)
    return SpacePolynomial.zero(domain.n, params.s, box.origin(domain), box.side(domain))


def monomial_cell_matrix(n, s, size):
    """
    Rows: cells of a cube of `size`^n cells (row-major); columns: averages of
    u^beta over the cell, beta in multi_indices order.
    """
    A = unit_cell_moments(size, s) * size
    columns = []
    for beta in multi_indices(n, s):
        column = np.ones(())
        for b in beta:
            column = np.multiply.outer(column, A[b])
        columns.append(column.ravel())
    return np.stack(columns, axis=1)


def annihilate_moments(values, domain, cube, s):
    """
    Piecewise-constant part of `values` on the cube whose integrals against
    every monomial of degree <= s vanish; zero outside the cube.
    """
    box = as_box(cube, domain)
    values = np.asarray(values, dtype=float).reshape(domain.shape)
    block = values[box.slices()]
    M = monomial_cell_matrix(domain.n, s, box.size)
    fit, _, _, _ = scipy.linalg.lstsq(M, block.ravel())
    residual = block.ravel() - M @ fit
    out = np.zeros(domain.shape)
    out[box.slices()] = residual.reshape(block.shape)
    return out


def _reference_points(n, resolution):
    axis = np.linspace(-0.5, 0.5, resolution)
    return np.array(list(itertools.product(axis, repeat=n)))


def _monomial_matrix(points, n, s):
    return np.stack([np.prod(points ** np.asarray(beta), axis=1) for beta in multi_indices(n, s)], axis=1)


@lru_cache(maxsize=None)
def projection_constant(s, n, sampling_resolution=64) -> float:
    """
    sup over the reference cube of the reproducing kernel of P_s for the
    normalized measure. The kernel is positive semidefinite, so the sup of
    |K(x, y)| is attained on the diagonal.
    """
    if sampling_resolution < 64:
        raise ParameterError('sampling_resolution must be at least 64 points per axis')
    points = _reference_points(n, sampling_resolution)
    M = _monomial_matrix(points, n, s)
    solved = solve_gram(n, s, M.T)
    diagonal = np.einsum('ij,ji->i', M, solved)
    return float(max(1.0, np.max(diagonal)))


@lru_cache(maxsize=None)
def _composite_gauss(n, panels, nodes):
    x, w = legendre.leggauss(nodes)
    edges = np.linspace(-0.5, 0.5, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    axis_points = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    axis_weights = (half[:, None] * w[None, :]).ravel()
    points = np.array(list(itertools.product(axis_points, repeat=n)))
    weights = np.ones(())
    for _ in range(n):
        weights = np.multiply.outer(weights, axis_weights)
    return points, weights.ravel()


def poly_norm_ratio(vector, n, s, q, sampling_resolution=65):
    """
    sup|P| / (mean |P|^q)^{1/q} on the reference cube for the polynomial with
    the given coefficients; None for the zero polynomial.
    """
    panels, nodes = (16, 6) if n <= 2 else (8, 4)
    quad_points, quad_weights = _composite_gauss(n, panels, nodes)
    grid_points = _reference_points(n, sampling_resolution)
    vector = np.asarray(vector, dtype=float)
    quad_values = np.abs(_monomial_matrix(quad_points, n, s) @ vector)
    grid_values = np.abs(_monomial_matrix(grid_points, n, s) @ vector)
    sup = max(np.max(quad_values), np.max(grid_values))
    if sup == 0.0:
        return None
    # both sides scaled by sup
    mean = float(np.dot(quad_weights, (quad_values / sup) ** q)) ** (1.0 / q)
    return 1.0 / mean if mean > 0 else None


def poly_norm_ratio_constant(s, n, q, trials=100, seed=0, sampling_resolution=65) -> float:
    """
    Empirical lower estimate of the constant comparing sup|P| with (mean |P|^q)^{1/q}.
    """
    if trials < 100:
        raise ParameterError('trials must be at least 100')
    if q < 1:
        raise ParameterError(f'q must be at least 1, got {q}')
    rng = np.random.default_rng(seed)
    dim = len(multi_indices(n, s))
    best = 1.0
    for _ in range(trials):
        ratio = poly_norm_ratio(rng.standard_normal(dim), n, s, q, sampling_resolution)
        if ratio is None:
            logger.warning('zero polynomial sampled, skipped')
            continue
        best = max(best, ratio)
    return best


@dataclass(frozen=True)
class ProjectionConstants:
    s: int
    n: int
    C_s: float
    C_sn_q: float
    q: float
    sampling_resolution: int


@lru_cache(maxsize=None)
def projection_constants(s, n, q=1.0, sampling_resolution=64, trials=100, seed=0):
    """
    Both constants of degree s in dimension n, computed once per argument tuple.
    """
    return ProjectionConstants(s=s, n=n,
                               C_s=projection_constant(s, n, sampling_resolution),
                               C_sn_q=poly_norm_ratio_constant(s, n, q, trials, seed, sampling_resolution + 1),
                               q=q, sampling_resolution=sampling_resolution)
