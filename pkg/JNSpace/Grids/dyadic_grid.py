# -*- coding: utf-8 -*-
'''
Dyadic cube geometry over the base domain [0, 2^m)^n and piecewise-constant
grid functions with prefix-summed monomial moment tables.
'''

import math
import threading
import itertools
import numpy as np

from functools import lru_cache
from dataclasses import dataclass
from typing import List, Tuple, Union

from JNSpace.Utils.errors import GridError, MomentOrderError, ParameterError


@dataclass(frozen=True)
class DomainSpec:
    """
    Base cube [0, 2^m)^n cut into 2^{nK} cells of side 2^{m-K}.
    """
    n: int
    m: int
    K: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f'dimension must be a positive integer, got {self.n}')
        if int(self.K) != self.K or self.K < 0:
            raise ParameterError(f'depth must be a non-negative integer, got {self.K}')
        if int(self.m) != self.m:
            raise ParameterError(f'side exponent must be an integer, got {self.m}')

    @property
    def side(self):
        return math.ldexp(1.0, self.m)

    @property
    def measure(self):
        return math.ldexp(1.0, self.m * self.n)

    @property
    def cell_side(self):
        return math.ldexp(1.0, self.m - self.K)

    @property
    def cell_measure(self):
        return math.ldexp(1.0, (self.m - self.K) * self.n)

    @property
    def cells_per_axis(self):
        return 1 << self.K

    @property
    def cell_count(self):
        return 1 << (self.n * self.K)

    @property
    def shape(self):
        return (self.cells_per_axis,) * self.n

    def root(self):
        return DyadicCube(0, (0,) * self.n)

    def cell_edges(self):
        return np.arange(self.cells_per_axis + 1, dtype=float) * self.cell_side

    @classmethod
    def from_dict(cls, dict_obj):
        return cls(n=int(dict_obj['n']), m=int(dict_obj['m']), K=int(dict_obj['K']))


@dataclass(frozen=True)
class CellBox:
    """
    Cube made of whole cells: `start` is the lower cell index per axis, `size`
    the side length counted in cells. Shifted dyadic systems use these.
    """
    start: Tuple[int, ...]
    size: int

    def slices(self):
        return tuple(slice(a, a + self.size) for a in self.start)

    def side(self, domain):
        return self.size * domain.cell_side

    def measure(self, domain):
        return self.side(domain) ** domain.n

    def origin(self, domain):
        return np.asarray(self.start, dtype=float) * domain.cell_side

    def center(self, domain):
        return self.origin(domain) + 0.5 * self.side(domain)

    def inside(self, domain):
        N = domain.cells_per_axis
        return len(self.start) == domain.n and self.size >= 1 and \
            all(0 <= a and a + self.size <= N for a in self.start)

    def contains(self, other):
        return all(a <= b and b + other.size <= a + self.size for a, b in zip(self.start, other.start))

    def overlaps(self, other):
        return all(a < b + other.size and b < a + self.size for a, b in zip(self.start, other.start))

    def cell_count(self):
        return self.size ** len(self.start)


@dataclass(frozen=True)
class DyadicCube:
    """
    Node of the 2^n-ary dyadic tree: level k in 0..K and lattice index at that level.
    """
    level: int
    index: Tuple[int, ...]

    def size_cells(self, domain):
        return 1 << (domain.K - self.level)

    def box(self, domain):
        size = self.size_cells(domain)
        return CellBox(tuple(i * size for i in self.index), size)

    def side(self, domain):
        return math.ldexp(1.0, domain.m - self.level)

    def measure(self, domain):
        return math.ldexp(1.0, (domain.m - self.level) * domain.n)

    def origin(self, domain):
        return np.asarray(self.index, dtype=float) * self.side(domain)

    def center(self, domain):
        return self.origin(domain) + 0.5 * self.side(domain)

    def parent(self):
        if self.level == 0:
            raise GridError('the root cube has no parent')
        return DyadicCube(self.level - 1, tuple(i >> 1 for i in self.index))

    def is_ancestor_of(self, other):
        shift = other.level - self.level
        if shift <= 0:
            return False
        return all((j >> shift) == i for i, j in zip(self.index, other.index))

    def overlaps(self, other):
        return self == other or self.is_ancestor_of(other) or other.is_ancestor_of(self)

    def check(self, domain):
        if len(self.index) != domain.n:
            raise GridError(f'cube {self} does not match dimension {domain.n}')
        if not 0 <= self.level <= domain.K:
            raise GridError(f'cube level {self.level} outside 0..{domain.K}')
        if any(i < 0 or i >= (1 << self.level) for i in self.index):
            raise GridError(f'cube {self} lies outside the domain')
        return self


Cube = Union[DyadicCube, CellBox]


def as_box(cube, domain):
    if isinstance(cube, DyadicCube):
        return cube.check(domain).box(domain)
    if isinstance(cube, CellBox):
        if not cube.inside(domain):
            raise GridError(f'box {cube} lies outside the domain')
        return cube
    raise GridError(f'not a cube: {cube!r}')


def cube_children(cube: DyadicCube, domain: DomainSpec) -> List[DyadicCube]:
    cube.check(domain)
    if cube.level >= domain.K:
        raise GridError('no children at maximum depth')
    base = tuple(2 * i for i in cube.index)
    return [DyadicCube(cube.level + 1, tuple(b + o for b, o in zip(base, offset)))
            for offset in itertools.product((0, 1), repeat=domain.n)]


def enumerate_level(domain: DomainSpec, k: int) -> List[DyadicCube]:
    if not 0 <= k <= domain.K:
        raise GridError(f'level {k} outside 0..{domain.K}')
    return [DyadicCube(k, index) for index in itertools.product(range(1 << k), repeat=domain.n)]


def enumerate_cubes(domain: DomainSpec):
    for k in range(domain.K + 1):
        for cube in enumerate_level(domain, k):
            yield cube


def multi_indices(n: int, s: int) -> List[Tuple[int, ...]]:
    """
    All beta in Z_+^n with |beta| <= s, graded by total degree.
    """
    return _multi_indices(int(n), int(s))


@lru_cache(maxsize=None)
def _multi_indices(n, s):
    indices = [beta for beta in itertools.product(range(s + 1), repeat=n) if sum(beta) <= s]
    return sorted(indices, key=lambda beta: (sum(beta), tuple(-b for b in beta)))


@lru_cache(maxsize=None)
def unit_cell_moments(size: int, degree: int) -> np.ndarray:
    """
    W[k, j] = integral of u^k over the j-th of `size` equal cells of [-1/2, 1/2).
    Sums over j give the moments of the reference cube.
    """
    edges = np.arange(size + 1, dtype=float) / size - 0.5
    W = np.empty((degree + 1, size))
    for k in range(degree + 1):
        powers = edges ** (k + 1)
        W[k] = (powers[1:] - powers[:-1]) / (k + 1)
    W.setflags(write=False)
    return W


def separable_contract(block, matrices):
    """
    Contract axis i of `block` (cells) with matrices[i] (rows x cells); the
    result has one row axis per block axis, in order.
    """
    T = block
    for matrix in matrices:
        T = np.tensordot(T, matrix, axes=([0], [1]))
    return T


def compensated_cumsum(array, axis):
    """
    Prefix sums along `axis` with Neumaier compensation.
    """
    a = np.moveaxis(np.asarray(array, dtype=float), axis, 0)
    out = np.empty_like(a)
    total = np.zeros_like(a[0])
    carry = np.zeros_like(a[0])
    for i in range(a.shape[0]):
        x = a[i]
        t = total + x
        carry += np.where(np.abs(total) >= np.abs(x), (total - t) + x, (x - t) + total)
        total = t
        out[i] = total + carry
    return np.moveaxis(out, 0, axis)


class GridFunction:
    """
    Piecewise-constant function, one value per cell (row-major, last axis
    fastest). Immutable; moment tables up to `order` are built on first use.
    """

    def __init__(self, domain: DomainSpec, values, order: int = 0):
        self.domain = domain
        values = np.array(values, dtype=float)
        if values.size != domain.cell_count:
            raise GridError(f'expected {domain.cell_count} cell values, got {values.size}')
        values = values.reshape(domain.shape)
        if not np.all(np.isfinite(values)):
            raise GridError('grid values must be finite')
        values.setflags(write=False)
        self.values = values
        if int(order) != order or order < 0:
            raise ParameterError(f'moment order must be a non-negative integer, got {order}')
        self.order = int(order)
        self._tables = None
        self._lock = threading.Lock()

    def __repr__(self):
        d = self.domain
        return f'<GridFunction: n={d.n} m={d.m} K={d.K} order={self.order}>'

    def with_order(self, order):
        if order <= self.order:
            return self
        return GridFunction(self.domain, self.values, order=order)

    # arithmetic keeps the larger moment order
    def __add__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.domain, self.values + other.values, max(self.order, other.order))
        return GridFunction(self.domain, self.values + other, self.order)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return GridFunction(self.domain, self.values * float(scalar), self.order)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def block(self, cube):
        return self.values[as_box(cube, self.domain).slices()]

    def restricted(self, cube):
        out = np.zeros(self.domain.shape)
        slices = as_box(cube, self.domain).slices()
        out[slices] = self.values[slices]
        return GridFunction(self.domain, out, self.order)

    @property
    def tables(self):
        if self._tables is None:
            with self._lock:
                if self._tables is None:
                    self._tables = self._build_tables()
        return self._tables

    def _build_tables(self):
        d = self.domain
        edges = d.cell_edges()
        axis_integrals = []
        for k in range(self.order + 1):
            powers = edges ** (k + 1)
            axis_integrals.append((powers[1:] - powers[:-1]) / (k + 1))

        tables = {}
        for beta in multi_indices(d.n, self.order):
            cell_integrals = np.ones(())
            for b in beta:
                cell_integrals = np.multiply.outer(cell_integrals, axis_integrals[b])
            table = np.zeros(tuple(N + 1 for N in d.shape))
            contributions = self.values * cell_integrals
            for axis in range(d.n):
                contributions = compensated_cumsum(contributions, axis)
            table[(slice(1, None),) * d.n] = contributions
            table.setflags(write=False)
            tables[beta] = table
        return tables

    def integrate_monomial(self, cube, beta) -> float:
        """
        Integral of f(x) x^beta over the cube, absolute coordinates.
        """
        beta = tuple(int(b) for b in beta)
        if len(beta) != self.domain.n or min(beta) < 0:
            raise ParameterError(f'bad multi-index {beta}')
        if sum(beta) > self.order:
            raise MomentOrderError('moment order not prepared')
        box = as_box(cube, self.domain)
        table = self.tables[beta]
        total = 0.0
        for corner in itertools.product((0, 1), repeat=self.domain.n):
            position = tuple(a + c * box.size for a, c in zip(box.start, corner))
            sign = -1.0 if (self.domain.n - sum(corner)) % 2 else 1.0
            total += sign * table[position]
        return float(total)

    def cell_average(self, cube) -> float:
        box = as_box(cube, self.domain)
        return self.integrate_monomial(box, (0,) * self.domain.n) / box.measure(self.domain)

    def local_moments(self, cube, s: int) -> np.ndarray:
        """
        Averages over the cube of f * u^beta, u = (x - center) / side, for every
        |beta| <= s in `multi_indices` order.
        """
        box = as_box(cube, self.domain)
        W = unit_cell_moments(box.size, s)
        full = separable_contract(self.values[box.slices()], [W] * self.domain.n)
        return np.array([full[beta] for beta in multi_indices(self.domain.n, s)])

    def abs_mean(self, cube) -> float:
        return float(np.mean(np.abs(self.block(cube))))
