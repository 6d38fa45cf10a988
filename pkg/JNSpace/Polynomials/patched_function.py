# -*- coding: utf-8 -*-
'''
Functions made of piecewise-constant grid values plus polynomial patches
P * 1_R on sub-cubes R. Calderon-Zygmund pieces and the atoms built from them
are of this form; keeping the polynomials analytic makes their moments exact.
'''

import numpy as np

from dataclasses import dataclass
from typing import List, Optional

from JNSpace.Grids.dyadic_grid import (CellBox, DomainSpec, GridFunction, as_box,
                                       multi_indices, separable_contract, unit_cell_moments)
from JNSpace.Polynomials.poly_projection import SpacePolynomial
from JNSpace.Utils.errors import GridError


@dataclass(frozen=True)
class Patch:
    box: CellBox
    polynomial: SpacePolynomial


class PatchedFunction:

    def __init__(self, domain: DomainSpec, values=None, patches: Optional[List[Patch]] = None):
        self.domain = domain
        if values is None:
            values = np.zeros(domain.shape)
        values = np.array(values, dtype=float).reshape(domain.shape)
        values.setflags(write=False)
        self.values = values
        self.patches = list(patches or [])
        for patch in self.patches:
            if not patch.box.inside(domain):
                raise GridError(f'patch box {patch.box} lies outside the domain')
        self._cells = None

    @classmethod
    def from_grid(cls, f):
        if isinstance(f, PatchedFunction):
            return f
        if isinstance(f, GridFunction):
            return cls(f.domain, f.values)
        raise TypeError(f'cannot build a PatchedFunction from {type(f).__name__}')

    def __repr__(self):
        return f'<PatchedFunction: {len(self.patches)} patches>'

    @property
    def is_grid(self):
        return all(patch.polynomial.is_zero() for patch in self.patches)

    def cell_values(self):
        """
        Exact average over every cell (grid values plus patch averages).
        """
        if self._cells is None:
            cells = np.array(self.values)
            for patch in self.patches:
                cells[patch.box.slices()] += patch.polynomial.cell_averages(self.domain, patch.box)
            cells.setflags(write=False)
            self._cells = cells
        return self._cells

    def to_grid(self, order=0):
        return GridFunction(self.domain, self.cell_values(), order=order)

    def scaled(self, c):
        c = float(c)
        return PatchedFunction(self.domain, self.values * c,
                               [Patch(patch.box, patch.polynomial * c) for patch in self.patches])

    def __add__(self, other):
        other = PatchedFunction.from_grid(other)
        return PatchedFunction(self.domain, self.values + other.values, self.patches + other.patches)

    def __sub__(self, other):
        return self + PatchedFunction.from_grid(other).scaled(-1.0)

    def pair(self, f: GridFunction) -> float:
        """
        Integral of this function times a piecewise-constant f (exact).
        """
        return float(np.dot(self.cell_values().ravel(), f.values.ravel()) * self.domain.cell_measure)

    def sup_norm(self, cube=None):
        cells = self.cell_values() if cube is None else self.cell_values()[as_box(cube, self.domain).slices()]
        return float(np.max(np.abs(cells))) if cells.size else 0.0

    def lebesgue_norm(self, w, cube=None):
        cells = self.cell_values() if cube is None else self.cell_values()[as_box(cube, self.domain).slices()]
        if np.isinf(w):
            return self.sup_norm(cube)
        top = np.max(np.abs(cells)) if cells.size else 0.0
        if top == 0.0:
            return 0.0
        return float(top * (np.sum((np.abs(cells) / top) ** w) * self.domain.cell_measure) ** (1.0 / w))

    def support_inside(self, cube):
        box = as_box(cube, self.domain)
        mask = np.ones(self.domain.shape, dtype=bool)
        mask[box.slices()] = False
        outside_zero = not np.any(self.values[mask])
        patches_inside = all(box.contains(patch.box) or patch.polynomial.is_zero() for patch in self.patches)
        return outside_zero and patches_inside

    def local_moments(self, cube, s):
        """
        Averages over the cube of this function times u^beta, |beta| <= s, in
        the cube's own frame. Patches must lie inside the cube.
        """
        d = self.domain
        box = as_box(cube, d)
        origin, side = box.origin(d), box.side(d)
        indices = multi_indices(d.n, s)

        W = unit_cell_moments(box.size, s)
        full = separable_contract(self.values[box.slices()], [W] * d.n)
        moments = np.array([full[beta] for beta in indices])

        for patch in self.patches:
            if patch.polynomial.is_zero():
                continue
            if not box.contains(patch.box):
                raise GridError(f'patch {patch.box} is not inside {box}')
            rebased = patch.polynomial.rebase(origin, side)
            lo = (patch.box.origin(d) - origin) / side - 0.5
            hi = lo + patch.box.side(d) / side
            top = rebased.degree + s
            e = np.arange(top + 1)
            axis_integrals = [(hi[i] ** (e + 1) - lo[i] ** (e + 1)) / (e + 1) for i in range(d.n)]
            for a, beta in enumerate(indices):
                T = rebased.coefficients
                for i in range(d.n):
                    window = axis_integrals[i][beta[i]: beta[i] + rebased.degree + 1]
                    T = np.tensordot(T, window, axes=([0], [0]))
                moments[a] += float(T)
        return moments
