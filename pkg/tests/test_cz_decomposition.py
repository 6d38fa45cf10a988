import numpy as np
import pytest
from pytest import approx

from JNSpace.Grids.dyadic_grid import CellBox, DomainSpec, DyadicCube, GridFunction
from JNSpace.Decompositions.cz_decomposition import (CZConfig, cz_decompose, dyadic_maximal, stopping_cubes,
                                                     tail_bound_check)
from JNSpace.Utils.errors import DecompositionError, GridError, ParameterError

from tests.conftest import random_grid


class TestMaximal:

    def test_spike(self, spike):
        assert dyadic_maximal(spike, spike.domain.root()).values.tolist() == [4.0, 2.0, 1.0, 1.0]

    def test_constant(self):
        d = DomainSpec(n=2, m=0, K=2)
        M = dyadic_maximal(GridFunction(d, np.full(d.shape, -1.5)), d.root())
        assert M.values == approx(np.full(d.shape, 1.5))

    def test_dominates_and_vanishes_outside(self, rng):
        d = DomainSpec(n=2, m=1, K=3)
        f = random_grid(d, rng)
        cube = DyadicCube(1, (1, 0))
        M = dyadic_maximal(f, cube).values.copy()
        box = cube.box(d)
        assert np.all(M[box.slices()] >= np.abs(f.values[box.slices()]))
        M[box.slices()] = 0.0
        assert not np.any(M)

    def test_needs_dyadic_cube(self, spike):
        with pytest.raises(GridError):
            dyadic_maximal(spike, CellBox((0,), 2))


class TestStoppingCubes:

    def test_spike(self, spike):
        cubes = stopping_cubes(spike, spike.domain.root(), CZConfig(ctilde=3.0, gamma=1.0), 1)
        assert cubes == [DyadicCube(2, (0,))]

    def test_large_threshold_is_empty(self, spike):
        config = CZConfig(ctilde=3.0, gamma=2.0)
        assert stopping_cubes(spike, spike.domain.root(), config, 1) == []

    def test_level_set_and_nesting(self, rng):
        d = DomainSpec(n=2, m=0, K=4)
        f = GridFunction(d, rng.standard_cauchy(size=d.shape))
        config = CZConfig(ctilde=5.0)
        M = dyadic_maximal(f, d.root()).values
        threshold = config.resolve(f, d.root()).gamma
        previous = np.ones(d.shape, dtype=bool)
        for k in range(1, 4):
            cubes = stopping_cubes(f, d.root(), config, k)
            union = np.zeros(d.shape, dtype=bool)
            for cube in cubes:
                box = cube.box(d)
                assert not np.any(union[box.slices()])
                union[box.slices()] = True
                assert f.abs_mean(cube) > 5.0 ** k * threshold
                if cube.level > 0:
                    assert f.abs_mean(cube.parent()) <= 5.0 ** k * threshold
            np.testing.assert_array_equal(union, M > 5.0 ** k * threshold)
            assert not np.any(union & ~previous)
            previous = union

    def test_level_must_be_positive(self, spike):
        with pytest.raises(ParameterError):
            stopping_cubes(spike, spike.domain.root(), CZConfig(), 0)


class TestDecompose:

    def test_config_defaults(self, spike):
        config = CZConfig().resolve(spike, spike.domain.root())
        assert config.ctilde == 4.0
        assert config.gamma == approx(1.0)
        assert config.threshold(2) == approx(16.0)

    def test_threshold_below_mean(self, spike):
        with pytest.raises(DecompositionError, match='threshold below mean'):
            cz_decompose(spike, spike.domain.root(), CZConfig(gamma=0.5))

    def test_ratio_too_small(self, spike):
        with pytest.raises(DecompositionError, match='ratio too small'):
            cz_decompose(spike, spike.domain.root(), CZConfig(ctilde=2.0))

    def test_constant_is_one_zero_piece(self):
        d = DomainSpec(n=2, m=0, K=3)
        f = GridFunction(d, np.full(d.shape, 2.0))
        decomposition = cz_decompose(f, d.root(), CZConfig(s=1))
        assert len(decomposition) == 1
        assert decomposition.pieces[0].sup < 1e-12

    def test_no_stopping_cubes(self, spike):
        decomposition = cz_decompose(spike, spike.domain.root(), CZConfig(gamma=10.0))
        assert len(decomposition.levels) == 1
        assert decomposition.pieces[0].function.cell_values() == approx([3.0, -1.0, -1.0, -1.0])

    def test_spike(self, spike):
        decomposition = cz_decompose(spike, spike.domain.root(), CZConfig(s=0, ctilde=3.0, gamma=1.0))
        assert decomposition.levels == [[spike.domain.root()], [DyadicCube(2, (0,))]]
        assert decomposition.diagnostics['reconstruction_residual'] <= 1e-12
        first = decomposition.pieces[0]
        assert first.sup == approx(3.0)
        assert first.bound == approx(12.0)
        assert all(piece.sup <= piece.bound for piece in decomposition.pieces)

    @pytest.mark.parametrize("n, K, s", [(1, 6, 0), (1, 5, 2), (2, 3, 1), (2, 3, 2)])
    def test_random_conclusions(self, rng, n, K, s):
        d = DomainSpec(n=n, m=0, K=K)
        for ctilde in (2.0 ** n + 1.0, 2.0 ** (n + 1)):
            f = GridFunction(d, rng.standard_cauchy(size=d.shape), order=s)
            for factor in (1.0, 2.0):
                gamma = factor * f.abs_mean(d.root())
                decomposition = cz_decompose(f, d.root(), CZConfig(s=s, ctilde=ctilde, gamma=gamma))
                scale = decomposition.diagnostics['scale']
                assert decomposition.diagnostics['reconstruction_residual'] <= 1e-9 * scale
                assert decomposition.diagnostics['max_moment_residual'] <= 1e-9 * scale
                assert max(decomposition.margins().values()) <= 1.0 + 1e-12
                keys = [(piece.k, piece.cube.level, piece.cube.index) for piece in decomposition.pieces]
                assert keys == sorted(keys)


class TestTailBound:

    def test_spike(self, spike):
        tail = tail_bound_check(spike, spike.domain.root(), 2.0, 1.0, 1.0)
        assert tail.lhs == approx(0.5)
        assert tail.rhs == approx(2.0)
        assert tail.passed

    def test_below_threshold(self, spike):
        tail = tail_bound_check(spike, spike.domain.root(), 2.0, 2.0, 4.0)
        assert tail.lhs == 0.0
        assert tail.passed

    @pytest.mark.parametrize("ctilde, w, gamma", [(2.0, 0.5, 1.0), (1.0, 2.0, 1.0), (2.0, 2.0, 0.0)])
    def test_rejects(self, spike, ctilde, w, gamma):
        with pytest.raises(ParameterError):
            tail_bound_check(spike, spike.domain.root(), ctilde, w, gamma)

    def test_random(self, rng):
        d = DomainSpec(n=1, m=0, K=6)
        for _ in range(100):
            f = GridFunction(d, rng.standard_cauchy(size=d.shape))
            tail = tail_bound_check(f, d.root(), rng.uniform(1.5, 6.0), rng.uniform(1.0, 4.0),
                                    f.abs_mean(d.root()) * rng.uniform(0.2, 2.0))
            assert tail.passed
