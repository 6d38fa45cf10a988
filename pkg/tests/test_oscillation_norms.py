import math
import numpy as np
import pytest
from pytest import approx

from JNSpace.Grids.dyadic_grid import DomainSpec, DyadicCube, GridFunction
from JNSpace.Norms.oscillation_norms import (NORM_KINDS, JN_norm_dyadic, NormParams, campanato_maximizer,
                                             campanato_norm_dyadic, dyadic_norm, jn_norm_dyadic, lebesgue_norm,
                                             oscillation, shifted_norm, snap_dyadic, weak_quasi_norm)
from JNSpace.Norms.packing_oracle import packing_oracle
from JNSpace.Polynomials.poly_projection import project
from JNSpace.Utils.errors import ParameterError

from tests.conftest import random_grid


class TestParams:

    @pytest.mark.parametrize("c0, expected", [(1.0, 1.0), (3.0, 2.0), (0.7, 0.5), (0.25, 0.25)])
    def test_snap_dyadic(self, c0, expected):
        assert snap_dyadic(c0) == expected
        assert NormParams(c0=c0).c0 == expected

    @pytest.mark.parametrize("changes", [{'p': 1.0}, {'p': math.inf}, {'q': 0.5}, {'s': -1}, {'s': 1.5},
                                         {'alpha': -0.1}, {'c0': 0.0}, {'variant': 'other'}])
    def test_rejects(self, changes):
        with pytest.raises(ParameterError):
            NormParams(**changes)

    def test_from_dict_skips_missing(self):
        params = NormParams.from_dict({'p': 3.0, 'K': 4, 's': None})
        assert params.p == 3.0 and params.s == 0


class TestOscillation:

    def test_constant_below_c0(self):
        d = DomainSpec(n=1, m=0, K=2)
        f = GridFunction(d, np.full(d.shape, 5.0))
        assert oscillation(f, DyadicCube(1, (0,)), NormParams(c0=1.0)) == approx(0.0, abs=1e-12)

    def test_constant_above_c0(self):
        d = DomainSpec(n=1, m=0, K=2)
        f = GridFunction(d, np.full(d.shape, -2.5))
        assert oscillation(f, d.root(), NormParams(c0=1.0)) == approx(2.5)
        assert oscillation(f, d.root(), NormParams(c0=1.0, alpha=0.5)) == approx(2.5)

    def test_sign_change_projected(self):
        d = DomainSpec(n=1, m=0, K=1)
        f = GridFunction(d, [1.0, -1.0])
        assert oscillation(f, d.root(), NormParams(c0=2.0)) == approx(1.0)

    def test_alpha_scaling(self):
        d = DomainSpec(n=1, m=2, K=2)
        f = GridFunction(d, [1.0, 3.0, 0.0, 0.0])
        params = NormParams(c0=8.0, alpha=0.5)
        # mean |f - 1| over [0, 4) is 1, |Q|^{-1/2} = 1/2
        assert oscillation(f, d.root(), params) == approx(0.5)


class TestPackingNorms:

    def test_zero_function(self, unit_line):
        value, packing = jn_norm_dyadic(GridFunction(unit_line, np.zeros(4)), NormParams())
        assert value == 0.0
        assert len(packing) == 0

    @pytest.mark.parametrize("m", [0, 1, 2, 3])
    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_constant_grows_with_domain(self, m, p):
        d = DomainSpec(n=1, m=m, K=m + 1)
        f = GridFunction(d, np.full(d.shape, 3.0))
        value, packing = jn_norm_dyadic(f, NormParams(p=p, q=1.0, c0=1.0))
        assert value == approx(3.0 * 2.0 ** (m / p), rel=1e-12)
        assert packing.is_antichain()
        assert all(cube.side(d) >= 1.0 for cube in packing.cubes)

    def test_constant_JN_vanishes(self):
        d = DomainSpec(n=2, m=1, K=2)
        f = GridFunction(d, np.full(d.shape, 3.0))
        value, _ = JN_norm_dyadic(f, NormParams(variant='plain', s=1))
        assert value == approx(0.0, abs=1e-12)

    def test_variant_guard(self, spike):
        with pytest.raises(ParameterError):
            jn_norm_dyadic(spike, NormParams(variant='plain'))
        with pytest.raises(ParameterError):
            JN_norm_dyadic(spike, NormParams())

    @pytest.mark.parametrize("n, K", [(1, 3), (1, 4), (2, 2)])
    @pytest.mark.parametrize("variant", ['localized', 'plain'])
    @pytest.mark.parametrize("s, alpha, q", [(0, 0.0, 1.0), (1, 0.25, 2.0)])
    def test_tree_fold_equals_oracle(self, rng, n, K, variant, s, alpha, q):
        d = DomainSpec(n=n, m=0, K=K)
        params = NormParams(p=2.5, q=q, s=s, alpha=alpha, c0=0.5, variant=variant)
        for _ in range(3):
            f = random_grid(d, rng, order=s)
            value, packing = dyadic_norm(f, params)
            assert value == approx(packing_oracle(f, params), rel=1e-12)
            assert packing.value == approx(value, rel=1e-12)

    def test_packing_two_levels_below_root_1d(self):
        d = DomainSpec(n=1, m=1, K=3)
        f = GridFunction(d, [1.0, 1.0, -5.0, -5.0, 0.0, 0.0, 0.0, 0.0])
        value, packing = jn_norm_dyadic(f, NormParams(p=2.0, c0=0.5))
        # halves of [0, 1) beat [0, 1) itself: 0.5 * 1 + 0.5 * 25 > 1 * 9
        assert value == approx(math.sqrt(13.0), rel=1e-12)
        assert set(packing.cubes) == {DyadicCube(2, (0,)), DyadicCube(2, (1,))}

    def test_packing_two_levels_below_root_2d(self):
        d = DomainSpec(n=2, m=1, K=3)
        values = np.zeros(d.shape)
        values[0:2, 0:2] = 1.0
        values[2:4, 0:2] = 5.0
        f = GridFunction(d, values)
        value, packing = jn_norm_dyadic(f, NormParams(p=2.0, c0=0.5))
        assert value == approx(math.sqrt(6.5), rel=1e-12)
        assert set(packing.cubes) == {DyadicCube(2, (0, 0)), DyadicCube(2, (1, 0))}
        assert packing.is_antichain()

    def test_certificate_reproduces_value(self, rng):
        d = DomainSpec(n=2, m=1, K=3)
        f = random_grid(d, rng, order=1)
        params = NormParams(p=3.0, s=1, c0=1.0)
        value, packing = dyadic_norm(f, params)
        total = sum(cube.measure(d) * oscillation(f, cube, params) ** 3.0 for cube in packing.cubes)
        assert total ** (1.0 / 3.0) == approx(value, rel=1e-12)
        assert packing.is_antichain()

    def test_shifted_systems_dominate(self, rng):
        d = DomainSpec(n=1, m=0, K=4)
        f = random_grid(d, rng)
        params = NormParams(c0=0.5)
        standard = dyadic_norm(f, params)[0]
        shifted, packing = shifted_norm(f, params, 'jn')
        assert shifted >= standard * (1 - 1e-12)
        assert all(box.inside(d) for box in packing.cubes)
        with pytest.raises(ParameterError):
            shifted_norm(f, params, 'lp')


class TestOtherNorms:

    def test_campanato(self):
        d = DomainSpec(n=1, m=1, K=3)
        assert campanato_norm_dyadic(GridFunction(d, np.zeros(8)), NormParams()) == 0.0
        assert campanato_norm_dyadic(GridFunction(d, np.full(8, -4.0)), NormParams(c0=1.0)) == approx(4.0)

    def test_campanato_maximizer_reaches_max(self, rng):
        d = DomainSpec(n=2, m=0, K=3)
        f = random_grid(d, rng)
        params = NormParams(c0=0.5, q=2.0)
        value, cube = campanato_maximizer(f, params)
        assert oscillation(f, cube, params) == approx(value, rel=1e-12)

    def test_lebesgue(self, spike):
        assert lebesgue_norm(spike, 2.0) == approx(2.0)
        assert lebesgue_norm(spike, 1.0) == approx(1.0)
        assert lebesgue_norm(spike, math.inf) == 4.0
        assert lebesgue_norm(GridFunction(spike.domain, np.full(4, -3.0)), 3.0) == approx(3.0)
        with pytest.raises(ParameterError):
            lebesgue_norm(spike, 0.5)

    def test_weak_indicator(self):
        d = DomainSpec(n=1, m=0, K=1)
        f = GridFunction(d, [1.0, 0.0])
        assert weak_quasi_norm(f, d.root(), 0, 1.0) == approx(0.5)
        assert weak_quasi_norm(GridFunction(d, [0.0, 0.0]), d.root(), 0, 2.0) == 0.0

    def test_weak_below_strong(self, rng):
        d = DomainSpec(n=1, m=1, K=5)
        for s in (0, 1, 2):
            f = random_grid(d, rng, order=s)
            for p in (1.0, 2.0, 4.5):
                weak = weak_quasi_norm(f, d.root(), s, p)
                P = project(f, d.root(), s)
                residual = GridFunction(d, f.values - P.cell_averages(d, d.root()))
                assert weak <= lebesgue_norm(residual, p) * (1 + 1e-12)

    def test_norm_kinds(self, spike):
        assert set(NORM_KINDS) == {'jn', 'JN', 'campanato', 'lp', 'weak'}
        value, certificate = NORM_KINDS['jn'](spike, NormParams())
        assert value == approx(jn_norm_dyadic(spike, NormParams())[0])
        assert certificate
        assert NORM_KINDS['lp'](spike, NormParams(p=2.0)) == (approx(2.0), None)
