import math
import numpy as np
import pytest
from pytest import approx

from JNSpace.Grids.dyadic_grid import CellBox, DomainSpec, DyadicCube, GridFunction
from JNSpace.Norms.oscillation_norms import NormParams, dyadic_norm, lebesgue_norm
from JNSpace.Polynomials.poly_projection import projection_constant
from JNSpace.Decompositions.atoms_duality import (AtomParams, AtomicDecomposition, LocalAtom, Polymer, atomize,
                                                  dual_optimizer, h1_upper_bound, hk_lebesgue_check,
                                                  hk_lower_bound, hk_upper_bound, pair, refine_atoms,
                                                  tile_decomposition, validate_atom)
from JNSpace.Decompositions.cz_decomposition import CZConfig
from JNSpace.Experiments.generators import random_antichain, random_atom_values
from JNSpace.Utils.errors import DecompositionError, GridError, ParameterError

from tests.conftest import random_grid


def _atom(domain, cube, values, params):
    return LocalAtom(cube, GridFunction(domain, values), params)


def _random_polymer(domain, params, rng):
    terms = []
    for cube in random_antichain(domain, rng):
        values = random_atom_values(domain, cube, params, rng)
        terms.append((rng.normal(), _atom(domain, cube, values, params)))
    return Polymer(terms, params.v)


class TestAtomParams:

    def test_conjugates(self):
        params = AtomParams(v=3.0, w=math.inf)
        assert params.v_conj == approx(1.5)
        assert params.w_conj == 1.0
        assert 1.0 / params.v + 1.0 / params.v_conj == approx(1.0, abs=1e-15)
        dual = params.dual_norm_params()
        assert (dual.p, dual.q) == (approx(1.5), 1.0)
        assert AtomParams.from_norm_params(dual).v == approx(3.0)

    @pytest.mark.parametrize("changes", [{'v': 1.0}, {'v': math.inf}, {'w': 1.0}, {'s': -1}, {'c0': -1.0}])
    def test_rejects(self, changes):
        with pytest.raises(ParameterError):
            AtomParams(**changes)

    def test_from_dict(self):
        params = AtomParams.from_dict({'v': 2, 'w': float('inf'), 's': 1, 'c0': 3.0, 'K': 4})
        assert params.s == 1 and params.c0 == 2.0 and math.isinf(params.w)


class TestValidate:

    def test_zero_is_valid(self):
        d = DomainSpec(n=1, m=0, K=2)
        assert validate_atom(_atom(d, d.root(), np.zeros(4), AtomParams(c0=4.0))).valid

    def test_normalized_indicator(self):
        d = DomainSpec(n=1, m=1, K=1)
        report = validate_atom(_atom(d, d.root(), np.full(2, 2.0 ** -0.5), AtomParams(v=2.0, w=2.0, c0=1.0)))
        assert report.valid
        assert report.size_ratio == approx(1.0)
        assert not report.moments_required

    def test_indicator_below_c0_has_a_mean(self):
        d = DomainSpec(n=1, m=1, K=1)
        report = validate_atom(_atom(d, d.root(), np.full(2, 2.0 ** -0.5), AtomParams(v=2.0, w=2.0, c0=4.0)))
        assert not report.valid
        assert report.moments_required
        assert report.moment_residual > 0

    def test_support_outside_cube(self, spike):
        report = validate_atom(LocalAtom(DyadicCube(1, (1,)), spike, AtomParams()))
        assert not report.support_ok and not report.valid

    def test_random_atoms_validate(self, rng):
        d = DomainSpec(n=2, m=0, K=3)
        for w in (2.0, 4.0, math.inf):
            params = AtomParams(v=2.0, w=w, s=1, c0=0.5)
            for cube in random_antichain(d, rng):
                assert validate_atom(_atom(d, cube, random_atom_values(d, cube, params, rng), params)).valid

    def test_two_cell_cubes_carry_zero_atoms(self, rng):
        d = DomainSpec(n=1, m=0, K=4)
        params = AtomParams(v=1.5, w=2.0, s=1, c0=0.5)
        for index in range(8):
            cube = DyadicCube(3, (index,))
            for _ in range(5):
                values = random_atom_values(d, cube, params, rng)
                assert np.all(values == 0.0)
                assert validate_atom(_atom(d, cube, values, params)).valid

    def test_four_cell_cubes_keep_nonzero_atoms(self, rng):
        d = DomainSpec(n=1, m=0, K=4)
        params = AtomParams(v=1.5, w=2.0, s=1, c0=0.5)
        for index in range(4):
            cube = DyadicCube(2, (index,))
            values = random_atom_values(d, cube, params, rng)
            assert np.any(values != 0.0)
            assert validate_atom(_atom(d, cube, values, params)).valid


class TestPairing:

    def test_vanishing_mean_atom(self):
        d = DomainSpec(n=1, m=0, K=1)
        atom = _atom(d, d.root(), [1.0, -1.0], AtomParams(v=2.0, c0=2.0))
        assert validate_atom(atom).valid
        g = AtomicDecomposition([Polymer([(1.0, atom)])])
        assert pair(g, GridFunction(d, np.ones(2))) == 0.0

    def test_unit_atom(self):
        d = DomainSpec(n=1, m=0, K=1)
        g = AtomicDecomposition([Polymer([(1.0, _atom(d, d.root(), [1.0, 1.0], AtomParams(c0=1.0)))])])
        assert pair(g, GridFunction(d, np.ones(2))) == approx(1.0)

    def test_overlapping_atoms(self, unit_line):
        params = AtomParams()
        with pytest.raises(DecompositionError):
            Polymer([(1.0, _atom(unit_line, unit_line.root(), np.zeros(4), params)),
                     (1.0, _atom(unit_line, DyadicCube(1, (0,)), np.zeros(4), params))])

    def test_strict_mode(self, unit_line):
        atom = _atom(unit_line, CellBox((1,), 2), [0.0, 1.0, 1.0, 0.0], AtomParams())
        g = AtomicDecomposition([Polymer([(2.0, atom)])])
        f = GridFunction(unit_line, np.ones(4))
        with pytest.raises(GridError):
            pair(g, f)
        assert pair(g, f, strict=False) == approx(1.0)

    def test_bilinear(self, rng):
        d = DomainSpec(n=1, m=0, K=4)
        params = AtomParams(v=2.0, w=2.0, s=1, c0=0.5)
        g = AtomicDecomposition([_random_polymer(d, params, rng)])
        f1, f2 = random_grid(d, rng), random_grid(d, rng)
        assert pair(g, f1 + f2) == approx(pair(g, f1) + pair(g, f2), rel=1e-12, abs=1e-12)
        assert pair(g.scaled(-3.0), f1) == approx(-3.0 * pair(g, f1), rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("n, K", [(1, 4), (2, 2)])
    @pytest.mark.parametrize("v, w, s, alpha", [(2.0, 2.0, 0, 0.0), (1.5, 4.0, 1, 0.0), (3.0, math.inf, 1, 0.2)])
    def test_pairing_bound_and_sandwich(self, rng, n, K, v, w, s, alpha):
        d = DomainSpec(n=n, m=0, K=K)
        params = AtomParams(v=v, w=w, s=s, alpha=alpha, c0=0.5)
        norm_params = params.dual_norm_params()
        for _ in range(10):
            g = AtomicDecomposition([_random_polymer(d, params, rng) for _ in range(2)])
            f = random_grid(d, rng, order=s)
            jn = dyadic_norm(f, norm_params)[0]
            assert abs(pair(g, f)) <= hk_upper_bound(g) * jn * (1 + 1e-12)
            assert hk_lower_bound(g, [f], norm_params) <= hk_upper_bound(g) * (1 + 1e-12)


class TestBounds:

    def test_hk_upper_bound(self, unit_line):
        params = AtomParams(v=2.0)
        left = _atom(unit_line, DyadicCube(1, (0,)), np.zeros(4), params)
        right = _atom(unit_line, DyadicCube(1, (1,)), np.zeros(4), params)
        assert hk_upper_bound(AtomicDecomposition()) == 0.0
        assert hk_upper_bound(AtomicDecomposition([Polymer([(3.0, left), (-4.0, right)])])) == approx(5.0)
        two = AtomicDecomposition([Polymer([(1.0, left)]), Polymer([(1.0, right)])])
        assert hk_upper_bound(two) == approx(2.0)

    def test_hk_lower_bound(self, spike):
        assert hk_lower_bound(AtomicDecomposition(), [spike], NormParams()) == 0.0
        zero = GridFunction(spike.domain, np.zeros(4))
        with pytest.raises(DecompositionError):
            hk_lower_bound(AtomicDecomposition(), [zero], NormParams())

    def test_h1_upper_bound(self, unit_line):
        assert h1_upper_bound(AtomicDecomposition(), unit_line.root(), 2.0, 2.0) == (0.0, 0.0, True)
        atom = _atom(unit_line, unit_line.root(), np.zeros(4), AtomParams())
        fine, coarse, passed = h1_upper_bound(AtomicDecomposition([Polymer([(-2.5, atom)])]),
                                              unit_line.root(), 3.0, 2.0)
        assert fine == approx(2.5) and coarse == approx(2.5) and passed

    def test_h1_fine_below_coarse(self, rng):
        d = DomainSpec(n=1, m=1, K=4)
        params = AtomParams(v=2.5, w=2.0, c0=0.5)
        g = AtomicDecomposition([_random_polymer(d, params, rng) for _ in range(3)])
        fine, coarse, passed = h1_upper_bound(g, d.root(), params.v, params.w)
        assert passed and fine <= coarse

    def test_h1_atom_outside(self, unit_line):
        atom = _atom(unit_line, DyadicCube(1, (1,)), np.zeros(4), AtomParams())
        with pytest.raises(GridError):
            h1_upper_bound(AtomicDecomposition([Polymer([(1.0, atom)])]), DyadicCube(1, (0,)), 2.0, 2.0)


class TestRefine:

    def test_pass_through(self, unit_line):
        atom = _atom(unit_line, unit_line.root(), [1.0, 0.0, 0.0, 0.0], AtomParams(w=math.inf))
        g = Polymer([(2.0, atom)])
        refined = refine_atoms(g, CZConfig())
        assert refined.notes['pass_through']
        assert refined.budget == g.budget

    def test_constant_atom(self, rng):
        d = DomainSpec(n=1, m=0, K=3)
        params = AtomParams(v=1.5, w=2.0, c0=1.0)
        g = Polymer([(1.0, _atom(d, d.root(), np.ones(8), params))])
        refined = refine_atoms(g, CZConfig())
        assert len(refined) == 1
        (coefficient, atom), = refined.atoms()
        # 2^{n+2} C_0 ctilde with ctilde = 2^{n+1}
        assert coefficient == approx(32.0)
        assert math.isinf(atom.params.w) and validate_atom(atom).valid
        t = random_grid(d, rng)
        assert pair(refined, t) == approx(g.pair(t), rel=1e-12)

    def test_zero_atom_is_skipped(self, unit_line):
        params = AtomParams(v=1.5, w=2.0)
        g = Polymer([(1.0, _atom(unit_line, unit_line.root(), np.zeros(4), params))])
        refined = refine_atoms(g, CZConfig())
        assert refined.notes['skipped'] == 1
        assert len(refined) == 0

    @pytest.mark.parametrize("w, v", [(2.0, 1.5), (4.0, 2.0)])
    @pytest.mark.parametrize("s", [0, 1])
    def test_random_atoms(self, rng, w, v, s):
        d = DomainSpec(n=1, m=0, K=4)
        params = AtomParams(v=v, w=w, s=s, c0=0.5)
        for _ in range(10):
            g = _random_polymer(d, params, rng)
            refined = refine_atoms(g, CZConfig(s=s))
            for _, atom in refined.atoms():
                assert math.isinf(atom.params.w)
                assert validate_atom(atom).valid
            assert math.isfinite(refined.budget)
            for _ in range(5):
                t = random_grid(d, rng)
                scale = sum(abs(c) * atom.function.lebesgue_norm(1.0) for c, atom in g.terms)
                assert abs(pair(refined, t) - g.pair(t)) <= 1e-9 * scale + 1e-300


class TestDualOptimizer:

    def test_constant_tiling(self):
        d = DomainSpec(n=1, m=1, K=1)
        f = GridFunction(d, np.full(2, 3.0))
        params = NormParams(p=2.0, q=1.0, c0=1.0)
        jn, packing = dyadic_norm(f, params)
        g, ratio = dual_optimizer(f, packing, params)
        assert jn == approx(3.0 * math.sqrt(2.0))
        assert ratio == approx(jn, rel=1e-12)
        assert all(validate_atom(atom).valid for _, atom in g.atoms())

    def test_single_active_cube(self):
        d = DomainSpec(n=1, m=1, K=1)
        f = GridFunction(d, [1.0, 3.0])
        params = NormParams(p=2.0, q=1.0, c0=2.0)
        jn, packing = dyadic_norm(f, params)
        assert packing.cubes == [d.root()]
        _, ratio = dual_optimizer(f, packing, params)
        # |Q|^{1/2} times the mean of |f|
        assert ratio == approx(math.sqrt(2.0) * 2.0)
        assert ratio == approx(jn)

    def test_empty_packing(self, unit_line):
        f = GridFunction(unit_line, np.zeros(4))
        jn, packing = dyadic_norm(f, NormParams())
        with pytest.raises(DecompositionError):
            dual_optimizer(f, packing, NormParams())

    @pytest.mark.parametrize("n, K", [(1, 4), (2, 2)])
    @pytest.mark.parametrize("p, q, s", [(2.0, 1.0, 0), (3.0, 2.0, 1), (1.5, 1.5, 1)])
    def test_random_ratio(self, rng, n, K, p, q, s):
        d = DomainSpec(n=n, m=0, K=K)
        params = NormParams(p=p, q=q, s=s, c0=0.5)
        C = projection_constant(s, n)
        for _ in range(5):
            f = random_grid(d, rng, order=s)
            jn, packing = dyadic_norm(f, params)
            g, ratio = dual_optimizer(f, packing, params)
            assert jn / (4.0 * (1.0 + C)) <= ratio <= jn * (1 + 1e-12)
            assert all(validate_atom(atom).valid for _, atom in g.atoms())


class TestAtomize:

    def test_reconstruction_and_lebesgue(self, rng):
        d = DomainSpec(n=2, m=1, K=3)
        f = random_grid(d, rng)
        params = AtomParams(v=2.0, w=2.0, c0=1.0)
        g = atomize(f, params)
        assert len(list(g.atoms())) == 4
        np.testing.assert_allclose(g.cell_values(d), f.values, rtol=0, atol=1e-12)
        assert all(record.passed for record in hk_lebesgue_check(g, d.root(), params.v, params.w))
        with pytest.raises(ParameterError):
            hk_lebesgue_check(g, d.root(), 2.0, 3.0)

    def test_c0_above_domain(self, spike):
        with pytest.raises(ParameterError):
            atomize(spike, AtomParams(c0=2.0))

    def test_tiles_below_c0(self, spike):
        with pytest.raises(ParameterError):
            tile_decomposition(spike, [DyadicCube(1, (0,))], AtomParams(c0=1.0))

    def test_single_tile_budget(self, rng):
        d = DomainSpec(n=1, m=2, K=3)
        f = random_grid(d, rng)
        params = AtomParams(v=3.0, w=2.0, c0=4.0)
        g = tile_decomposition(f, [d.root()], params)
        assert g.budget == approx(d.measure ** (1.0 / 3.0 - 1.0 / 2.0) * lebesgue_norm(f, 2.0))
