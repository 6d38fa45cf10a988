import math
import numpy as np
import pytest

from JNSpace.Experiments.suites import SUITES, CZSuite
from JNSpace.Grids.dyadic_grid import DomainSpec, GridFunction
from JNSpace.Utils.errors import ParameterError


SMALL = {
    'oracle': {'grid': {'n': [1], 'm': [0], 'K': [2, 3], 's': [0, 1], 'variant': ['localized', 'plain']}},
    'projections': {'defaults': {'experiments': ['jn_vs_JN', 'vanishing']},
                    'grid': {'n': [1], 'm': [0], 'K': [3], 's': [0, 1], 'c0': [0.5]}},
    'cz': {'defaults': {'tail_checks': 2, 'ctilde_factors': [1.0, 2.0]},
           'grid': {'n': [1, 2], 'm': [0], 'K': [2], 's': [0, 1]}},
    'duality': {'defaults': {'refinements': 3},
                'grid': {'n': [1], 'm': [0], 'K': [3], 'v': [2.0], 'w': [2.0, math.inf], 's': [0, 1],
                         'c0': [0.5]}},
    'limits': {'grid': {'n': [1], 'm': [0], 'K': [3], 's': [0]}},
    'lebesgue': {'grid': {'n': [1], 'm': [0], 'K': [3], 'p': [2.0], 'q': [1.0, 2.0], 'v': [2.0], 'w': [2.0]}},
}


class TestSuites:

    @pytest.mark.parametrize("name", sorted(SUITES))
    def test_small_grid_passes(self, name):
        report = SUITES[name](SMALL[name]).run(seed=3, trials=4)
        assert report.passed, [record.to_dict() for record in report.failures()]
        assert report.results['n_assertions'] == len(report.assertions) > 0
        assert report.config['suite'] == name

    def test_configuration_cycle(self):
        suite = SUITES['oracle'](SMALL['oracle'])
        assert len(suite.configurations) == 8
        assert suite.configuration(9) == suite.configuration(1)

    def test_seeded_runs_are_identical(self):
        first = SUITES['cz'](SMALL['cz']).run(seed=11, trials=3)
        second = SUITES['cz'](SMALL['cz']).run(seed=11, trials=3)
        assert first.to_json() == second.to_json()

    def test_processes_match_serial(self):
        serial = SUITES['oracle'](SMALL['oracle']).run(seed=5, trials=3)
        pooled = SUITES['oracle'](SMALL['oracle']).run(seed=5, trials=3, processes=2)
        assert serial.to_json() == pooled.to_json()

    def test_experiment_log(self, tmp_path):
        SUITES['limits'](SMALL['limits']).run(seed=1, trials=2, exp_path=str(tmp_path))
        lines = (tmp_path / 'experiment.log').read_text().splitlines()
        assert lines[0].startswith('trial 0:')
        assert lines[-1] == 'suite limits: passed=True'

    def test_default_file(self):
        suite = SUITES['oracle']()
        assert len(suite.configurations) == 82
        dims = [suite.configuration(i)['n'] for i in range(suite.defaults['trials'])]
        assert dims.count(1) >= 200
        assert dims.count(2) >= 50

    def test_default_duality_refinements(self):
        assert SUITES['duality']().defaults['refinements'] == 50

    def test_duality_refinement_count(self):
        report = SUITES['duality'](SMALL['duality']).run(seed=2, trials=1)
        assert report.results['extras']['refinements'] == 3
        checks = [record for record in report.assertions if record.name == 'refinement_preserves_pairing']
        assert len(checks) == 30

    def test_trials_must_be_positive(self):
        with pytest.raises(ParameterError):
            SUITES['oracle'](SMALL['oracle']).run(trials=0)

    def test_projection_constants_reported(self):
        report = SUITES['projections'](SMALL['projections']).run(seed=0, trials=1)
        extras = report.results['extras']
        assert sorted(extras) == ['s=0,n=1,q=1.0', 's=1,n=1,q=1.0']
        assert extras['s=1,n=1,q=1.0']['C_s'] == pytest.approx(4.0, rel=1e-9)
        assert any(record.name == 'projection_constant_1d' for record in report.assertions)

    def test_cz_sweep_reaches_edge_cases(self):
        d = DomainSpec(n=2, m=0, K=2)
        f = GridFunction(d, np.arange(16.0).reshape(4, 4) - 4.0)
        rng = np.random.default_rng(0)
        configs = [CZSuite.sample_config(f, {'ctilde_factors': [1.0, 3.0]}, rng) for _ in range(200)]
        mean = f.abs_mean(d.root())
        assert {c.ctilde for c in configs} == {5.0, 8.0, 24.0}
        assert any(c.gamma == mean for c in configs)
        assert all(mean <= c.gamma <= 3.0 * mean for c in configs)

    def test_oracle_extras(self):
        report = SUITES['oracle'](SMALL['oracle']).run(seed=0, trials=1)
        assert report.results['extras']['m=2'] == pytest.approx(6.0)
