# -*- coding: utf-8 -*-
'''
Configuration records: the name registries of the command layer, the
parameter Grid of a verify suite and the ExperimentConfig of one command.
'''

import math

from copy import deepcopy
from dataclasses import dataclass, field
from typing import Optional

from JNSpace.Grids.dyadic_grid import DomainSpec
from JNSpace.Norms.oscillation_norms import NORM_KINDS, NormParams
from JNSpace.Decompositions.cz_decomposition import CZConfig, cz_decompose
from JNSpace.Decompositions.atoms_duality import AtomParams, atomize, refine_atoms
from JNSpace.Experiments.generators import GENERATORS
from JNSpace.Utils.utils import read_config_file


class Config:
    """
    Name registries for norm kinds, decomposition modes, verify suites and generators.
    """

    norms = NORM_KINDS

    decompositions = {
        'cz': cz_decompose,
        'atomize': atomize,
        'refine': refine_atoms,
    }

    generators = GENERATORS

    suite_names = ('oracle', 'projections', 'cz', 'duality', 'limits', 'lebesgue')

    @staticmethod
    def parse_norm(norm_s):
        assert norm_s in Config.norms, f'Could not find {norm_s} in norm kinds!'
        return Config.norms[norm_s]

    @staticmethod
    def parse_decomposition(mode_s):
        assert mode_s in Config.decompositions, f'Could not find {mode_s} in decomposition modes!'
        return Config.decompositions[mode_s]

    @staticmethod
    def parse_generator(kind_s):
        assert kind_s in Config.generators, f'Could not find {kind_s} in generators!'
        return Config.generators[kind_s]

    @staticmethod
    def parse_suite(suite_s):
        assert suite_s in Config.suite_names, f'Could not find {suite_s} in verify suites!'
        # suites read their grids through this module
        from JNSpace.Experiments.suites import SUITES
        return SUITES[suite_s]


class Grid:
    """
    Parameter grid of a suite. The file holds a `defaults` mapping and a `grid`
    entry: one dict of key: list pairs, or a list of such dicts whose products
    are concatenated. A file without these keys is a single grid.
    """

    def __init__(self, path_or_dict):
        self.configs_dict = read_config_file(path_or_dict) or {}
        if 'grid' in self.configs_dict or 'defaults' in self.configs_dict:
            self.defaults = dict(self.configs_dict.get('defaults') or {})
            grids = self.configs_dict.get('grid') or {}
        else:
            self.defaults = {}
            grids = self.configs_dict
        self.num_configs = 0  # must be computed by _create_grid
        self._configs = self._create_grid(grids if isinstance(grids, list) else [grids])

    def __getitem__(self, index):
        return self._configs[index]

    def __len__(self):
        return self.num_configs

    def __iter__(self):
        assert self.num_configs > 0, 'No configurations available'
        return iter(self._configs)

    @property
    def config_dict(self):
        return self.configs_dict

    def _grid_generator(self, cfgs_dict):
        keys = cfgs_dict.keys()
        result = {}

        if cfgs_dict == {}:
            yield {}
        else:
            configs_copy = deepcopy(cfgs_dict)  # create a copy to remove keys

            # get the "first" key
            param = list(keys)[0]
            del configs_copy[param]

            first_key_values = cfgs_dict[param]
            if not isinstance(first_key_values, list):
                first_key_values = [first_key_values]
            for value in first_key_values:
                result[param] = value

                for nested_config in self._grid_generator(configs_copy):
                    result.update(nested_config)
                    yield deepcopy(result)

    def _create_grid(self, grids):
        '''
        Takes dictionaries of key:list pairs and computes all possible permutations.
        :param grids: list of dictionaries
        :return: list of configurations
        '''
        config_list = [cfg for grid in grids for cfg in self._grid_generator(grid)]
        self.num_configs = len(config_list)
        return config_list


@dataclass
class ExperimentConfig:
    """
    Everything one command needs, built from the parsed command line.
    """
    command: str
    domain: Optional[DomainSpec] = None
    norm: NormParams = field(default_factory=NormParams)
    atom: Optional[AtomParams] = None
    cz: CZConfig = field(default_factory=CZConfig)
    input: Optional[str] = None
    out: Optional[str] = None
    dump_dir: Optional[str] = None
    seed: int = 42
    trials: Optional[int] = None
    processes: int = 1
    options: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return getattr(self, name)

    def __contains__(self, attrname):
        return attrname in self.__dict__

    @property
    def config_dict(self):
        """
        Echo for report bodies: parameters only, no paths or process counts.
        """
        out = {'command': self.command, 'seed': self.seed, 'options': self.options,
               'norm': {key: getattr(self.norm, key) for key in ('p', 'q', 's', 'alpha', 'c0', 'variant',
                                                                 'shifted_grids')},
               'cz': {'s': self.cz.s, 'ctilde': self.cz.ctilde, 'gamma': self.cz.gamma}}
        if self.atom is not None:
            out['atom'] = {key: getattr(self.atom, key) for key in ('v', 'w', 's', 'alpha', 'c0')}
        if self.domain is not None:
            out['domain'] = {'n': self.domain.n, 'm': self.domain.m, 'K': self.domain.K}
        return out

    @classmethod
    def from_args(cls, args):
        norm = NormParams(p=args.p, q=args.q, s=args.s, alpha=args.alpha, c0=args.c0,
                          variant=args.variant, shifted_grids=args.shifted_grids)
        atom = AtomParams(v=args.v if args.v is not None else norm.p / (norm.p - 1.0),
                          w=args.w if args.w is not None else math.inf,
                          s=args.s, alpha=args.alpha, c0=args.c0)
        domain = DomainSpec(n=args.n, m=args.m, K=args.depth) if args.depth is not None else None
        keys = ('which', 'mode', 'suite', 'kind', 'a', 'scale', 'terms', 'binary')
        options = {key: getattr(args, key) for key in keys
                   if getattr(args, key, None) is not None}
        return cls(command=args.command, domain=domain, norm=norm, atom=atom,
                   cz=CZConfig(s=args.s, ctilde=args.ctilde, gamma=args.gamma),
                   input=args.input, out=args.out, dump_dir=args.dump_dir, seed=args.seed,
                   trials=args.trials, processes=args.processes, options=options)
