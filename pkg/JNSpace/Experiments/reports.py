# -*- coding: utf-8 -*-
'''
Reports: results, certificates and checked inequalities of one command, plus
the CSV dump writers for decompositions.
'''

import os
import json
import math
import pandas as pd

from dataclasses import dataclass

from JNSpace.Grids.dyadic_grid import DyadicCube
from JNSpace.Grids.grid_io import write_grid
from JNSpace.Utils.utils import NumpyEncoder, create_dir_if_not_exists


@dataclass
class AssertionRecord:
    """
    One checked inequality lhs <= rhs, passing when the slack is not below
    -rel_tol * max(|lhs|, |rhs|).
    """
    name: str
    lhs: float
    rhs: float
    rel_tol: float = 1e-12
    anchor: str = ''

    @property
    def slack(self):
        return float(self.rhs - self.lhs)

    @property
    def scale(self):
        return max(abs(self.lhs), abs(self.rhs))

    @property
    def passed(self):
        if math.isnan(self.lhs) or math.isnan(self.rhs):
            return False
        if self.lhs <= self.rhs:
            return True
        return self.slack >= -self.rel_tol * self.scale

    @property
    def relative_slack(self):
        scale = self.scale
        if not math.isfinite(scale):
            return 0.0 if self.lhs <= self.rhs else -math.inf
        return self.slack / scale if scale > 0 else 0.0

    def to_dict(self):
        return {'name': self.name, 'lhs': float(self.lhs), 'rhs': float(self.rhs), 'slack': self.slack,
                'rel_tol': self.rel_tol, 'anchor': self.anchor, 'passed': self.passed}


def check(name, lhs, rhs, rel_tol=1e-12, anchor=''):
    return AssertionRecord(name, float(lhs), float(rhs), rel_tol, anchor)


class Report:

    def __init__(self, command, config=None):
        self.command = command
        self.config = dict(config or {})
        self.results = {}
        self.certificates = {}
        self.assertions = []
        self.wall_time = None

    def __repr__(self):
        return f'<Report: {self.command}, {len(self.assertions)} assertions, passed={self.passed}>'

    def add_result(self, name, value):
        self.results[name] = value

    def add_certificate(self, name, value):
        self.certificates[name] = value

    def check(self, name, lhs, rhs, rel_tol=1e-12, anchor=''):
        record = check(name, lhs, rhs, rel_tol, anchor)
        self.assertions.append(record)
        return record.passed

    def extend(self, records):
        self.assertions.extend(records)

    @property
    def passed(self):
        return all(record.passed for record in self.assertions)

    def failures(self):
        return [record for record in self.assertions if not record.passed]

    def summary(self):
        """
        Per assertion name: count, failures and the tightest record.
        """
        out = {}
        for record in self.assertions:
            entry = out.setdefault(record.name, {'n': 0, 'n_failed': 0, 'anchor': record.anchor, 'worst': None})
            entry['n'] += 1
            entry['n_failed'] += 0 if record.passed else 1
            if entry['worst'] is None or record.relative_slack < entry['worst']['relative_slack']:
                entry['worst'] = {'lhs': float(record.lhs), 'rhs': float(record.rhs), 'slack': record.slack,
                                  'relative_slack': record.relative_slack}
        return out

    def body(self):
        return {
            'command': self.command,
            'config': self.config,
            'results': self.results,
            'certificates': self.certificates,
            'assertions': self.summary(),
            'passed': self.passed,
        }

    def to_json(self, include_time=False):
        document = self.body()
        if include_time:
            document['wall_time'] = self.wall_time
        return json.dumps(document, cls=NumpyEncoder, sort_keys=True, indent=2)

    def write(self, path, include_time=True):
        create_dir_if_not_exists(os.path.dirname(os.path.abspath(path)))
        with open(path, 'w') as fp:
            fp.write(self.to_json(include_time=include_time) + '\n')


def _cube_fields(cube):
    if isinstance(cube, DyadicCube):
        return cube.level, ' '.join(str(i) for i in cube.index)
    return None, ' '.join(str(i) for i in cube.start)


def write_cz_dump(decomposition, dump_dir, write_grids=False, binary=False):
    """
    pieces.csv with one row per piece (k, level, index, sup, moment residual);
    with `write_grids` every piece's cell values go next to it as a grid file.
    """
    create_dir_if_not_exists(dump_dir)
    rows = []
    for piece in decomposition.pieces:
        level, index = _cube_fields(piece.cube)
        rows.append({'k': piece.k, 'level': level, 'index': index,
                     'sup': piece.sup, 'moment_residual': piece.moment_residual})
        if write_grids:
            write_grid(piece.function.to_grid(), os.path.join(dump_dir, f'piece_{piece.k}_{index.replace(" ", "_")}.grid'),
                       binary=binary)
    frame = pd.DataFrame(rows, columns=['k', 'level', 'index', 'sup', 'moment_residual'])
    frame.to_csv(os.path.join(dump_dir, 'pieces.csv'), index=False)
    return frame


def write_decomposition_dump(decomposition, dump_dir):
    create_dir_if_not_exists(dump_dir)
    rows = []
    for polymer_id, polymer in enumerate(decomposition.polymers):
        for coefficient, atom in polymer.terms:
            level, index = _cube_fields(atom.cube)
            rows.append({'polymer': polymer_id, 'lambda': coefficient, 'level': level,
                         'index': index, 'tag': atom.tag})
    frame = pd.DataFrame(rows, columns=['polymer', 'lambda', 'level', 'index', 'tag'])
    frame.to_csv(os.path.join(dump_dir, 'decomposition.csv'), index=False)
    return frame
