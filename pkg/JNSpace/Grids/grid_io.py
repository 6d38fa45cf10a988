# -*- coding: utf-8 -*-
'''
Grid file format:

    jngrid v1 n=<n> m=<m> K=<K> order=<s_max>[ bin]

followed by the 2^{nK} cell values in row-major order (last axis fastest),
either whitespace-separated decimals or, with the `bin` flag, little-endian
8-byte IEEE-754 values.
'''

import re
import hashlib
import numpy as np
from pathlib import Path

from JNSpace.Grids.dyadic_grid import DomainSpec, GridFunction
from JNSpace.Utils.errors import GridFormatError, JNSpaceError
from JNSpace.Utils.utils import create_dir_if_not_exists


MAGIC = 'jngrid v1'
HEADER = re.compile(r'^jngrid v1 n=(-?\d+) m=(-?\d+) K=(-?\d+) order=(-?\d+)( bin)?$')


def format_header(f: GridFunction, binary=False):
    d = f.domain
    header = f'{MAGIC} n={d.n} m={d.m} K={d.K} order={f.order}'
    return header + (' bin' if binary else '')


def grid_to_bytes(f: GridFunction, binary=False) -> bytes:
    header = format_header(f, binary).encode('ascii') + b'\n'
    if binary:
        return header + f.values.astype('<f8').tobytes(order='C')
    rows = f.values.reshape(-1, f.domain.cells_per_axis)
    lines = [' '.join('%.17g' % value for value in row) for row in rows]
    return header + ('\n'.join(lines) + '\n').encode('ascii')


def write_grid(f: GridFunction, path, binary=False):
    path = Path(path)
    create_dir_if_not_exists(path.parent)
    payload = grid_to_bytes(f, binary)
    with open(path, 'wb') as fp:
        fp.write(payload)
    return hashlib.sha256(payload).hexdigest()


def grid_from_bytes(payload: bytes) -> GridFunction:
    newline = payload.find(b'\n')
    if newline < 0:
        raise GridFormatError('missing header line')
    try:
        header = payload[:newline].decode('ascii').strip()
    except UnicodeDecodeError:
        raise GridFormatError('header is not ASCII')
    match = HEADER.match(header)
    if match is None:
        raise GridFormatError(f'malformed header: {header!r}')
    n, m, K, order = (int(g) for g in match.groups()[:4])
    binary = match.group(5) is not None
    try:
        domain = DomainSpec(n=n, m=m, K=K)
    except JNSpaceError as e:
        raise GridFormatError(f'bad domain in header: {e}')
    if order < 0:
        raise GridFormatError(f'bad moment order {order}')

    body = payload[newline + 1:]
    if binary:
        if len(body) != 8 * domain.cell_count:
            raise GridFormatError(f'expected {8 * domain.cell_count} bytes of values, got {len(body)}')
        values = np.frombuffer(body, dtype='<f8').astype(float)
    else:
        tokens = body.decode('ascii', errors='replace').split()
        if len(tokens) != domain.cell_count:
            raise GridFormatError(f'expected {domain.cell_count} values, got {len(tokens)}')
        try:
            values = np.array([float(token) for token in tokens])
        except ValueError as e:
            raise GridFormatError(f'bad value: {e}')
    if not np.all(np.isfinite(values)):
        raise GridFormatError('grid values must be finite')
    return GridFunction(domain, values, order=order)


def read_grid(path) -> GridFunction:
    with open(path, 'rb') as fp:
        return grid_from_bytes(fp.read())


def grid_checksum(f: GridFunction) -> str:
    return hashlib.sha256(np.ascontiguousarray(f.values, dtype='<f8').tobytes()).hexdigest()
