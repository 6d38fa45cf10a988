# -*- coding: utf-8 -*-
'''
Small helpers shared by the command layer and the verify suites.
'''

import os
import json
import yaml
import pickle
import logging
import numpy as np
import pandas as pd
from pathlib import Path

from JNSpace.Utils.errors import ParameterError


LOGGER_NAME = 'JNSpace'


class NumpyEncoder(json.JSONEncoder):
    """
    numpy arrays and scalars, and pandas frames as lists of records.
    """

    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, pd.DataFrame):
            return obj.to_dict(orient='records')
        return super().default(obj)


def create_dir_if_not_exists(dir_path):
    os.makedirs(dir_path, exist_ok=True)


def create_logger(log_file=None, level=logging.INFO):
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level=level)
    formatter = logging.Formatter('[%(asctime)s] %(levelname)s: %(message)s', datefmt=f'%Y-%m-%d %H:%M:%S')

    # called once per command; drop handlers from a previous call
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    if log_file is not None:
        create_dir_if_not_exists(Path(log_file).parent)
        handler = logging.FileHandler(log_file)
        handler.setLevel(level)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(level)
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)
    return logger


_LOADERS = {
    '.json': ('r', json.load),
    '.yml': ('r', yaml.safe_load),
    '.yaml': ('r', yaml.safe_load),
    '.pkl': ('rb', pickle.load),
    '.pickle': ('rb', pickle.load),
}


def read_config_file(dict_or_filelike):
    """
    A dict passes through; .json, .yml/.yaml and .pkl files are loaded.
    """
    if isinstance(dict_or_filelike, dict):
        return dict_or_filelike

    path = Path(dict_or_filelike)
    if path.suffix not in _LOADERS:
        raise ParameterError(f'Only JSON, YaML and pickle files supported, got {path.name}')
    mode, load = _LOADERS[path.suffix]
    with open(path, mode) as fp:
        return load(fp)
