import contextlib
from pathlib import Path

from tqdm import tqdm


class Logger:
    """
    Line writer for a suite's experiment.log.
    :param filepath: the file where to write, parents are created
    :param mode: 'w' truncates the file once, 'a' appends
    :param lock: shared lock for writers in several processes
    :param echo: also print every line, through tqdm so progress bars survive
    """

    def __init__(self, filepath, mode='a', lock=None, echo=True):
        assert mode in ('w', 'a'), 'Mode must be one of w or a'
        self.filepath = Path(filepath)
        self.filepath.parent.mkdir(parents=True, exist_ok=True)
        if mode == 'w':
            self.filepath.write_text('')
        self.lock = lock if lock is not None else contextlib.nullcontext()
        self.echo = echo

    def __repr__(self):
        return f'<Logger: {self.filepath}>'

    def log(self, line):
        with self.lock:
            with open(self.filepath, 'a') as fp:
                fp.write(line + '\n')
        if self.echo:
            tqdm.write(line)
