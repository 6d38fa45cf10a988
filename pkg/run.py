# -*- coding: utf-8 -*-
'''
Command-line entry point:

    python run.py gen --kind spike --n 1 --depth 2 --out spike.grid
    python run.py norm --input spike.grid --which jn --p 2 --q 1
    python run.py decompose --input spike.grid --mode cz --dump-dir dumps
    python run.py verify --suite oracle --seed 42 --out Outputs/oracle.json
'''

import sys

from JNSpace.JNSpace import main


if __name__ == '__main__':
    sys.exit(main())
