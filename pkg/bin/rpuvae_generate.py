#!/usr/bin/env python
"""Render a factorized sprite dataset

You can do for example:

$rpuvae_generate.py --config run.cfg --out data --n-images 16
"""

# Authors: rpuvae developers

import sys

from rpuvae.commands import main_generate


if __name__ == '__main__':
    sys.exit(main_generate())
