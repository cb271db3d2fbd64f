#!/usr/bin/env python
"""Train VAEs: recursive (rpu), unsupervised (pbt-u), supervised with
every label (pbt-s) or with a label budget (pbt-semi)

You can do for example:

$rpuvae_train.py rpu --config run.cfg --seed 3 --threads 4 --out run3
"""

# Authors: rpuvae developers

import sys

from rpuvae.commands import main_train


if __name__ == '__main__':
    sys.exit(main_train())
