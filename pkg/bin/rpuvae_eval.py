#!/usr/bin/env python
"""Score a checkpoint with MIG, DCI and the KL of every latent

You can do for example:

$rpuvae_eval.py run3/model.ckpt --dataset data/dataset.npz --out run3/eval
"""

# Authors: rpuvae developers

import sys

from rpuvae.commands import main_eval


if __name__ == '__main__':
    sys.exit(main_eval())
