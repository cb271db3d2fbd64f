#!/usr/bin/env python
"""Write the latent traversals of one image as a graymap grid

You can do for example:

$rpuvae_traverse.py run3/model.ckpt --index 42 --span 2 --steps 8 --out run3
"""

# Authors: rpuvae developers

import sys

from rpuvae.commands import main_traverse


if __name__ == '__main__':
    sys.exit(main_traverse())
