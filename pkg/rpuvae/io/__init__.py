"""Checkpoint files: tagged binary storage of VAE weights"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

from .constants import CKPT
from .checkpoint import Checkpoint, write_checkpoint, read_checkpoint
