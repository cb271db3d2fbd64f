"""rpuvae: recursive disentanglement of factorized image data with
populations of beta-TCVAEs
"""

__version__ = '0.1.git'

# have to import verbose first since it's needed by many things
from .utils import set_log_level, set_log_file, verbose, check_random_state, \
                   derive_seed, NumericalError

from .datasets import FactorSpec, generate, read_dataset, subset
from .vae import build_vae, train_epoch, DivergedError
from .metrics import mig, dci_disentanglement, masked_mig
from .udr import udr_member
from .misc import parse_config, ConfigError
from .io import read_checkpoint, write_checkpoint
from .pipeline import RunConfig, read_config, run_rpu, run_mode
from . import datasets
from . import io
from . import metrics
from . import pbt
from . import pipeline
from . import reducer
from . import udr
from . import vae

# deal with logging
set_log_level(None, False)
set_log_file()
