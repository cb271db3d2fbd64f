"""Factorized sprite datasets"""

from .sprites import FactorSpec, FactorizedDataset, DatasetView, generate, \
                     check_spec, subset, factor_lookup, factor_index, \
                     read_dataset, write_pgm, read_pgm, desk_spec, \
                     dsprites_spec
