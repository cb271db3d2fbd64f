"""Reading and writing VAE checkpoints"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import json
import os

import numpy as np

import logging
logger = logging.getLogger('rpuvae')

from .constants import CKPT
from .tag import read_tag
from .write import start_file, end_file, write_int, write_double, \
                   write_string, write_double_matrix
from ..utils import verbose
from ..vae import build_vae, Adam, Hyper


class Checkpoint(object):
    """Contents of a checkpoint file

    Attributes
    ----------
    params : VaeParams
        The model weights.
    optimizer : Adam | None
        The optimizer state, if it was saved.
    hyper : Hyper | None
        The hyperparameters, if they were saved.
    meta : dict
        Free-form JSON metadata (member id, score, stage...).
    """
    def __init__(self, params, optimizer=None, hyper=None, meta=None):
        self.params = params
        self.optimizer = optimizer
        self.hyper = hyper
        self.meta = dict() if meta is None else dict(meta)

    def __repr__(self):
        return '<Checkpoint %r%s>' % (self.params,
                                      ' + Adam' if self.optimizer else '')


@verbose
def write_checkpoint(fname, params, optimizer=None, hyper=None, meta=None,
                     verbose=None):
    """Write a VAE to a checkpoint file

    Parameters
    ----------
    fname : str
        The output file name.
    params : VaeParams
        The weights to save.
    optimizer : Adam | None
        Optimizer state to save along.
    hyper : Hyper | None
        Hyperparameters to save along.
    meta : dict | None
        JSON-serializable metadata.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Notes
    -----
    If writing fails the partial file is removed, so a file with an end
    tag is always complete.
    """
    arrays = params.arrays()
    fid = start_file(fname)
    try:
        write_string(fid, CKPT.KIND_ARCHITECTURE,
                     json.dumps(params.architecture_info(), sort_keys=True))
        write_int(fid, CKPT.KIND_N_ARRAYS, len(arrays))
        for a in arrays:
            write_double_matrix(fid, CKPT.KIND_ARRAY, a)
        if optimizer is not None:
            write_double(fid, CKPT.KIND_ADAM_CONSTS,
                         [optimizer.beta1, optimizer.beta2,
                          optimizer.epsilon])
            write_int(fid, CKPT.KIND_ADAM_T, optimizer.t)
            if optimizer.m is not None:
                for m in optimizer.m:
                    write_double_matrix(fid, CKPT.KIND_ADAM_M, m)
                for v in optimizer.v:
                    write_double_matrix(fid, CKPT.KIND_ADAM_V, v)
        if hyper is not None:
            write_double(fid, CKPT.KIND_HYPER,
                         [hyper.learning_rate, hyper.batch_size, hyper.beta])
        if meta:
            write_string(fid, CKPT.KIND_META, json.dumps(meta,
                                                         sort_keys=True))
    except BaseException:
        fid.close()
        os.remove(fname)
        raise
    end_file(fid)
    logger.info('    Wrote checkpoint %s (%d arrays)' % (fname, len(arrays)))


def _build(info):
    return build_vae(tuple(info['image_shape']), info['latent_dim'],
                     hidden=tuple(info['hidden']),
                     architecture=info['architecture'], init='zeros')


@verbose
def read_checkpoint(fname, verbose=None):
    """Read a checkpoint file

    Parameters
    ----------
    fname : str
        The checkpoint file name.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    checkpoint : Checkpoint
        The model, and the optimizer state, hyperparameters and metadata
        when present.
    """
    with open(fname, 'rb') as fid:
        magic = fid.read(len(CKPT.MAGIC))
        if magic != CKPT.MAGIC:
            raise IOError('%s is not a checkpoint file (bad magic bytes)'
                          % fname)
        tag = read_tag(fid)
        if tag.kind != CKPT.KIND_VERSION:
            raise IOError('%s: the version tag must come first' % fname)
        version = int(tag.data[0])
        if version > CKPT.VERSION:
            raise IOError('%s: checkpoint version %d is newer than the '
                          'supported version %d'
                          % (fname, version, CKPT.VERSION))
        info, n_arrays, arrays = None, None, list()
        consts, adam_t, moments = None, None, dict(m=list(), v=list())
        hyper, meta = None, dict()
        while True:
            tag = read_tag(fid)
            if tag.kind == CKPT.KIND_END:
                break
            elif tag.kind == CKPT.KIND_ARCHITECTURE:
                info = json.loads(tag.data)
            elif tag.kind == CKPT.KIND_N_ARRAYS:
                n_arrays = int(tag.data[0])
            elif tag.kind == CKPT.KIND_ARRAY:
                arrays.append(tag.data)
            elif tag.kind == CKPT.KIND_ADAM_CONSTS:
                consts = tag.data
            elif tag.kind == CKPT.KIND_ADAM_T:
                adam_t = int(tag.data[0])
            elif tag.kind == CKPT.KIND_ADAM_M:
                moments['m'].append(tag.data)
            elif tag.kind == CKPT.KIND_ADAM_V:
                moments['v'].append(tag.data)
            elif tag.kind == CKPT.KIND_HYPER:
                lr, batch_size, beta = tag.data
                hyper = Hyper(lr, int(batch_size), beta)
            elif tag.kind == CKPT.KIND_META:
                meta = json.loads(tag.data)
            else:
                logger.warning('Skipping unknown tag kind %d at byte %d'
                               % (tag.kind, tag.pos))

    if info is None:
        raise IOError('%s: no architecture tag' % fname)
    if n_arrays is not None and n_arrays != len(arrays):
        raise IOError('%s: expected %d arrays, found %d'
                      % (fname, n_arrays, len(arrays)))
    params = _build(info)
    params.set_arrays([np.array(a) for a in arrays])
    adam = None
    if consts is not None:
        # Adam tags may come in any order
        adam = Adam(*consts)
        if adam_t is not None:
            adam.t = adam_t
        if len(moments['m']) > 0:
            if len(moments['m']) != len(moments['v']):
                raise IOError('%s: %d first and %d second Adam moments'
                              % (fname, len(moments['m']),
                                 len(moments['v'])))
            adam.m = [np.array(m) for m in moments['m']]
            adam.v = [np.array(v) for v in moments['v']]
    elif adam_t is not None or len(moments['m'] + moments['v']) > 0:
        raise IOError('%s: Adam state without its constants' % fname)
    logger.info('    Read checkpoint %s: %r' % (fname, params))
    return Checkpoint(params, adam, hyper, meta)
