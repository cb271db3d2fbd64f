import json
import os.path as op

import numpy as np
from numpy.testing import assert_array_equal, assert_equal, assert_raises

from rpuvae.io import CKPT, write_checkpoint, read_checkpoint
from rpuvae.io import checkpoint
from rpuvae.io.tag import read_tag
from rpuvae.io.write import start_file, end_file, write_int, write_double, \
                           write_string, write_double_matrix
from rpuvae.vae import build_vae, Adam, Hyper, train_epoch
from rpuvae.datasets import FactorSpec, generate


def _assert_same_params(a, b):
    assert_equal(a.architecture_info(), b.architecture_info())
    for x, y in zip(a.arrays(), b.arrays()):
        assert_array_equal(x, y)


def test_checkpoint_weights(tmpdir):
    """Test writing and reading the weights of both architectures"""
    for architecture in ('mlp', 'conv'):
        params = build_vae((16, 16), latent_dim=4, hidden=(12,),
                           architecture=architecture, random_state=0)
        fname = op.join(str(tmpdir), '%s.ckpt' % architecture)
        write_checkpoint(fname, params)
        ckpt = read_checkpoint(fname)
        _assert_same_params(params, ckpt.params)
        assert ckpt.optimizer is None
        assert ckpt.hyper is None
        assert_equal(ckpt.meta, dict())
        with open(fname, 'rb') as fid:
            assert_equal(fid.read(8), b'RPUVAECK')


def test_checkpoint_training_state(tmpdir):
    """Test that training resumes identically from a checkpoint"""
    data = generate(FactorSpec([('x', 4), ('y', 4)], 8, 8))
    params = build_vae((8, 8), latent_dim=2, hidden=(8,), random_state=0)
    hyper = Hyper(1e-3, 4, 2.)
    params, opt, _ = train_epoch(params, Adam(), data, hyper, random_state=0)
    fname = op.join(str(tmpdir), 'member.ckpt')
    write_checkpoint(fname, params, opt, hyper, meta=dict(member_id=3,
                                                          score=0.25))
    ckpt = read_checkpoint(fname)
    assert_equal(ckpt.hyper, hyper)
    assert_equal(ckpt.meta, dict(member_id=3, score=0.25))
    assert_equal(ckpt.optimizer.t, opt.t)
    p1, _, l1 = train_epoch(params, opt, data, hyper, random_state=1)
    p2, _, l2 = train_epoch(ckpt.params, ckpt.optimizer, data, hyper,
                            random_state=1)
    _assert_same_params(p1, p2)
    assert_equal(l1.total, l2.total)


def test_matrix_tag(tmpdir):
    """Test the shape of array tags"""
    fname = op.join(str(tmpdir), 'tag.bin')
    mat = np.arange(24.).reshape(2, 3, 4)
    with open(fname, 'wb') as fid:
        write_double_matrix(fid, CKPT.KIND_ARRAY, mat)
    with open(fname, 'rb') as fid:
        tag = read_tag(fid)
    assert_equal(tag.kind, CKPT.KIND_ARRAY)
    assert_equal(tag.size, 24 * 8 + 4 * 4)
    assert_array_equal(tag.data, mat)


def test_bad_checkpoint(tmpdir):
    """Test that broken files are rejected"""
    fname = op.join(str(tmpdir), 'bad.ckpt')
    with open(fname, 'wb') as fid:
        fid.write(b'NOTACKPT')
    assert_raises(IOError, read_checkpoint, fname)
    params = build_vae((8, 8), latent_dim=2, hidden=(), random_state=0)
    write_checkpoint(fname, params)
    with open(fname, 'rb') as fid:
        content = fid.read()
    with open(fname, 'wb') as fid:
        fid.write(content[:len(content) // 2])
    assert_raises(IOError, read_checkpoint, fname)


def test_failed_write(tmpdir, monkeypatch):
    """Test that an interrupted write leaves no file behind"""
    params = build_vae((8, 8), latent_dim=2, hidden=(4,), random_state=0)
    fname = op.join(str(tmpdir), 'partial.ckpt')
    calls = list()

    def fail_second(fid, kind, mat):
        calls.append(kind)
        if len(calls) == 2:
            raise IOError('disk full')
        write_double_matrix(fid, kind, mat)

    monkeypatch.setattr(checkpoint, 'write_double_matrix', fail_second)
    assert_raises(IOError, write_checkpoint, fname, params)
    assert not op.exists(fname)


def _hand_written(fname, params, adam_tags):
    """A checkpoint with the Adam tags in the given order"""
    fid = start_file(fname)
    write_string(fid, CKPT.KIND_ARCHITECTURE,
                 json.dumps(params.architecture_info()))
    write_int(fid, CKPT.KIND_N_ARRAYS, len(params.arrays()))
    for a in params.arrays():
        write_double_matrix(fid, CKPT.KIND_ARRAY, a)
    for kind in adam_tags:
        if kind == CKPT.KIND_ADAM_CONSTS:
            write_double(fid, kind, [0.8, 0.99, 1e-7])
        else:
            write_int(fid, kind, 12)
    end_file(fid)


def test_adam_tag_order(tmpdir):
    """Test reading Adam tags in any order"""
    params = build_vae((8, 8), latent_dim=2, hidden=(4,), random_state=0)
    fname = op.join(str(tmpdir), 'adam.ckpt')
    _hand_written(fname, params, [CKPT.KIND_ADAM_T, CKPT.KIND_ADAM_CONSTS])
    ckpt = read_checkpoint(fname)
    _assert_same_params(params, ckpt.params)
    assert_equal(ckpt.optimizer.t, 12)
    assert_equal((ckpt.optimizer.beta1, ckpt.optimizer.beta2,
                  ckpt.optimizer.epsilon), (0.8, 0.99, 1e-7))
    assert ckpt.optimizer.m is None
    # a step count without the constants is corrupt
    _hand_written(fname, params, [CKPT.KIND_ADAM_T])
    assert_raises(IOError, read_checkpoint, fname)
