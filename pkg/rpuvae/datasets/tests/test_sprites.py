import os.path as op

import numpy as np
from numpy.testing import assert_array_equal, assert_equal, assert_raises

from rpuvae.datasets import FactorSpec, FactorizedDataset, generate, \
                            check_spec, subset, factor_lookup, factor_index, \
                            read_dataset, write_pgm, read_pgm, desk_spec, \
                            dsprites_spec


def test_generate_small():
    """Test generation of a 2x2 position dataset"""
    spec = FactorSpec([('x', 2), ('y', 2)], 8, 8)
    data = generate(spec)
    assert_equal(len(data), 4)
    flat = data.images.reshape(4, -1)
    for i in range(4):
        for j in range(i + 1, 4):
            assert np.any(flat[i] != flat[j])
    assert set(np.unique(data.images)) <= set([0., 1.])


def test_generate_layout():
    """Test sample counts and factor order"""
    spec = FactorSpec([('shape', 3), ('scale', 3), ('x', 8), ('y', 8)],
                      16, 16)
    data = generate(spec)
    assert_equal(len(data), 576)
    assert_equal(data.factor_table.shape, (576, 4))
    # every combination exactly once
    assert_equal(len(np.unique(data.factor_table, axis=0)), 576)
    assert_equal(dsprites_spec().n_samples, 737280)
    assert_equal(desk_spec().n_samples, 192)


def test_generate_distinct():
    """Test that different factor tuples render different images"""
    for factors in ([('shape', 3), ('scale', 3), ('x', 8), ('y', 8)],
                    [('shape', 3), ('x', 4), ('y', 4)]):
        data = generate(FactorSpec(factors, 16, 16))
        flat = data.images.reshape(len(data), -1)
        assert_equal(len(np.unique(flat, axis=0)), len(data))
    # the three masks differ at the smallest shaped side
    data = generate(FactorSpec([('shape', 3)], 8, 8))
    assert_equal(len(np.unique(data.images.sum(axis=(1, 2)))), 3)


def test_generate_deterministic():
    """Test that rendering twice gives identical datasets"""
    spec = FactorSpec([('shape', 2), ('scale', 3), ('x', 4), ('y', 4)])
    d1, d2 = generate(spec), generate(spec)
    assert_array_equal(d1.images, d2.images)
    assert_array_equal(d1.factor_table, d2.factor_table)


def test_generate_monotone():
    """Test that sprite area grows with scale and centre moves with x"""
    data = generate(FactorSpec([('scale', 3), ('x', 4), ('y', 4)]))
    area = data.images.sum(axis=(1, 2))
    for s in range(2):
        assert np.all(area[data.factors[:, 0] == s] <
                      area[data.factors[:, 0] == s + 1])
    cols = np.arange(16)
    centre_x = (data.images.sum(axis=1) * cols).sum(axis=1) / area
    for x in range(3):
        assert np.all(centre_x[data.factors[:, 1] == x] <
                      centre_x[data.factors[:, 1] == x + 1])


def test_rotation():
    """Test that the rotation factor renders distinct images"""
    data = generate(FactorSpec([('scale', 2), ('rotation', 4), ('x', 2),
                                ('y', 2)], 16, 16))
    assert_equal(len(data), 32)
    rot = data.factors[:, 1]
    assert np.any(data.images[rot == 0] != data.images[rot == 2])


def test_invalid_spec():
    """Test that invalid factor layouts are rejected"""
    assert_raises(ValueError, FactorSpec, [('x', 0)])
    assert_raises(ValueError, FactorSpec, [('x', 2), ('x', 3)])
    assert_raises(ValueError, FactorSpec, [('color', 2)])
    assert_raises(ValueError, generate, FactorSpec([('x', 2)], 4, 4))
    # sprites larger than the image
    assert_raises(ValueError, generate,
                  FactorSpec([('scale', 6), ('x', 2)], 8, 8))
    # more position levels than pixels
    assert_raises(ValueError, generate, FactorSpec([('x', 20)], 16, 16))
    assert_raises(ValueError, generate, dsprites_spec(), max_bytes=2 ** 20)
    assert_raises(ValueError, check_spec, FactorSpec([('x', 20)], 16, 16))


def test_memory_budget():
    """Test that the full dsprites layout fits the default budget"""
    assert_equal(check_spec(dsprites_spec()), 737280)
    assert_raises(ValueError, check_spec, dsprites_spec(),
                  737280 * 64 * 64 - 1)
    data = generate(desk_spec())
    assert_equal(data.images.dtype, np.uint8)
    assert_equal(data.images.nbytes, 192 * 16 * 16)
    assert_raises(ValueError, FactorizedDataset, desk_spec(),
                  0.5 * np.ones((192, 16, 16)), data.factor_table)


def test_subset():
    """Test dataset views"""
    data = generate(FactorSpec([('shape', 3), ('scale', 3), ('x', 8),
                                ('y', 8)], 16, 16))
    full = subset(data, np.arange(len(data)))
    assert_equal(len(full), len(data))
    view = subset(data, np.arange(96))
    assert_equal(len(view), 96)
    for k in (0, 17, 95):
        assert_array_equal(view.image(k), data.image(view.indices[k]))
    assert_equal(len(list(view)), 96)

    rng = np.random.RandomState(0)
    idx = np.sort(rng.choice(len(data), 200, replace=False))
    outer = subset(data, idx)
    inner_idx = idx[::3]
    inner = subset(outer, inner_idx[::-1])
    assert_array_equal(inner.indices, inner_idx)
    assert_array_equal(inner.images, data.images[inner_idx])
    assert inner.root is data

    assert_raises(ValueError, subset, data, [])
    assert_raises(ValueError, subset, data, [len(data)])
    assert_raises(ValueError, subset, data, [-1])
    # not part of the view
    assert_raises(ValueError, subset, view, [100])


def test_factor_lookup():
    """Test the mixed-radix index map"""
    spec = FactorSpec([('shape', 3), ('scale', 3), ('x', 8), ('y', 8)],
                      16, 16)
    data = generate(spec)
    assert_array_equal(factor_lookup(data, 0), [0, 0, 0, 0])
    assert_array_equal(factor_lookup(data, 575), [2, 2, 7, 7])
    for i in range(len(data)):
        f = factor_lookup(data, i)
        assert_array_equal(f, data.factor_table[i])
        assert_equal(factor_index(spec, f), i)
    assert_raises(ValueError, factor_lookup, data, 576)
    assert_raises(ValueError, factor_lookup, data, -1)


def test_read_write(tmpdir):
    """Test dataset and graymap IO"""
    data = generate(FactorSpec([('scale', 2), ('x', 3), ('y', 3)], 8, 8))
    fname = op.join(str(tmpdir), 'dataset.npz')
    data.save(fname)
    data2 = read_dataset(fname)
    assert data2.spec == data.spec
    assert_array_equal(data2.images, data.images)
    assert_array_equal(data2.factor_table, data.factor_table)

    fname = op.join(str(tmpdir), 'sprite.pgm')
    write_pgm(fname, data.image(5))
    assert_array_equal(read_pgm(fname), data.image(5))
    assert_raises(ValueError, read_dataset, op.join(str(tmpdir), 'no.npz'))


def test_read_only():
    """Test that generated datasets cannot be modified"""
    data = generate(FactorSpec([('x', 2), ('y', 2)], 8, 8))
    assert_raises(ValueError, data.images.__setitem__, (0, 0, 0), 0.5)
