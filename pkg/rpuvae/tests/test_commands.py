import json
import os.path as op

import numpy as np
from numpy.testing import assert_equal, assert_raises

from rpuvae import commands
from rpuvae.commands import cmd_eval, cmd_traverse, main_generate, \
                            main_train, main_eval, main_traverse
from rpuvae.datasets import read_dataset, read_pgm
from rpuvae.io import write_checkpoint
from rpuvae.pipeline import RunConfig
from rpuvae.utils import NumericalError
from rpuvae.vae import build_vae, DivergedError

tiny = """# a tiny run
factors = scale:3, x:4, y:4
image_size = 16
hidden = 16
latent_dim = 3
population_size = 2
models_per_member = 2
generation_cap = 2
udr_patience = 1
udr_threshold = 1e-9
kl_mask_threshold = 1e-6
z_active_threshold = 0.5
supervised_epochs = 2
size_min = 2
max_leaf_runs = 0
eval_size = 32
metric_size = 48
n_bins = 4
max_learning_rate = 0.01
"""


def _config_file(tmpdir, text=tiny):
    fname = op.join(str(tmpdir), 'run.cfg')
    with open(fname, 'w') as fid:
        fid.write(text)
    return fname


def _checkpoint(tmpdir):
    fname = op.join(str(tmpdir), 'model.ckpt')
    write_checkpoint(fname, build_vae((16, 16), latent_dim=3, hidden=(16,),
                                      random_state=0))
    return fname


def test_generate(tmpdir):
    """Test dataset generation from the command line"""
    out = op.join(str(tmpdir), 'data')
    code = main_generate(['--config', _config_file(tmpdir), '--out', out,
                          '-n', '2'])
    assert_equal(code, 0)
    data = read_dataset(op.join(out, 'dataset.npz'))
    assert_equal(len(data), 48)
    assert_equal(read_pgm(op.join(out, 'image_000001.pgm')).shape, (16, 16))
    with open(op.join(out, 'generate_report.json')) as fid:
        report = json.load(fid)
    assert_equal(report['files'], ['config_resolved.txt', 'dataset.npz',
                                   'generate_report.json',
                                   'image_000000.pgm', 'image_000001.pgm'])


def test_usage_errors(tmpdir):
    """Test exit code 2 on bad configs and command lines"""
    out = str(tmpdir)
    bad = _config_file(tmpdir, tiny + 'population = 3\n')
    assert_equal(main_generate(['--config', bad, '--out', out]), 2)
    assert_equal(main_generate(['--config', op.join(out, 'nope.cfg')]), 2)
    bad = _config_file(tmpdir, 'udr_patience = 0\n')
    assert_equal(main_train(['rpu', '--config', bad, '--out', out]), 2)
    for argv in (['fly'], [], ['rpu', 'pbt-u'], ['rpu', '--profile', 'big']):
        try:
            main_train(argv)
        except SystemExit as exp:
            assert_equal(exp.code, 2)
        else:
            raise AssertionError('%s accepted' % argv)
    assert_equal(main_eval([op.join(out, 'missing.ckpt'), '--config',
                            _config_file(tmpdir), '--out', out]), 2)
    assert_raises(SystemExit, main_traverse, [_checkpoint(tmpdir),
                                              '--steps', '1'])


def test_train(tmpdir):
    """Test training from the command line"""
    out = op.join(str(tmpdir), 'run')
    argv = ['pbt-u', '--config', _config_file(tmpdir), '--out', out,
            '--seed', '3']
    assert_equal(main_train(argv), 0)
    with open(op.join(out, 'report.json')) as fid:
        report = json.load(fid)
    assert_equal(report['config']['seed'], 3)
    assert_equal(report['mode'], 'pbt-u')
    assert 'pbt-u.ckpt' in report['files']
    assert op.isfile(op.join(out, 'generations.ndjson'))


def test_train_diverged(tmpdir, monkeypatch):
    """Test exit code 3 on divergence"""

    def diverge(mode, config, root, out_dir):
        raise DivergedError('loss is nan', batch_index=0,
                            stage='metaepoch-0')

    monkeypatch.setattr(commands, 'run_mode', diverge)
    assert_equal(main_train(['rpu', '--config', _config_file(tmpdir),
                             '--out', str(tmpdir)]), 3)


def test_train_numerical_failure(tmpdir, monkeypatch):
    """Test exit code 1 when a score is undefined"""

    def undefined(mode, config, root, out_dir):
        raise NumericalError('undefined entropy: factor column(s) [0] are '
                             'constant')

    monkeypatch.setattr(commands, 'run_mode', undefined)
    assert_equal(main_train(['rpu', '--config', _config_file(tmpdir),
                             '--out', str(tmpdir)]), 1)


def test_eval(tmpdir):
    """Test scoring a checkpoint"""
    config = RunConfig(factors=(('scale', 3), ('x', 4), ('y', 4)),
                       metric_size=48, n_bins=4)
    report = cmd_eval(_checkpoint(tmpdir), config, str(tmpdir))
    assert_equal(sorted(report['metrics']), ['dci', 'kl', 'mig'])
    assert 0 <= report['metrics']['mig'] <= 1
    assert 0 <= report['metrics']['dci'] <= 1
    assert_equal(len(report['metrics']['kl']), 3)
    assert_equal(report['n_samples'], 48)
    with open(op.join(str(tmpdir), 'eval_report.json')) as fid:
        assert_equal(json.load(fid), report)
    report = cmd_eval(_checkpoint(tmpdir), config, None, metrics=['kl'])
    assert_equal(list(report['metrics']), ['kl'])
    assert_raises(ValueError, cmd_eval, _checkpoint(tmpdir), config, None,
                  metrics=['sap'])


def test_eval_fresh_model(tmpdir):
    """Test that untrained desk models score a MIG near zero"""
    config = RunConfig()
    fname = op.join(str(tmpdir), 'fresh.ckpt')
    for seed in range(5):
        write_checkpoint(fname, build_vae((16, 16), random_state=seed))
        report = cmd_eval(fname, config, None, metrics=['mig'])
        assert report['metrics']['mig'] < 0.1


def test_traverse(tmpdir):
    """Test traversal grids"""
    config = RunConfig(factors=(('scale', 3), ('x', 4), ('y', 4)))
    ckpt = _checkpoint(tmpdir)
    cmd_traverse(ckpt, config, str(tmpdir), sample_index=5, steps=4)
    grid = read_pgm(op.join(str(tmpdir), 'traversal.pgm'))
    assert_equal(grid.shape, (3 * 16, 4 * 16))
    assert np.all((grid >= 0) & (grid <= 1))
    assert_raises(ValueError, cmd_traverse, ckpt, config, None, steps=1)
    assert_raises(ValueError, cmd_traverse, ckpt, config, None,
                  sample_index=48)
    out = op.join(str(tmpdir), 'cli')
    assert_equal(main_traverse([ckpt, '--config', _config_file(tmpdir),
                                '--out', out, '--steps', '3']), 0)
    assert_equal(read_pgm(op.join(out, 'traversal.pgm')).shape, (48, 48))
