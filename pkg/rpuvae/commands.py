"""Command-line commands

Every ``cmd_*`` function does the work of one script of ``bin/`` and
returns a JSON-serializable report; the ``main_*`` functions parse the
command line, map failures to exit codes and are what the scripts call.

Exit codes: 0 on success, 1 when the first metaepoch learned nothing or a
score or estimator was undefined on the data, 2 on a malformed config file
or invalid command line and 3 when training diverged.
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import sys
from optparse import OptionParser

import numpy as np

import logging
logger = logging.getLogger('rpuvae')

from .datasets import generate, read_dataset, write_pgm
from .io import read_checkpoint
from .metrics import mig, importance_from_mi, dci_disentanglement
from .pipeline import RunConfig, RunOutputs, read_config, run_mode, \
                      NothingLearnedError, PROFILES
from .udr import evaluation_subset
from .utils import verbose, derive_seed, NumericalError
from .vae import DivergedError, encode, encode_means, kl_per_dim, traverse

MODES = ('rpu', 'pbt-u', 'pbt-s', 'pbt-semi')
EVAL_METRICS = ('mig', 'dci', 'kl')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3


def _dataset(config, dataset):
    """The dataset of a command: a file, an object or rendered from config"""
    if dataset is None:
        return generate(config.dataset_spec())
    if isinstance(dataset, str):
        return read_dataset(dataset)
    return dataset


def _finish(outputs, report, name):
    outputs.fname(name)
    report['files'] = outputs.manifest()
    outputs.write_json(name, report)
    return report


@verbose
def cmd_generate(config, out_dir, n_images=0, verbose=None):
    """Render the dataset of a config

    Writes dataset.npz, the first n_images images as PGM files and
    generate_report.json into out_dir.
    """
    outputs = RunOutputs(out_dir)
    outputs.write_config(config)
    data = generate(config.dataset_spec())
    data.save(outputs.fname('dataset.npz'))
    for k in range(min(n_images, len(data))):
        write_pgm(outputs.fname('image_%06d.pgm' % k), data.image(k))
    report = dict(dataset=dict(spec=data.spec.to_dict(),
                               n_samples=len(data)))
    return _finish(outputs, report, 'generate_report.json')


@verbose
def cmd_train(mode, config, out_dir, dataset=None, verbose=None):
    """Train in one of the modes rpu, pbt-u, pbt-s or pbt-semi

    Returns the run report (also written to out_dir/report.json).
    """
    if mode not in MODES:
        raise ValueError('mode must be one of %s (got %r)' % (MODES, mode))
    data = None if dataset is None else _dataset(config, dataset)
    _, report = run_mode(mode, config, data, out_dir)
    return report


@verbose
def cmd_eval(checkpoint, config, out_dir, dataset=None,
             metrics=EVAL_METRICS, verbose=None):
    """Score a checkpoint against the ground-truth factors

    Parameters
    ----------
    checkpoint : str
        The checkpoint file.
    config : RunConfig
        Gives the dataset (when dataset is None), metric_size, n_bins and
        the seed of the evaluation subset.
    out_dir : str | None
        eval_report.json and config_resolved.txt go there.
    dataset : str | FactorizedDataset | None
        The evaluation data.
    metrics : sequence of str
        Among 'mig', 'dci' and 'kl' (mean KL of every latent).
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    report : dict
        The scores.
    """
    unknown = sorted(set(metrics) - set(EVAL_METRICS))
    if len(unknown) > 0:
        raise ValueError('Unknown metric(s) %s, use %s' % (unknown,
                                                          EVAL_METRICS))
    outputs = RunOutputs(out_dir)
    outputs.write_config(config)
    params = read_checkpoint(checkpoint).params
    data = _dataset(config, dataset)
    rows = evaluation_subset(len(data), config.metric_size,
                             derive_seed(config.seed, 'metrics'))
    images, factors = data.images[rows], data.factors[rows]
    scores = dict()
    if 'mig' in metrics or 'dci' in metrics:
        means = encode_means(params, images)
    if 'mig' in metrics:
        scores['mig'] = mig(means, factors, config.n_bins)
    if 'dci' in metrics:
        R = importance_from_mi(means, factors, config.n_bins)
        scores['dci'] = dci_disentanglement(R)
    if 'kl' in metrics:
        mu, log_var = encode(params, images)
        scores['kl'] = kl_per_dim(mu, log_var).mean(axis=0).tolist()
    for name in sorted(scores):
        logger.info('%s: %s' % (name, scores[name]))
    report = dict(checkpoint=str(checkpoint), n_samples=int(len(rows)),
                  metrics=scores)
    return _finish(outputs, report, 'eval_report.json')


@verbose
def cmd_traverse(checkpoint, config, out_dir, sample_index=0, span=2.,
                 steps=8, dataset=None, verbose=None):
    """Write the latent traversals of one image as a PGM grid

    Row j of traversal.pgm sweeps latent j over [mu_j - span, mu_j + span]
    in steps images.
    """
    if steps < 2:
        raise ValueError('invalid input: steps must be >= 2 (got %s)' % steps)
    outputs = RunOutputs(out_dir)
    outputs.write_config(config)
    params = read_checkpoint(checkpoint).params
    data = _dataset(config, dataset)
    if not 0 <= sample_index < len(data):
        raise ValueError('invalid index: sample %s not in [0, %d)'
                         % (sample_index, len(data)))
    image = data.image(sample_index)
    rows = [np.concatenate(list(traverse(params, image, j, span, steps)),
                           axis=1)
            for j in range(params.latent_dim)]
    fname = outputs.fname('traversal.pgm')
    if fname is not None:
        write_pgm(fname, np.concatenate(rows, axis=0))
    report = dict(checkpoint=str(checkpoint), sample_index=int(sample_index),
                  span=float(span), steps=int(steps),
                  latent_dim=params.latent_dim)
    return _finish(outputs, report, 'traverse_report.json')


###############################################################################
# Command line

def _parser(usage):
    parser = OptionParser(usage=usage)
    parser.add_option("-c", "--config", dest="config",
                      help="Run config file (key = value)", metavar="FILE",
                      default=None)
    parser.add_option("-s", "--seed", dest="seed", type="int",
                      help="Master seed", default=None)
    parser.add_option("-j", "--threads", dest="n_jobs", type="int",
                      help="Number of members trained in parallel",
                      default=None)
    parser.add_option("-p", "--profile", dest="profile", type="choice",
                      choices=list(PROFILES), default=None,
                      help="Default values: desk or paper")
    parser.add_option("-o", "--out", dest="out_dir", metavar="DIR",
                      help="Output directory", default='.')
    parser.add_option("-v", "--verbose", dest="verbose", action="store_true",
                      help="Print debugging messages", default=False)
    return parser


def _config(options):
    overrides = dict()
    if options.seed is not None:
        overrides['seed'] = options.seed
    if options.n_jobs is not None:
        overrides['n_jobs'] = options.n_jobs
    if options.config is not None:
        return read_config(options.config, options.profile, **overrides)
    return RunConfig(options.profile or 'desk', **overrides)


def _run(command, options):
    """Call command(config) and turn failures into exit codes"""
    try:
        config = _config(options)
    except ValueError as exp:
        print('%s' % exp, file=sys.stderr)
        return EXIT_USAGE
    try:
        command(config, verbose='DEBUG' if options.verbose else None)
    except DivergedError as exp:
        print('Training diverged: %s' % exp, file=sys.stderr)
        return EXIT_DIVERGED
    except NothingLearnedError as exp:
        print('Nothing learned: %s' % exp, file=sys.stderr)
        return EXIT_FAILED
    except NumericalError as exp:
        print('Numerical failure: %s' % exp, file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, IOError) as exp:
        print('%s' % exp, file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main_generate(argv=None):
    parser = _parser("usage: %prog [options]")
    parser.add_option("-n", "--n-images", dest="n_images", type="int",
                      help="Number of images also written as PGM files",
                      default=0)
    options, _ = parser.parse_args(argv)
    return _run(lambda config, verbose: cmd_generate(
        config, options.out_dir, options.n_images, verbose=verbose), options)


def main_train(argv=None):
    parser = _parser("usage: %%prog [options] {%s}" % '|'.join(MODES))
    parser.add_option("-d", "--dataset", dest="dataset", metavar="FILE",
                      help="Dataset file (rendered from the config if not "
                           "given)", default=None)
    options, args = parser.parse_args(argv)
    if len(args) != 1 or args[0] not in MODES:
        parser.error('one mode among %s is needed' % ', '.join(MODES))
    return _run(lambda config, verbose: cmd_train(
        args[0], config, options.out_dir, options.dataset, verbose=verbose),
        options)


def main_eval(argv=None):
    parser = _parser("usage: %prog [options] CHECKPOINT")
    parser.add_option("-d", "--dataset", dest="dataset", metavar="FILE",
                      help="Dataset file (rendered from the config if not "
                           "given)", default=None)
    parser.add_option("-m", "--metrics", dest="metrics",
                      help="Comma separated metrics among %s"
                           % ', '.join(EVAL_METRICS),
                      default=','.join(EVAL_METRICS))
    options, args = parser.parse_args(argv)
    if len(args) != 1:
        parser.error('a checkpoint file is needed')
    metrics = [m.strip() for m in options.metrics.split(',') if m.strip()]
    return _run(lambda config, verbose: cmd_eval(
        args[0], config, options.out_dir, options.dataset, metrics,
        verbose=verbose), options)


def main_traverse(argv=None):
    parser = _parser("usage: %prog [options] CHECKPOINT")
    parser.add_option("-d", "--dataset", dest="dataset", metavar="FILE",
                      help="Dataset file (rendered from the config if not "
                           "given)", default=None)
    parser.add_option("-i", "--index", dest="sample_index", type="int",
                      help="Index of the base image", default=0)
    parser.add_option("--span", dest="span", type="float",
                      help="Half width of the sweep", default=2.)
    parser.add_option("--steps", dest="steps", type="int",
                      help="Images per latent (>= 2)", default=8)
    options, args = parser.parse_args(argv)
    if len(args) != 1:
        parser.error('a checkpoint file is needed')
    if options.steps < 2:
        parser.error('--steps must be at least 2')
    return _run(lambda config, verbose: cmd_traverse(
        args[0], config, options.out_dir, options.sample_index,
        options.span, options.steps, options.dataset, verbose=verbose),
        options)
