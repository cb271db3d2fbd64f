"""Recursive disentanglement: metaepochs, leaf-runs and the final stage

A metaepoch trains a population of VAE groups with the UDR score as
evaluation until the best score stops changing. The active latents of the
best model label the data, the data are reduced to one interval per
latent, and training restarts on the smaller set. The labels of all stages
finally supervise a last population trained on the whole dataset.
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import json
import os
import os.path as op

import numpy as np

import logging
logger = logging.getLogger('rpuvae')

from .datasets import FactorSpec, generate, desk_spec, dsprites_spec
from .io import write_checkpoint
from .metrics import mig, masked_mig, importance_from_mi, \
                     dci_disentanglement, N_BINS
from .misc import parse_config, format_config, ConfigError
from .pbt import SearchSpace, LEARNING_RATES, init_population, \
                 run_generation, has_converged, GenerationLog
from .reducer import encode_dataset, reduce, n_candidate_intervals, \
                     reduction_record
from .udr import udr_member, evaluation_subset, KL_MASK_THRESHOLD
from .utils import verbose, derive_seed
from .vae import build_vae, Adam, train_epoch, encode_means, latent_stats, \
                 active_latents
from .vae.model import ARCHITECTURES

PROFILES = ('desk', 'paper')
EVAL_METRICS = ('mig', 'dci')
USABLE = ('converged', 'generation-cap')


class InvalidValue(ValueError):
    """A config value outside its accepted range

    Attributes
    ----------
    key : str
        The offending key.
    """
    def __init__(self, key, msg):
        self.key = key
        ValueError.__init__(self, msg)


def _profile_defaults(profile):
    if profile not in PROFILES:
        raise InvalidValue('profile', 'profile must be one of %s (got %r)'
                           % (PROFILES, profile))
    defaults = dict(profile='desk', factors=tuple(desk_spec().factors),
                    image_size=16, architecture='mlp', hidden=(256, 128),
                    latent_dim=10, beta_mode='tc', population_size=8,
                    models_per_member=3, udr_threshold=0.1, udr_delta=0.005,
                    udr_patience=5, generation_cap=60, eval_size=1000,
                    kl_mask_threshold=KL_MASK_THRESHOLD, size_min=10,
                    max_leaf_runs=3, z_active_threshold=0.75,
                    supervised_epochs=16, eval_metric='mig',
                    label_budget=None, n_bins=N_BINS, metric_size=10000,
                    exploit_hyper=False, max_learning_rate=1., seed=0,
                    n_jobs=1)
    if profile == 'paper':
        defaults.update(profile='paper',
                        factors=tuple(dsprites_spec().factors), image_size=64,
                        architecture='conv', population_size=56,
                        models_per_member=5)
    return defaults


class RunConfig(object):
    """Every knob of a run

    Parameters
    ----------
    profile : 'desk' | 'paper'
        The defaults. 'desk' trains 8 members of 3 MLP VAEs on the
        16x16 {scale: 3, x: 8, y: 8} sprites, 'paper' trains 56 members
        of 5 convolutional VAEs on the 64x64 dsprites layout.
    **kwargs
        Values overriding the profile defaults. Unknown keys are
        rejected.

    Notes
    -----
    The keys are:

    factors, image_size : the dataset layout.
    architecture, hidden, latent_dim, beta_mode : the VAEs.
    population_size, models_per_member, exploit_hyper, max_learning_rate :
    the population.
    udr_threshold, udr_delta, udr_patience, generation_cap : when a
    metaepoch stops and whether its result is kept.
    eval_size, kl_mask_threshold : the UDR evaluation.
    size_min, max_leaf_runs, z_active_threshold : labelling and
    reduction.
    supervised_epochs, eval_metric, label_budget, n_bins, metric_size :
    the supervised stages and the final metrics.
    seed, n_jobs : reproducibility and parallelism.
    """
    def __init__(self, profile='desk', **kwargs):
        defaults = _profile_defaults(profile)
        unknown = sorted(set(kwargs) - set(defaults))
        if len(unknown) > 0:
            raise ValueError('Unknown config key(s): %s' % unknown)
        defaults.update(kwargs)
        defaults['profile'] = profile
        for key, value in defaults.items():
            setattr(self, key, value)
        self.factors = tuple((str(n), int(c)) for n, c in self.factors)
        self.hidden = tuple(int(h) for h in self.hidden)
        self._check()

    def _check(self):
        for key in ('udr_threshold', 'udr_delta', 'z_active_threshold',
                    'kl_mask_threshold', 'max_learning_rate'):
            if not getattr(self, key) > 0:
                raise InvalidValue(key, '%s must be positive (got %s)'
                                   % (key, getattr(self, key)))
        for key, low in (('udr_patience', 1), ('generation_cap', 1),
                         ('size_min', 1), ('max_leaf_runs', 0),
                         ('population_size', 2), ('models_per_member', 2),
                         ('supervised_epochs', 1), ('latent_dim', 1),
                         ('eval_size', 2), ('n_bins', 2),
                         ('metric_size', 2), ('image_size', 1)):
            if int(getattr(self, key)) < low:
                raise InvalidValue(key, '%s must be >= %d (got %s)'
                                   % (key, low, getattr(self, key)))
        if self.eval_metric not in EVAL_METRICS:
            raise InvalidValue('eval_metric',
                               'eval_metric must be one of %s (got %r)'
                               % (EVAL_METRICS, self.eval_metric))
        if self.architecture not in ARCHITECTURES:
            raise InvalidValue('architecture',
                               'architecture must be one of %s (got %r)'
                               % (ARCHITECTURES, self.architecture))
        if self.beta_mode not in ('tc', 'kl'):
            raise InvalidValue('beta_mode',
                               "beta_mode must be 'tc' or 'kl' (got %r)"
                               % self.beta_mode)
        if self.label_budget is not None and self.label_budget < 1:
            raise InvalidValue('label_budget',
                               'label_budget must be None or >= 1 (got %s)'
                               % self.label_budget)
        try:
            self.dataset_spec()
        except ValueError as err:
            raise InvalidValue('factors', str(err))
        if not 0.5 <= self.z_active_threshold <= 1.:
            logger.warning('z_active_threshold %s is outside [0.5, 1]'
                           % self.z_active_threshold)

    def as_dict(self):
        return dict((key, getattr(self, key))
                    for key in _profile_defaults(self.profile))

    def copy(self, **changes):
        """A copy with some values changed"""
        values = self.as_dict()
        profile = values.pop('profile')
        profile = changes.pop('profile', profile)
        values.update(changes)
        return RunConfig(profile, **values)

    def dataset_spec(self):
        return FactorSpec(self.factors, self.image_size, self.image_size)

    def search_space(self):
        """The hyperparameter grids, learning rates capped at
        max_learning_rate"""
        rates = [lr for lr in LEARNING_RATES
                 if lr <= self.max_learning_rate * (1 + 1e-12)]
        return SearchSpace(learning_rates=rates or [self.max_learning_rate],
                           bounds=dict(learning_rate=(
                               min(1e-6, self.max_learning_rate),
                               self.max_learning_rate)))

    def __eq__(self, other):
        return isinstance(other, RunConfig) and \
            self.as_dict() == other.as_dict()

    def __repr__(self):
        return '<RunConfig %s, %d x %d, seed %d>' % (
            self.profile, self.population_size, self.models_per_member,
            self.seed)


def read_config(fname, profile=None, **overrides):
    """Read a RunConfig from a ``key = value`` file

    Parameters
    ----------
    fname : str
        The config file (see rpuvae.misc.parse_config).
    profile : None | 'desk' | 'paper'
        Overrides the profile set in the file (default 'desk').
    **overrides
        Values overriding the file.

    Returns
    -------
    config : RunConfig
        The resolved configuration.
    """
    values, lines = parse_config(fname, _profile_defaults('desk'),
                                 return_lines=True)
    file_profile = values.pop('profile', 'desk')
    values.update(overrides)
    try:
        return RunConfig(profile or file_profile, **values)
    except InvalidValue as err:
        from_file = (err.key not in overrides and
                     not (err.key == 'profile' and profile is not None))
        if not from_file or err.key not in lines:
            raise
        raise ConfigError(str(err), fname, lines[err.key])


class SurrogateLabelStore(object):
    """Append-only collection of surrogate labels

    Every record holds the LEVs of one stage: the global indices of the
    labelled samples of the root dataset and one label column per active
    latent.

    Parameters
    ----------
    n_root : int
        Number of samples of the root dataset.
    """
    def __init__(self, n_root):
        self.n_root = int(n_root)
        self.records = list()

    def __len__(self):
        return len(self.records)

    @property
    def n_columns(self):
        return sum(r['values'].shape[1] for r in self.records)

    def append(self, indices, values, leaf_id=None, metaepoch=0):
        """Add the labels of one stage

        Parameters
        ----------
        indices : array of int, shape (n,)
            Global indices of the labelled samples.
        values : array, shape (n, n_active)
            The labels.
        leaf_id : int | None
            The leaf-run (None for the first metaepoch).
        metaepoch : int
            The metaepoch within the leaf-run.
        """
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != len(indices) or values.shape[1] == 0:
            raise ValueError('invalid input: %d indices and labels of shape '
                             '%s' % (len(indices), values.shape))
        if len(indices) == 0 or indices.min() < 0 or \
                indices.max() >= self.n_root:
            raise ValueError('invalid index: label indices must lie in '
                             '[0, %d)' % self.n_root)
        record = dict(leaf_id=leaf_id, metaepoch=int(metaepoch),
                      indices=indices.copy(), values=values.copy(),
                      n_active=values.shape[1])
        self.records.append(record)
        logger.info('    stored %d labels x %d latents (leaf %s, '
                    'metaepoch %d)' % (len(indices), values.shape[1],
                                       leaf_id, metaepoch))

    def as_matrix(self):
        """Labels of every record side by side over the root dataset

        Returns
        -------
        labels : array, shape (n_root, n_columns)
            The labels, 0 where unknown.
        mask : array of bool, shape (n_root, n_columns)
            Which labels are known.
        """
        labels = np.zeros((self.n_root, self.n_columns))
        mask = np.zeros((self.n_root, self.n_columns), dtype=bool)
        col = 0
        for r in self.records:
            k = r['n_active']
            labels[r['indices'], col:col + k] = r['values']
            mask[r['indices'], col:col + k] = True
            col += k
        return labels, mask

    def summary(self):
        return [dict(leaf_id=r['leaf_id'], metaepoch=r['metaepoch'],
                     n_labels=len(r['indices']), n_active=r['n_active'])
                for r in self.records]


class MetaEpochResult(object):
    """Outcome of one metaepoch

    Attributes
    ----------
    stage : str
        Stage name.
    reason : str
        'converged', 'generation-cap', 'below-UDR-threshold',
        'dataset-too-small' or 'no-structure'.
    converged : bool
        Whether the patience rule fired.
    history : list of float
        Best UDR score of every generation.
    best_member : Member | None
        Snapshot of the best member.
    best_model : int | None
        Index of the best VAE of the best member.
    params : VaeParams | None
        That VAE.
    active : array of int
        Its active latents (empty unless the result is usable).
    levs : LevTable | None
        Its LEVs on the metaepoch's data.
    n_samples : int
        Size of the metaepoch's data.
    """
    def __init__(self, stage, reason, n_samples, history=(), converged=False,
                 best_member=None, best_model=None, params=None,
                 active=(), levs=None):
        self.stage = stage
        self.reason = reason
        self.n_samples = int(n_samples)
        self.history = list(history)
        self.converged = bool(converged)
        self.best_member = best_member
        self.best_model = best_model
        self.params = params
        self.active = np.asarray(active, dtype=np.int64)
        self.levs = levs

    @property
    def usable(self):
        """Whether the result labels the data"""
        return self.reason in USABLE and self.levs is not None

    def as_dict(self):
        out = dict(stage=self.stage, reason=self.reason,
                   n_samples=self.n_samples, converged=self.converged,
                   generations=len(self.history),
                   udr_history=[_finite(s) for s in self.history],
                   active=self.active.tolist(), best_member=None,
                   best_model=self.best_model, best_score=None, hyper=None)
        if self.best_member is not None:
            out.update(best_member=self.best_member.member_id,
                       best_score=_finite(self.best_member.score),
                       hyper=self.best_member.hyper.as_dict())
        return out

    def __repr__(self):
        return '<MetaEpochResult %s: %s after %d generations>' % (
            self.stage, self.reason, len(self.history))


def _finite(x):
    return float(x) if x is not None and np.isfinite(x) else None


class RunOutputs(object):
    """Files written by a run, relative to an output directory

    Parameters
    ----------
    out_dir : str | None
        The directory (created if needed). None writes nothing.
    """
    def __init__(self, out_dir=None):
        self.out_dir = out_dir
        self.files = list()
        if out_dir is not None and not op.isdir(out_dir):
            os.makedirs(out_dir)

    def fname(self, name, fresh=False):
        """Path of an output file, registered in the manifest"""
        if self.out_dir is None:
            return None
        path = op.join(self.out_dir, name)
        if name not in self.files:
            self.files.append(name)
        if fresh and op.exists(path):
            os.remove(path)
        return path

    def manifest(self):
        return sorted(self.files)

    def generation_log(self):
        return GenerationLog(self.fname('generations.ndjson', fresh=True))

    def write_json(self, name, document):
        fname = self.fname(name)
        if fname is not None:
            with open(fname, 'w') as fid:
                json.dump(document, fid, sort_keys=True, indent=2)
                fid.write('\n')
        return fname

    def write_config(self, config):
        fname = self.fname('config_resolved.txt')
        text = format_config(config.as_dict())
        logger.info('Resolved configuration:\n%s' % text.rstrip())
        if fname is not None:
            with open(fname, 'w') as fid:
                fid.write(text)
        return fname


###############################################################################
# Member functions (module level so that worker processes can load them)

class _InitGroup(object):
    """Group of n_models fresh VAEs with their optimizers"""
    def __init__(self, image_shape, config, n_models):
        self.image_shape = image_shape
        self.latent_dim = config.latent_dim
        self.hidden = config.hidden
        self.architecture = config.architecture
        self.n_models = n_models

    def __call__(self, member_id, hyper, random_state):
        theta = [build_vae(self.image_shape, self.latent_dim, self.hidden,
                           self.architecture, random_state=random_state)
                 for _ in range(self.n_models)]
        return theta, [Adam() for _ in range(self.n_models)]


class _TrainGroup(object):
    """One epoch of every VAE of a member, sharing its hyperparameters"""
    def __init__(self, view, beta_mode):
        self.view = view
        self.beta_mode = beta_mode

    def __call__(self, member, random_state):
        for k in range(len(member.theta)):
            member.theta[k], member.optimizer[k], _ = train_epoch(
                member.theta[k], member.optimizer[k], self.view, member.hyper,
                random_state=random_state, beta_mode=self.beta_mode)
        return member


class _UdrScore(object):
    def __init__(self, images, kl_mask_threshold):
        self.images = images
        self.kl_mask_threshold = kl_mask_threshold

    def __call__(self, member, random_state):
        scores, best = udr_member(member.theta, self.images,
                                  self.kl_mask_threshold)
        return best, scores


class _SupervisedScore(object):
    """MIG or DCI of the first VAE of a member against known labels"""
    def __init__(self, images, labels, mask=None, metric='mig',
                 n_bins=N_BINS):
        self.images = images
        self.labels = labels
        self.mask = mask
        self.metric = metric
        self.n_bins = n_bins

    def __call__(self, member, random_state):
        means = encode_means(member.theta[0], self.images)
        if self.mask is not None:
            return masked_mig(means, self.labels, self.mask, self.n_bins)
        if self.metric == 'dci':
            R = importance_from_mi(means, self.labels, self.n_bins)
            return dci_disentanglement(R)
        return mig(means, self.labels, self.n_bins)


def _train_population(view, config, init_fn, step_fn, eval_fn, seed, stage,
                      n_generations, log=None, patience=None):
    """Run generations until the cap or, with patience, until the best
    score settles"""
    space = config.search_space()
    population = init_population(space, config.population_size, seed,
                                 init_fn)
    history, converged = list(), False
    for _ in range(n_generations):
        population = run_generation(population, step_fn, eval_fn, space,
                                    n_jobs=config.n_jobs,
                                    n_samples=len(view),
                                    copy_h=config.exploit_hyper, log=log,
                                    stage=stage)
        history.append(population.best().score)
        if patience is not None and has_converged(history, config.udr_delta,
                                                  patience):
            converged = True
            break
    return population, history, converged


def _write_member(outputs, name, member, model, stage):
    fname = outputs.fname(name)
    if fname is not None:
        write_checkpoint(fname, member.theta[model],
                         member.optimizer[model], member.hyper,
                         meta=dict(stage=stage, member_id=member.member_id,
                                   model=model,
                                   score=_finite(member.score)))


###############################################################################
# Stages

@verbose
def run_metaepoch(view, config, stage='metaepoch-0', outputs=None, log=None,
                  verbose=None):
    """Train a population with UDR evaluation until its best score settles

    Parameters
    ----------
    view : DatasetView | FactorizedDataset
        The training data.
    config : RunConfig
        The configuration.
    stage : str
        Stage name, used for the random streams, the logs and the
        checkpoint name.
    outputs : RunOutputs | None
        Where the checkpoint of the best model goes.
    log : GenerationLog | None
        Receives the member records.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    result : MetaEpochResult
        The best model with its active latents and LEVs when the
        metaepoch converged (or hit the generation cap) with a best score
        of at least udr_threshold.
    """
    n = len(view)
    if n < max(config.size_min, 2):
        logger.info('%s: %d samples, below size_min %d' % (stage, n,
                                                          config.size_min))
        return MetaEpochResult(stage, 'dataset-too-small', n)
    logger.info('%s: training on %d samples' % (stage, n))
    seed = derive_seed(config.seed, stage)
    image_shape = view.images.shape[1:]
    eval_rows = evaluation_subset(n, config.eval_size,
                                  derive_seed(seed, 'eval'))
    init_fn = _InitGroup(image_shape, config, config.models_per_member)
    step_fn = _TrainGroup(view, config.beta_mode)
    eval_fn = _UdrScore(view.images[eval_rows], config.kl_mask_threshold)
    population, history, converged = _train_population(
        view, config, init_fn, step_fn, eval_fn, seed, stage,
        config.generation_cap, log=log, patience=config.udr_patience)

    best = population.best()
    model = 0 if best.model_scores is None else \
        int(np.argmax(best.model_scores))
    params = best.theta[model]
    if outputs is not None:
        _write_member(outputs, '%s.ckpt' % stage, best, model, stage)
    result = MetaEpochResult(stage, 'converged' if converged else
                             'generation-cap', n, history, converged, best,
                             model, params)
    if best.score < config.udr_threshold:
        result.reason = 'below-UDR-threshold'
    else:
        stats = latent_stats(params, view, min(n, config.eval_size),
                             derive_seed(seed, 'stats'))
        result.active = active_latents(stats, config.z_active_threshold)
        if len(result.active) == 0:
            result.reason = 'no-structure'
        else:
            result.levs = encode_dataset(params, view, result.active)
    logger.info('%s: %s after %d generations, best UDR %0.4f, active '
                'latents %s' % (stage, result.reason, len(history),
                                best.score, result.active.tolist()))
    return result


@verbose
def run_leaf(root, first, leaf_index, config, store, outputs=None, log=None,
             verbose=None):
    """Label and reduce recursively, starting from one interval rank

    Parameters
    ----------
    root : FactorizedDataset
        The whole dataset.
    first : MetaEpochResult
        The usable result of the first metaepoch on root.
    leaf_index : int
        The leaf-run number; the first reduction keeps the interval of
        this rank for every active latent.
    config : RunConfig
        The configuration.
    store : SurrogateLabelStore
        Receives the labels of every usable metaepoch.
    outputs : RunOutputs | None
        Checkpoints and reduction diagnostics go there.
    log : GenerationLog | None
        Receives the member records.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    record : dict
        The stages of the leaf-run and why it stopped.
    """
    if not first.usable:
        raise ValueError('invalid input: the first metaepoch ended with %r'
                         % first.reason)
    record = dict(leaf_id=int(leaf_index), stages=list(), stop_reason=None)
    if leaf_index >= n_candidate_intervals(first.levs):
        record['stop_reason'] = 'no-structure'
        logger.info('Leaf %d: fewer than %d candidate intervals'
                    % (leaf_index, leaf_index + 1))
        return record
    result, rank, k = first, leaf_index, 1
    view = root
    while True:
        if outputs is not None:
            outputs.write_json('reduction_leaf%d_%d.json' % (leaf_index, k),
                               reduction_record(result.levs, rank))
        view, reason = reduce(view, result.params, result.active, rank,
                              config.size_min, levs=result.levs)
        if reason is not None:
            record['stop_reason'] = reason
            break
        if len(view) <= config.size_min:
            record['stop_reason'] = 'too-small'
            break
        logger.info('Leaf %d: reduced to %d samples' % (leaf_index,
                                                        len(view)))
        result = run_metaepoch(view, config, stage='leaf%d-metaepoch%d'
                               % (leaf_index, k), outputs=outputs, log=log)
        record['stages'].append(result.as_dict())
        if not result.usable:
            record['stop_reason'] = result.reason
            break
        store.append(result.levs.indices, result.levs.values,
                     leaf_id=leaf_index, metaepoch=k)
        rank, k = 0, k + 1
    logger.info('Leaf %d: stopped (%s) after %d metaepoch(s)'
                % (leaf_index, record['stop_reason'], len(record['stages'])))
    return record


def _final_metrics(params, root, config):
    rows = evaluation_subset(len(root), config.metric_size,
                             derive_seed(config.seed, 'metrics'))
    means = encode_means(params, root.images[rows])
    factors = root.factors[rows]
    return dict(mig=mig(means, factors, config.n_bins),
                dci=dci_disentanglement(importance_from_mi(means, factors,
                                                           config.n_bins)))


def _supervised_population(root, config, eval_fn, stage, outputs, log):
    init_fn = _InitGroup(root.images.shape[1:], config, 1)
    step_fn = _TrainGroup(root, config.beta_mode)
    population, history, _ = _train_population(
        root, config, init_fn, step_fn, eval_fn,
        derive_seed(config.seed, stage), stage, config.supervised_epochs,
        log=log)
    best = population.best()
    if outputs is not None:
        _write_member(outputs, '%s.ckpt' % stage, best, 0, stage)
    logger.info('%s: best score %0.4f after %d generations'
                % (stage, best.score, len(history)))
    return best, history


@verbose
def final_supervised(root, store, config, report=None, outputs=None,
                     log=None, verbose=None):
    """Train the final population against the surrogate labels

    Parameters
    ----------
    root : FactorizedDataset
        The whole dataset (training data of the final stage).
    store : SurrogateLabelStore
        The labels of all stages.
    config : RunConfig
        The configuration (supervised_epochs generations of one VAE per
        member).
    report : dict | None
        If given, receives a 'final' entry.
    outputs, log : RunOutputs | None, GenerationLog | None
        Where checkpoints and member records go.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    params : VaeParams
        The VAE of the best member.
    """
    if len(store) == 0:
        raise ValueError('invalid input: the surrogate label store is empty')
    labels, mask = store.as_matrix()
    rows = np.where(mask.any(axis=1))[0]
    eval_fn = _SupervisedScore(root.images[rows], labels[rows], mask[rows],
                               n_bins=config.n_bins)
    logger.info('final: %d labelled samples, %d label columns'
                % (len(rows), labels.shape[1]))
    best, history = _supervised_population(root, config, eval_fn, 'final',
                                           outputs, log)
    if report is not None:
        report['final'] = dict(score_history=[_finite(s) for s in history],
                               best_score=_finite(best.score),
                               hyper=best.hyper.as_dict(),
                               n_labelled=int(len(rows)),
                               n_columns=int(labels.shape[1]))
    return best.theta[0]


@verbose
def run_supervised(root, config, report=None, outputs=None, log=None,
                   verbose=None):
    """Train a population against the ground-truth factors

    Parameters
    ----------
    root : FactorizedDataset
        The dataset.
    config : RunConfig
        eval_metric picks MIG or DCI; label_budget (None for every sample)
        sets how many seeded random samples are labelled.
    report : dict | None
        If given, receives a 'supervised' entry.
    outputs, log : RunOutputs | None, GenerationLog | None
        Where checkpoints and member records go.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    params : VaeParams
        The VAE of the best member.
    """
    n = len(root)
    budget = n if config.label_budget is None else config.label_budget
    if budget > n:
        raise ValueError('invalid input: label budget %d exceeds the %d '
                         'samples' % (budget, n))
    rows = evaluation_subset(n, budget, derive_seed(config.seed, 'labels'))
    eval_fn = _SupervisedScore(root.images[rows], root.factors[rows],
                               metric=config.eval_metric, n_bins=config.n_bins)
    logger.info('supervised: %s on %d labelled samples'
                % (config.eval_metric.upper(), len(rows)))
    best, history = _supervised_population(root, config, eval_fn,
                                           'supervised', outputs, log)
    if report is not None:
        report['supervised'] = dict(metric=config.eval_metric,
                                    n_labelled=int(len(rows)),
                                    score_history=[_finite(s)
                                                   for s in history],
                                    best_score=_finite(best.score),
                                    hyper=best.hyper.as_dict())
    return best.theta[0]


@verbose
def run_pbt_u(view, config, outputs=None, log=None, verbose=None):
    """A single metaepoch: the unsupervised population on its own

    Returns the MetaEpochResult of run_metaepoch.
    """
    return run_metaepoch(view, config, stage='pbt-u', outputs=outputs,
                         log=log)


def _root_dataset(config, root):
    if root is None:
        root = generate(config.dataset_spec())
    return root


def _report(mode, config, root):
    return dict(mode=mode, config=config.as_dict(),
                dataset=dict(spec=root.spec.to_dict(), n_samples=len(root)))


def _finish(report, outputs, params, root, config):
    if params is not None:
        fname = outputs.fname('model.ckpt')
        if fname is not None:
            write_checkpoint(fname, params, meta=dict(stage='final'))
        report['metrics'] = _final_metrics(params, root, config)
        logger.info('Final MIG %0.4f, DCI %0.4f'
                    % (report['metrics']['mig'], report['metrics']['dci']))
    outputs.fname('report.json')
    report['files'] = outputs.manifest()
    outputs.write_json('report.json', report)
    return report


class NothingLearnedError(RuntimeError):
    """The first metaepoch found no usable representation"""


@verbose
def run_rpu(config, root=None, out_dir=None, verbose=None):
    """Recursive unsupervised disentanglement followed by the final
    supervised stage

    Parameters
    ----------
    config : RunConfig
        The configuration.
    root : FactorizedDataset | None
        The dataset (rendered from config when None).
    out_dir : str | None
        Output directory for the report, the checkpoints, the generation
        log and the reduction diagnostics.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    params : VaeParams
        The final model.
    report : dict
        JSON-serializable run report.
    """
    root = _root_dataset(config, root)
    outputs = RunOutputs(out_dir)
    outputs.write_config(config)
    log = outputs.generation_log()
    report = _report('rpu', config, root)

    first = run_metaepoch(root, config, stage='metaepoch-0', outputs=outputs,
                          log=log)
    report['metaepoch'] = first.as_dict()
    if not first.usable:
        report['files'] = outputs.manifest()
        raise NothingLearnedError('the first metaepoch ended with %r'
                                  % first.reason)
    store = SurrogateLabelStore(len(root))
    store.append(first.levs.indices, first.levs.values, leaf_id=None,
                 metaepoch=0)
    report['leaves'] = [run_leaf(root, first, leaf, config, store, outputs,
                                 log)
                        for leaf in range(config.max_leaf_runs)]
    report['labels'] = store.summary()
    params = final_supervised(root, store, config, report, outputs, log)
    return params, _finish(report, outputs, params, root, config)


@verbose
def run_mode(mode, config, root=None, out_dir=None, verbose=None):
    """Run one of the training modes

    Parameters
    ----------
    mode : 'rpu' | 'pbt-u' | 'pbt-s' | 'pbt-semi'
        'rpu' is run_rpu, 'pbt-u' a single unsupervised metaepoch,
        'pbt-s' supervision with every label and 'pbt-semi' supervision
        with label_budget labels (1000 if unset).
    config : RunConfig
        The configuration.
    root : FactorizedDataset | None
        The dataset (rendered from config when None).
    out_dir : str | None
        The output directory.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    params : VaeParams | None
        The trained model.
    report : dict
        The run report.
    """
    if mode == 'rpu':
        return run_rpu(config, root, out_dir)
    if mode not in ('pbt-u', 'pbt-s', 'pbt-semi'):
        raise ValueError('mode must be rpu, pbt-u, pbt-s or pbt-semi (got '
                         '%r)' % mode)
    if mode == 'pbt-s':
        config = config.copy(label_budget=None)
    elif mode == 'pbt-semi' and config.label_budget is None:
        config = config.copy(label_budget=1000)
    root = _root_dataset(config, root)
    if mode == 'pbt-semi':
        config = config.copy(label_budget=min(config.label_budget,
                                              len(root)))
    outputs = RunOutputs(out_dir)
    outputs.write_config(config)
    log = outputs.generation_log()
    report = _report(mode, config, root)
    if mode == 'pbt-u':
        result = run_pbt_u(root, config, outputs, log)
        report['metaepoch'] = result.as_dict()
        params = result.params
    else:
        params = run_supervised(root, config, report, outputs, log)
    return params, _finish(report, outputs, params, root, config)
