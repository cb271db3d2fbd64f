"""Population based training

A population of members is trained in synchronous generations. Every
generation each member is stepped (one epoch) and evaluated, then the
worst members copy the weights of the best ones (exploit) and perturb
their hyperparameters (explore).
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import copy as cp
import json

import numpy as np

import logging
logger = logging.getLogger('rpuvae')

from .vae import Hyper, DivergedError
from .parallel import parallel_func
from .utils import check_random_state, derive_seed

BATCH_SIZES = (8, 16, 32, 64, 128, 256, 512, 1024)
LEARNING_RATES = tuple(np.logspace(-5, 0, 30))
BETAS = tuple(1.5 ** np.linspace(1, 15, 24))
EXPLORE_FACTORS = (0.5, 0.8, 1.2, 2.)
EXPLOIT_FRACTION = 0.2
BOUNDS = dict(learning_rate=(1e-6, 1.), batch_size=(1, 1024),
              beta=(1e-2, 1e6))
LOG_FIELDS = ('generation', 'member_id', 'learning_rate', 'batch_size',
              'beta', 'score', 'stage')


class SearchSpace(object):
    """Initialization grids and clamping bounds of the hyperparameters

    Parameters
    ----------
    batch_sizes : sequence of int
        Initial batch sizes.
    learning_rates : sequence of float
        Initial learning rates (default: 30 log-uniform points in
        [1e-5, 1]).
    betas : sequence of float
        Initial betas (default: 24 geometric points 1.5 ** 1 ... 1.5 ** 15).
    bounds : dict | None
        (low, high) per hyperparameter name; missing names use the
        defaults.
    factors : sequence of float
        Multiplicative explore factors.
    """
    def __init__(self, batch_sizes=BATCH_SIZES, learning_rates=LEARNING_RATES,
                 betas=BETAS, bounds=None, factors=EXPLORE_FACTORS):
        self.batch_sizes = [int(b) for b in batch_sizes]
        self.learning_rates = [float(lr) for lr in learning_rates]
        self.betas = [float(b) for b in betas]
        self.factors = [float(f) for f in factors]
        self.bounds = dict(BOUNDS)
        if bounds is not None:
            self.bounds.update(bounds)
        for name in ('batch_sizes', 'learning_rates', 'betas', 'factors'):
            if len(getattr(self, name)) == 0:
                raise ValueError('The %s grid is empty' % name)
        for name, (lo, hi) in self.bounds.items():
            if not 0 < lo <= hi:
                raise ValueError('Bounds of %s must satisfy 0 < low <= high '
                                 '(got %s, %s)' % (name, lo, hi))

    def sample(self, random_state=None):
        """Draw a Hyper uniformly from the grids"""
        rng = check_random_state(random_state)
        lrs, sizes, betas = self.learning_rates, self.batch_sizes, self.betas
        return Hyper(lrs[rng.randint(len(lrs))],
                     sizes[rng.randint(len(sizes))],
                     betas[rng.randint(len(betas))])

    def clamp(self, hyper, n_samples=None):
        """Clamp a Hyper to the bounds (and the batch size to n_samples)"""
        lr_lo, lr_hi = self.bounds['learning_rate']
        b_lo, b_hi = self.bounds['batch_size']
        if n_samples is not None:
            b_hi = min(b_hi, n_samples)
        beta_lo, beta_hi = self.bounds['beta']
        return Hyper(np.clip(hyper.learning_rate, lr_lo, lr_hi),
                     int(np.clip(int(round(hyper.batch_size)), max(b_lo, 1),
                                 max(b_hi, 1))),
                     np.clip(hyper.beta, beta_lo, beta_hi))


class Member(object):
    """One member of a population

    Parameters
    ----------
    member_id : int
        Stable identifier.
    theta : object
        Trainable state (for instance a list of VaeParams).
    hyper : Hyper
        Hyperparameters.
    optimizer : object
        Optimizer state matching theta.

    Attributes
    ----------
    score : float
        Last evaluation (-inf before the first one or after divergence).
    t : int
        Number of generations the member went through.
    model_scores : array | None
        Per-model scores when theta holds several models.
    """
    def __init__(self, member_id, theta, hyper, optimizer=None):
        self.member_id = int(member_id)
        self.theta = theta
        self.hyper = hyper
        self.optimizer = optimizer
        self.score = -np.inf
        self.t = 0
        self.model_scores = None
        self.diverged = False
        self.divergence = None
        self.exploited_from = None

    def copy(self):
        return cp.deepcopy(self)

    def __repr__(self):
        return ('<Member %d, t=%d, score=%s, %s>'
                % (self.member_id, self.t, self.score, self.hyper))


class Population(object):
    """Fixed-size list of members

    Parameters
    ----------
    members : list of Member
        The members, with distinct ids.
    seed : int
        Master seed; per-member streams are derived from it.
    generation : int
        Number of generations run so far.
    """
    def __init__(self, members, seed, generation=0):
        ids = [m.member_id for m in members]
        if len(set(ids)) != len(ids):
            raise ValueError('Member ids must be unique (got %s)' % ids)
        self.members = list(members)
        self.seed = int(seed)
        self.generation = int(generation)

    def __len__(self):
        return len(self.members)

    @property
    def scores(self):
        return np.array([m.score for m in self.members])

    def ranked(self):
        """Members by decreasing score, ties broken by increasing id

        Among equal scores, members that were not just overwritten by
        exploit come first.
        """
        return sorted(self.members, key=lambda m: (
            -m.score, m.exploited_from is not None, m.member_id))

    def best(self):
        return self.ranked()[0]

    def copy(self):
        return cp.deepcopy(self)

    def __repr__(self):
        return ('<Population of %d, generation %d, best score %s>'
                % (len(self), self.generation, self.best().score))


def init_population(space, size, random_state=None, init_fn=None):
    """Create a population with hyperparameters drawn from the grids

    Parameters
    ----------
    space : SearchSpace
        The search space.
    size : int
        Number of members (>= 2).
    random_state : None | int | np.random.RandomState
        An int is used as the master seed; otherwise the master seed is
        drawn from the generator.
    init_fn : callable | None
        init_fn(member_id, hyper, random_state) returns (theta, optimizer).
        None leaves theta empty.

    Returns
    -------
    population : Population
        The members at t = 0.
    """
    if size < 2:
        raise ValueError('A population needs at least 2 members (got %s)'
                         % size)
    if isinstance(random_state, (int, np.integer)):
        seed = int(random_state)
    else:
        seed = int(check_random_state(random_state).randint(2 ** 31))
    rng = np.random.RandomState(derive_seed(seed, 'hyper'))
    members = list()
    for member_id in range(size):
        hyper = space.sample(rng)
        theta, optimizer = None, None
        if init_fn is not None:
            member_rng = np.random.RandomState(derive_seed(seed, member_id,
                                                           'init'))
            theta, optimizer = init_fn(member_id, hyper, member_rng)
        members.append(Member(member_id, theta, hyper, optimizer))
    return Population(members, seed)


def _step_and_eval(member, step_fn, eval_fn, seed):
    """Train one member for one step and evaluate it"""
    rng = np.random.RandomState(seed)
    member = member.copy()
    member.diverged = False
    member.divergence = None
    member.exploited_from = None
    try:
        member = step_fn(member, rng)
    except DivergedError as exp:
        member.diverged = True
        member.score = -np.inf
        member.model_scores = None
        member.divergence = str(exp)
        return member
    result = eval_fn(member, rng)
    if isinstance(result, tuple):
        score, model_scores = result
        member.model_scores = np.asarray(model_scores, dtype=np.float64)
    else:
        score = result
    score = float(score)
    member.score = score if np.isfinite(score) else -np.inf
    return member


def exploit(population, random_state=None, copy_h=False,
            fraction=EXPLOIT_FRACTION):
    """Bottom members copy the state of randomly chosen top members

    Parameters
    ----------
    population : Population
        An evaluated population. Not modified.
    random_state : None | int | np.random.RandomState
        Chooses the source of every copy.
    copy_h : bool
        Also copy the hyperparameters of the source.
    fraction : float
        Fraction of the population in the top and bottom groups.

    Returns
    -------
    population : Population
        The new population. Exploited members have ``exploited_from`` set
        to the id of their source.
    """
    rng = check_random_state(random_state)
    population = population.copy()
    n_cut = int(np.floor(fraction * len(population)))
    if n_cut == 0:
        return population
    ranked = population.ranked()
    top, bottom = ranked[:n_cut], ranked[-n_cut:]
    for member in bottom:
        source = top[rng.randint(n_cut)]
        member.theta = cp.deepcopy(source.theta)
        member.optimizer = cp.deepcopy(source.optimizer)
        member.score = source.score
        member.model_scores = cp.deepcopy(source.model_scores)
        if copy_h:
            member.hyper = source.hyper.copy()
        member.exploited_from = source.member_id
        logger.debug('    member %d copies member %d'
                     % (member.member_id, source.member_id))
    return population


def explore(hyper, random_state=None, space=None, n_samples=None,
            factors=None):
    """Multiply every hyperparameter by a random explore factor

    Parameters
    ----------
    hyper : Hyper
        The hyperparameters.
    random_state : None | int | np.random.RandomState
        Draws one factor per hyperparameter (learning rate, batch size,
        beta, in that order).
    space : SearchSpace | None
        Factor set and bounds. None uses the defaults.
    n_samples : int | None
        Upper bound of the batch size.
    factors : sequence of 3 float | None
        Use these factors instead of drawing them.

    Returns
    -------
    hyper : Hyper
        The perturbed hyperparameters, with the batch size rounded.
    """
    space = SearchSpace() if space is None else space
    if factors is None:
        rng = check_random_state(random_state)
        factors = [space.factors[rng.randint(len(space.factors))]
                   for _ in range(3)]
    f_lr, f_batch, f_beta = factors
    new = Hyper(hyper.learning_rate * f_lr, 1, hyper.beta * f_beta)
    new.batch_size = int(round(hyper.batch_size * f_batch))
    return space.clamp(new, n_samples)


def has_converged(history, threshold, patience):
    """Whether the last patience changes of a score history are small

    Parameters
    ----------
    history : sequence of float
        Best score of every generation.
    threshold : float
        Absolute change below which a generation counts as stable.
    patience : int
        Number of consecutive stable generations needed.
    """
    if patience < 1:
        raise ValueError('patience must be >= 1 (got %s)' % patience)
    history = np.asarray(history, dtype=np.float64)
    if len(history) <= patience:
        return False
    delta = np.abs(np.diff(history[-(patience + 1):]))
    return bool(np.all(delta < threshold))


class GenerationLog(object):
    """Newline-delimited JSON log, one record per member per generation

    Parameters
    ----------
    fname : str | None
        File to append to. None only keeps the records in memory.
    """
    def __init__(self, fname=None):
        self.fname = fname
        self.records = list()

    def append(self, generation, member, stage=None):
        h = member.hyper
        score = member.score if np.isfinite(member.score) else None
        values = (int(generation), member.member_id, h.learning_rate,
                  h.batch_size, h.beta, score, stage)
        record = dict(zip(LOG_FIELDS, values))
        self.records.append(record)
        if self.fname is not None:
            with open(self.fname, 'a') as fid:
                fid.write(json.dumps(record) + '\n')
        return record


def run_generation(population, step_fn, eval_fn, space=None, n_jobs=1,
                   n_samples=None, copy_h=False, perturb_all=False, log=None,
                   stage=None):
    """Step, evaluate, exploit and explore every member once

    Parameters
    ----------
    population : Population
        The population. Not modified.
    step_fn : callable
        step_fn(member, random_state) trains member.theta for one epoch and
        returns the member. DivergedError marks the member as diverged.
    eval_fn : callable
        eval_fn(member, random_state) returns a score (higher is better) or
        a (score, per_model_scores) tuple.
    space : SearchSpace | None
        Explore factors and bounds.
    n_jobs : int
        Number of members stepped in parallel.
    n_samples : int | None
        Upper bound of the batch size.
    copy_h : bool
        Exploit also copies hyperparameters.
    perturb_all : bool
        Explore every member instead of the exploited ones only.
    log : GenerationLog | None
        Receives one record per member.
    stage : str | None
        Stage name written to the log and to divergence errors.

    Returns
    -------
    population : Population
        The next generation. Member random streams depend only on the
        master seed, the member id and the generation.
    """
    generation = population.generation
    parallel, my_step_and_eval, _ = parallel_func(_step_and_eval, n_jobs)
    members = parallel(my_step_and_eval(m, step_fn, eval_fn,
                                        derive_seed(population.seed,
                                                    m.member_id, generation))
                       for m in population.members)
    members = sorted(members, key=lambda m: m.member_id)
    diverged = [m.member_id for m in members if m.diverged]
    if len(diverged) == len(members):
        raise DivergedError('all %d members diverged in generation %d'
                            % (len(members), generation), stage=stage)
    if len(diverged) > 0:
        logger.warning('Generation %d: member(s) %s diverged'
                       % (generation, diverged))
    for member in members:
        member.t += 1
        if log is not None:
            log.append(generation, member, stage)
    evaluated = Population(members, population.seed, generation + 1)
    best = evaluated.best()
    logger.info('Generation %d: best score %0.4f (member %d)'
                % (generation, best.score, best.member_id))

    rng = np.random.RandomState(derive_seed(population.seed, 'exploit',
                                            generation))
    new = exploit(evaluated, rng, copy_h=copy_h)
    for member in new.members:
        if perturb_all or member.exploited_from is not None:
            member.hyper = explore(member.hyper, rng, space, n_samples)
    return new
