# Authors: rpuvae developers
#
# License: BSD (3-clause)

import copy as cp

import numpy as np

import logging
logger = logging.getLogger('rpuvae')

from .loss import loss_and_gradient, LossBreakdown
from ..utils import check_random_state, NumericalError


class DivergedError(RuntimeError):
    """Training produced a non-finite loss

    Attributes
    ----------
    batch_index : int | None
        Index of the offending batch within the epoch.
    stage : str | None
        Pipeline stage the training belonged to, when known.
    """
    def __init__(self, msg, batch_index=None, stage=None):
        RuntimeError.__init__(self, msg)
        self.batch_index = batch_index
        self.stage = stage

    def __str__(self):
        msg = RuntimeError.__str__(self)
        if self.stage is not None:
            msg = '[%s] %s' % (self.stage, msg)
        return msg


class Hyper(object):
    """Hyperparameters of one PBT member

    Parameters
    ----------
    learning_rate : float
        Adam step size (> 0).
    batch_size : int
        Minibatch size (>= 1).
    beta : float
        Loss weight (> 0).
    """
    fields = ('learning_rate', 'batch_size', 'beta')

    def __init__(self, learning_rate, batch_size, beta):
        if not learning_rate > 0:
            raise ValueError('learning_rate must be > 0 (got %s)'
                             % learning_rate)
        if int(batch_size) < 1:
            raise ValueError('batch_size must be >= 1 (got %s)' % batch_size)
        if not beta > 0:
            raise ValueError('beta must be > 0 (got %s)' % beta)
        self.learning_rate = float(learning_rate)
        self.batch_size = int(batch_size)
        self.beta = float(beta)

    def copy(self):
        return Hyper(self.learning_rate, self.batch_size, self.beta)

    def as_dict(self):
        return dict(learning_rate=self.learning_rate,
                    batch_size=self.batch_size, beta=self.beta)

    def __eq__(self, other):
        return isinstance(other, Hyper) and self.as_dict() == other.as_dict()

    def __repr__(self):
        return ('<Hyper lr=%g, batch=%d, beta=%g>'
                % (self.learning_rate, self.batch_size, self.beta))


class Adam(object):
    """Adam optimizer state

    Parameters
    ----------
    beta1, beta2, epsilon : float
        The usual Adam constants.
    """
    def __init__(self, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = None
        self.v = None

    def copy(self):
        return cp.deepcopy(self)

    def step(self, params, grad, learning_rate):
        """Update the arrays of params in place"""
        arrays = params.arrays()
        grads = grad.arrays()
        if self.m is None:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]
        self.t += 1
        c1 = 1. - self.beta1 ** self.t
        c2 = 1. - self.beta2 ** self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1. - self.beta1) * g
            v *= self.beta2
            v += (1. - self.beta2) * g ** 2
            a -= learning_rate * (m / c1) / (np.sqrt(v / c2) + self.epsilon)


def _batches(n_samples, batch_size):
    """Batch boundaries; a trailing single sample joins the previous batch"""
    starts = list(range(0, n_samples, batch_size))
    stops = starts[1:] + [n_samples]
    if len(starts) > 1 and stops[-1] - starts[-1] < 2:
        starts.pop()
        stops.pop(-2)
    return list(zip(starts, stops))


def train_epoch(params, optimizer, view, hyper, random_state=None,
                beta_mode='tc'):
    """One shuffled pass of Adam over a view

    Parameters
    ----------
    params : VaeParams
        The model. Not modified.
    optimizer : Adam | None
        The optimizer state. Not modified. None starts a fresh Adam.
    view : DatasetView | FactorizedDataset | array
        The training data.
    hyper : Hyper
        Learning rate, batch size and beta.
    random_state : None | int | np.random.RandomState
        Generator of the shuffling and the reparameterization noise.
    beta_mode : 'tc' | 'kl'
        See tcvae_loss.

    Returns
    -------
    params : VaeParams
        The updated model.
    optimizer : Adam
        The updated optimizer state.
    loss : LossBreakdown
        Epoch mean of the batch losses, weighted by batch size.
    """
    rng = check_random_state(random_state)
    images = getattr(view, 'images', view)
    n_samples = len(images)
    if n_samples < 2:
        raise NumericalError('estimator undefined: cannot train on %d sample'
                             % n_samples)
    params = params.copy()
    optimizer = Adam() if optimizer is None else optimizer.copy()
    batch_size = min(max(hyper.batch_size, 2), n_samples)
    order = rng.permutation(n_samples)
    losses, weights = list(), list()
    for k, (start, stop) in enumerate(_batches(n_samples, batch_size)):
        batch = images[order[start:stop]]
        eps = rng.randn(stop - start, params.latent_dim)
        grad, loss = loss_and_gradient(params, batch, hyper.beta, n_samples,
                                       beta_mode=beta_mode, eps=eps)
        if not loss.is_finite() or not grad.is_finite():
            raise DivergedError('non-finite loss in batch %d' % k,
                                batch_index=k)
        optimizer.step(params, grad, hyper.learning_rate)
        losses.append(loss)
        weights.append(stop - start)
    logger.debug('    epoch loss %s' % (losses[-1],))
    return params, optimizer, LossBreakdown.average(losses, weights)
