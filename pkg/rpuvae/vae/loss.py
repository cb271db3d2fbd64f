"""beta-TCVAE objective with minibatch-weighted sampling estimators

The KL part of the ELBO is split into index-code mutual information, total
correlation and dimension-wise KL, each estimated on the minibatch:

    log q(z)          ~ logsumexp_j log q(z | x_j)      - log(N M)
    log prod_k q(z_k) ~ sum_k logsumexp_j log q(z_k | x_j) - log(N M)

with N the dataset size and M the batch size.
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import numpy as np
from scipy.special import logsumexp, softmax, expit

from .model import _check_images, _encode, _std, LOG_VAR_MIN, LOG_VAR_MAX
from ..utils import check_random_state, NumericalError

LOG_2PI = np.log(2 * np.pi)
BETA_MODES = ('tc', 'kl')


class LossBreakdown(object):
    """Terms of the loss, all in nats per sample

    Attributes
    ----------
    recon_nll : float
        Bernoulli negative log-likelihood.
    index_code_mi : float
        Index-code mutual information estimate.
    total_correlation : float
        Total correlation estimate.
    dim_kl : float
        Dimension-wise KL estimate.
    total : float
        The weighted loss.
    beta : float
        The beta used for ``total``.
    """
    fields = ('recon_nll', 'index_code_mi', 'total_correlation', 'dim_kl',
              'total')

    def __init__(self, recon_nll, index_code_mi, total_correlation, dim_kl,
                 total, beta):
        self.recon_nll = float(recon_nll)
        self.index_code_mi = float(index_code_mi)
        self.total_correlation = float(total_correlation)
        self.dim_kl = float(dim_kl)
        self.total = float(total)
        self.beta = float(beta)

    @property
    def kl(self):
        """The whole KL penalty estimate"""
        return self.index_code_mi + self.total_correlation + self.dim_kl

    def is_finite(self):
        return all(np.isfinite(getattr(self, f)) for f in self.fields)

    def as_dict(self):
        d = dict((f, getattr(self, f)) for f in self.fields)
        d['beta'] = self.beta
        return d

    @classmethod
    def average(cls, losses, weights):
        weights = np.asarray(weights, dtype=np.float64)
        weights = weights / weights.sum()
        values = [sum(w * getattr(l, f) for l, w in zip(losses, weights))
                  for f in cls.fields]
        return cls(*values, beta=losses[-1].beta)

    def __repr__(self):
        return ('<LossBreakdown total=%0.4f (recon=%0.4f, mi=%0.4f, '
                'tc=%0.4f, dim_kl=%0.4f, beta=%g)>'
                % (self.total, self.recon_nll, self.index_code_mi,
                   self.total_correlation, self.dim_kl, self.beta))


def _term_weights(beta, beta_mode):
    if beta_mode == 'tc':
        return 1., beta, 1.
    elif beta_mode == 'kl':
        return beta, beta, beta
    raise ValueError('beta_mode must be one of %s (got %r)'
                     % (BETA_MODES, beta_mode))


def _check_batch(params, batch, dataset_size):
    x = _check_images(params, batch)
    M = len(x)
    if M < 2:
        raise NumericalError('estimator undefined: the minibatch estimators '
                             'need at least 2 samples (got %d)' % M)
    if dataset_size < M:
        raise ValueError('dataset_size (%d) is smaller than the batch (%d)'
                         % (dataset_size, M))
    return x


def _forward(params, x, eps, beta, dataset_size, beta_mode):
    M = len(x)
    mu, log_var_raw, enc_caches = _encode(params, x)
    log_var = np.clip(log_var_raw, LOG_VAR_MIN, LOG_VAR_MAX)
    std = _std(log_var)
    z = mu + std * eps
    logits, dec_caches = params.decoder.forward(z)
    recon = np.logaddexp(0., logits) - x * logits
    recon_nll = recon.sum(axis=1).mean()

    # log q(z_i | x_j) per dimension, shape (M, M, L)
    diff = z[:, None, :] - mu[None, :, :]
    inv_var = np.exp(-log_var)[None, :, :]
    log_qzx = -0.5 * (LOG_2PI + log_var[None, :, :] + diff ** 2 * inv_var)
    log_nm = np.log(dataset_size * M)

    log_q_cond = np.einsum('iik->i', log_qzx)
    joint = log_qzx.sum(axis=2)
    log_qz = logsumexp(joint, axis=1) - log_nm
    log_qz_marg = (logsumexp(log_qzx, axis=1) - log_nm).sum(axis=1)
    log_pz = (-0.5 * (LOG_2PI + z ** 2)).sum(axis=1)

    mi = np.mean(log_q_cond - log_qz)
    tc = np.mean(log_qz - log_qz_marg)
    dim_kl = np.mean(log_qz_marg - log_pz)
    w_mi, w_tc, w_dim = _term_weights(beta, beta_mode)
    total = recon_nll + w_mi * mi + w_tc * tc + w_dim * dim_kl
    loss = LossBreakdown(recon_nll, mi, tc, dim_kl, total, beta)
    cache = (mu, log_var_raw, log_var, std, z, logits, enc_caches,
             dec_caches, diff, inv_var, log_qzx, joint)
    return loss, cache


def _draw_eps(params, M, random_state, eps):
    if eps is None:
        eps = check_random_state(random_state).randn(M, params.latent_dim)
    eps = np.asarray(eps, dtype=np.float64)
    if eps.shape != (M, params.latent_dim):
        raise ValueError('eps must have shape %s (got %s)'
                         % ((M, params.latent_dim), eps.shape))
    return eps


def tcvae_loss(params, batch, beta, dataset_size, random_state=None,
               beta_mode='tc', eps=None):
    """Single-sample estimate of the beta-TCVAE loss on a minibatch

    Parameters
    ----------
    params : VaeParams
        The model.
    batch : array, shape (M, height, width)
        The minibatch (M >= 2).
    beta : float
        Weight of the total correlation ('tc' mode) or of the whole KL
        ('kl' mode).
    dataset_size : int
        Size N of the dataset the batch is drawn from (N >= M).
    random_state : None | int | np.random.RandomState
        Generator of the reparameterization noise.
    beta_mode : 'tc' | 'kl'
        Which terms beta multiplies.
    eps : array, shape (M, latent_dim) | None
        Use this noise instead of drawing it.

    Returns
    -------
    loss : LossBreakdown
        The loss terms.
    """
    x = _check_batch(params, batch, dataset_size)
    eps = _draw_eps(params, len(x), random_state, eps)
    loss, _ = _forward(params, x, eps, beta, dataset_size, beta_mode)
    return loss


def loss_and_gradient(params, batch, beta, dataset_size, random_state=None,
                      beta_mode='tc', eps=None):
    """Loss terms and gradient of the total with respect to the parameters

    Same parameters as tcvae_loss. The noise is frozen, so the gradient is
    that of the single-sample reparameterized estimate.

    Returns
    -------
    grad : VaeParams
        The gradient, one array per parameter array.
    loss : LossBreakdown
        The loss terms.
    """
    x = _check_batch(params, batch, dataset_size)
    M = len(x)
    eps = _draw_eps(params, M, random_state, eps)
    loss, cache = _forward(params, x, eps, beta, dataset_size, beta_mode)
    (mu, log_var_raw, log_var, std, z, logits, enc_caches, dec_caches,
     diff, inv_var, log_qzx, joint) = cache

    w_mi, w_tc, w_dim = _term_weights(beta, beta_mode)
    # loss = mean(w_mi A + (w_tc - w_mi) B + (w_dim - w_tc) C - w_dim P)
    # with A = log q(z|x), B = log q(z), C = log prod q(z_k), P = log p(z)
    alpha_a = w_mi / M
    alpha_b = (w_tc - w_mi) / M
    alpha_c = (w_dim - w_tc) / M
    alpha_p = -w_dim / M

    G = alpha_b * softmax(joint, axis=1)[:, :, None] + \
        alpha_c * softmax(log_qzx, axis=1)
    idx = np.arange(M)
    G[idx, idx, :] += alpha_a

    E = diff * inv_var
    dz = -(G * E).sum(axis=1) - alpha_p * z
    dmu = (G * E).sum(axis=0)
    dlog_var = (G * (0.5 * diff * E - 0.5)).sum(axis=0)

    dlogits = (expit(logits) - x) / M
    dz_rec, dec_grads = params.decoder.backward(dlogits, dec_caches)
    dz += dz_rec

    dmu += dz
    dlog_var += dz * eps * 0.5 * std
    dlog_var *= (log_var_raw > LOG_VAR_MIN) & (log_var_raw < LOG_VAR_MAX)

    dout = np.concatenate([dmu, dlog_var], axis=1)
    _, enc_grads = params.encoder.backward(dout, enc_caches)

    arrays = list()
    for dW, db in enc_grads + dec_grads:
        arrays.extend([dW, db])
    grad = params.copy()
    grad.set_arrays(arrays)
    return grad, loss


def loss_gradient(params, batch, beta, dataset_size, random_state=None,
                  beta_mode='tc', eps=None):
    """Gradient of tcvae_loss(...).total with respect to the parameters"""
    grad, _ = loss_and_gradient(params, batch, beta, dataset_size,
                                random_state, beta_mode, eps)
    return grad
