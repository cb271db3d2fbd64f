"""Unsupervised disentanglement ranking (UDR)

Models trained with the same hyperparameters are compared pairwise through
the absolute Spearman correlations between their latents; a model whose
informative latents each match one latent of the other model scores high.
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import numpy as np
from scipy.stats import rankdata

import logging
logger = logging.getLogger('rpuvae')

from .vae import encode_means, latent_stats
from .utils import check_random_state

KL_MASK_THRESHOLD = 0.01
EPS = 1e-9


class ModelCodes(object):
    """Posterior means of one model on the evaluation samples

    Parameters
    ----------
    means : array, shape (n_samples, latent_dim)
        Posterior means, all models evaluated on the same samples in the
        same order.
    kl : array, shape (latent_dim,)
        Mean KL to the prior of every latent.
    """
    def __init__(self, means, kl):
        means = np.asarray(means, dtype=np.float64)
        kl = np.asarray(kl, dtype=np.float64)
        if means.ndim != 2 or len(means) < 2:
            raise ValueError('invalid input: codes need at least 2 samples '
                             '(got shape %s)' % (means.shape,))
        if kl.shape != (means.shape[1],):
            raise ValueError('invalid input: %d KL values for %d latents'
                             % (kl.size, means.shape[1]))
        self.means = means
        self.kl = kl

    @property
    def n_samples(self):
        return len(self.means)

    @property
    def latent_dim(self):
        return self.means.shape[1]

    def __repr__(self):
        return '<ModelCodes %d samples x %d latents>' % self.means.shape


def compute_codes(params, images):
    """ModelCodes of a model on a set of images"""
    images = getattr(images, 'images', images)
    return ModelCodes(encode_means(params, images),
                      latent_stats(params, images))


def evaluation_subset(n_samples, size=1000, random_state=None):
    """Sorted positions of a seeded evaluation subset

    All samples are used when size >= n_samples.
    """
    if size >= n_samples:
        return np.arange(n_samples)
    rng = check_random_state(random_state)
    return np.sort(rng.choice(n_samples, size, replace=False))


def _centered_ranks(x):
    r = rankdata(x, axis=0)
    r -= r.mean(axis=0)
    norm = np.sqrt(np.sum(r ** 2, axis=0))
    # constant columns have no rank variation
    norm[norm == 0] = np.inf
    return r / norm


def similarity_matrix(a, b):
    """Absolute Spearman correlations between the latents of two models

    Parameters
    ----------
    a, b : ModelCodes
        Codes of the two models on the same samples.

    Returns
    -------
    S : array, shape (a.latent_dim, b.latent_dim)
        S[i, j] = |rho(latent i of a, latent j of b)|, 0 for constant
        latents.
    """
    if a.n_samples != b.n_samples:
        raise ValueError('invalid input: codes were computed on %d and %d '
                         'samples' % (a.n_samples, b.n_samples))
    S = np.abs(np.dot(_centered_ranks(a.means).T, _centered_ranks(b.means)))
    return np.clip(S, 0., 1.)


def udr_pair(S, kl_a, kl_b, kl_mask_threshold=KL_MASK_THRESHOLD):
    """UDR score of a pair of models

    Parameters
    ----------
    S : array, shape (latent_dim_a, latent_dim_b)
        Similarity matrix from similarity_matrix.
    kl_a, kl_b : array
        Mean KL per latent of the two models.
    kl_mask_threshold : float
        Latents with a mean KL above this value are informative.

    Returns
    -------
    score : float
        Score in [0, 1]; 0 when one model has no informative latent.
    """
    if kl_mask_threshold <= 0:
        raise ValueError('kl_mask_threshold must be positive (got %s)'
                         % kl_mask_threshold)
    S = np.asarray(S, dtype=np.float64)
    mask_a = np.asarray(kl_a) > kl_mask_threshold
    mask_b = np.asarray(kl_b) > kl_mask_threshold
    if S.shape != (mask_a.size, mask_b.size):
        raise ValueError('invalid input: S has shape %s for %d and %d '
                         'latents' % (S.shape, mask_a.size, mask_b.size))
    d_a, d_b = mask_a.sum(), mask_b.sum()
    if d_a == 0 or d_b == 0:
        return 0.
    S = S[mask_a][:, mask_b]
    r = S.max(axis=0)
    c = S.max(axis=1)
    score = (np.sum(r ** 2 / np.maximum(S.sum(axis=0), EPS)) +
             np.sum(c ** 2 / np.maximum(S.sum(axis=1), EPS)))
    return float(score / (d_a + d_b))


def udr_member(models, eval_view=None, kl_mask_threshold=KL_MASK_THRESHOLD):
    """UDR scores of the models of one member

    Parameters
    ----------
    models : list of ModelCodes | list of VaeParams
        The models of the member (at least 2). VaeParams are encoded on
        eval_view.
    eval_view : DatasetView | array | None
        The evaluation images, needed when models are VaeParams.
    kl_mask_threshold : float
        See udr_pair.

    Returns
    -------
    scores : array, shape (n_models,)
        Median of the pair scores of every model against the others.
    member_score : float
        The largest per-model score.
    """
    if len(models) < 2:
        raise ValueError('invalid input: UDR needs at least 2 models (got '
                         '%d)' % len(models))
    if not isinstance(models[0], ModelCodes):
        if eval_view is None:
            raise ValueError('invalid input: eval_view is needed to encode '
                             'models')
        models = [compute_codes(params, eval_view) for params in models]
    n_models = len(models)
    pair = np.zeros((n_models, n_models))
    for i in range(n_models):
        for j in range(i + 1, n_models):
            S = similarity_matrix(models[i], models[j])
            pair[i, j] = pair[j, i] = udr_pair(S, models[i].kl, models[j].kl,
                                               kl_mask_threshold)
    others = ~np.eye(n_models, dtype=bool)
    scores = np.array([np.median(pair[i, others[i]])
                       for i in range(n_models)])
    logger.debug('    UDR per model: %s' % np.round(scores, 4).tolist())
    return scores, float(scores.max())
