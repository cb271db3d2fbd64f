"""Supervised disentanglement metrics (MIG and DCI Disentanglement)

All mutual informations and entropies are plug-in estimates in nats over
discrete (binned) variables.
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import numpy as np
from scipy.stats import entropy
from sklearn.metrics import mutual_info_score

import logging
logger = logging.getLogger('rpuvae')

from .utils import NumericalError

N_BINS = 20


def _is_float(x):
    return np.issubdtype(np.asarray(x).dtype, np.floating)


def discretize(x, n_bins=N_BINS):
    """Equal-count binning of every column

    Samples are ranked per column (ties broken by sample index) and rank r
    of n goes to bin ``r * n_bins // n``.

    Parameters
    ----------
    x : array, shape (n_samples,) or (n_samples, n_columns)
        The values.
    n_bins : int
        Number of bins (>= 2).

    Returns
    -------
    bins : array of int, same shape as x
        The bin indices.
    """
    if n_bins < 2:
        raise ValueError('n_bins must be >= 2 (got %s)' % n_bins)
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n == 0:
        raise ValueError('invalid input: nothing to discretize')
    order = np.argsort(x, axis=0, kind='stable')
    ranks = np.empty_like(order)
    if x.ndim == 1:
        ranks[order] = np.arange(n)
    else:
        np.put_along_axis(ranks, order, np.arange(n)[:, None], axis=0)
    return ranks * n_bins // n


def _as_labels(factors, n_bins):
    factors = np.asarray(factors)
    if _is_float(factors):
        return discretize(factors, n_bins)
    return factors.astype(np.int64)


def discrete_mi(a, b):
    """Plug-in mutual information of two discrete sequences (nats)"""
    a, b = np.asarray(a).ravel(), np.asarray(b).ravel()
    if len(a) != len(b) or len(a) == 0:
        raise ValueError('invalid input: sequences of length %d and %d'
                         % (len(a), len(b)))
    return max(float(mutual_info_score(a, b)), 0.)


def discrete_entropy(a):
    """Plug-in entropy of a discrete sequence (nats)"""
    _, counts = np.unique(np.asarray(a).ravel(), return_counts=True)
    return float(entropy(counts))


def mutual_info_matrix(codes, factors):
    """MI between every column of codes and every column of factors

    Parameters
    ----------
    codes : array of int, shape (n_samples, n_codes)
        Discrete codes (binned latents).
    factors : array of int, shape (n_samples, n_factors)
        Discrete factors.

    Returns
    -------
    mi : array, shape (n_codes, n_factors)
        The mutual informations.
    """
    codes, factors = np.asarray(codes), np.asarray(factors)
    if codes.ndim != 2 or factors.ndim != 2 or len(codes) != len(factors):
        raise ValueError('invalid input: codes %s and factors %s do not '
                         'describe the same samples'
                         % (codes.shape, factors.shape))
    mi = np.empty((codes.shape[1], factors.shape[1]))
    for j in range(codes.shape[1]):
        for k in range(factors.shape[1]):
            mi[j, k] = discrete_mi(codes[:, j], factors[:, k])
    return mi


def _factor_entropies(factors):
    h = np.array([discrete_entropy(f) for f in factors.T])
    if np.any(h == 0):
        raise NumericalError('undefined entropy: factor column(s) %s are '
                             'constant' % np.where(h == 0)[0].tolist())
    return h


def _gap(mi):
    """Difference between the two largest entries of every column"""
    top = np.sort(mi, axis=0)[::-1]
    second = top[1] if len(top) > 1 else np.zeros(mi.shape[1])
    return top[0] - second


def _check_codes(latent_means, factors):
    latent_means = np.asarray(latent_means, dtype=np.float64)
    factors = np.asarray(factors)
    if factors.ndim == 1:
        factors = factors[:, None]
    if latent_means.ndim != 2 or len(latent_means) != len(factors):
        raise ValueError('invalid input: %d latent rows for %d factor rows'
                         % (len(latent_means), len(factors)))
    return latent_means, factors


def mig(latent_means, factors, n_bins=N_BINS):
    """Mutual information gap

    Parameters
    ----------
    latent_means : array, shape (n_samples, latent_dim)
        Posterior means.
    factors : array, shape (n_samples, n_factors)
        Factor indices. Float columns are binned like the latents.
    n_bins : int
        Number of equal-count bins per latent.

    Returns
    -------
    score : float
        Mean over factors of (I_top - I_second) / H(factor), in [0, 1].
    """
    latent_means, factors = _check_codes(latent_means, factors)
    factors = _as_labels(factors, n_bins)
    h = _factor_entropies(factors)
    mi = mutual_info_matrix(discretize(latent_means, n_bins), factors)
    return float(np.mean(_gap(mi) / h))


def importance_from_mi(latent_means, factors, n_bins=N_BINS):
    """Importance matrix R[j, k] = I(binned latent j; factor k)"""
    latent_means, factors = _check_codes(latent_means, factors)
    factors = _as_labels(factors, n_bins)
    _factor_entropies(factors)
    return mutual_info_matrix(discretize(latent_means, n_bins), factors)


def dci_disentanglement(R):
    """DCI Disentanglement of an importance matrix

    Parameters
    ----------
    R : array, shape (latent_dim, n_factors)
        Nonnegative importances.

    Returns
    -------
    score : float
        Importance-weighted mean over latents of 1 - H(P_j) / log(n_factors)
        where P_j is row j of R normalized to sum to one.
    """
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    if np.any(R < 0) or not np.all(np.isfinite(R)):
        raise ValueError('invalid input: importances must be finite and '
                         'nonnegative')
    total = R.sum()
    if not total > 0:
        raise NumericalError('undefined score: the importance matrix is zero')
    row_sums = R.sum(axis=1)
    used = row_sums > 0
    n_factors = R.shape[1]
    if n_factors == 1:
        d = np.ones(used.sum())
    else:
        d = 1. - entropy(R[used], axis=1) / np.log(n_factors)
    weights = row_sums[used] / total
    return float(np.clip(np.sum(weights * d), 0., 1.))


def masked_mig(latent_means, labels, mask, n_bins=N_BINS):
    """MIG over label columns known on different subsets of samples

    Every column is evaluated on the samples where it is labeled (latents
    and float labels are binned on that subset), and the per-column gaps
    are averaged with weights proportional to the labeled counts.

    Parameters
    ----------
    latent_means : array, shape (n_samples, latent_dim)
        Posterior means.
    labels : array, shape (n_samples, n_columns)
        Label values, arbitrary where mask is False.
    mask : array of bool, shape (n_samples, n_columns)
        Which labels are known.
    n_bins : int
        Number of equal-count bins.

    Returns
    -------
    score : float
        The weighted MIG.
    """
    latent_means, labels = _check_codes(latent_means, labels)
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim == 1:
        mask = mask[:, None]
    if mask.shape != labels.shape:
        raise ValueError('invalid input: mask %s does not match labels %s'
                         % (mask.shape, labels.shape))
    gaps, weights = list(), list()
    for c in range(labels.shape[1]):
        rows = mask[:, c]
        column = _as_labels(labels[rows, c], n_bins)
        h = discrete_entropy(column) if rows.sum() > 0 else 0.
        if h == 0:
            logger.warning('Label column %d has %d labeled samples and no '
                           'entropy, skipped' % (c, rows.sum()))
            continue
        codes = discretize(latent_means[rows], n_bins)
        mi = mutual_info_matrix(codes, column[:, None])
        gaps.append(_gap(mi)[0] / h)
        weights.append(rows.sum())
    if len(gaps) == 0:
        raise NumericalError('undefined entropy: no label column varies')
    return float(np.average(gaps, weights=weights))
