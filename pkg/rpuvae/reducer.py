"""Surrogate labels and dataset reduction from active latents

The posterior means of an active latent, sorted over the dataset, form a
staircase when the latent encodes a discrete factor. Plateaus are found
between the peaks of the smoothed derivative of the sorted values; the
samples of a plateau share (approximately) one value of the factor.
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

import logging
logger = logging.getLogger('rpuvae')

from .datasets import subset
from .vae import encode_means

EPS = 1e-9
MAX_RATIO = 1e9
# a derivative whose median step is below this fraction of its mean step
# is made of isolated jumps
STEP_MEDIAN = 0.1


class LevTable(object):
    """Latent encoding values (posterior means) of the active latents

    Parameters
    ----------
    indices : array of int, shape (n_samples,)
        Global sample indices.
    values : array, shape (n_samples, n_active)
        Posterior means of the active latents.
    active : array of int, shape (n_active,)
        The latent dimensions the columns come from.
    """
    def __init__(self, indices, values, active):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.active = np.asarray(active, dtype=np.int64)
        if self.values.shape != (len(self.indices), len(self.active)):
            raise ValueError('LEV values of shape %s do not match %d samples '
                             'and %d latents' % (self.values.shape,
                                                 len(self.indices),
                                                 len(self.active)))

    def __len__(self):
        return len(self.indices)

    @property
    def n_active(self):
        return len(self.active)

    def column(self, k):
        """(sample indices, values) of active latent number k"""
        return self.indices, self.values[:, k]

    def __repr__(self):
        return '<LevTable %d samples x %d active latents %s>' % (
            len(self), self.n_active, self.active.tolist())


class Interval(object):
    """A run of consecutive ranks in the sorted LEVs of one latent

    Attributes
    ----------
    lo_rank, hi_rank : int
        The half-open rank range.
    member_indices : array of int
        Global indices of the samples with rank in [lo_rank, hi_rank).
    ratio : float
        Lower bounding peak height over the mean smoothed derivative
        inside the interval.
    """
    def __init__(self, lo_rank, hi_rank, member_indices, ratio):
        if not lo_rank < hi_rank:
            raise ValueError('Empty interval [%d, %d)' % (lo_rank, hi_rank))
        self.lo_rank = int(lo_rank)
        self.hi_rank = int(hi_rank)
        self.member_indices = np.sort(np.asarray(member_indices,
                                                 dtype=np.int64))
        self.ratio = float(ratio)

    def __len__(self):
        return self.hi_rank - self.lo_rank

    def as_dict(self):
        return dict(lo_rank=self.lo_rank, hi_rank=self.hi_rank,
                    n_members=len(self), ratio=self.ratio)

    def __repr__(self):
        return '<Interval [%d, %d) ratio=%0.4g>' % (self.lo_rank,
                                                    self.hi_rank, self.ratio)


def encode_dataset(params, view, active):
    """LEVs of every sample of a view

    Parameters
    ----------
    params : VaeParams
        The model.
    view : DatasetView | FactorizedDataset
        The samples.
    active : array of int
        Active latent dimensions (nonempty).

    Returns
    -------
    levs : LevTable
        Posterior means restricted to the active dimensions.
    """
    active = np.atleast_1d(np.asarray(active, dtype=np.int64))
    if active.size == 0:
        raise ValueError('invalid input: the active latent set is empty')
    if active.min() < 0 or active.max() >= params.latent_dim:
        raise ValueError('invalid input: active latents %s not in [0, %d)'
                         % (active.tolist(), params.latent_dim))
    means = encode_means(params, view.images)
    return LevTable(view.indices, means[:, active], active)


def smoothing_window(n_samples):
    """Odd moving-average width max(3, n_samples // 100)"""
    w = max(3, n_samples // 100)
    return w + 1 if w % 2 == 0 else w


def _interior_mean(smoothed, left, right, left_real, right_real, half):
    """Mean smoothed derivative strictly between two peaks"""
    lo, hi = left + 1, right
    lo_shrunk = lo + half if left_real else lo
    hi_shrunk = hi - half if right_real else hi
    if hi_shrunk > lo_shrunk:
        return smoothed[lo_shrunk:hi_shrunk].mean()
    if hi > lo:
        return smoothed[lo:hi].mean()
    heights = [smoothed[p] for p, real in ((left, left_real),
                                           (right, right_real)) if real]
    return np.mean(heights)


def _find_steps(curve, w):
    """Peaks strictly above mean + std, at least w apart"""
    threshold = curve.mean() + curve.std()
    peaks, _ = find_peaks(curve, height=np.nextafter(threshold, np.inf),
                          distance=w)
    return peaks, threshold


def candidate_intervals(values, indices=None, return_details=False):
    """Rank the plateaus of sorted latent values

    Parameters
    ----------
    values : array, shape (n_samples,)
        LEVs of one latent (n_samples >= 3).
    indices : array of int | None
        Global sample indices of the values (default: positions).
    return_details : bool
        Also return the intermediate curves.

    Returns
    -------
    intervals : list of Interval
        Intervals between consecutive peaks of the smoothed derivative,
        best first (ratio descending, then size descending, then lower
        rank first). Empty when no peak is found (no structure). When the
        smoothed derivative has no peak but most raw steps are close to
        zero, the plateaus are shorter than the window and the peaks are
        taken on the raw derivative (window 1).
    details : dict
        Only if return_details is True. Sorted values, derivative,
        smoothed derivative, window, threshold and peak positions.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    n = len(values)
    if n < 3:
        raise ValueError('invalid input: intervals need at least 3 samples '
                         '(got %d)' % n)
    indices = np.arange(n) if indices is None else np.asarray(indices)
    order = np.argsort(values, kind='stable')
    sorted_values = values[order]
    derivative = np.diff(sorted_values)
    w = smoothing_window(n)
    smoothed = uniform_filter1d(derivative, size=w, mode='nearest')
    peaks, threshold = _find_steps(smoothed, w)
    if (len(peaks) == 0 and
            np.median(derivative) <= STEP_MEDIAN * derivative.mean()):
        # plateaus shorter than the window: steps of the raw derivative
        w, smoothed = 1, derivative
        peaks, threshold = _find_steps(smoothed, w)
    half = w // 2
    heights = smoothed[peaks]
    # the jump itself is the largest raw step around a smoothed peak
    peaks = np.array([p - half + np.argmax(derivative[max(p - half, 0):
                                                      p + half + 1])
                      if p >= half else np.argmax(derivative[:p + half + 1])
                      for p in peaks], dtype=np.int64)
    intervals = list()
    if len(peaks) > 0:
        bounds = np.r_[-1, peaks, n - 1]
        bound_heights = np.r_[np.inf, heights, np.inf]
        for k in range(len(bounds) - 1):
            left, right = bounds[k], bounds[k + 1]
            if right <= left:
                continue
            mean = _interior_mean(smoothed, left, right, k > 0,
                                  k + 1 < len(bounds) - 1, half)
            peak = min(bound_heights[k], bound_heights[k + 1])
            ratio = min(peak / (max(mean, 0.) + EPS), MAX_RATIO)
            lo, hi = left + 1, right + 1
            intervals.append(Interval(lo, hi, indices[order[lo:hi]], ratio))
        intervals.sort(key=lambda i: (-i.ratio, -len(i), i.lo_rank))
    if return_details:
        details = dict(sorted_values=sorted_values, derivative=derivative,
                       smoothed=smoothed, window=w, threshold=threshold,
                       peaks=peaks)
        return intervals, details
    return intervals


def n_candidate_intervals(levs):
    """Smallest number of candidate intervals over the latents of a LevTable"""
    return min(len(candidate_intervals(levs.values[:, k], levs.indices))
               for k in range(levs.n_active))


def reduce(view, params, active, rank, size_min=10, levs=None):
    """Restrict a view to the intersection of one interval per latent

    Parameters
    ----------
    view : DatasetView | FactorizedDataset
        The data to reduce.
    params : VaeParams
        The model whose active latents label the data.
    active : array of int
        The active latents.
    rank : int
        Which candidate interval of every latent to use (0 = best).
    size_min : int
        Smallest acceptable size of the result.
    levs : LevTable | None
        Precomputed LEVs of the view (computed when None).

    Returns
    -------
    view : DatasetView | None
        The reduced view (None when reason is not None).
    reason : None | 'no-structure' | 'too-small'
        Why no view was produced.
    """
    if rank < 0:
        raise ValueError('invalid rank: %s' % rank)
    if levs is None:
        levs = encode_dataset(params, view, active)
    chosen = list()
    for k in range(levs.n_active):
        intervals = candidate_intervals(levs.values[:, k], levs.indices)
        if len(intervals) == 0:
            logger.info('    latent %d has no structure' % levs.active[k])
            return None, 'no-structure'
        if rank >= len(intervals):
            raise ValueError('invalid rank: %d but latent %d has %d '
                             'candidate intervals'
                             % (rank, levs.active[k], len(intervals)))
        chosen.append(intervals[rank])
    members = chosen[0].member_indices
    for interval in chosen[1:]:
        members = np.intersect1d(members, interval.member_indices,
                                 assume_unique=True)
    logger.info('    reduced %d samples to %d' % (len(levs), len(members)))
    if len(members) < size_min or len(members) == 0:
        return None, 'too-small'
    return subset(view, members), None


def surrogate_label(view, params, active, store=None, **provenance):
    """Label the samples of a view with their LEVs

    Parameters
    ----------
    view : DatasetView | FactorizedDataset
        The samples.
    params : VaeParams
        The model.
    active : array of int
        The active latents.
    store : SurrogateLabelStore | None
        If given, the labels are appended to it.
    **provenance
        Passed to ``store.append`` (leaf_id, metaepoch).

    Returns
    -------
    levs : LevTable
        The labels, attached to the global sample indices.
    """
    levs = encode_dataset(params, view, active)
    if store is not None:
        store.append(levs.indices, levs.values, **provenance)
    return levs


def reduction_record(levs, rank=0):
    """Diagnostics of the interval selection for every active latent

    Returns a JSON-serializable dict with, per latent, the sorted LEVs, the
    smoothed derivative, the peaks, the chosen interval and the fraction of
    LEV variance left inside it.
    """
    latents = list()
    for k in range(levs.n_active):
        intervals, details = candidate_intervals(levs.values[:, k],
                                                 levs.indices,
                                                 return_details=True)
        record = dict(latent=int(levs.active[k]),
                      sorted_values=details['sorted_values'].tolist(),
                      smoothed_derivative=details['smoothed'].tolist(),
                      window=int(details['window']),
                      threshold=float(details['threshold']),
                      peaks=details['peaks'].tolist(),
                      n_intervals=len(intervals), chosen=None,
                      variance_ratio=None)
        if rank < len(intervals):
            interval = intervals[rank]
            inside = details['sorted_values'][interval.lo_rank:
                                              interval.hi_rank]
            total = np.var(details['sorted_values'])
            record['chosen'] = interval.as_dict()
            record['variance_ratio'] = (float(np.var(inside) / total)
                                        if total > 0 else None)
        latents.append(record)
    return dict(rank=int(rank), n_samples=len(levs), latents=latents)
