"""Parallel util function
"""

# Authors: rpuvae developers
#
# License: Simplified BSD

import logging
logger = logging.getLogger('rpuvae')

from joblib import Parallel, delayed, cpu_count


def parallel_func(func, n_jobs):
    """Return parallel instance with delayed function

    Parameters
    ----------
    func : callable
        A function
    n_jobs : int
        Number of jobs to run in parallel. 1 runs serially without
        spawning workers, -1 uses all CPUs.

    Returns
    -------
    parallel : instance of joblib.Parallel or list
        The parallel object
    my_func : callable
        func if not parallel or delayed(func)
    n_jobs : int
        Number of jobs >= 1
    """
    if n_jobs == -1:
        n_jobs = cpu_count()
    n_jobs = max(int(n_jobs), 1)
    if n_jobs == 1:
        return list, func, 1

    parallel_verbose = 5 if logger.level <= logging.DEBUG else 0
    parallel = Parallel(n_jobs, verbose=parallel_verbose)
    my_func = delayed(func)
    return parallel, my_func, n_jobs
