import json
import os.path as op

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal, \
                          assert_equal, assert_raises

from rpuvae.pbt import SearchSpace, Member, Population, init_population, \
                       run_generation, exploit, explore, has_converged, \
                       GenerationLog, BATCH_SIZES, EXPLORE_FACTORS
from rpuvae.vae import Hyper, DivergedError


def _toy_space():
    return SearchSpace(batch_sizes=(1,), betas=(1.,))


def _toy_init(member_id, hyper, rng):
    return np.array([rng.uniform(-10, 10)]), None


def _toy_step(member, rng):
    """One gradient step on f(x) = (x - 3) ** 2"""
    x = member.theta
    member.theta = x - member.hyper.learning_rate * 2 * (x - 3.)
    return member


def _toy_eval(member, rng):
    return -float((member.theta[0] - 3.) ** 2)


def _constant_eval(member, rng):
    return 0.


def _population(scores, rng=None):
    members = [Member(k, np.array([float(k)]), Hyper(1e-3, 8, 1.))
               for k in range(len(scores))]
    for m, s in zip(members, scores):
        m.score = s
    return Population(members, seed=0)


def test_search_space():
    """Test grids, sampling and clamping"""
    space = SearchSpace()
    assert_equal(space.batch_sizes, list(BATCH_SIZES))
    assert_equal(len(space.learning_rates), 30)
    assert_allclose([space.learning_rates[0], space.learning_rates[-1]],
                    [1e-5, 1.])
    assert_equal(len(space.betas), 24)
    assert_allclose([space.betas[0], space.betas[-1]], [1.5, 1.5 ** 15])
    h = space.clamp(Hyper(10., 5000, 1e-5), n_samples=100)
    assert_equal(h.as_dict(), dict(learning_rate=1., batch_size=100,
                                   beta=1e-2))
    assert_raises(ValueError, SearchSpace, batch_sizes=())
    assert_raises(ValueError, SearchSpace, bounds=dict(beta=(2., 1.)))


def test_init_population():
    """Test population initialization"""
    space = SearchSpace()
    pop = init_population(space, 56, random_state=0)
    assert_equal(len(pop), 56)
    for m in pop.members:
        assert m.hyper.batch_size in space.batch_sizes
        assert m.hyper.learning_rate in space.learning_rates
        assert m.hyper.beta in space.betas
        assert_equal(m.t, 0)
    space = SearchSpace(batch_sizes=(32,), learning_rates=(1e-3,),
                        betas=(4.,))
    pop = init_population(space, 2, random_state=1, init_fn=_toy_init)
    assert pop.members[0].hyper == pop.members[1].hyper
    assert pop.members[0].theta[0] != pop.members[1].theta[0]
    pop2 = init_population(space, 2, random_state=1, init_fn=_toy_init)
    for m1, m2 in zip(pop.members, pop2.members):
        assert m1.hyper == m2.hyper
        assert_array_equal(m1.theta, m2.theta)
    assert_raises(ValueError, init_population, space, 1)


def test_exploit_size_five():
    """Test that one bottom member copies the top member"""
    pop = _population([0.5, 0.9, 0.1, 0.7, 0.3])
    new = exploit(pop, 0)
    copied = [m for m in new.members if m.exploited_from is not None]
    assert_equal(len(copied), 1)
    assert_equal(copied[0].member_id, 2)
    assert_equal(copied[0].exploited_from, 1)
    assert_array_equal(copied[0].theta, [1.])
    # the input population is left alone
    assert_array_equal(pop.members[2].theta, [2.])
    # ties are broken by member id
    new = exploit(_population([0.] * 5), 0)
    assert_equal(new.members[4].exploited_from, 0)
    assert_array_equal(new.members[4].theta, [0.])
    # too small to exploit
    new = exploit(_population([0., 1.]), 0)
    assert all(m.exploited_from is None for m in new.members)


def test_exploit_properties():
    """Test that exploit never overwrites the best member"""
    rng = np.random.RandomState(0)
    for _ in range(10000):
        size = rng.randint(2, 21)
        scores = rng.randint(0, 5, size).astype(float)
        pop = _population(scores)
        new = exploit(pop, rng)
        best = pop.best()
        assert_array_equal(new.members[best.member_id].theta, best.theta)
        assert_equal(new.scores.max(), pop.scores.max())
        n_cut = int(0.2 * size)
        for m in pop.ranked()[n_cut:size - n_cut]:
            assert new.members[m.member_id].exploited_from is None
            assert_array_equal(new.members[m.member_id].theta, m.theta)


def test_exploit_copy_h():
    """Test the variant copying hyperparameters"""
    pop = _population([0.5, 0.9, 0.1, 0.7, 0.3])
    pop.members[1].hyper = Hyper(0.1, 64, 8.)
    assert_equal(exploit(pop, 0).members[2].hyper, Hyper(1e-3, 8, 1.))
    assert_equal(exploit(pop, 0, copy_h=True).members[2].hyper,
                 Hyper(0.1, 64, 8.))


def test_explore():
    """Test multiplicative hyperparameter perturbation"""
    h = explore(Hyper(1e-3, 64, 4.), factors=(2., 0.5, 1.2))
    assert_allclose([h.learning_rate, h.batch_size, h.beta],
                    [2e-3, 32, 4.8])
    h = explore(Hyper(1e-3, 1, 4.), factors=(1., 0.5, 1.))
    assert_equal(h.batch_size, 1)
    h = explore(Hyper(1e-3, 80, 4.), factors=(1., 2., 1.), n_samples=100)
    assert_equal(h.batch_size, 100)

    rng = np.random.RandomState(0)
    n_draws = 10000
    ratios = [explore(Hyper(1e-3, 64, 4.), rng).learning_rate / 1e-3
              for _ in range(n_draws)]
    values, counts = np.unique(np.round(ratios, 6), return_counts=True)
    assert_allclose(values, EXPLORE_FACTORS)
    assert np.all(np.abs(counts / float(n_draws) - 0.25) < 0.02)


def test_has_converged():
    """Test the patience rule"""
    history = [.2, .30, .301, .3005, .3009, .3012, .3011]
    assert has_converged(history, 0.005, 5)
    assert not has_converged(history[:6], 0.005, 5)
    assert not has_converged([.1, .1], 0.005, 5)
    assert has_converged([.1, .1], 0.005, 1)
    assert_raises(ValueError, has_converged, history, 0.005, 0)


def test_toy_objective():
    """Test PBT on a one parameter quadratic with the learning rate"""
    space = _toy_space()
    for seed in range(5):
        pop = init_population(space, 16, random_state=seed,
                              init_fn=_toy_init)
        best = list()
        for _ in range(30):
            pop = run_generation(pop, _toy_step, _toy_eval, space)
            best.append(pop.best().score)
        assert abs(pop.best().theta[0] - 3.) < 0.01
        assert best[-1] >= best[0]
        assert_equal(pop.generation, 30)
        assert all(m.t == 30 for m in pop.members)


def test_generation_barrier():
    """Test that members are evaluated generation by generation"""
    seen = list()

    def step(member, rng):
        seen.append(('step', member.t))
        return member

    def evaluate(member, rng):
        seen.append(('eval', member.t))
        return float(rng.rand())

    pop = init_population(_toy_space(), 6, 0, init_fn=_toy_init)
    for generation in range(3):
        pop = run_generation(pop, step, evaluate)
        assert sorted(set(t for _, t in seen)) == [generation]
        del seen[:]


def test_constant_eval():
    """Test that exploit with a constant score keeps the best score"""
    space = _toy_space()
    pop = init_population(space, 10, 0, init_fn=_toy_init)
    pop = run_generation(pop, _toy_step, _constant_eval, space)
    assert_equal(sum(m.exploited_from is not None for m in pop.members), 2)
    assert_equal(pop.scores.max(), 0.)


def test_divergence():
    """Test handling of diverged members"""
    def step(member, rng):
        if member.member_id == 0:
            raise DivergedError('nan', batch_index=3)
        return _toy_step(member, rng)

    space = _toy_space()
    pop = init_population(space, 5, 0, init_fn=_toy_init)
    new = run_generation(pop, step, _toy_eval, space)
    assert_equal(new.members[0].exploited_from, new.ranked()[0].member_id)
    assert_equal(len(new), 5)

    def fail(member, rng):
        raise DivergedError('nan', batch_index=0)

    try:
        run_generation(pop, fail, _toy_eval, space, stage='leaf-0/1')
    except DivergedError as exp:
        assert_equal(exp.stage, 'leaf-0/1')
    else:
        raise AssertionError('DivergedError not raised')


def test_determinism():
    """Test that runs depend on the master seed only"""
    space = _toy_space()
    thetas = list()
    for n_jobs in (1, 1, 2):
        pop = init_population(space, 8, 7, init_fn=_toy_init)
        for _ in range(4):
            pop = run_generation(pop, _toy_step, _toy_eval, space,
                                 n_jobs=n_jobs)
        thetas.append([m.theta[0] for m in pop.members])
    assert_array_equal(thetas[0], thetas[1])
    assert_array_equal(thetas[0], thetas[2])


def test_generation_log(tmpdir):
    """Test the newline-delimited generation log"""
    fname = op.join(str(tmpdir), 'generations.ndjson')
    log = GenerationLog(fname)
    space = _toy_space()
    pop = init_population(space, 4, 0, init_fn=_toy_init)
    pop = run_generation(pop, _toy_step, _toy_eval, space, log=log,
                         stage='pbt')
    pop.members[0].score = -np.inf
    log.append(1, pop.members[0], 'pbt')
    with open(fname) as fid:
        lines = fid.readlines()
    assert_equal(len(lines), 5)
    records = [json.loads(line) for line in lines]
    assert_equal(list(records[0].keys()),
                 ['generation', 'member_id', 'learning_rate', 'batch_size',
                  'beta', 'score', 'stage'])
    assert_equal([r['member_id'] for r in records[:4]], [0, 1, 2, 3])
    assert records[-1]['score'] is None
    assert_equal(len(log.records), 5)
