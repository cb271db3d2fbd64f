import numpy as np
from numpy.testing import assert_allclose, assert_equal, assert_raises

from rpuvae.udr import ModelCodes, similarity_matrix, udr_pair, udr_member, \
                       compute_codes, evaluation_subset
from rpuvae.vae import build_vae


def _factorial_code(levels=10, n_latents=3):
    """1000 samples of mutually rank-uncorrelated latents"""
    grid = np.unravel_index(np.arange(levels ** n_latents),
                            (levels,) * n_latents)
    return np.array(grid, dtype=float).T


def test_similarity_matrix():
    """Test absolute Spearman similarity"""
    rng = np.random.RandomState(0)
    means = rng.randn(200, 4)
    a = ModelCodes(means, np.ones(4))
    assert_allclose(np.diag(similarity_matrix(a, a)), 1., rtol=1e-12)
    flipped = means.copy()
    flipped[:, 2] *= -1
    S = similarity_matrix(a, ModelCodes(flipped, np.ones(4)))
    assert_allclose(np.diag(S), 1., rtol=1e-12)
    # constant latents are not similar to anything
    means[:, 1] = 3.
    S = similarity_matrix(a, ModelCodes(means, np.ones(4)))
    assert_allclose(S[:, 1], 0.)
    assert_raises(ValueError, similarity_matrix, a,
                  ModelCodes(means[:10], np.ones(4)))


def test_similarity_null():
    """Test that independent codes have small similarities"""
    rng = np.random.RandomState(1)
    n = 1000
    null = [np.corrcoef(np.argsort(np.argsort(rng.randn(n))),
                        np.argsort(np.argsort(rng.randn(n))))[0, 1]
            for _ in range(500)]
    threshold = 5 * np.std(null)
    a = ModelCodes(rng.randn(n, 10), np.ones(10))
    b = ModelCodes(rng.randn(n, 10), np.ones(10))
    assert np.all(similarity_matrix(a, b) < threshold)


def test_udr_pair_closed_form():
    """Test UDR pair scores of hand-checkable similarity matrices"""
    kl = np.ones(10)
    assert_allclose(udr_pair(np.eye(10), kl, kl), 1.)
    S = np.eye(10)[np.random.RandomState(0).permutation(10)]
    assert_allclose(udr_pair(S, kl, kl), 1.)
    for c in (0.05, 0.3, 1.):
        assert_allclose(udr_pair(np.full((10, 10), c), kl, kl), c / 10.,
                        rtol=1e-12)
    # uninformative models
    assert_equal(udr_pair(np.eye(10), np.zeros(10), kl), 0.)
    assert_equal(udr_pair(np.eye(10), kl, np.full(10, 0.005)), 0.)
    # only informative latents count
    kl_a = np.r_[np.ones(3), np.zeros(7)]
    assert_allclose(udr_pair(np.eye(10), kl_a, kl_a), 1.)
    assert_raises(ValueError, udr_pair, np.eye(10), kl, kl, 0.)
    assert_raises(ValueError, udr_pair, np.eye(3), kl, kl)


def test_udr_pair_properties():
    """Test symmetry, range and permutation invariance of pair scores"""
    rng = np.random.RandomState(2)
    for _ in range(1000):
        S = rng.rand(6, 5) ** 3
        kl_a, kl_b = rng.rand(6), rng.rand(5)
        score = udr_pair(S, kl_a, kl_b, 0.2)
        assert 0. <= score <= 1.
        assert_allclose(udr_pair(S.T, kl_b, kl_a, 0.2), score, rtol=1e-12)
    pa, pb = rng.permutation(6), rng.permutation(5)
    assert_allclose(udr_pair(S[pa][:, pb], kl_a[pa], kl_b[pb], 0.2),
                    udr_pair(S, kl_a, kl_b, 0.2), rtol=1e-12)
    # raising a column maximum with a fixed column sum
    S = np.array([[0.6, 0.1], [0.3, 0.8]])
    S2 = np.array([[0.7, 0.1], [0.2, 0.8]])
    kl = np.ones(2)
    assert udr_pair(S2, kl, kl) >= udr_pair(S, kl, kl)


def test_permuted_copy():
    """Test that a permuted and sign-flipped copy scores exactly 1"""
    means = _factorial_code()
    assert_equal(len(means), 1000)
    a = ModelCodes(means, np.ones(3))
    b = ModelCodes(-means[:, [2, 0, 1]], np.ones(3))
    assert_allclose(udr_pair(similarity_matrix(a, b), a.kl, b.kl), 1.,
                    rtol=1e-12)


def test_udr_member():
    """Test per-model medians and the member score"""
    means = _factorial_code()
    kl = np.ones(3)
    models = [ModelCodes(means, kl) for _ in range(5)]
    scores, member = udr_member(models)
    assert_allclose(scores, 1., rtol=1e-12)
    assert_allclose(member, 1., rtol=1e-12)

    rng = np.random.RandomState(3)
    models[2] = ModelCodes(rng.randn(1000, 3), kl)
    scores, member = udr_member(models)
    assert scores[2] < np.median(scores[[0, 1, 3, 4]])
    assert_allclose(member, scores.max())

    a = ModelCodes(rng.randn(50, 4), kl=np.ones(4))
    b = ModelCodes(rng.randn(50, 4), kl=np.ones(4))
    scores, member = udr_member([a, b])
    pair = udr_pair(similarity_matrix(a, b), a.kl, b.kl)
    assert_allclose(scores, [pair, pair])
    assert_raises(ValueError, udr_member, [a])


def test_udr_member_params():
    """Test UDR of VAE parameters on evaluation images"""
    rng = np.random.RandomState(4)
    images = (rng.rand(30, 4, 4) > 0.5).astype(float)
    models = [build_vae((4, 4), 3, hidden=(8,), random_state=k)
              for k in range(3)]
    scores, member = udr_member(models, images, kl_mask_threshold=1e-6)
    assert_equal(scores.shape, (3,))
    assert np.all((scores >= 0) & (scores <= 1))
    codes = compute_codes(models[0], images)
    assert_equal(codes.means.shape, (30, 3))
    assert_raises(ValueError, udr_member, models)


def test_evaluation_subset():
    """Test the seeded evaluation subset"""
    idx = evaluation_subset(5000, 1000, random_state=0)
    assert_equal(len(np.unique(idx)), 1000)
    assert np.all(np.diff(idx) > 0)
    assert_allclose(idx, evaluation_subset(5000, 1000, random_state=0))
    assert_allclose(evaluation_subset(10, 1000), np.arange(10))


def test_model_codes():
    """Test ModelCodes validation"""
    assert_raises(ValueError, ModelCodes, np.zeros((1, 3)), np.zeros(3))
    assert_raises(ValueError, ModelCodes, np.zeros((5, 3)), np.zeros(2))
