import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmlist.code import full_space_transform
from rmlist.soft import (EPS_CLAMP, ChannelModel, awgn_sigma2, leaf_ml_fullspace, leaf_ml_repetition,
                         posteriors, symbol_log_posteriors, transmit, word_log_posterior)

unit = st.floats(-0.999, 0.999, allow_nan=False)


def exhaustive_words(N):
    return 1 - 2 * np.array(list(itertools.product((0, 1), repeat=N)), dtype=np.int8)


# --- channel ----------------------------------------------------------------

def test_channel_validation():
    with pytest.raises(ValueError):
        ChannelModel.awgn(0.0)
    with pytest.raises(ValueError):
        ChannelModel.bsc(0.5)
    with pytest.raises(ValueError):
        ChannelModel.bsc(0.0)
    with pytest.raises(ValueError):
        ChannelModel("rayleigh")


def test_sigma2_from_snr():
    assert awgn_sigma2(0.0, 0.5) == pytest.approx(1.0)
    assert awgn_sigma2(10.0, 0.25) == pytest.approx(1 / (2 * 0.25 * 10))
    ch = ChannelModel.awgn_ebn0(3.47, 29 / 128)
    assert ch.snr_db_per_info_bit(29 / 128) == pytest.approx(3.47)
    with pytest.raises(ValueError):
        ChannelModel.bsc(0.1).snr_db_per_info_bit(0.5)


def test_transmit_deterministic_and_noiseless_limit():
    c = np.array([1, -1, 1, 1, -1], dtype=np.int8)
    ch = ChannelModel.awgn(1.0)
    x1 = transmit(c, ch, np.random.default_rng(9))
    x2 = transmit(c, ch, np.random.default_rng(9))
    assert np.array_equal(x1, x2)
    x = transmit(c, ChannelModel.awgn(1e-30), np.random.default_rng(0))
    assert np.allclose(x, c, atol=1e-12)


def test_transmit_noise_statistics():
    sigma2 = 0.7
    c = np.where(np.random.default_rng(1).random(10**6) < 0.5, 1, -1)
    x = transmit(c, ChannelModel.awgn(sigma2), np.random.default_rng(2))
    noise = x - c
    assert abs(noise.mean()) < 0.005
    assert abs(noise.var() / sigma2 - 1) < 0.02


def test_bsc_flip_rate():
    c = np.ones(200_000, np.int8)
    x = transmit(c, ChannelModel.bsc(0.1), np.random.default_rng(3))
    assert set(np.unique(x)) <= {-1.0, 1.0}
    assert abs((x < 0).mean() - 0.1) < 0.003


def test_posterior_examples():
    ch = ChannelModel.awgn(1.0)
    assert posteriors(np.array([0.0]), ch)[0] == 0.0
    assert posteriors(np.array([1.0]), ch)[0] == pytest.approx(0.7615941559557649)
    assert posteriors(np.array([1e6]), ch)[0] == 1 - EPS_CLAMP
    assert posteriors(np.array([-1e6]), ch)[0] == -1 + EPS_CLAMP
    y = posteriors(np.array([0.3, -2.0]), ChannelModel.bsc(0.2))
    assert np.allclose(y, [0.6, -0.6])


def test_posterior_is_bayes_rule():
    # direct ratio of Gaussian likelihoods for +1 and -1 under equal priors
    sigma2 = 0.8
    x = np.linspace(-3, 3, 41)
    lp = np.exp(-(x - 1) ** 2 / (2 * sigma2))
    lm = np.exp(-(x + 1) ** 2 / (2 * sigma2))
    q = lp / (lp + lm)
    assert np.allclose(posteriors(x, ChannelModel.awgn(sigma2)), 2 * q - 1, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50, allow_nan=False), st.floats(0.05, 5))
def test_posterior_sanity(x, sigma2):
    y = posteriors(np.array([x]), ChannelModel.awgn(sigma2))[0]
    assert -1 < y < 1
    assert (1 + y) / 2 + (1 - y) / 2 == pytest.approx(1.0)
    if x != 0 and abs(x / sigma2) > 1e-300:
        assert np.sign(y) == np.sign(x)


# --- leaf ML ----------------------------------------------------------------

def test_repetition_examples():
    e = 1 - EPS_CLAMP
    bits, costs = leaf_ml_repetition(np.array([e, e]))
    assert bits == (0, 1)
    assert costs[0] == pytest.approx(0.0, abs=1e-11)
    assert costs[1] == pytest.approx(2 * np.log(EPS_CLAMP / 2), rel=1e-6)
    _, costs = leaf_ml_repetition(np.array([0.5, 0.5]))
    assert np.exp(costs) == pytest.approx([0.5625, 0.0625])
    _, costs = leaf_ml_repetition(np.array([0.9, -0.9]))
    assert np.exp(costs) == pytest.approx([0.0475, 0.0475])


def test_fullspace_example_order():
    out = leaf_ml_fullspace(np.array([0.8, -0.2]), branch=4)
    words = [tuple(1 - 2 * full_space_transform(a).astype(int)) for a, _ in out]
    assert words == [(1, -1), (1, 1), (-1, -1), (-1, 1)]
    assert np.exp([c for _, c in out]) == pytest.approx([0.54, 0.36, 0.06, 0.04])


def test_fullspace_branch2():
    y = np.array([0.9, -0.1, 0.4, -0.7])
    out = leaf_ml_fullspace(y, branch=2)
    first = full_space_transform(out[0][0])
    second = full_space_transform(out[1][0])
    assert np.array_equal(first, (y < 0).astype(np.uint8))
    assert np.flatnonzero(first ^ second).tolist() == [1]


def test_fullspace_clean_input():
    y = np.full(8, 1 - EPS_CLAMP)
    (a, c), = leaf_ml_fullspace(y, branch=1)
    assert not a.any() and c == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("N", [1, 2, 4, 8, 16])
def test_normalization(N):
    y = np.random.default_rng(N).uniform(-1, 1, N)
    words = exhaustive_words(N)
    assert np.exp(word_log_posterior(y, words)).sum() == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 2, 4, 8, 16]), st.integers(0, 2**32 - 1))
def test_repetition_matches_exhaustive(N, seed):
    y = np.random.default_rng(seed).uniform(-1, 1, N)
    _, costs = leaf_ml_repetition(y)
    ref = word_log_posterior(y, np.array([np.ones(N), -np.ones(N)]))
    assert np.allclose(costs, ref)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([2, 4, 8, 16]), st.sampled_from([2, 4]), st.integers(0, 2**32 - 1))
def test_fullspace_within_exhaustive_top(N, branch, seed):
    y = np.random.default_rng(seed).uniform(-1, 1, N)
    words = exhaustive_words(N)
    ref = np.sort(word_log_posterior(y, words))[::-1]
    out = leaf_ml_fullspace(y, branch=branch)
    got = np.array([c for _, c in out])
    assert len(out) == min(branch, 2**N)
    # top-branch costs of the exhaustive search, and each cost is that of its word
    assert np.allclose(got, ref[:len(out)])
    for a, c in out:
        w = 1 - 2 * full_space_transform(a).astype(int)
        assert word_log_posterior(y, w) == pytest.approx(c)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([2, 4, 8]), st.integers(0, 2**32 - 1))
def test_fullspace_exhaustive_and_frozen(N, seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(-1, 1, N)
    out = leaf_ml_fullspace(y, branch=0)
    assert len(out) == 2**N
    costs = [c for _, c in out]
    assert costs == sorted(costs, reverse=True)
    frozen = (rng.random(N) < 0.5).astype(np.uint8)
    frozen[-1] = 0
    sub = leaf_ml_fullspace(y, branch=0, frozen=frozen)
    assert len(sub) == 2 ** int((frozen == 0).sum())
    assert all(not a[frozen == 1].any() for a, _ in sub)
    allowed = [c for a, c in out if not a[frozen == 1].any()]
    assert np.allclose(sorted(allowed, reverse=True), [c for _, c in sub])


@settings(max_examples=200, deadline=None)
@given(unit, unit, st.floats(0.0, 0.5))
def test_monotone_likelihood(y0, y1, bump):
    y = np.array([y0, y1])
    z = np.array([min(y0 + bump, 0.999), y1])
    for c1 in (1, -1):
        c = np.array([1, c1])
        assert word_log_posterior(z, c) >= word_log_posterior(y, c) - 1e-15


def test_symbol_log_posteriors_sum_to_one():
    y = np.linspace(-0.99, 0.99, 21)
    lp, lq = symbol_log_posteriors(y)
    assert np.allclose(np.exp(lp) + np.exp(lq), 1.0)
