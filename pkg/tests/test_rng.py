import numpy as np

from dtslab.rng import RngStream, box_muller, uniform_block


def test_same_stream_reproduces():
    a = RngStream(123, 5).uniforms(100)
    b = RngStream(123, 5).uniforms(100)
    assert np.array_equal(a, b)


def test_streams_and_seeds_differ():
    base = RngStream(123, 5).uniforms(64)
    assert not np.array_equal(base, RngStream(123, 6).uniforms(64))
    assert not np.array_equal(base, RngStream(124, 5).uniforms(64))


def test_batching_does_not_change_sequence():
    whole = RngStream(9, 0).uniforms(32)
    s = RngStream(9, 0)
    parts = np.concatenate([s.uniforms(5), s.uniforms(3), s.uniforms(24)])
    assert np.array_equal(whole, parts)


def test_bulk_block_matches_stream_draws():
    block = uniform_block(77, np.arange(4), 3, 10)
    for idx in range(4):
        s = RngStream(77, idx)
        s.uniforms(3)  # skip to counter 3
        assert np.array_equal(block[idx], s.uniforms(10))


def test_uniform_range_and_moments():
    u = RngStream(2024, 1).uniforms(200_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1.0 / 12.0) < 0.002


def test_box_muller_pairs_are_standard_normal():
    z = RngStream(5, 0).normal_pairs(100_000)
    assert z.shape == (100_000, 2)
    flat = z.ravel()
    assert abs(flat.mean()) < 0.01
    assert abs(flat.var() - 1.0) < 0.02
    # the two coordinates of a pair are uncorrelated
    corr = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
    assert abs(corr) < 0.01


def test_box_muller_layout_matches_uniforms():
    s1 = RngStream(5, 3)
    pairs = s1.normal_pairs(7)
    s2 = RngStream(5, 3)
    u = s2.uniforms(14).reshape(7, 2)
    assert np.array_equal(pairs, box_muller(u))


def test_negative_seed_accepted():
    a = RngStream(-1, 0).uniforms(4)
    b = RngStream(-1, 0).uniforms(4)
    assert np.array_equal(a, b)
