import collections

import numpy as np
import pytest

from augment.noise import (FORM_KINDS, AugmentConfig, FeatureStats, Kind,
                           augment_batch, form_pair, gaussian_noise,
                           random_mask, random_shift, sample_form_pair,
                           shift_pair_count)


def test_gaussian_noise_without_variance_is_identity():
    row = np.array([0.3, -1.0, 2.0])
    stats = FeatureStats(mean=np.zeros(3), var=np.zeros(3))
    out = gaussian_noise(row, stats, np.random.default_rng(0))
    np.testing.assert_array_equal(out, row)


def test_gaussian_noise_variance():
    rows = np.zeros((10 ** 6, 1))
    stats = FeatureStats(mean=np.zeros(1), var=np.array([4.0]))
    out = gaussian_noise(rows, stats, np.random.default_rng(1))
    assert out.var() == pytest.approx(0.0225 * 4.0, rel=0.02)


def test_gaussian_noise_is_reproducible():
    row = np.linspace(-1, 1, 7)
    stats = FeatureStats(mean=np.zeros(7), var=np.ones(7))
    first = gaussian_noise(row, stats, np.random.default_rng(5))
    second = gaussian_noise(row, stats, np.random.default_rng(5))
    np.testing.assert_array_equal(first, second)


def test_literal_mean_reading_scales_noise_by_mean():
    rows = np.zeros((1000, 2))
    stats = FeatureStats(mean=np.array([0.0, 2.0]), var=np.ones(2))
    out = gaussian_noise(rows, stats, np.random.default_rng(2),
                         literal_mu=True)
    assert (out[:, 0] == 0).all()
    assert out[:, 1].std() > 0.2


def test_mask_extremes():
    row = np.arange(1.0, 6.0)
    rng = np.random.default_rng(0)
    np.testing.assert_array_equal(random_mask(row, 0.0, rng), row)
    np.testing.assert_array_equal(random_mask(row, 1.0, rng), np.zeros(5))


def test_masked_fraction():
    out = random_mask(np.ones(10 ** 6), 0.01, np.random.default_rng(3))
    fraction = float((out == 0).mean())
    spread = np.sqrt(0.01 * 0.99 / 10 ** 6)
    assert abs(fraction - 0.01) < 5 * spread


def test_shift_moves_a_tenth_between_two_dimensions():
    out = random_shift(np.array([10.0, 10.0]), 0.5, np.random.default_rng(0))
    np.testing.assert_allclose(np.sort(out), [9.0, 11.0])
    out = random_shift(np.array([10.0, 0.0]), 0.5, np.random.default_rng(0))
    assert out.tolist() in ([9.0, 1.0], [10.0, 0.0])


def test_shift_preserves_sum_and_touches_one_pair():
    row = np.arange(1.0, 114.0)
    out = random_shift(row, 0.01, np.random.default_rng(4))
    assert shift_pair_count(113, 0.01) == 1
    assert int((out != row).sum()) == 2
    assert out.sum() == pytest.approx(row.sum())


def test_shift_pairs_are_disjoint_in_a_batch():
    rows = np.tile(np.arange(1.0, 101.0), (20, 1))
    out = random_shift(rows, 0.1, np.random.default_rng(6))
    changed = (out != rows).sum(axis=1)
    assert (changed == 20).all()
    np.testing.assert_allclose(out.sum(axis=1), rows.sum(axis=1))


def test_form_pairs_are_uniform():
    rng = np.random.default_rng(8)
    draws = 60000
    counts = collections.Counter(
        sample_form_pair(rng).code for _ in range(draws))
    assert set(counts) == {'GG', 'GM', 'GS', 'MM', 'MS', 'SS'}
    for count in counts.values():
        assert abs(count / draws - 1 / 6) < 0.01


def test_form_pair_sequence_is_reproducible():
    def sequence():
        rng = np.random.default_rng(9)
        return [sample_form_pair(rng).code for _ in range(20)]

    assert sequence() == sequence()
    assert len(FORM_KINDS) == 6


def test_augmented_rows_are_interleaved():
    batch = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    config = AugmentConfig(mask_p=0.0)
    pair = form_pair((Kind.MASK, Kind.MASK), config)
    out = augment_batch(batch, pair, np.random.default_rng(0))
    np.testing.assert_array_equal(out, np.repeat(batch, 2, axis=0))


def test_first_form_goes_to_even_rows():
    batch = np.arange(1.0, 13.0).reshape(3, 4)
    pair = form_pair((Kind.MASK, Kind.SHIFT), AugmentConfig(mask_p=0.0))
    out = augment_batch(batch, pair, np.random.default_rng(1))
    np.testing.assert_array_equal(out[0::2], batch)
    assert (out[1::2] != batch).sum() == 3 * 2


def test_augmentation_is_reproducible_and_leaves_input_intact():
    batch = np.random.default_rng(2).standard_normal((5, 6))
    copy = batch.copy()
    pair = form_pair((Kind.GAUSSIAN, Kind.SHIFT))
    first = augment_batch(batch, pair, np.random.default_rng(3))
    second = augment_batch(batch, pair, np.random.default_rng(3))
    np.testing.assert_array_equal(first, second)
    np.testing.assert_array_equal(batch, copy)
    assert first.shape == (10, 6)
    assert np.isfinite(first).all()
