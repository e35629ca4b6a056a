"""Subsampling law and negative-sampler distribution checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coembed._rng import seeded_rng
from coembed.data import InteractionDataset
from coembed.errors import ConfigError, NumericError
from coembed.sampling import (
    MAX_REDRAWS,
    NegativeSampler,
    SubsamplerConfig,
    _draw_items,
    apply_subsampling,
    build_negative_sampler,
    draw_negatives,
    draw_negatives_batch,
    keep_probabilities,
    keep_probability,
)


class TestKeepProbability:
    def test_worked_values(self):
        cfg = SubsamplerConfig(threshold=1e-6)
        # frequency 100x threshold: (sqrt(100) + 1) / 100
        assert keep_probability(10_000, 10**8, cfg) == pytest.approx(0.11)
        # frequency 10000x threshold: (sqrt(10000) + 1) / 10000
        assert keep_probability(1_000_000, 10**8, cfg) == pytest.approx(0.0101)

    def test_rare_item_clamps_to_one(self):
        cfg = SubsamplerConfig(threshold=1e-2)
        # f = 1e-3 is below threshold; raw value exceeds 1
        assert keep_probability(1, 1000, cfg) == 1.0

    def test_discard_mode_is_complement(self):
        keep = keep_probability(100, 10**8, SubsamplerConfig(threshold=1e-6))
        drop = keep_probability(100, 10**8,
                                SubsamplerConfig(threshold=1e-6, discard_mode=True))
        assert drop == pytest.approx(1 - keep)

    def test_raw_count_normalization(self):
        by_total = SubsamplerConfig(threshold=10.0, normalize_by_total=True)
        by_count = SubsamplerConfig(threshold=10.0, normalize_by_total=False)
        # relative frequency 50/1e6 sits far below a threshold of 10
        assert keep_probability(50, 10**6, by_total) == 1.0
        # raw-count mode compares the degree itself to the threshold
        assert keep_probability(50, 10**6, by_count) == pytest.approx((np.sqrt(5.0) + 1) / 5.0)

    @given(st.floats(min_value=1e-9, max_value=1.0),
           st.integers(min_value=1, max_value=10**6))
    @settings(max_examples=60, deadline=None)
    def test_always_a_probability(self, threshold, degree):
        cfg = SubsamplerConfig(threshold=threshold)
        p = keep_probability(degree, 10**6, cfg)
        assert 0.0 <= p <= 1.0

    def test_monotone_in_degree(self):
        cfg = SubsamplerConfig(threshold=1e-6)
        probs = [keep_probability(d, 10**7, cfg) for d in (1, 5, 50, 500, 5000, 50000)]
        assert probs == sorted(probs, reverse=True)

    def test_bad_threshold_rejected(self):
        for bad in (0.0, -1e-6, float("nan"), float("inf")):
            with pytest.raises(ConfigError):
                keep_probability(10, 100, SubsamplerConfig(threshold=bad))


def bucket_fixture():
    """1e6 interactions in four frequency buckets.

    Bucket keep probabilities at threshold 1e-6 are 1, 1, 0.0101, and
    0.00317; mid-range probabilities are avoided on purpose because their
    binomial noise would swamp a +-0.001 band at this volume.
    """
    plan = [(200_000, 1), (50_000, 2), (50, 10_000), (2, 100_000)]
    n_users = 200_000
    users_parts, items_parts, slices = [], [], []
    item_id, count = 0, 0
    for n_items, degree in plan:
        start = count
        if degree == 1:
            users_parts.append(np.arange(n_items, dtype=np.int64) % n_users)
            items_parts.append(np.arange(item_id, item_id + n_items, dtype=np.int64))
            count += n_items
        else:
            for j in range(n_items):
                base = (j * 997) % n_users
                users_parts.append((base + np.arange(degree, dtype=np.int64)) % n_users)
                items_parts.append(np.full(degree, item_id + j, dtype=np.int64))
            count += n_items * degree
        item_id += n_items
        slices.append((start, count, degree))
    ds = InteractionDataset(
        np.concatenate(users_parts), np.concatenate(items_parts),
        [f"u{k}" for k in range(n_users)], [f"i{k}" for k in range(item_id)],
    )
    return ds, slices


class TestApplySubsampling:
    def test_empirical_retention_matches_law(self):
        ds, slices = bucket_fixture()
        cfg = SubsamplerConfig(threshold=1e-6)
        kept = np.zeros(ds.interaction_count, dtype=bool)
        kept[apply_subsampling(ds, cfg, seeded_rng(55, 1, 0))] = True
        previous = None
        for start, stop, degree in slices:
            empirical = kept[start:stop].mean()
            expected = keep_probability(degree, ds.interaction_count, cfg)
            assert abs(empirical - expected) < 0.001
            if previous is not None:
                assert empirical <= previous
            previous = empirical

    def test_view_indexes_the_pair_list(self):
        ds, _ = bucket_fixture()
        view = apply_subsampling(ds, SubsamplerConfig(threshold=1e-6), seeded_rng(3, 1, 0))
        assert view.dtype == np.int64
        assert len(view) > 0
        assert view.min() >= 0 and view.max() < ds.interaction_count
        assert np.all(np.diff(view) > 0)

    def test_inert_threshold_keeps_everything(self):
        users = np.array([0, 0, 1, 1])
        items = np.array([0, 1, 0, 1])
        ds = InteractionDataset(users, items, ["a", "b"], ["x", "y"])
        view = apply_subsampling(ds, SubsamplerConfig(threshold=1.0), seeded_rng(0, 1, 0))
        assert len(view) == 4


class TestNegativeSampler:
    def test_probabilities_match_degree_power(self):
        degrees = np.array([1.0, 2.0, 4.0, 8.0])
        for exponent in (-1.0, -0.5, 0.0, 0.5, 0.75, 1.0, 2.0):
            sampler = build_negative_sampler(degrees, exponent)
            expected = degrees**exponent
            expected = expected / expected.sum()
            assert np.allclose(sampler.probabilities(), expected, atol=1e-12)

    def test_empirical_distribution_three_tier_profile(self):
        # tiny extreme tiers concentrate the mass under every exponent
        degrees = np.concatenate(
            [np.full(3, 1.0), np.full(994, 2e8), np.full(3, 4e16)]
        )
        n = 1_000_000
        for k, exponent in enumerate((-1.0, -0.5, 0.5, 0.75, 1.0)):
            sampler = build_negative_sampler(degrees, exponent)
            draws = _draw_items(sampler, (n,), seeded_rng(123, 7, k))
            counts = np.bincount(draws, minlength=len(degrees))
            l1 = np.abs(counts / n - sampler.probabilities()).sum()
            assert l1 < 0.01, f"exponent {exponent}: L1 {l1}"

    def test_draws_avoid_positive(self):
        sampler = build_negative_sampler(np.array([5.0, 1.0, 1.0]), 1.0)
        rng = seeded_rng(2, 0, 0)
        for _ in range(200):
            out = draw_negatives(sampler, 0, 4, rng)
            assert len(out) == 4
            assert not np.any(out == 0)

    def test_batch_rows_avoid_their_positives(self):
        sampler = build_negative_sampler(np.full(6, 1.0), 0.75)
        positives = np.array([0, 1, 2, 3, 4, 5] * 50)
        out = draw_negatives_batch(sampler, positives, 7, seeded_rng(4, 0, 0))
        assert out.shape == (300, 7)
        assert not np.any(out == positives[:, None])

    def test_batch_matches_scalar_distributionally(self):
        degrees = np.array([1.0, 4.0, 9.0, 16.0, 25.0])
        sampler = build_negative_sampler(degrees, 0.75)
        n = 200_000
        batch = draw_negatives_batch(
            sampler, np.full(n, 2, dtype=np.int64), 1, seeded_rng(9, 0, 0)
        ).ravel()
        p = sampler.probabilities()
        p = p.copy()
        p[2] = 0.0
        p /= p.sum()
        counts = np.bincount(batch, minlength=5)
        assert np.abs(counts / n - p).sum() < 0.01

    def test_zero_count_is_empty(self):
        sampler = build_negative_sampler(np.array([1.0, 2.0]), 0.75)
        assert draw_negatives(sampler, 0, 0, seeded_rng(0, 0, 0)).size == 0
        out = draw_negatives_batch(sampler, np.array([0, 1]), 0, seeded_rng(0, 0, 0))
        assert out.shape == (2, 0)

    def test_single_item_catalog_cannot_avoid_positive(self):
        sampler = build_negative_sampler(np.array([3.0]), 0.75)
        with pytest.raises(ConfigError):
            draw_negatives(sampler, 0, 2, seeded_rng(0, 0, 0))

    def test_redraw_cap_is_fatal_not_infinite(self):
        # second item's weight is so small its interval vanishes in the
        # prefix table; every draw lands on the positive
        degrees = np.array([1e300, 1e-300])
        sampler = build_negative_sampler(degrees, 1.0)
        with pytest.raises(NumericError, match=str(MAX_REDRAWS)):
            draw_negatives(sampler, 0, 1, seeded_rng(0, 0, 0))

    def test_zero_degree_rejected(self):
        with pytest.raises(ConfigError):
            build_negative_sampler(np.array([1.0, 0.0]), 0.75)

    @given(st.integers(min_value=2, max_value=40),
           st.floats(min_value=-1.5, max_value=1.5),
           st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=40, deadline=None)
    def test_draws_in_range(self, n_items, exponent, seed):
        degrees = seeded_rng(seed, 9, 9).integers(1, 50, n_items).astype(float)
        sampler = build_negative_sampler(degrees, exponent)
        out = draw_negatives(sampler, 0, 8, seeded_rng(seed, 0, 0))
        assert out.min() >= 1 if n_items > 1 else True
        assert out.max() < n_items
