"""Ranking strategies against independent brute-force scorers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coembed.data import InteractionDataset
from coembed.errors import ConfigError, DataError
from coembed.model import EmbeddingModel, init_model
from coembed.recommend import (
    Ranking,
    StrategyConfig,
    combine_embeddings,
    combined_scores,
    cosine,
    ensemble_rank,
    item_item_scores,
    recommend_for_user,
    similarity_table,
    top_n,
    user_item_scores,
    weighted_scores,
)


def brute_cosine(a, b):
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (na * nb)


def fixture(seed=0, n_users=5, n_items=8, dim=4):
    """Dense-ish toy world: every user consumed 2-4 items."""
    rng = np.random.default_rng(seed)
    model = init_model(n_users, n_items, dim, seed)
    model.user_vectors[:] = rng.normal(0, 1.0, (n_users, dim))
    model.item_vectors[:] = rng.normal(0, 1.0, (n_items, dim))
    users, items = [], []
    for u in range(n_users):
        history = rng.choice(n_items, size=int(rng.integers(2, 5)), replace=False)
        for i in history:
            users.append(u)
            items.append(int(i))
    ds = InteractionDataset(
        np.array(users), np.array(items),
        [f"u{k}" for k in range(n_users)], [f"i{k}" for k in range(n_items)],
    )
    return model, ds


class TestCosine:
    def test_analytic_values(self):
        assert cosine(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == pytest.approx(1.0)
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)
        assert cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(
            0.70710678, abs=1e-8
        )

    def test_zero_norm_scores_zero(self):
        assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dimension_mismatch_fatal(self):
        with pytest.raises(ConfigError):
            cosine(np.ones(3), np.ones(4))

    @given(st.integers(0, 2**31), st.floats(min_value=0.1, max_value=50.0))
    @settings(max_examples=40, deadline=None)
    def test_symmetric_and_scale_invariant(self, seed, c):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(0, 1, 5), rng.normal(0, 1, 5)
        assert cosine(a, b) == pytest.approx(cosine(b, a), abs=1e-12)
        assert cosine(c * a, b) == pytest.approx(cosine(a, b), abs=1e-10)


class TestUserItem:
    def test_matches_brute_force(self):
        model, ds = fixture()
        for u in range(ds.user_count):
            scores = user_item_scores(model, u)
            for i in range(ds.item_count):
                ref = brute_cosine(model.user_vectors[u], model.item_vectors[i])
                assert scores[i] == pytest.approx(ref, abs=1e-10)

    def test_colinear_item_tops(self):
        model, ds = fixture()
        model.item_vectors[3] = 2.5 * model.user_vectors[1]
        assert user_item_scores(model, 1)[3] == pytest.approx(1.0)


class TestItemItem:
    def test_matches_brute_force_double_loop(self):
        model, ds = fixture()
        for u in range(ds.user_count):
            history = ds.user_history(u)
            scores = item_item_scores(model, ds, u)
            for i in range(ds.item_count):
                ref = sum(
                    brute_cosine(model.item_vectors[i], model.item_vectors[j])
                    for j in history
                ) / len(history)
                assert scores[i] == pytest.approx(ref, abs=1e-10)

    def test_direct_arithmetic_case(self):
        # candidate at cosine 0.5 and 0.3 to the two consumed items
        model = EmbeddingModel(
            np.array([[1.0, 0.0]]),
            np.array([
                [1.0, 0.0],
                [0.0, 1.0],
                [0.5, math.sqrt(0.75)],
            ]),
        )
        model.item_vectors[2] /= np.linalg.norm(model.item_vectors[2])
        ds = InteractionDataset(np.array([0, 0]), np.array([0, 1]), ["u"], ["a", "b", "c"])
        scores = item_item_scores(model, ds, 0)
        expected = (brute_cosine(model.item_vectors[2], model.item_vectors[0])
                    + brute_cosine(model.item_vectors[2], model.item_vectors[1])) / 2
        assert scores[2] == pytest.approx(expected, abs=1e-12)

    def test_candidate_equal_to_single_consumed_item(self):
        model, ds0 = fixture()
        ds = InteractionDataset(np.array([0]), np.array([2]), ["u"],
                                [f"i{k}" for k in range(ds0.item_count)])
        scores = item_item_scores(model, ds, 0)
        assert scores[2] == pytest.approx(1.0)


class TestWeighted:
    def test_matches_brute_force(self):
        model, ds = fixture()
        for beta, mu in ((0.75, 0.25), (0.5, 0.5), (0.9, 0.1)):
            for u in range(ds.user_count):
                got = weighted_scores(model, ds, u, beta, mu)
                su = user_item_scores(model, u)
                si = item_item_scores(model, ds, u)
                ref = (beta * su + mu * si) / (beta + mu)
                assert np.allclose(got, ref, atol=1e-12)

    def test_direct_arithmetic(self):
        # 0.75 * 0.8 + 0.25 * 0.4 = 0.7
        assert (0.75 * 0.8 + 0.25 * 0.4) / (0.75 + 0.25) == pytest.approx(0.7)

    def test_equal_weights_is_plain_average(self):
        model, ds = fixture()
        got = weighted_scores(model, ds, 0, 0.4, 0.4)
        ref = (user_item_scores(model, 0) + item_item_scores(model, ds, 0)) / 2
        assert np.allclose(got, ref, atol=1e-12)

    def test_degenerate_weights_reduce_to_base_strategies(self):
        model, ds = fixture()
        for u in range(ds.user_count):
            assert np.allclose(
                weighted_scores(model, ds, u, 1.0, 0.0), user_item_scores(model, u),
                atol=1e-12,
            )
            assert np.allclose(
                weighted_scores(model, ds, u, 0.0, 1.0), item_item_scores(model, ds, u),
                atol=1e-12,
            )

    def test_zero_sum_fatal(self):
        model, ds = fixture()
        with pytest.raises(ConfigError):
            weighted_scores(model, ds, 0, 0.0, 0.0)


class TestCombine:
    def brute_augmented(self, model, ds, k):
        dim = model.dim
        out = np.zeros((ds.item_count, 2 * dim))
        for i in range(ds.item_count):
            consumers = ds.item_consumers(i)
            sims = [brute_cosine(model.user_vectors[u], model.item_vectors[i])
                    for u in consumers]
            if k is None or k >= len(consumers):
                chosen = list(consumers)
            else:
                # highest cosine first, id ascending on ties
                order = sorted(range(len(consumers)),
                               key=lambda idx: (-sims[idx], consumers[idx]))
                chosen = [consumers[idx] for idx in order[:k]]
            out[i, :dim] = model.item_vectors[i]
            out[i, dim:] = model.user_vectors[chosen].mean(axis=0)
        return out

    def test_matches_brute_force_all_and_k(self):
        model, ds = fixture(seed=3)
        for k in (None, 1, 2, 10):
            got = combine_embeddings(model, ds, k)
            ref = self.brute_augmented(model, ds, k)
            assert got.shape == (ds.item_count, 2 * model.dim)
            assert np.allclose(got, ref, atol=1e-10)

    def test_single_consumer_mean_is_that_user(self):
        model, _ = fixture()
        ds = InteractionDataset(np.array([2, 0]), np.array([0, 1]),
                                [f"u{k}" for k in range(5)],
                                [f"i{k}" for k in range(8)])
        aug = combine_embeddings(model, ds, None)
        assert np.allclose(aug[0, model.dim:], model.user_vectors[2], atol=1e-12)

    def test_scores_are_item_item_over_augmented_rows(self):
        model, ds = fixture(seed=5)
        aug = combine_embeddings(model, ds, 2)
        for u in range(ds.user_count):
            got = combined_scores(model, ds, u, 2)
            history = ds.user_history(u)
            for i in range(ds.item_count):
                ref = sum(brute_cosine(aug[i], aug[j]) for j in history) / len(history)
                assert got[i] == pytest.approx(ref, abs=1e-10)


class TestTopN:
    def test_filter_and_sort(self):
        ranking = top_n(np.array([0.9, 0.8, 0.7]), np.array([0]), 2)
        assert ranking.items.tolist() == [1, 2]
        assert ranking.scores.tolist() == [0.8, 0.7]

    def test_exhaustion_returns_short_list(self):
        ranking = top_n(np.array([0.5, 0.4, 0.3]), np.array([0, 1]), 10)
        assert ranking.items.tolist() == [2]

    def test_ties_prefer_lower_item_id(self):
        scores = np.array([0.3, 0.7, 0.5, 0.7, 0.7])
        ranking = top_n(scores, np.array([], dtype=int), 3)
        assert ranking.items.tolist() == [1, 3, 4]
        all_equal = top_n(np.zeros(6), np.array([2]), 4)
        assert all_equal.items.tolist() == [0, 1, 3, 4]

    def test_scores_non_increasing(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            scores = rng.normal(0, 1, 30)
            consumed = rng.choice(30, size=5, replace=False)
            ranking = top_n(scores, consumed, 10)
            assert np.all(np.diff(ranking.scores) <= 1e-15)
            assert not set(ranking.items.tolist()) & set(consumed.tolist())

    def test_bad_n(self):
        with pytest.raises(ConfigError):
            top_n(np.array([0.1]), np.array([], dtype=int), 0)


def fixed_rankings(table):
    """Method stub returning canned (items, scores) per call."""
    def method(u, depth):
        items, scores = table
        return Ranking(np.array(items[:depth]), np.array(scores[:depth]))
    return method


class TestEnsemble:
    def test_pure_vote_count(self):
        methods = [
            fixed_rankings(([1, 2, 3], [0.9, 0.8, 0.7])),
            fixed_rankings(([2, 3, 4], [0.6, 0.5, 0.4])),
            fixed_rankings(([5, 2, 6], [0.9, 0.2, 0.1])),
        ]
        ranking = ensemble_rank(methods, 0, 3, 3, use_rank_weights=False)
        votes = dict(zip(ranking.items.tolist(), ranking.scores.tolist()))
        assert votes[2] == pytest.approx(3.0)
        assert votes[3] == pytest.approx(2.0)
        # third slot: single-vote tie among {1, 4, 5, 6}; 1 and 5 share the
        # highest similarity 0.9, lower id wins
        assert ranking.items.tolist() == [2, 3, 1]

    def test_single_method_is_identity(self):
        methods = [fixed_rankings(([4, 1, 7, 2], [0.9, 0.5, 0.4, 0.2]))]
        ranking = ensemble_rank(methods, 0, 4, 3, use_rank_weights=True)
        assert ranking.items.tolist() == [4, 1, 7]

    def test_rank_weights_follow_log_discount(self):
        methods = [
            fixed_rankings(([1, 2], [0.9, 0.8])),
            fixed_rankings(([2, 1], [0.7, 0.6])),
        ]
        ranking = ensemble_rank(methods, 0, 2, 2, use_rank_weights=True)
        votes = dict(zip(ranking.items.tolist(), ranking.scores.tolist()))
        expected = 1.0 / math.log2(2) + 1.0 / math.log2(3)
        assert votes[1] == pytest.approx(expected, abs=1e-12)
        assert votes[2] == pytest.approx(expected, abs=1e-12)

    def test_linear_rank_weight_form(self):
        methods = [fixed_rankings(([3, 1, 5], [0.9, 0.8, 0.7]))]
        ranking = ensemble_rank(methods, 0, 3, 3, use_rank_weights=True,
                                rank_weight_form="linear")
        votes = dict(zip(ranking.items.tolist(), ranking.scores.tolist()))
        assert votes[3] == pytest.approx(3 / 3)
        assert votes[1] == pytest.approx(2 / 3)
        assert votes[5] == pytest.approx(1 / 3)

    def test_method_weights_scale_votes(self):
        methods = [
            fixed_rankings(([1], [0.9])),
            fixed_rankings(([2], [0.8])),
        ]
        ranking = ensemble_rank(methods, 0, 2, 2, method_weights=[0.2, 0.7],
                                use_rank_weights=False)
        votes = dict(zip(ranking.items.tolist(), ranking.scores.tolist()))
        assert votes[1] == pytest.approx(0.2)
        assert votes[2] == pytest.approx(0.7)
        assert ranking.items[0] == 2

    def test_tie_breaks_by_similarity_then_id(self):
        # items 1 and 2 get one vote each; 2 carries higher similarity
        methods = [
            fixed_rankings(([1], [0.3])),
            fixed_rankings(([2], [0.9])),
        ]
        ranking = ensemble_rank(methods, 0, 2, 2, use_rank_weights=False)
        assert ranking.items.tolist() == [2, 1]
        # equal similarity: lower id first
        methods = [
            fixed_rankings(([7], [0.5])),
            fixed_rankings(([3], [0.5])),
        ]
        ranking = ensemble_rank(methods, 0, 2, 2, use_rank_weights=False)
        assert ranking.items.tolist() == [3, 7]

    def test_depth_below_n_fatal(self):
        with pytest.raises(ConfigError):
            ensemble_rank([fixed_rankings(([1], [0.5]))], 0, 2, 5)

    def test_empty_method_list_fatal(self):
        with pytest.raises(ConfigError):
            ensemble_rank([], 0, 5, 5)

    def test_matches_exhaustive_formula(self):
        # brute-force Eq-style evaluation over the candidate union
        rng = np.random.default_rng(9)
        tables = []
        for _ in range(3):
            items = rng.choice(20, size=6, replace=False)
            scores = np.sort(rng.uniform(0, 1, 6))[::-1]
            tables.append((items.tolist(), scores.tolist()))
        weights = [0.5, 0.3, 0.8]
        depth = 4
        got = ensemble_rank([fixed_rankings(t) for t in tables], 0, depth, depth,
                            method_weights=weights, use_rank_weights=True)

        votes = {}
        sims = {}
        for (items, scores), w in zip(tables, weights):
            for rank, (item, s) in enumerate(zip(items[:depth], scores[:depth]), 1):
                votes[item] = votes.get(item, 0.0) + w / math.log2(rank + 1)
                sims[item] = sims.get(item, 0.0) + s
        expected = sorted(votes, key=lambda it: (-votes[it], -sims[it], it))[:depth]
        assert got.items.tolist() == expected
        for item, score in zip(got.items.tolist(), got.scores.tolist()):
            assert score == pytest.approx(votes[item], abs=1e-10)


class TestRecommendForUser:
    def test_history_never_recommended(self):
        model, ds = fixture(seed=7)
        for kind in ("user_item", "item_item", "weighted", "combined", "ensemble"):
            cfg = StrategyConfig(kind=kind, top_n=5, depth=6)
            for u in range(ds.user_count):
                ranking = recommend_for_user(model, ds, u, cfg)
                assert not set(ranking.items.tolist()) & set(ds.user_history(u).tolist())

    def test_ensemble_matches_manual_vote_over_base_strategies(self):
        model, ds = fixture(seed=11)
        cfg = StrategyConfig(kind="ensemble", top_n=4, depth=5,
                             user_weight=0.6, item_weight=0.4, top_consumers=2,
                             use_rank_weights=True)
        u = 1
        got = recommend_for_user(model, ds, u, cfg)

        history = ds.user_history(u)
        base_scores = [
            user_item_scores(model, u),
            item_item_scores(model, ds, u),
            weighted_scores(model, ds, u, 0.6, 0.4),
            combined_scores(model, ds, u, 2),
        ]
        votes, sims = {}, {}
        for scores in base_scores:
            ranking = top_n(scores, history, 5)
            for rank, (item, s) in enumerate(zip(ranking.items.tolist(),
                                                 ranking.scores.tolist()), 1):
                votes[item] = votes.get(item, 0.0) + 1.0 / math.log2(rank + 1)
                sims[item] = sims.get(item, 0.0) + s
        expected = sorted(votes, key=lambda it: (-votes[it], -sims[it], it))[:4]
        assert got.items.tolist() == expected

    def test_method_weights_required_when_flagged(self):
        model, ds = fixture()
        cfg = StrategyConfig(kind="ensemble", top_n=3, depth=5, use_method_weights=True)
        with pytest.raises(ConfigError):
            recommend_for_user(model, ds, 0, cfg)


class TestSimilarityTable:
    def test_matches_exhaustive_scan(self):
        model, ds = fixture(seed=13)
        entries = similarity_table(model, ds, ["i2", "i5"], 3)
        assert len(entries) == 2
        for entry in entries:
            seed = ds.item_index(entry.seed_key)
            sims = [
                (brute_cosine(model.item_vectors[seed], model.item_vectors[j]), j)
                for j in range(ds.item_count) if j != seed
            ]
            sims.sort(key=lambda t: (-t[0], t[1]))
            expected = [(ds.item_keys[j], s) for s, j in sims[:3]]
            assert [key for key, _ in entry.neighbors] == [key for key, _ in expected]
            for (_, got_sim), (_, want_sim) in zip(entry.neighbors, expected):
                assert got_sim == pytest.approx(want_sim, abs=1e-10)

    def test_duplicate_embedding_ranks_first(self):
        model, ds = fixture()
        model.item_vectors[6] = model.item_vectors[1]
        entries = similarity_table(model, ds, ["i1"], 2)
        assert entries[0].neighbors[0][0] == "i6"
        assert entries[0].neighbors[0][1] == pytest.approx(1.0)

    def test_unknown_seed_reports_and_continues(self):
        model, ds = fixture()
        entries = similarity_table(model, ds, ["i0", "ghost", "i3"], 2)
        assert entries[0].error is None
        assert entries[1].error is not None
        assert "ghost" in entries[1].error
        assert entries[2].error is None
