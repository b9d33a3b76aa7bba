from __future__ import annotations

import numpy as np
import pytest

from crisisal import model as model_mod
from crisisal.corpus import Label
from crisisal.features import FeatureMatrix
from crisisal.strategies import (
    QueryBatch,
    QueryContext,
    binary_entropy,
    query,
    query_breaking_ties,
    query_discriminative,
    query_greedy_coreset,
    query_least_confidence,
    query_prediction_entropy,
    query_random,
)

from conftest import dense_features
from oracles import greedy_coreset_oracle


def ctx_with_predictions(p: dict[str, float], batch_size: int = 1, seed: int = 0) -> QueryContext:
    return QueryContext(
        unlabeled_ids=tuple(p),
        predictions=p,
        batch_size=batch_size,
        seed=seed,
    )


class TestContext:
    def test_batch_larger_than_pool_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            QueryContext(unlabeled_ids=("a", "b"), batch_size=3)

    def test_overlapping_partitions_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            QueryContext(unlabeled_ids=("a",), labeled_ids=("a",), batch_size=1)

    def test_missing_predictions_named(self):
        ctx = QueryContext(unlabeled_ids=("a", "b"), predictions={"a": 0.5}, batch_size=1)
        with pytest.raises(ValueError, match="b"):
            query_least_confidence(ctx)

    def test_unknown_strategy_rejected(self):
        ctx = ctx_with_predictions({"a": 0.5})
        with pytest.raises(ValueError, match="unknown strategy"):
            query("margin", ctx)


class TestRandom:
    def test_exhaustive_batch(self):
        ctx = QueryContext(unlabeled_ids=("a", "b", "c", "d", "e"), batch_size=5, seed=1)
        batch = query_random(ctx)
        assert sorted(batch.ids) == ["a", "b", "c", "d", "e"]

    def test_deterministic_under_seed(self):
        ctx = QueryContext(unlabeled_ids=tuple(f"x{i}" for i in range(50)), batch_size=10, seed=9)
        assert query_random(ctx).ids == query_random(ctx).ids

    def test_uniform_frequencies_within_three_sigma(self):
        ids = tuple(f"u{i}" for i in range(10))
        counts = {i: 0 for i in ids}
        for seed in range(1000):
            ctx = QueryContext(unlabeled_ids=ids, batch_size=1, seed=seed)
            counts[query_random(ctx).ids[0]] += 1
        # n=1000, p=0.1 -> mean 100, sigma = sqrt(1000 * 0.1 * 0.9) ~ 9.49
        sigma = (1000 * 0.1 * 0.9) ** 0.5
        for c in counts.values():
            assert abs(c - 100) <= 3 * sigma


class TestLeastConfidence:
    def test_picks_least_confident(self):
        batch = query_least_confidence(ctx_with_predictions({"a": 0.9, "b": 0.55, "c": 0.1}))
        assert batch.ids == ("b",)

    def test_ties_break_by_id(self):
        batch = query_least_confidence(
            ctx_with_predictions({"d": 0.5, "b": 0.5, "c": 0.5}, batch_size=2)
        )
        assert batch.ids == ("b", "c")

    def test_sorted_by_confidence(self):
        p = {"a": 0.99, "b": 0.6, "c": 0.45, "d": 0.02}
        batch = query_least_confidence(ctx_with_predictions(p, batch_size=2))
        assert set(batch.ids) == {"b", "c"}


class TestPredictionEntropy:
    def test_entropy_maximum_at_half(self):
        assert binary_entropy(0.5) == pytest.approx(np.log(2))
        assert binary_entropy(0.5) >= binary_entropy(0.3) >= binary_entropy(0.1)

    def test_boundary_entropy_zero(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        batch = query_prediction_entropy(
            ctx_with_predictions({"a": 0.0, "b": 0.4, "c": 1.0}, batch_size=1)
        )
        assert batch.ids == ("b",)

    def test_scores_are_entropies(self):
        batch = query_prediction_entropy(ctx_with_predictions({"a": 0.5, "b": 0.9}))
        assert batch.scores is not None
        assert batch.scores["a"] == pytest.approx(np.log(2))


class TestBreakingTies:
    def test_smallest_margin_first(self):
        batch = query_breaking_ties(ctx_with_predictions({"a": 0.52, "b": 0.9}))
        assert batch.ids == ("a",)

    def test_half_has_zero_margin(self):
        batch = query_breaking_ties(
            ctx_with_predictions({"a": 0.1, "b": 0.5, "c": 0.8}, batch_size=1)
        )
        assert batch.ids == ("b",)


class TestBinaryEquivalence:
    def test_lc_pe_bt_identical_on_random_vectors(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            p = {f"i{k:03d}": float(rng.uniform()) for k in range(n)}
            batch_size = int(rng.integers(1, n + 1))
            lc = query_least_confidence(ctx_with_predictions(p, batch_size))
            pe = query_prediction_entropy(ctx_with_predictions(p, batch_size))
            bt = query_breaking_ties(ctx_with_predictions(p, batch_size))
            assert lc.ids == pe.ids == bt.ids

    def test_equivalence_with_symmetric_ties(self):
        # 0.25/0.75 are exactly representable, so |p - 0.5| ties exactly
        p = {"a": 0.75, "b": 0.25, "c": 0.5, "d": 0.9}
        for batch_size in (1, 2, 3, 4):
            lc = query_least_confidence(ctx_with_predictions(p, batch_size))
            pe = query_prediction_entropy(ctx_with_predictions(p, batch_size))
            bt = query_breaking_ties(ctx_with_predictions(p, batch_size))
            assert lc.ids == pe.ids == bt.ids


class TestGreedyCoreset:
    def test_farthest_point_first(self):
        feats = dense_features({"l0": np.array([0.0]), "u1": np.array([1.0]), "u2": np.array([10.0])})
        ctx = QueryContext(
            unlabeled_ids=("u1", "u2"), labeled_ids=("l0",), features=feats, batch_size=1
        )
        assert query_greedy_coreset(ctx).ids == ("u2",)

    def test_hand_run_two_steps(self):
        # labeled {0}; candidates at 1, 9, 10: picks 10, then the 1-vs-9
        # tie (both at distance 1 from their nearest center) goes low-id
        feats = dense_features(
            {
                "l": np.array([0.0]),
                "p01": np.array([1.0]),
                "p09": np.array([9.0]),
                "p10": np.array([10.0]),
            }
        )
        ctx = QueryContext(
            unlabeled_ids=("p01", "p09", "p10"), labeled_ids=("l",), features=feats, batch_size=2
        )
        assert query_greedy_coreset(ctx).ids == ("p10", "p01")

    def test_cold_start_seeds_lowest_id(self):
        feats = dense_features(
            {"a": np.array([0.0]), "b": np.array([4.0]), "c": np.array([9.0])}
        )
        ctx = QueryContext(unlabeled_ids=("a", "b", "c"), features=feats, batch_size=2)
        # centers start at "a"; picks c (dist 9) then b (dist min(4, 5) = 4)
        assert query_greedy_coreset(ctx).ids == ("c", "b")

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(120):
            n = int(rng.integers(2, 13))
            dim = int(rng.integers(1, 4))
            n_labeled = int(rng.integers(0, min(4, n)))
            batch_size = int(rng.integers(1, min(4, n - n_labeled) + 1))
            points = {
                f"q{k:02d}": rng.integers(-8, 9, size=dim).astype(float) for k in range(n)
            }
            ids = list(points)
            labeled = ids[:n_labeled]
            unlabeled = ids[n_labeled:]
            feats = dense_features(points)
            ctx = QueryContext(
                unlabeled_ids=tuple(unlabeled),
                labeled_ids=tuple(labeled),
                features=feats,
                batch_size=batch_size,
            )
            got = list(query_greedy_coreset(ctx).ids)
            want = greedy_coreset_oracle(points, labeled, unlabeled, batch_size)
            assert got == want

    def test_invariant_under_uniform_scaling(self):
        rng = np.random.default_rng(8)
        points = {f"s{k:02d}": rng.normal(size=3) for k in range(15)}
        feats = dense_features(points)
        scaled = dense_features({k: v * 37.5 for k, v in points.items()})
        ids = tuple(points)
        base = query_greedy_coreset(
            QueryContext(unlabeled_ids=ids[3:], labeled_ids=ids[:3], features=feats, batch_size=4)
        )
        big = query_greedy_coreset(
            QueryContext(unlabeled_ids=ids[3:], labeled_ids=ids[:3], features=scaled, batch_size=4)
        )
        assert base.ids == big.ids

    def test_missing_feature_row_raises(self):
        feats = dense_features({"a": np.array([0.0])})
        ctx = QueryContext(unlabeled_ids=("a", "b"), features=feats, batch_size=1)
        with pytest.raises(KeyError, match="b"):
            query_greedy_coreset(ctx)

    def test_works_on_sparse_tfidf(self):
        from crisisal.features import fit_vocabulary, transform_tfidf

        docs = [f"w{i} w{(i * 3) % 7} filler" for i in range(12)]
        vocab = fit_vocabulary(docs)
        feats = transform_tfidf(docs, vocab)
        ids = feats.ids
        ctx = QueryContext(
            unlabeled_ids=ids[2:], labeled_ids=ids[:2], features=feats, batch_size=3
        )
        batch = query_greedy_coreset(ctx)
        assert len(batch.ids) == 3
        assert set(batch.ids) <= set(ids[2:])


class TestDiscriminative:
    def test_outlier_selected(self):
        rng = np.random.default_rng(2)
        points = {f"l{i}": rng.normal(0, 0.1, size=2) for i in range(8)}
        points.update({f"u{i}": rng.normal(0, 0.1, size=2) for i in range(8)})
        points["ufar"] = np.array([10.0, 10.0])
        feats = dense_features(points)
        ctx = QueryContext(
            unlabeled_ids=tuple(k for k in points if k.startswith("u")),
            labeled_ids=tuple(k for k in points if k.startswith("l")),
            features=feats,
            batch_size=1,
            seed=3,
        )
        assert query_discriminative(ctx).ids == ("ufar",)

    def test_requires_labeled_examples(self):
        feats = dense_features({"a": np.array([0.0]), "b": np.array([1.0])})
        ctx = QueryContext(unlabeled_ids=("a", "b"), features=feats, batch_size=1)
        with pytest.raises(ValueError, match="DAL requires labeled"):
            query_discriminative(ctx)

    def test_deterministic_on_identical_distributions(self):
        rng = np.random.default_rng(11)
        points = {f"l{i}": rng.normal(size=2) for i in range(6)}
        points.update({f"u{i}": rng.normal(size=2) for i in range(6)})
        feats = dense_features(points)
        ctx = QueryContext(
            unlabeled_ids=tuple(k for k in points if k.startswith("u")),
            labeled_ids=tuple(k for k in points if k.startswith("l")),
            features=feats,
            batch_size=2,
            seed=7,
        )
        first = query_discriminative(ctx)
        second = query_discriminative(ctx)
        assert first.ids == second.ids
        assert set(first.ids) <= set(ctx.unlabeled_ids)

    def test_matches_external_ranking(self):
        rng = np.random.default_rng(21)
        points = {f"l{i}": rng.normal(0, 1, size=3) for i in range(5)}
        points.update({f"u{i}": rng.normal(2, 1, size=3) for i in range(7)})
        feats = dense_features(points)
        labeled = tuple(k for k in points if k.startswith("l"))
        unlabeled = tuple(k for k in points if k.startswith("u"))
        ctx = QueryContext(
            unlabeled_ids=unlabeled, labeled_ids=labeled, features=feats, batch_size=3, seed=5
        )
        batch = query_discriminative(ctx)

        # independent re-ranking: train the same discriminator setup and sort
        disc_labels = {i: Label.UNRELATED for i in labeled}
        disc_labels.update({i: Label.RELATED for i in unlabeled})
        disc = model_mod.train(
            feats.subset(labeled + unlabeled), disc_labels, model_mod.Hyperparams(seed=5)
        )
        scored = {
            p.id: p.p_related for p in model_mod.predict(disc, feats.subset(unlabeled))
        }
        want = sorted(unlabeled, key=lambda i: (-scored[i], i))[:3]
        assert list(batch.ids) == want


class TestBatchContract:
    def test_all_strategies_return_valid_batches(self):
        rng = np.random.default_rng(31)
        points = {f"l{i}": rng.normal(size=2) for i in range(4)}
        points.update({f"u{i}": rng.normal(size=2) for i in range(9)})
        feats = dense_features(points)
        unlabeled = tuple(sorted(k for k in points if k.startswith("u")))
        labeled = tuple(sorted(k for k in points if k.startswith("l")))
        preds = {i: float(rng.uniform()) for i in unlabeled}
        ctx = QueryContext(
            unlabeled_ids=unlabeled,
            labeled_ids=labeled,
            predictions=preds,
            features=feats,
            batch_size=4,
            seed=13,
        )
        for name in ("random", "lc", "pe", "bt", "gcs", "dal"):
            batch = query(name, ctx)
            assert isinstance(batch, QueryBatch)
            assert batch.strategy == name
            assert len(batch.ids) == 4
            assert len(set(batch.ids)) == 4
            assert set(batch.ids) <= set(unlabeled)
            assert query(name, ctx).ids == batch.ids  # deterministic
