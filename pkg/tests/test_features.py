from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import sparse

from crisisal.corpus import Document, make_pool
from crisisal.features import (
    FeatureMatrix,
    Vocabulary,
    export_embeddings,
    fit_vocabulary,
    import_embeddings,
    transform_tfidf,
)


class TestFitVocabulary:
    def test_counts_document_frequency(self):
        vocab = fit_vocabulary(["a b", "b c"], min_df=1)
        assert set(vocab.index) == {"a", "b", "c"}
        assert vocab.document_frequency["b"] == 2
        assert vocab.n_documents == 2

    def test_min_df_filters(self):
        vocab = fit_vocabulary(["a b", "b c"], min_df=2)
        assert set(vocab.index) == {"b"}

    def test_max_features_keeps_highest_df(self):
        vocab = fit_vocabulary(["a b", "b c"], max_features=1)
        assert set(vocab.index) == {"b"}

    def test_ties_break_lexicographically(self):
        vocab = fit_vocabulary(["zeta alpha", "zeta alpha beta"], max_features=3)
        # df: zeta=2, alpha=2, beta=1 -> order: alpha, zeta, beta
        assert list(vocab.index) == ["alpha", "zeta", "beta"]

    def test_all_empty_documents_error(self):
        with pytest.raises(ValueError, match="empty after tokenization"):
            fit_vocabulary(["...", "!!!"])

    def test_accepts_documents(self):
        docs = [Document("a", "water rising"), Document("b", "water falling")]
        vocab = fit_vocabulary(docs)
        assert vocab.document_frequency["water"] == 2

    def test_index_contiguous(self):
        vocab = fit_vocabulary(["a b c d e"])
        assert sorted(vocab.index.values()) == [0, 1, 2, 3, 4]


class TestTransformTfidf:
    def test_single_term_doc_is_one_hot(self):
        vocab = fit_vocabulary(["flood", "fire"])
        feats = transform_tfidf(["flood"], vocab)
        row = feats.row_dense("doc0")
        assert row[vocab.index["flood"]] == pytest.approx(1.0)
        assert row[vocab.index["fire"]] == 0.0

    def test_identical_docs_identical_rows(self):
        vocab = fit_vocabulary(["flood fire", "flood rain"])
        feats = transform_tfidf(["flood fire", "flood fire"], vocab)
        assert np.array_equal(feats.row_dense("doc0"), feats.row_dense("doc1"))

    def test_matches_hand_computed_table(self):
        # three docs, hand-applied smoothed idf: ln((1+N)/(1+df)) + 1
        docs = ["apple banana apple", "banana cherry", "cherry"]
        vocab = fit_vocabulary(docs)
        feats = transform_tfidf(docs, vocab)

        idf_apple = math.log(4 / 2) + 1
        idf_banana = math.log(4 / 3) + 1
        idf_cherry = math.log(4 / 3) + 1

        raw = {"apple": 2 * idf_apple, "banana": 1 * idf_banana}
        norm = math.sqrt(sum(v * v for v in raw.values()))
        row = feats.row_dense("doc0")
        assert row[vocab.index["apple"]] == pytest.approx(raw["apple"] / norm)
        assert row[vocab.index["banana"]] == pytest.approx(raw["banana"] / norm)
        assert row[vocab.index["cherry"]] == 0.0

        raw1 = {"banana": idf_banana, "cherry": idf_cherry}
        norm1 = math.sqrt(sum(v * v for v in raw1.values()))
        row1 = feats.row_dense("doc1")
        assert row1[vocab.index["banana"]] == pytest.approx(raw1["banana"] / norm1)

    def test_nonzero_rows_unit_norm(self):
        docs = [f"term{i} term{i % 3} shared" for i in range(20)]
        vocab = fit_vocabulary(docs)
        feats = transform_tfidf(docs, vocab)
        norms = np.sqrt(np.asarray(feats.matrix.multiply(feats.matrix).sum(axis=1)).ravel())
        assert np.allclose(norms, 1.0, atol=1e-6)

    def test_oov_doc_yields_flagged_zero_row(self):
        vocab = fit_vocabulary(["flood fire"])
        feats = transform_tfidf(["flood", "zzz qqq"], vocab)
        assert feats.zero_rows == ("doc1",)
        assert not feats.row_dense("doc1").any()

    def test_deterministic_bit_identical(self):
        docs = [f"w{i} w{(i * 7) % 5} common" for i in range(30)]
        vocab = fit_vocabulary(docs)
        a = transform_tfidf(docs, vocab)
        b = transform_tfidf(docs, vocab)
        assert np.array_equal(a.matrix.toarray(), b.matrix.toarray())

    def test_cosine_self_one_disjoint_zero(self):
        docs = ["flood water", "sunny beach"]
        vocab = fit_vocabulary(docs)
        feats = transform_tfidf(docs, vocab)
        a = feats.row_dense("doc0")
        b = feats.row_dense("doc1")
        assert float(a @ a) == pytest.approx(1.0)
        assert float(a @ b) == 0.0


class TestFeatureMatrix:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN"):
            FeatureMatrix(("a",), np.array([[np.nan, 1.0]]), "external")

    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValueError, match="unique"):
            FeatureMatrix(("a", "a"), np.zeros((2, 2)), "external")

    def test_rejects_unknown_space(self):
        with pytest.raises(ValueError, match="space"):
            FeatureMatrix(("a",), np.zeros((1, 2)), "word2vec")

    def test_subset_preserves_order_and_values(self):
        m = FeatureMatrix(("a", "b", "c"), np.arange(6.0).reshape(3, 2), "external")
        sub = m.subset(("c", "a"))
        assert sub.ids == ("c", "a")
        assert np.array_equal(sub.matrix, np.array([[4.0, 5.0], [0.0, 1.0]]))

    def test_missing_row_raises_with_id(self):
        m = FeatureMatrix(("a",), np.zeros((1, 2)), "external")
        with pytest.raises(KeyError, match="ghost"):
            m.index_of("ghost")


class TestEmbeddingExchange:
    def _pool(self):
        return make_pool([Document("a", "one"), Document("b", "two"), Document("c", "three")])

    def test_import_basic(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text(
            '{"format": "emb-v1", "dim": 4}\n'
            '{"id": "a", "vec": [1, 0, 0, 0]}\n'
            '{"id": "b", "vec": [0, 1, 0, 0]}\n'
            '{"id": "c", "vec": [0, 0, 1, 0]}\n'
        )
        feats = import_embeddings(path, self._pool())
        assert feats.ids == ("a", "b", "c")
        assert feats.dim == 4
        assert feats.space_tag == "external"

    def test_missing_id_named(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('{"format": "emb-v1", "dim": 2}\n{"id": "a", "vec": [1, 2]}\n')
        with pytest.raises(ValueError, match="b"):
            import_embeddings(path, self._pool())

    def test_extra_ids_ignored(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        lines = ['{"format": "emb-v1", "dim": 1}']
        for doc_id in ("a", "b", "c", "x", "y"):
            lines.append(f'{{"id": "{doc_id}", "vec": [1.5]}}')
        path.write_text("\n".join(lines) + "\n")
        feats = import_embeddings(path, self._pool())
        assert feats.ids == ("a", "b", "c")

    def test_dim_mismatch_rejected(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('{"format": "emb-v1", "dim": 2}\n{"id": "a", "vec": [1, 2, 3]}\n')
        with pytest.raises(ValueError, match="dim"):
            import_embeddings(path, self._pool())

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('{"id": "a", "vec": [1]}\n')
        with pytest.raises(ValueError, match="header"):
            import_embeddings(path, self._pool())

    def test_roundtrip_preserves_values(self, tmp_path):
        rng = np.random.default_rng(4)
        matrix = rng.normal(size=(3, 5))
        feats = FeatureMatrix(("a", "b", "c"), matrix, "external")
        path = tmp_path / "emb.jsonl"
        export_embeddings(feats, path)
        back = import_embeddings(path, self._pool())
        assert np.allclose(back.matrix, matrix, atol=1e-6)


class TestVocabularySerialization:
    def test_roundtrip(self):
        vocab = fit_vocabulary(["a b c", "b c", "c"])
        back = Vocabulary.from_dict(vocab.to_dict())
        assert back.index == dict(vocab.index)
        assert back.document_frequency == dict(vocab.document_frequency)
        assert back.n_documents == vocab.n_documents
