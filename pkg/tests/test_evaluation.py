from __future__ import annotations

import random

import pytest

from crisisal.corpus import Label
from crisisal.evaluation import (
    ConfusionMatrix,
    compare,
    comparison_to_csv,
    evaluate,
    render_comparison_text,
    report_from_matrix,
    report_to_dict,
)

from oracles import metrics_oracle


def maps_for_matrix(tp: int, fp: int, fn: int, tn: int):
    """Build prediction/gold maps realizing the given confusion counts."""
    predictions, gold = {}, {}
    idx = 0
    for count, pred, actual in (
        (tp, Label.RELATED, Label.RELATED),
        (fp, Label.RELATED, Label.UNRELATED),
        (fn, Label.UNRELATED, Label.RELATED),
        (tn, Label.UNRELATED, Label.UNRELATED),
    ):
        for _ in range(count):
            doc_id = f"m{idx:04d}"
            predictions[doc_id] = pred
            gold[doc_id] = actual
            idx += 1
    return predictions, gold


class TestEvaluate:
    def test_hand_arithmetic(self):
        predictions, gold = maps_for_matrix(tp=3, fp=1, fn=1, tn=5)
        report = evaluate(predictions, gold)
        assert report.precision_related == 0.75
        assert report.recall_related == 0.75
        assert report.f1_related == 0.75
        assert report.accuracy == 0.8
        assert report.matrix == ConfusionMatrix(3, 1, 1, 5)

    def test_perfect_predictions(self):
        predictions, gold = maps_for_matrix(tp=4, fp=0, fn=0, tn=6)
        report = evaluate(predictions, gold)
        assert (
            report.accuracy
            == report.precision_related
            == report.recall_related
            == report.f1_related
            == report.precision_unrelated
            == report.recall_unrelated
            == report.f1_unrelated
            == 1.0
        )
        assert report.degenerate_metrics == ()

    def test_all_related_against_all_unrelated_gold(self):
        predictions, gold = maps_for_matrix(tp=0, fp=7, fn=0, tn=0)
        report = evaluate(predictions, gold)
        assert report.accuracy == 0.0
        assert report.precision_related == 0.0
        assert report.degenerate_metrics  # zero-denominator cases flagged
        assert "recall_related" in report.degenerate_metrics

    def test_missing_prediction_rejected(self):
        predictions, gold = maps_for_matrix(tp=1, fp=1, fn=1, tn=1)
        del predictions["m0000"]
        with pytest.raises(ValueError, match="m0000"):
            evaluate(predictions, gold)

    def test_predictions_may_cover_extra_ids(self):
        predictions, gold = maps_for_matrix(tp=2, fp=0, fn=0, tn=2)
        predictions["extra"] = Label.RELATED
        report = evaluate(predictions, gold)
        assert report.matrix.total == 4

    def test_empty_gold_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            evaluate({}, {})


class TestInvariants:
    def test_matches_oracle_on_random_matrices(self):
        rng = random.Random(100)
        for _ in range(60):
            tp, fp, fn, tn = (rng.randint(0, 6) for _ in range(4))
            if tp + fp + fn + tn == 0:
                tp = 1
            report = report_from_matrix(ConfusionMatrix(tp, fp, fn, tn))
            want = metrics_oracle(tp, fp, fn, tn)
            assert report.accuracy == want["accuracy"]
            assert report.precision_related == want["precision_related"]
            assert report.recall_related == want["recall_related"]
            assert report.precision_unrelated == want["precision_unrelated"]
            assert report.recall_unrelated == want["recall_unrelated"]
            assert report.f1_related == want["f1_related"]
            assert report.f1_unrelated == want["f1_unrelated"]
            assert set(report.degenerate_metrics) == want["degenerate"]

    def test_swapping_convention_swaps_metric_blocks(self):
        rng = random.Random(7)
        for _ in range(40):
            tp, fp, fn, tn = (rng.randint(0, 5) for _ in range(4))
            if tp + fp + fn + tn == 0:
                tn = 2
            matrix = ConfusionMatrix(tp, fp, fn, tn)
            report = report_from_matrix(matrix)
            flipped = report_from_matrix(matrix.swapped())
            assert report.precision_unrelated == flipped.precision_related
            assert report.recall_unrelated == flipped.recall_related
            assert report.f1_unrelated == flipped.f1_related
            assert report.accuracy == flipped.accuracy

    def test_accuracy_is_weighted_recall(self):
        rng = random.Random(13)
        for _ in range(40):
            tp, fp, fn, tn = (rng.randint(0, 8) for _ in range(4))
            if (tp + fn) == 0 or (tn + fp) == 0:
                tp, tn = tp + 1, tn + 1
            report = report_from_matrix(ConfusionMatrix(tp, fp, fn, tn))
            n0, n1 = tn + fp, tp + fn
            weighted = (report.recall_unrelated * n0 + report.recall_related * n1) / (n0 + n1)
            assert report.accuracy == pytest.approx(weighted)


class TestCompare:
    def _gold(self):
        return {f"g{i}": Label.RELATED if i < 4 else Label.UNRELATED for i in range(10)}

    def test_three_methods_hand_checked(self):
        gold = self._gold()
        perfect = dict(gold)
        all_related = {i: Label.RELATED for i in gold}
        inverted = {
            i: Label.UNRELATED if l == Label.RELATED else Label.RELATED for i, l in gold.items()
        }
        reports = compare(
            [("perfect", perfect), ("all-related", all_related), ("inverted", inverted)], gold
        )
        assert [r.method_tag for r in reports] == ["perfect", "all-related", "inverted"]
        assert reports[0].accuracy == 1.0
        assert reports[1].accuracy == 0.4
        assert reports[1].recall_related == 1.0
        assert reports[2].accuracy == 0.0

    def test_single_method_single_column(self):
        gold = self._gold()
        table = render_comparison_text(compare([("only", dict(gold))], gold))
        assert "only" in table
        assert "Accuracy" in table

    def test_identical_maps_identical_columns(self):
        gold = self._gold()
        predictions = {i: Label.RELATED for i in gold}
        r1, r2 = compare([("a", predictions), ("b", predictions)], gold)
        assert report_to_dict(r1)["per_class"] == report_to_dict(r2)["per_class"]
        assert r1.accuracy == r2.accuracy

    def test_empty_method_list_rejected(self):
        with pytest.raises(ValueError):
            compare([], self._gold())


class TestRendering:
    def _reports(self):
        gold = {f"g{i}": Label(i % 2) for i in range(8)}
        good = dict(gold)
        bad = {i: Label.RELATED for i in gold}
        return compare([("good", good), ("bad", bad)], gold)

    def test_text_table_structure(self):
        text = render_comparison_text(self._reports())
        lines = text.strip().splitlines()
        assert lines[0].split() == ["good", "bad"]
        assert lines[2].startswith("Precision")
        assert lines[3].startswith("Recall")
        assert lines[4].startswith("F1 score")
        assert lines[5].startswith("Accuracy")
        assert " / " in lines[2]

    def test_bold_best_marks_maxima(self):
        text = render_comparison_text(self._reports(), bold_best=True)
        assert "**1.00**" in text

    def test_csv_fields(self):
        csv_text = comparison_to_csv(self._reports())
        header = csv_text.splitlines()[0].split(",")
        assert header[0] == "method"
        assert "accuracy" in header
        assert "degenerate_metrics" in header
        assert len(csv_text.strip().splitlines()) == 3

    def test_report_dict_schema(self):
        payload = report_to_dict(self._reports()[0])
        assert set(payload) == {
            "method_tag",
            "accuracy",
            "per_class",
            "confusion",
            "degenerate_metrics",
        }
        assert set(payload["per_class"]) == {"unrelated", "related"}
        assert set(payload["per_class"]["related"]) == {"precision", "recall", "f1"}
        assert set(payload["confusion"]) == {"tp", "fp", "fn", "tn"}
