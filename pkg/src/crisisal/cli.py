"""Batch entry points: ingest, filter, train, simulate, evaluate, serve.

Every subcommand writes machine-readable output to a declared path and a
human-readable summary to stdout. Exit code 0 means no module error;
missing input files exit with the usage code (2).
"""

from __future__ import annotations

import json
import statistics
from pathlib import Path

import click

from . import engine, evaluation, features as features_mod, filtering, model as model_mod, strategies
from .corpus import (
    IngestError,
    LabelMapping,
    balance_labeled,
    export,
    ingest,
    pool_to_jsonl,
    prefilter as prefilter_op,
    release_labeled,
    split as split_op,
)

BUNDLE_FORMAT = "model-bundle-v1"

_input_path = click.Path(exists=True, dir_okay=False, path_type=Path)
_output_path = click.Path(dir_okay=False, path_type=Path)


def _fail(exc: Exception) -> "click.ClickException":
    return click.ClickException(str(exc))


def _pool_summary(pool) -> str:
    return (
        f"{pool.n_documents} documents "
        f"(labeled {len(pool.labeled)}, unlabeled {len(pool.unlabeled_ids)}, "
        f"test {len(pool.test_ids)})"
    )


@click.group()
def main() -> None:
    """Active-learning toolkit for disaster-related short texts."""


@main.command("ingest")
@click.option("--input", "input_path", type=_input_path, required=True, help="Corpus file.")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.option("--mapping", type=_input_path, default=None, help="Label-mapping CSV (scheme,source,target).")
@click.option("--scheme", default=None, help="Mapping scheme for the label column.")
@click.option("--as-test", is_flag=True, help="Send gold-labeled documents to the test partition.")
@click.option("--balance", is_flag=True, help="Downsample the majority class among labeled documents.")
@click.option("--split-test", type=float, default=None, help="Carve a stratified test fraction.")
@click.option("--release", is_flag=True, help="Move labeled documents to unlabeled (gold kept).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=_output_path, required=True, help="Pool JSONL output.")
def ingest_cmd(input_path, fmt, mapping, scheme, as_test, balance, split_test, release, seed, out):
    """Read a corpus file into a pool, optionally curating it on the way."""
    try:
        label_mapping = LabelMapping.from_csv(mapping) if mapping else None
        pool = ingest(input_path, format=fmt, mapping=label_mapping, scheme=scheme, as_test=as_test)
        if balance:
            pool = balance_labeled(pool, seed)
        if split_test is not None:
            pool = split_op(pool, split_test, seed)
        if release:
            pool = release_labeled(pool)
        export(pool, out)
    except (IngestError, ValueError) as exc:
        raise _fail(exc)
    click.echo(f"ingested {input_path} -> {out}: {_pool_summary(pool)}")


@main.command("prefilter")
@click.option("--input", "input_path", type=_input_path, required=True, help="Pool JSONL.")
@click.option("--keywords", "keywords_path", type=_input_path, required=True)
@click.option("--out", type=_output_path, required=True)
def prefilter_cmd(input_path, keywords_path, out):
    """Keep only documents containing a keyword (case-insensitive substring)."""
    try:
        pool = ingest(input_path)
        keywords = filtering.load_keywords(keywords_path)
        filtered = prefilter_op(pool, keywords)
        export(filtered, out)
    except (IngestError, ValueError) as exc:
        raise _fail(exc)
    click.echo(
        f"prefilter kept {filtered.n_documents}/{pool.n_documents} documents -> {out}"
    )


@main.command("filter")
@click.option("--input", "input_path", type=_input_path, required=True, help="Corpus or pool JSONL.")
@click.option("--keywords", "keywords_path", type=_input_path, required=True)
@click.option("--fuzzy", is_flag=True, help="Token-level fuzzy matching instead of substring containment.")
@click.option("--max-distance", type=int, default=2, show_default=True)
@click.option("--out", type=_output_path, required=True, help="Predictions JSONL output.")
@click.option("--report-out", type=_output_path, default=None, help="Evaluation report JSON (needs gold labels).")
def filter_cmd(input_path, keywords_path, fuzzy, max_distance, out, report_out):
    """Classify every document by keyword matching; evaluate if gold labels exist."""
    try:
        pool = ingest(input_path)
        keywords = filtering.load_keywords(keywords_path)
        budget = filtering.EditDistanceBudget(max_distance)
        mode = "fuzzy" if fuzzy else "exact"
        predicted = filtering.classify_pool(pool, keywords, mode=mode, budget=budget)
        predictions = [model_mod.Prediction(i, float(int(l))) for i, l in predicted.items()]
        model_mod.export_predictions(predictions, out)

        gold = {d.id: d.gold_label for d in pool.iter_documents() if d.gold_label is not None}
        if gold:
            report = evaluation.evaluate(predicted, gold, method_tag=f"kwf-{mode}")
            if report_out:
                Path(report_out).write_text(evaluation.report_to_json(report), encoding="utf-8")
            click.echo(evaluation.render_comparison_text([report]), nl=False)
        elif report_out:
            raise ValueError("corpus has no gold labels; cannot write a report")
    except (IngestError, ValueError) as exc:
        raise _fail(exc)
    related = sum(1 for l in predicted.values() if l)
    click.echo(f"{mode} keyword filter: {related}/{len(predicted)} predicted related -> {out}")


def _write_bundle(path: Path, trained, vocab, feature_source: str) -> None:
    payload = {
        "format": BUNDLE_FORMAT,
        "feature_source": feature_source,
        "model": model_mod.model_to_dict(trained),
        "vocabulary": vocab.to_dict() if vocab is not None else None,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _read_bundle(path: Path):
    payload = json.loads(path.read_text(encoding="utf-8"))
    if payload.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"unsupported model bundle format {payload.get('format')!r}")
    trained = model_mod.model_from_dict(payload["model"])
    vocab = (
        features_mod.Vocabulary.from_dict(payload["vocabulary"])
        if payload.get("vocabulary")
        else None
    )
    return trained, vocab, payload["feature_source"]


@main.command("train")
@click.option("--input", "input_path", type=_input_path, required=True, help="Pool JSONL with labeled documents.")
@click.option("--features", "feature_source", type=click.Choice(["tfidf", "external"]), default="tfidf", show_default=True)
@click.option("--embeddings", type=_input_path, default=None, help="Embedding exchange file (external features).")
@click.option("--max-features", type=int, default=5000, show_default=True)
@click.option("--min-df", type=int, default=1, show_default=True)
@click.option("--learning-rate", type=float, default=0.5, show_default=True)
@click.option("--l2-penalty", type=float, default=1e-4, show_default=True)
@click.option("--epochs", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=_output_path, required=True, help="Model bundle JSON output.")
def train_cmd(input_path, feature_source, embeddings, max_features, min_df,
              learning_rate, l2_penalty, epochs, seed, out):
    """Train the logistic classifier on a pool's labeled partition."""
    try:
        pool = ingest(input_path)
        if not pool.labeled:
            raise ValueError("pool has no labeled documents to train on")
        docs = list(pool.iter_documents())
        vocab = None
        if feature_source == "tfidf":
            vocab = features_mod.fit_vocabulary(docs, min_df=min_df, max_features=max_features)
            feats = features_mod.transform_tfidf(docs, vocab)
        else:
            if not embeddings:
                raise ValueError("--features external requires --embeddings")
            feats = features_mod.import_embeddings(embeddings, pool)
        hp = model_mod.Hyperparams(
            learning_rate=learning_rate, l2_penalty=l2_penalty, epochs=epochs, seed=seed
        )
        trained = model_mod.train(feats, dict(pool.labeled), hp)
        _write_bundle(out, trained, vocab, feature_source)
    except (IngestError, ValueError) as exc:
        raise _fail(exc)
    click.echo(
        f"trained on {trained.trained_on} examples (dim {trained.dim}, "
        f"final loss {trained.loss_history[-1]:.4f}) -> {out}"
    )


@main.command("predict")
@click.option("--model", "bundle_path", type=_input_path, required=True, help="Model bundle JSON.")
@click.option("--input", "input_path", type=_input_path, required=True, help="Corpus JSONL to score.")
@click.option("--embeddings", type=_input_path, default=None, help="Embedding exchange file (external features).")
@click.option("--out", type=_output_path, required=True, help="Predictions JSONL output.")
def predict_cmd(bundle_path, input_path, embeddings, out):
    """Score a corpus with a trained model bundle."""
    try:
        trained, vocab, feature_source = _read_bundle(bundle_path)
        pool = ingest(input_path)
        docs = list(pool.iter_documents())
        if feature_source == "tfidf":
            if vocab is None:
                raise ValueError("bundle is missing its vocabulary")
            feats = features_mod.transform_tfidf(docs, vocab)
        else:
            if not embeddings:
                raise ValueError("external-feature bundle requires --embeddings")
            feats = features_mod.import_embeddings(embeddings, pool)
        predictions = model_mod.predict(trained, feats)
        model_mod.export_predictions(predictions, out)
    except (IngestError, ValueError) as exc:
        raise _fail(exc)
    click.echo(f"scored {len(predictions)} documents -> {out}")


@main.command("al-simulate")
@click.option("--input", "input_path", type=_input_path, required=True, help="Gold-labeled corpus JSONL.")
@click.option("--strategy", type=click.Choice(list(strategies.STRATEGIES)), default="gcs", show_default=True)
@click.option("--rounds", type=int, default=10, show_default=True)
@click.option("--batch-size", type=int, default=20, show_default=True)
@click.option("--seed-batch-size", type=int, default=20, show_default=True)
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--repeats", type=int, default=1, show_default=True)
@click.option("--pool-subsample", type=int, default=None, help="Downsample the unlabeled pool before querying.")
@click.option("--max-features", type=int, default=5000, show_default=True)
@click.option("--min-df", type=int, default=1, show_default=True)
@click.option("--out", type=_output_path, required=True, help="Metrics CSV output.")
def al_simulate_cmd(input_path, strategy, rounds, batch_size, seed_batch_size,
                    test_fraction, seed, repeats, pool_subsample, max_features, min_df, out):
    """Run the full AL protocol with gold labels standing in for annotators."""
    try:
        base_pool = ingest(input_path)
        if repeats < 1:
            raise ValueError("--repeats must be >= 1")
        series: list[list[engine.RoundMetrics]] = []
        for repeat in range(repeats):
            repeat_seed = seed + repeat
            if base_pool.test_ids:
                pool = base_pool
            else:
                pool = release_labeled(split_op(base_pool, test_fraction, repeat_seed))
            config = engine.SessionConfig(
                rounds=rounds,
                batch_size=batch_size,
                seed_batch_size=seed_batch_size,
                strategy=strategy,
                seed=repeat_seed,
                max_features=max_features,
                min_df=min_df,
                pool_subsample=pool_subsample,
            )
            series.append(engine.run_simulated(pool, config))

        lines = ["repeat," + engine.METRICS_CSV_HEADER]
        for repeat, metrics in enumerate(series):
            for m in metrics:
                lines.append(
                    f"{repeat},{m.round},{m.labeled_count},"
                    f"{m.accuracy!r},{m.f1_unrelated!r},{m.f1_related!r}"
                )
        Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")

        final = [metrics[-1].accuracy for metrics in series]
        click.echo(
            f"{strategy}: {len(series)} run(s), {len(series[0])} rounds each; "
            f"final accuracy mean {statistics.mean(final):.4f}"
        )
        if repeats > 1:
            summary_path = out.with_name(out.stem + "-summary.csv")
            header = "round,labeled_count,mean_accuracy,stdev_accuracy,mean_f1_unrelated,stdev_f1_unrelated,mean_f1_related,stdev_f1_related"
            rows = [header]
            for round_index in range(len(series[0])):
                per_round = [metrics[round_index] for metrics in series]
                acc = [m.accuracy for m in per_round]
                f1u = [m.f1_unrelated for m in per_round]
                f1r = [m.f1_related for m in per_round]
                rows.append(
                    f"{per_round[0].round},{per_round[0].labeled_count},"
                    f"{statistics.mean(acc)!r},{statistics.stdev(acc)!r},"
                    f"{statistics.mean(f1u)!r},{statistics.stdev(f1u)!r},"
                    f"{statistics.mean(f1r)!r},{statistics.stdev(f1r)!r}"
                )
                click.echo(
                    f"round {per_round[0].round}: accuracy "
                    f"{statistics.mean(acc):.4f} ± {statistics.stdev(acc):.4f}"
                )
            summary_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
            click.echo(f"per-round summary -> {summary_path}")
    except (IngestError, ValueError, engine.EngineError) as exc:
        raise _fail(exc)
    click.echo(f"metrics -> {out}")


@main.command("evaluate")
@click.option("--predictions", "predictions_path", type=_input_path, required=True, help="Predictions JSONL.")
@click.option("--gold", "gold_path", type=_input_path, required=True, help="Gold-labeled corpus JSONL.")
@click.option("--tag", default="model", show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--out", type=_output_path, required=True, help="Report JSON output.")
def evaluate_cmd(predictions_path, gold_path, tag, threshold, out):
    """Score a predictions file against a gold corpus."""
    try:
        pool = ingest(gold_path)
        gold = {d.id: d.gold_label for d in pool.iter_documents() if d.gold_label is not None}
        if not gold:
            raise ValueError(f"{gold_path} has no gold labels")
        predictions = model_mod.import_predictions(predictions_path, pool)
        predicted = model_mod.predictions_to_labels(predictions, threshold)
        report = evaluation.evaluate(predicted, gold, method_tag=tag)
        Path(out).write_text(evaluation.report_to_json(report), encoding="utf-8")
    except (IngestError, ValueError) as exc:
        raise _fail(exc)
    click.echo(evaluation.render_comparison_text([report]), nl=False)
    click.echo(f"report -> {out}")


@main.command("compare")
@click.option("--gold", "gold_path", type=_input_path, required=True, help="Gold-labeled corpus JSONL.")
@click.option("--manifest", "manifest_path", type=_input_path, required=True,
              help="JSON list of methods: prediction files or keyword-filter configs.")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--bold-best", is_flag=True, help="Mark the best value per metric row.")
@click.option("--out", type=_output_path, required=True, help="Comparison CSV output.")
@click.option("--text-out", type=_output_path, default=None, help="Also write the rendered table.")
def compare_cmd(gold_path, manifest_path, threshold, bold_best, out, text_out):
    """Evaluate several methods side by side, one column per method."""
    try:
        pool = ingest(gold_path)
        gold = {d.id: d.gold_label for d in pool.iter_documents() if d.gold_label is not None}
        if not gold:
            raise ValueError(f"{gold_path} has no gold labels")
        manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
        if not isinstance(manifest, list) or not manifest:
            raise ValueError("manifest must be a nonempty JSON list")
        base = Path(manifest_path).parent
        methods = []
        for entry in manifest:
            tag = entry.get("tag") or f"method{len(methods)}"
            if "predictions" in entry:
                pred_path = base / entry["predictions"]
                if not pred_path.is_file():
                    raise ValueError(f"method {tag!r}: predictions file not found: {pred_path}")
                predictions = model_mod.import_predictions(pred_path, pool)
                predicted = model_mod.predictions_to_labels(predictions, threshold)
            elif "keywords" in entry:
                kw_path = base / entry["keywords"]
                if not kw_path.is_file():
                    raise ValueError(f"method {tag!r}: keyword file not found: {kw_path}")
                keywords = filtering.load_keywords(kw_path)
                mode = "fuzzy" if entry.get("fuzzy") else "exact"
                budget = filtering.EditDistanceBudget(int(entry.get("max_distance", 2)))
                predicted = filtering.classify_pool(pool, keywords, mode=mode, budget=budget)
            else:
                raise ValueError(f"manifest entry {tag!r} needs 'predictions' or 'keywords'")
            methods.append((tag, predicted))
        reports = evaluation.compare(methods, gold)
        Path(out).write_text(evaluation.comparison_to_csv(reports), encoding="utf-8")
        table = evaluation.render_comparison_text(reports, bold_best=bold_best)
        if text_out:
            Path(text_out).write_text(table, encoding="utf-8")
    except (IngestError, ValueError) as exc:
        raise _fail(exc)
    click.echo(table, nl=False)
    click.echo(f"comparison -> {out}")


@main.command("al-serve")
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Session storage directory (default: $CRISISAL_DATA_DIR).")
@click.option("--host", default=None, help="Bind address (default: $CRISISAL_HOST or 127.0.0.1).")
@click.option("--port", type=int, default=None, help="Port (default: $CRISISAL_PORT or 8000).")
def al_serve_cmd(data_dir, host, port):
    """Run the annotation service."""
    import os

    import uvicorn

    from .service import create_app

    host = host or os.environ.get("CRISISAL_HOST", "127.0.0.1")
    port = port or int(os.environ.get("CRISISAL_PORT", "8000"))
    app = create_app(data_dir)
    click.echo(f"serving on http://{host}:{port} (data dir: {data_dir or 'env/default'})")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
