"""Command-line entry point.

One binary, subcommand style; every piece of randomness flows from a single
--seed so any artifact can be reproduced from the metadata embedded in it
(tool version, seed, input digests). Exit codes: 0 success, 1 validation
error, 2 I/O error, 64 usage error.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click

from . import __version__, corpus, gold, lift as lift_mod, numerics, wicbuilder, wiceval
from .annotate.store import ProjectStore
from .embedstore import read_embeddings, validate_alignment
from .errors import DataError, SenseloomError, ValidationError

DEFAULT_SEED = 42

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def artifact_meta(seed: int | None, inputs: dict[str, Path]) -> dict:
    return {
        "tool": f"senseloom {__version__}",
        "seed": seed,
        "inputs": {name: _sha256(Path(p)) for name, p in inputs.items() if Path(p).exists()},
    }


def _load_config(path: str | None) -> dict:
    """key=value file, '#' comments; values stay strings."""
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise DataError(f"config file not found: {p}")
    out = {}
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{p}: line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _cfg(ctx: click.Context, key: str, given, default, cast=int):
    if given is not None:
        return given
    config = ctx.obj or {}
    if key in config:
        raw = config[key]
        return cast(raw) if cast is not bool else raw.lower() in ("1", "true", "yes")
    return default


def _write_json(path: str | Path, obj: dict) -> None:
    Path(path).write_text(json.dumps(obj, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


@click.group()
@click.option("--config", "config_path", type=str, default=None, help="key=value config file")
@click.version_option(version=__version__, prog_name="senseloom")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None):
    """Workbench for sense-annotating polysemous words and building WiC datasets."""
    ctx.obj = _load_config(config_path)


# ---------------------------------------------------------------------------
# corpus commands


@cli.command()
@click.option("--input", "input_path", required=True, type=str)
@click.option("--format", "fmt", type=click.Choice(["lines", "jsonl"]), default="lines")
@click.option("--source", default=None, help="source id used in generated sentence ids")
@click.option("--out", required=True, type=str)
def ingest(input_path: str, fmt: str, source: str | None, out: str):
    """Normalize a raw corpus into sentence JSONL with stable ids."""
    sentences = corpus.load_sentences(input_path, format=fmt, source=source)
    meta = artifact_meta(None, {"input": Path(input_path)})
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"_meta": meta}, ensure_ascii=False) + "\n")
        for s in sentences:
            fh.write(json.dumps({"id": s.id, "text": s.text, "source": s.source}, ensure_ascii=False) + "\n")
    click.echo(f"{len(sentences)} sentences -> {out}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=str, help="ingested corpus JSONL")
@click.option("--lemma", required=True)
@click.option("--forms", required=True, help="comma-separated inflected forms (lemma included)")
@click.option("--lang", required=True)
@click.option("--min-tokens", type=int, default=None)
@click.option("--max-tokens", type=int, default=None)
@click.option("--case-fold", is_flag=True, default=False)
@click.option("--out", required=True, type=str)
@click.pass_context
def occurrences(ctx, corpus_path, lemma, forms, lang, min_tokens, max_tokens, case_fold, out):
    """Locate whole-token occurrences of a lemma's forms in an ingested corpus."""
    raw = corpus.load_sentences(corpus_path, format="jsonl")
    spec = corpus.LemmaSpec(lemma=lemma, forms=tuple(f.strip() for f in forms.split(",")), lang=lang)
    records = corpus.find_occurrences(
        raw,
        spec,
        min_tokens=_cfg(ctx, "min_tokens", min_tokens, corpus.DEFAULT_MIN_TOKENS),
        max_tokens=_cfg(ctx, "max_tokens", max_tokens, corpus.DEFAULT_MAX_TOKENS),
        case_fold=case_fold or _cfg(ctx, "case_fold", None, False, cast=bool),
    )
    corpus.write_sentences_jsonl(records, out, meta=artifact_meta(None, {"corpus": Path(corpus_path)}))
    click.echo(f"{len(records)} occurrences of {lemma!r} -> {out}")


@cli.command()
@click.option("--sentences", "sentences_path", required=True, type=str)
@click.option("--n", required=True, type=int)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=str)
@click.pass_context
def sample(ctx, sentences_path, n, seed, out):
    """Random sample (without replacement) of candidate sentences."""
    seed = _cfg(ctx, "seed", seed, DEFAULT_SEED)
    records = corpus.read_sentences_jsonl(sentences_path)
    picked = corpus.sample_candidates(records, n, seed)
    corpus.write_sentences_jsonl(picked, out, meta=artifact_meta(seed, {"sentences": Path(sentences_path)}))
    click.echo(f"{len(picked)} sampled -> {out}")


# ---------------------------------------------------------------------------
# embeddings / numerics commands


@cli.command("validate-embeddings")
@click.option("--embeddings", "semb_path", required=True, type=str)
@click.option("--sentences", "sentences_path", type=str, default=None)
def validate_embeddings(semb_path, sentences_path):
    """Check an embedding file, and optionally its alignment with sentences."""
    matrix = read_embeddings(semb_path)
    if sentences_path:
        records = corpus.read_sentences_jsonl(sentences_path)
        validate_alignment(matrix, records)
    click.echo(f"ok: {matrix.n} x {matrix.d} embeddings for lemma {matrix.lemma!r} ({matrix.model_id})")


@cli.command()
@click.option("--embeddings", "semb_path", required=True, type=str)
@click.option("--k", type=int, required=True)
@click.option("--seed", type=int, default=None)
@click.option("--method", type=click.Choice(["kmeans", "agglomerative"]), default="kmeans")
@click.option("--out", required=True, type=str)
@click.pass_context
def cluster(ctx, semb_path, k, seed, method, out):
    """Group a lemma's occurrence embeddings into k candidate senses."""
    seed = _cfg(ctx, "seed", seed, DEFAULT_SEED)
    matrix = read_embeddings(semb_path)
    if method == "kmeans":
        labels = numerics.kmeans(matrix, k=k, seed=seed)
    else:
        labels = numerics.agglomerative(numerics.pairwise_cosine_distance(matrix), k=k)
    _write_json(
        out,
        {
            "lemma": matrix.lemma,
            "method": method,
            "k": k,
            "seed": seed,
            "ids": matrix.ids,
            "labels": labels.labels,
            "_meta": artifact_meta(seed, {"embeddings": Path(semb_path)}),
        },
    )
    click.echo(f"{matrix.n} points into {k} clusters -> {out}")


@cli.command("project")
@click.option("--embeddings", "semb_path", required=True, type=str)
@click.option("--method", type=click.Choice(["mds", "pca"]), default="mds")
@click.option("--k", type=int, default=None, help="also attach k-means cluster labels")
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=str)
@click.pass_context
def project_cmd(ctx, semb_path, method, k, seed, out):
    """Project a lemma's occurrence embeddings to 2D for the annotation view."""
    seed = _cfg(ctx, "seed", seed, DEFAULT_SEED)
    matrix = read_embeddings(semb_path)
    if method == "mds":
        proj = numerics.classical_mds(numerics.pairwise_cosine_distance(matrix), ids=matrix.ids)
    else:
        proj = numerics.pca2(matrix)
    labels = numerics.kmeans(matrix, k=k, seed=seed) if k else None
    export = numerics.export_projection(matrix.lemma, proj, labels)
    export["_meta"] = artifact_meta(seed, {"embeddings": Path(semb_path)})
    _write_json(out, export)
    click.echo(f"{matrix.n} points projected with {method} -> {out}")


@cli.command()
@click.option("--projection", "proj_path", required=True, type=str)
@click.option("--m", required=True, type=int)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=str, default=None)
@click.pass_context
def suggest(ctx, proj_path, m, seed, out):
    """Pick m well-dispersed sentences from a 2D projection (farthest-point)."""
    import numpy as np

    seed = _cfg(ctx, "seed", seed, DEFAULT_SEED)
    data = json.loads(Path(proj_path).read_text(encoding="utf-8"))
    proj = numerics.Projection2D(
        points=np.asarray(data["points"], dtype=float), method=data["method"], ids=data.get("ids", [])
    )
    indices = numerics.suggest_dispersed(proj, m, seed)
    result = {
        "indices": indices,
        "ids": [data["ids"][i] for i in indices] if data.get("ids") else None,
        "_meta": artifact_meta(seed, {"projection": Path(proj_path)}),
    }
    if out:
        _write_json(out, result)
    click.echo(json.dumps({"indices": result["indices"], "ids": result["ids"]}, ensure_ascii=False))


# ---------------------------------------------------------------------------
# annotation service


@cli.command()
@click.option("--data-root", envvar="SENSELOOM_DATA", required=True, type=str)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8800)
@click.option("--static", "static_dir", type=str, default=None, help="directory with the browser UI build")
def serve(data_root, host, port, static_dir):
    """Host the annotation HTTP API (and optionally the browser UI)."""
    import uvicorn

    from .annotate.service import create_app

    app = create_app(data_root, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command("export-gold")
@click.option("--project-dir", required=True, type=str)
@click.option("--min-per-sense", type=int, default=None)
@click.option("--annotator", default=None, help="restrict to one adjudicator identity")
@click.option("--out", required=True, type=str)
@click.pass_context
def export_gold(ctx, project_dir, min_per_sense, annotator, out):
    """Export current manual/verified annotations as gold JSONL."""
    store = ProjectStore(project_dir)
    records = store.export_gold(
        min_per_sense=_cfg(ctx, "min_per_sense", min_per_sense, 30), annotator=annotator
    )
    gold.write_gold_jsonl(records, out, meta=artifact_meta(None, {"log": store.log_path}))
    click.echo(f"{len(records)} gold annotations -> {out}")


# ---------------------------------------------------------------------------
# lift


@cli.command("lift")
@click.option("--prior-sample", "prior_path", required=True, type=str,
              help="JSONL of {sentence_id, sense_id} from the random inspection sample")
@click.option("--selected", "selected_path", required=True, type=str,
              help="JSONL of {sentence_id, sense_id} for the model-selected sentences")
@click.option("--sense", required=True, help="the targeted sense id")
@click.option("--word", default="", help="word label for the report table")
@click.option("--seconds-per-sentence", type=float, default=None)
@click.option("--out", type=str, default=None)
def lift_cmd(prior_path, selected_path, sense, word, seconds_per_sentence, out):
    """Report selection precision, prior, lift, and effort reduction for a sense."""
    prior_sample = [(r["sentence_id"], r["sense_id"]) for r in _read_jsonl(prior_path)]
    selected_rows = _read_jsonl(selected_path)
    selected_ids = [r["sentence_id"] for r in selected_rows]
    gold_map = {r["sentence_id"]: r["sense_id"] for r in selected_rows}

    rows = lift_mod.build_report(word or sense, prior_sample, {sense: selected_ids}, gold_map)
    click.echo(lift_mod.render_table(word or sense, rows))

    target = next(r for r in rows if r.sense_id == sense)
    report = {
        "word": word or sense,
        "senses": [r.to_json() for r in rows],
        "_meta": artifact_meta(None, {"prior_sample": Path(prior_path), "selected": Path(selected_path)}),
    }
    if target.prior > 0 and target.precision:
        effort = lift_mod.effort_reduction(target.prior, target.precision)
        click.echo(effort.headline())
        report["effort"] = {
            "manual_reviews": float(effort.manual_reviews),
            "assisted_reviews": float(effort.assisted_reviews),
            "reduction_factor": float(effort.reduction_factor),
            "display_manual": effort.display_manual,
            "display_assisted": effort.display_assisted,
            "headline_factor": effort.headline_factor,
        }
        if seconds_per_sentence:
            saved = (float(effort.manual_reviews) - float(effort.assisted_reviews)) * seconds_per_sentence
            click.echo(f"~{saved:.0f} seconds saved per accepted sentence at {seconds_per_sentence:.0f}s/review")
    if out:
        _write_json(out, report)


# ---------------------------------------------------------------------------
# wic


@cli.group()
def wic():
    """Build and inspect WiC sentence-pair datasets."""


@wic.command("build")
@click.option("--gold", "gold_path", required=True, type=str)
@click.option("--seed", type=int, default=None)
@click.option("--max-per-sentence", type=int, default=None)
@click.option("--out-dir", required=True, type=str)
@click.pass_context
def wic_build(ctx, gold_path, seed, max_per_sentence, out_dir):
    """Split words and sentences, then generate balanced labeled pairs."""
    seed = _cfg(ctx, "seed", seed, DEFAULT_SEED)
    cap = _cfg(ctx, "max_per_sentence", max_per_sentence, wicbuilder.DEFAULT_MAX_PAIRS_PER_SENTENCE)
    annotations = gold.read_gold_jsonl(gold_path)
    if not annotations:
        raise ValidationError(f"no gold annotations in {gold_path}")

    eligible = sorted(
        lemma
        for lemma, senses in _sense_counts(annotations).items()
        if len(senses) >= 2
    )
    ws = wicbuilder.split_words(eligible, seed)
    split_map = wicbuilder.redistribute_sentences(annotations, ws, seed)
    pairs = wicbuilder.generate_pairs(split_map, annotations, seed, max_per_sentence=cap)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_id = {rec.sentence.id: rec for rec in annotations}
    meta = artifact_meta(seed, {"gold": Path(gold_path)})
    for split in wicbuilder.SPLITS:
        split_pairs = [p for p in pairs if p.split == split]
        wicbuilder.write_wic_jsonl(split_pairs, by_id, out / f"{split}.jsonl", meta=meta)
        wicbuilder.write_wic_tsv(split_pairs, by_id, out / f"{split}.tsv")

    stats = wicbuilder.wic_stats(pairs, ws)
    _write_json(
        out / "build.json",
        {
            "seed": seed,
            "max_per_sentence": cap,
            "word_split": {
                "train": sorted(ws.train_words),
                "dev": sorted(ws.dev_words),
                "test": sorted(ws.test_words),
                "shared": sorted(ws.shared_words),
            },
            "stats": stats,
            "_meta": meta,
        },
    )
    click.echo(
        f"pairs: train={stats['pairs']['train']} dev={stats['pairs']['dev']} "
        f"test={stats['pairs']['test']} -> {out}"
    )


@wic.command("stats")
@click.option("--dir", "wic_dir", required=True, type=str)
def wic_stats_cmd(wic_dir):
    """Recount pairs, words, and label balance from built WiC files."""
    wic_dir = Path(wic_dir)
    rows = []
    lemmas_by_split = {}
    for split in wicbuilder.SPLITS:
        path = wic_dir / f"{split}.jsonl"
        if not path.exists():
            raise DataError(f"missing {path}")
        pairs = [r for r in _read_jsonl(path)]
        lemmas = {r["lemma"] for r in pairs}
        lemmas_by_split[split] = lemmas
        n_pos = sum(1 for r in pairs if r["label"] == 1)
        balance = f"{n_pos / len(pairs):.3f}" if pairs else "-"
        rows.append((split, len(pairs), len(lemmas), balance))
    click.echo(f"{'Split':8}{'Pairs':>8}{'Words':>8}{'Pos rate':>10}")
    for split, n_pairs, n_words, balance in rows:
        click.echo(f"{split:8}{n_pairs:>8}{n_words:>8}{balance:>10}")
    in_all = set.intersection(*lemmas_by_split.values()) if lemmas_by_split else set()
    click.echo(f"Words in all splits: {len(in_all)}")


@cli.command()
@click.option("--gold", "gold_path", required=True, type=str)
def stats(gold_path):
    """Per-language summary of a gold corpus (words, senses, sentences)."""
    annotations = gold.read_gold_jsonl(gold_path)
    rows = wicbuilder.dataset_stats(annotations)
    click.echo(wicbuilder.render_stats_table(rows))


def _sense_counts(annotations: list[gold.GoldRecord]) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for rec in annotations:
        out.setdefault(rec.sentence.lemma, set()).add(rec.sense_id)
    return out


# ---------------------------------------------------------------------------
# eval


@cli.group("eval")
def eval_group():
    """Threshold tuning and accuracy on externally scored WiC pairs."""


@eval_group.command("mark")
@click.option("--pairs", "pairs_path", required=True, type=str)
@click.option("--out", required=True, type=str)
def eval_mark(pairs_path, out):
    """Add <t>-marked sentence variants to a WiC pair file for the embedder."""
    n = 0
    with open(out, "w", encoding="utf-8") as fh:
        for row in _read_jsonl(pairs_path):
            row["sentence1_marked"] = wiceval.mark_target(row["sentence1"], tuple(row["span1"]))
            row["sentence2_marked"] = wiceval.mark_target(row["sentence2"], tuple(row["span2"]))
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
            n += 1
    click.echo(f"{n} pairs marked -> {out}")


def _labels_by_pair_id(pairs_path: str) -> dict[str, int]:
    labels = {}
    for row in _read_jsonl(pairs_path):
        if "pair_id" not in row:
            raise DataError(f"{pairs_path}: pair rows need a pair_id to join with scores")
        labels[row["pair_id"]] = int(row["label"])
    return labels


@eval_group.command("tune")
@click.option("--pairs", "pairs_path", required=True, type=str, help="labeled dev pairs JSONL")
@click.option("--scores", "scores_path", required=True, type=str, help="{pair_id, distance} JSONL")
@click.option("--out", required=True, type=str)
def eval_tune(pairs_path, scores_path, out):
    """Pick the distance threshold maximizing dev accuracy."""
    labels = _labels_by_pair_id(pairs_path)
    scored = wiceval.join_scores(labels, wiceval.read_scores_jsonl(scores_path))
    threshold = wiceval.tune_threshold(scored, tuned_on=Path(pairs_path).name)
    report = wiceval.report_json(threshold, None, n_dev=len(scored), n_test=0)
    report["_meta"] = artifact_meta(None, {"pairs": Path(pairs_path), "scores": Path(scores_path)})
    _write_json(out, report)
    click.echo(f"threshold {threshold.value:.6g} (dev accuracy {wiceval.render_accuracy(threshold.dev_accuracy)}%)")


@eval_group.command("test")
@click.option("--pairs", "pairs_path", required=True, type=str, help="labeled test pairs JSONL")
@click.option("--scores", "scores_path", required=True, type=str)
@click.option("--threshold", "threshold_path", required=True, type=str, help="output of eval tune")
@click.option("--out", type=str, default=None)
def eval_test(pairs_path, scores_path, threshold_path, out):
    """Accuracy of the tuned threshold on a held-out scored test set."""
    labels = _labels_by_pair_id(pairs_path)
    scored = wiceval.join_scores(labels, wiceval.read_scores_jsonl(scores_path))
    tuned = json.loads(Path(threshold_path).read_text(encoding="utf-8"))
    threshold = wiceval.Threshold(
        value=float(tuned["threshold"]), tuned_on=str(tuned.get("tuned_on", "dev")),
        dev_accuracy=float(tuned["dev_accuracy"]),
    )
    accuracy = wiceval.evaluate(scored, threshold)
    report = wiceval.report_json(threshold, accuracy, n_dev=int(tuned.get("n_dev", 0)), n_test=len(scored))
    report["test_accuracy_rendered"] = wiceval.render_accuracy(accuracy)
    if out:
        report["_meta"] = artifact_meta(None, {"pairs": Path(pairs_path), "scores": Path(scores_path)})
        _write_json(out, report)
    click.echo(f"test accuracy {wiceval.render_accuracy(accuracy)}%")


# ---------------------------------------------------------------------------


def _read_jsonl(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {lineno}: {exc.msg}") from exc
            if "_meta" in obj and len(obj) == 1:
                continue
            rows.append(obj)
    return rows


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return EXIT_USAGE
    except click.Abort:
        return EXIT_VALIDATION
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except SenseloomError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
