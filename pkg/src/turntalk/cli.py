"""Command line entry points.

``serve`` runs the HTTP service; the rest are operational tools that work
directly against a storage directory: seeding and re-embedding the
retrieval collections, captioning symbol libraries, exporting transcripts,
and rendering the usage report (delimited files plus figures).
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .analytics import build_report, session_rows
from .analytics.figures import card_usage_figure, overlap_figure, session_metrics_figure
from .errors import TurntalkError
from .providers.base import CompletionRequest, PromptContext, TaskTag
from .service.config import load_config
from .service.runtime import Runtime
from .similarity import SYMBOL_CAPTIONS


def _common_options(fn):
    fn = click.option("--config", "config_file", type=click.Path(), default=None,
                      help="YAML settings file.")(fn)
    fn = click.option("--storage", "storage_dir", type=click.Path(), default=None,
                      help="Storage directory (overrides config).")(fn)
    fn = click.option("--providers", type=click.Choice(["mock", "live"]), default=None,
                      help="Provider mode.")(fn)
    fn = click.option("--locale-source", default=None, help="Default parent locale.")(fn)
    fn = click.option("--locale-target", default=None, help="Default child locale.")(fn)
    return fn


def _runtime(config_file, storage_dir, providers, locale_source, locale_target, port=None):
    config = load_config(
        config_file=config_file,
        storage_dir=storage_dir,
        providers=providers,
        locale_source=locale_source,
        locale_target=locale_target,
        port=port,
    )
    return Runtime(config)


@click.group()
def main():
    """Turn-taking conversation mediator for parents and minimally verbal
    children."""


@main.command()
@_common_options
@click.option("--port", type=int, default=None, help="Port to listen on.")
def serve(config_file, storage_dir, providers, locale_source, locale_target, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    runtime = _runtime(config_file, storage_dir, providers, locale_source, locale_target, port)
    app = create_app(runtime)
    click.echo(
        f"serving on port {runtime.config.port} "
        f"(providers={runtime.config.providers}, storage={runtime.config.storage_dir})"
    )
    uvicorn.run(app, host="0.0.0.0", port=runtime.config.port)


@main.command()
@_common_options
def seed(config_file, storage_dir, providers, locale_source, locale_target):
    """Embed the bundled exemplar corpus into the retrieval collections."""
    runtime = _runtime(config_file, storage_dir, providers, locale_source, locale_target)
    counts = runtime.seed_collections()
    for name, count in sorted(counts.items()):
        click.echo(f"{name}: {count} entries")


@main.command()
@_common_options
def reembed(config_file, storage_dir, providers, locale_source, locale_target):
    """Re-embed every collection entry with the active embedder."""
    runtime = _runtime(config_file, storage_dir, providers, locale_source, locale_target)
    counts = runtime.reembed_collections()
    for name, count in sorted(counts.items()):
        click.echo(f"{name}: {count} entries re-embedded")


@main.command()
@_common_options
@click.option("--out", "out_dir", type=click.Path(), default="./report",
              help="Directory for the delimited files and figures.")
@click.option("--top-k", type=int, default=20, help="Top-k size for overlap.")
@click.option("--basis", type=click.Choice(["recommended", "selected"]),
              default="recommended", help="Which labels the overlap counts.")
def report(config_file, storage_dir, providers, locale_source, locale_target,
           out_dir, top_k, basis):
    """Render the usage report: CSV files plus rendered figures."""
    runtime = _runtime(config_file, storage_dir, providers, locale_source, locale_target)
    snapshots = runtime.storage.load_snapshots()
    try:
        usage_report = build_report(snapshots, k=top_k, basis=basis)
    except TurntalkError as error:
        raise click.ClickException(error.message)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = session_rows(snapshots)
    with (out / "sessions.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(
            handle,
            fieldnames=[
                "session_id", "dyad_id", "started_at", "ended_at",
                "duration_seconds", "exchanges", "stars", "parent_syllables",
            ],
        )
        writer.writeheader()
        writer.writerows(rows)

    with (out / "card_usage.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["dyad_id", "topic", "action", "emotion", "core", "total"])
        for dyad_id in sorted(usage_report.usage_by_dyad):
            counts = usage_report.usage_by_dyad[dyad_id]
            writer.writerow(
                [dyad_id, counts["topic"], counts["action"], counts["emotion"],
                 counts["core"], sum(counts.values())]
            )
        totals = usage_report.category_totals
        writer.writerow(
            ["TOTAL", totals["topic"], totals["action"], totals["emotion"],
             totals["core"], usage_report.grand_total]
        )

    with (out / "overlap.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["ordinal", "dyads", "mean_overlap"])
        for row in usage_report.overlap:
            writer.writerow([row["ordinal"], row["dyads"], f"{row['mean_overlap']:.4f}"])

    figures = [card_usage_figure(usage_report.usage_by_dyad, out / "card_usage.png")]
    if usage_report.overlap:
        figures.append(overlap_figure(usage_report.overlap, out / "overlap.png"))
    figures.append(session_metrics_figure(rows, out / "session_metrics.png"))

    click.echo(f"sessions: {usage_report.sessions}")
    if usage_report.mean_duration_seconds is not None:
        click.echo(f"mean duration: {usage_report.mean_duration_seconds:.1f}s")
    click.echo(f"mean exchanges: {usage_report.mean_exchanges:.2f}")
    click.echo(f"cards selected: {usage_report.grand_total}")
    for path in [out / "sessions.csv", out / "card_usage.csv", out / "overlap.csv"] + figures:
        click.echo(f"wrote {path}")


@main.command("export-transcript")
@_common_options
@click.argument("session_id")
@click.option("--guides", is_flag=True, default=False, help="Include coaching lines.")
@click.option("--out", "out_file", type=click.Path(), default=None,
              help="Write to a file instead of stdout.")
def export_transcript_cmd(config_file, storage_dir, providers, locale_source,
                          locale_target, session_id, guides, out_file):
    """Print or save one session's transcript."""
    runtime = _runtime(config_file, storage_dir, providers, locale_source, locale_target)
    try:
        text = runtime.transcript(session_id, include_guides=guides)
    except TurntalkError as error:
        raise click.ClickException(error.message)
    if out_file:
        Path(out_file).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_file}")
    else:
        click.echo(text, nl=False)


@main.command("caption-symbols")
@_common_options
@click.argument("labels_file", type=click.Path(exists=True))
def caption_symbols(config_file, storage_dir, providers, locale_source, locale_target,
                    labels_file):
    """Caption a symbol library and index it for image matching.

    LABELS_FILE is JSONL with {"symbol_id": ..., "label": ...} rows.
    """
    runtime = _runtime(config_file, storage_dir, providers, locale_source, locale_target)
    added = 0
    for line_no, line in enumerate(
        Path(labels_file).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            symbol_id, label = row["symbol_id"], row["label"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise click.ClickException(f"{labels_file}, line {line_no}: {exc}")
        request = CompletionRequest(
            task=TaskTag.CAPTION,
            context=PromptContext(constraints={"label": label}),
        )
        try:
            caption = runtime.gateway.complete(request)["caption"]
        except TurntalkError as error:
            raise click.ClickException(f"captioning {symbol_id}: {error.message}")
        runtime.store.add(
            SYMBOL_CAPTIONS,
            symbol_id,
            caption,
            runtime.providers.embedder.embed(caption),
            {"label": label, "caption": caption},
        )
        added += 1
    runtime.export_collections()
    click.echo(f"captioned and indexed {added} symbols")


if __name__ == "__main__":
    sys.exit(main())
