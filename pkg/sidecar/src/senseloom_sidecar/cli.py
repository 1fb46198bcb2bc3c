"""Command-line surface of the embedder sidecar."""

from __future__ import annotations

import sys

import click

from senseloom.errors import DataError, SenseloomError

from .backends import LAYER_POLICIES
from .embed import embed_occurrences, score_pairs


@click.group()
def cli():
    """Embed target-word occurrences and score WiC pairs."""


@cli.command()
@click.option("--input", "input_path", required=True, type=str, help="canonical sentence JSONL")
@click.option("--model", "model_id", default="hash:64", show_default=True)
@click.option("--layer", type=click.Choice(list(LAYER_POLICIES)), default="last", show_default=True)
@click.option("--out", required=True, type=str, help="output .semb path")
def embed(input_path, model_id, layer, out):
    """Write one embedding per sentence record to a .semb file."""
    matrix = embed_occurrences(input_path, model_id, out, layer_policy=layer)
    click.echo(f"{matrix.n} x {matrix.d} embeddings ({matrix.model_id}) -> {out}")


@cli.command()
@click.option("--pairs", "pairs_path", required=True, type=str, help="WiC pairs JSONL")
@click.option("--model", "model_id", default="hash:64", show_default=True)
@click.option("--layer", type=click.Choice(list(LAYER_POLICIES)), default="last", show_default=True)
@click.option("--out", required=True, type=str, help="output scored-pairs JSONL")
def score(pairs_path, model_id, layer, out):
    """Write one cosine distance per pair, joinable by pair_id."""
    n = score_pairs(pairs_path, model_id, out, layer_policy=layer)
    click.echo(f"{n} pairs scored -> {out}")


def main(argv=None) -> int:
    try:
        cli.main(args=list(sys.argv[1:] if argv is None else argv), standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        return 64
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except SenseloomError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
