"""Command line: run analyses, generate fixtures, start the service.

Exit codes: 0 success, 1 validation problem (bad input data, bad flags,
infeasible config), 2 numerical failure.
"""

from __future__ import annotations

import sys

import click

from .ensemble import load_ensemble, save_ensemble
from .errors import NumericalError, PaletteError, PipelineStageError
from .pipeline import (
    PipelineConfig,
    generate_synthetic_ensemble,
    load_report,
    run_pipeline,
    save_report,
)

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


@click.group()
def cli():
    """Palette diagrams for ensembles of soft network partitions."""


@cli.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Ensemble JSON file.")
@click.option("--alpha", type=float, default=0.5, show_default=True,
              help="Divergence order for group comparison.")
@click.option("--groups", "m", type=int, required=True,
              help="Target number of representative groups M.")
@click.option("--knn", "knn_k", type=int, default=None,
              help="Isomap neighborhood size (default: max(10, ln N)).")
@click.option("--baseline", type=click.Choice(["zero", "symmetric", "wiggle"]),
              default="symmetric", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False),
              help="Output directory for report and SVGs.")
@click.option("--no-filter", "no_filter", is_flag=True,
              help="Keep all stacked groups (skip redundancy filtering).")
@click.option("--no-sort", "no_sort", is_flag=True,
              help="Keep input vertex order (skip Isomap sorting).")
@click.option("--order-from", "order_from", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Reuse the vertex order of a previous report.")
@click.option("--tsne-perplexity", type=float, default=10.0, show_default=True)
@click.option("--residual", is_flag=True,
              help="Show filtered-out mass as a grey band.")
def run(input_path, alpha, m, knn_k, baseline, seed, out_dir, no_filter,
        no_sort, order_from, tsne_perplexity, residual):
    """Analyze an ensemble and write report.json plus both SVG diagrams."""
    import os

    order = None
    if order_from is not None:
        prev = load_report(order_from)
        order = prev.order
    cfg = PipelineConfig(
        m=m,
        alpha=alpha,
        knn_k=knn_k,
        baseline_mode=baseline,
        seed=seed,
        filtering=not no_filter,
        sorting=not no_sort,
        tsne_perplexity=tsne_perplexity,
        residual=residual,
        order_from=order,
    )
    ensemble = load_ensemble(input_path)
    result = run_pipeline(ensemble, cfg)
    os.makedirs(out_dir, exist_ok=True)
    save_report(result.report, os.path.join(out_dir, "report.json"))
    with open(os.path.join(out_dir, "palette_1d.svg"), "w", encoding="utf-8") as fh:
        fh.write(result.svg_1d)
    with open(os.path.join(out_dir, "palette_2d.svg"), "w", encoding="utf-8") as fh:
        fh.write(result.svg_2d)
    breaks = result.report.payload["diagnostics"]["contiguity_breaks"]
    click.echo(
        f"wrote {out_dir}/report.json and 2 SVGs; "
        f"{len(breaks)} bands, contiguity breaks {breaks}"
    )


@cli.command()
@click.option("--n", type=int, required=True, help="Number of vertices.")
@click.option("--k", type=int, required=True, help="Planted group count.")
@click.option("--l", "copies", type=int, required=True,
              help="Number of partition copies.")
@click.option("--eta", type=float, default=0.0, show_default=True,
              help="Noise level in [0, 1].")
@click.option("--mode", type=click.Choice(["hard", "soft", "hierarchical-split"]),
              default="soft", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False))
def synth(n, k, copies, eta, mode, seed, out_path):
    """Generate a planted-group synthetic ensemble as JSON."""
    ensemble = generate_synthetic_ensemble(
        n=n, k=k, l=copies, eta=eta, mode=mode, seed=seed
    )
    save_ensemble(ensemble, out_path)
    click.echo(f"wrote {out_path} ({len(ensemble.partitions)} partitions, "
               f"{ensemble.n_vertices} vertices)")


@cli.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store-dir", default=None,
              type=click.Path(file_okay=False),
              help="Persist uploaded ensembles to this directory.")
def serve(port, host, store_dir):
    """Start the HTTP analysis service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(store_dir=store_dir), host=host, port=port,
                log_level="warning")


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except PipelineStageError as exc:
        click.echo(f"error: {exc}", err=True)
        if isinstance(exc.cause, NumericalError):
            return EXIT_NUMERICAL
        return EXIT_VALIDATION
    except NumericalError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_NUMERICAL
    except PaletteError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
