import functools
import logging

import click

import config
from datagen import ingest_station_csv
from experiments import (
    export_fig1,
    export_matrices,
    export_spectra,
    layered_config,
    run_experiment,
    validate_experiment_config,
)

logger = logging.getLogger(__name__)


def _report_errors(command):
    """Turn domain errors into a one-line diagnostic and a nonzero exit code."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except click.ClickException:
            raise
        except (ValueError, OSError) as exc:
            raise click.ClickException(str(exc))
        except Exception as exc:
            logger.exception(f"Unexpected error: {exc}")
            raise click.ClickException(f"Unexpected error: {exc}")
    return wrapper


# --- Command group ---
@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG instead of INFO.")
def main(verbose):
    """UEM graph Fourier transform experiments and exports."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key = value experiment file.")
@click.option("--experiment", type=click.Choice(list(config.EXPERIMENT_PRESETS)))
@click.option("--nodes", "n_nodes", type=int)
@click.option("--k", type=int)
@click.option("--runs", type=int)
@click.option("--seed", type=int)
@click.option("--gso", "gso_kinds", multiple=True, type=click.Choice(list(config.GSO_KINDS)),
              help="GSO kind to evaluate; repeat for several (default: all).")
@click.option("--out", "output_dir", type=click.Path(file_okay=False))
@click.option("--workers", type=int, help="Parallel processes across runs.")
@click.option("--station-csv", type=click.Path(dir_okay=False))
@_report_errors
def run(config_path, experiment, n_nodes, k, runs, seed, gso_kinds, output_dir, workers, station_csv):
    """Run an experiment and write summary, heatmap, spectra and eigenvalue-curve CSVs."""
    overrides = {
        "experiment": experiment, "n_nodes": n_nodes, "k": k, "runs": runs, "seed": seed,
        "gso_kinds": tuple(gso_kinds) or None, "output_dir": output_dir, "workers": workers,
        "station_csv": station_csv,
    }
    cfg, error = validate_experiment_config(layered_config(config_path, overrides))
    if error:
        raise click.ClickException(error)
    paths = run_experiment(cfg)
    click.echo(f"Wrote {len(paths)} artifacts to {cfg.output_dir}")


@main.command()
@click.option("--out", "output_dir", default="results", show_default=True, type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--nodes", "n_nodes", default=config.FIG1_SETTINGS["n_nodes"], show_default=True, type=int)
@click.option("--k", default=config.FIG1_SETTINGS["k"], show_default=True, type=int)
@click.option("--rho", default=config.FIG1_SETTINGS["rho"], show_default=True, type=float)
@click.option("--n", "n_param", default=config.FIG1_SETTINGS["n"], show_default=True, type=float)
@_report_errors
def fig1(output_dir, seed, n_nodes, k, rho, n_param):
    """Sorted UEM eigenvalues against m at fixed n."""
    path = export_fig1(output_dir, seed=seed, n_nodes=n_nodes, k=k, rho=rho, n=n_param)
    click.echo(f"Wrote {path}")


@main.command()
@click.option("--out", "output_dir", default="results", show_default=True, type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True, type=int)
@_report_errors
def matrices(output_dir, seed):
    """Dense UEM matrices on the showcase graph."""
    written = export_matrices(output_dir, seed=seed)
    click.echo(f"Wrote {len(written)} matrices to {output_dir}")


@main.command()
@click.option("--out", "output_dir", default="results", show_default=True, type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True, type=int)
@_report_errors
def spectra(output_dir, seed):
    """UEM-GFT coefficients of a uniform signal on the showcase graph."""
    written = export_spectra(output_dir, seed=seed)
    click.echo(f"Wrote {len(written)} spectra to {output_dir}")


@main.command("ingest-check")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--bbox", nargs=4, type=float, default=None,
              help="lat_min lat_max lon_min lon_max (west longitudes negative).")
@_report_errors
def ingest_check(path, bbox):
    """Validate a station CSV and print what it contains."""
    series = ingest_station_csv(path, tuple(bbox) if bbox else None)
    click.echo(
        f"{path}: {series.n_stations} stations, {series.samples.shape[0]} complete rows, unit {series.unit}"
    )


if __name__ == "__main__":
    main()
