"""Experiment orchestration: config layering and validation, detector runs over every
GSO kind, and the CSV artifacts (summary, heatmaps, spectra, eigenvalue curves)."""
import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from itertools import repeat

import numpy as np
import pandas as pd

import config
from datagen import (
    ingest_station_csv,
    make_rng,
    station_datasets,
    uniform_datasets,
    uniform_healthy,
    wave_datasets,
)
from detector import evaluate, f1_score, grid_search_cv, refit
from diffusion import extended_adjacency
from graph_core import build_knn_graph, consensus_matrix, sample_knn_graph, write_edge_list
from gso_zoo import basis_factory, structure_grid
from models import AnomalySpec, ConfigError, DisconnectedGraphError, ExperimentConfig
from spectral import decompose, gft, spectrum_frame
from uem import build_uem, eigencurves

logger = logging.getLogger(__name__)

# --- Configuration ---

_INT_KEYS = {
    "n_nodes", "k", "runs", "seed", "folds", "train_healthy", "train_anomalous",
    "test_healthy", "test_anomalous", "n_samples", "max_anomalous_sensors", "workers",
}
_FLOAT_KEYS = {"low", "high", "b_max", "noise_variance", "fig1_rho", "fig1_n"}
_FLOAT_LIST_KEYS = {"lambda_cut_quantiles", "betas", "rhos", "ms", "ns", "bbox"}
_INT_LIST_KEYS = {"ts"}
_STR_LIST_KEYS = {"gso_kinds"}
_STR_KEYS = {"experiment", "output_dir", "station_csv", "sampling"}
_BOOL_KEYS = {"export_grid"}
_ANOMALY_KEYS = ("b_max", "noise_variance", "max_anomalous_sensors")
KNOWN_KEYS = (
    _INT_KEYS | _FLOAT_KEYS | _FLOAT_LIST_KEYS | _INT_LIST_KEYS | _STR_LIST_KEYS | _STR_KEYS | _BOOL_KEYS
)

BASE_DEFAULTS = {
    "experiment": "wave",
    "seed": 0,
    "output_dir": "results",
    "gso_kinds": config.GSO_KINDS,
    "lambda_cut_quantiles": config.LAMBDA_CUT_QUANTILES,
    "betas": config.BETA_GRID,
    "rhos": config.RHO_GRID,
    "ms": config.M_GRID,
    "ns": config.N_GRID,
    "ts": config.T_GRID,
    "folds": config.DEFAULT_FOLDS,
    "fig1_rho": config.FIG1_SETTINGS["rho"],
    "fig1_n": config.FIG1_SETTINGS["n"],
    "export_grid": False,
    "workers": 1,
}


def parse_value(key, raw):
    """Convert one raw config string to the type its key expects."""
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if key in _INT_LIST_KEYS:
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if key in _STR_LIST_KEYS:
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if key in _BOOL_KEYS:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
    except ValueError:
        raise ConfigError(f"Invalid value for '{key}': '{raw}'")
    return raw


def read_config_file(path):
    """Flat `key = value` file; `#` starts a comment, list values are comma separated."""
    data = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc.strerror}")
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got '{line}'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{number}: unknown key '{key}'")
        data[key] = parse_value(key, raw)
    return data


def layered_config(path=None, overrides=None):
    """Merge defaults < experiment preset < config file < overrides (None values ignored)."""
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    file_data = read_config_file(path) if path else {}
    experiment = overrides.get("experiment", file_data.get("experiment", BASE_DEFAULTS["experiment"]))
    data = dict(BASE_DEFAULTS)
    data.update(config.EXPERIMENT_PRESETS.get(experiment, {}))
    data.update(file_data)
    data.update(overrides)
    return data


def _in_unit_interval(values):
    return all(0.0 <= v <= 1.0 for v in values)


def validate_experiment_config(data):
    """Validate a merged config mapping.

    Returns:
        tuple: (ExperimentConfig, None) on success, (None, error_message) otherwise.
    """
    experiment = data.get("experiment")
    if experiment not in config.EXPERIMENT_PRESETS:
        return None, f"Unknown experiment '{experiment}'. Expected one of {', '.join(config.EXPERIMENT_PRESETS)}."

    required = ("n_nodes", "k", "runs", "seed", "output_dir")
    missing = [key for key in required if data.get(key) is None]
    if missing:
        return None, f"Missing required settings: {', '.join(missing)}."

    if data["runs"] < 1:
        return None, "runs must be at least 1."
    if not 1 <= data["k"] < data["n_nodes"]:
        return None, f"k must satisfy 1 <= k < n_nodes (got k={data['k']}, n_nodes={data['n_nodes']})."
    if data["folds"] < 2:
        return None, "folds must be at least 2."
    if data["workers"] < 1:
        return None, "workers must be at least 1."

    unknown = [kind for kind in data["gso_kinds"] if kind not in config.GSO_KINDS]
    if unknown or not data["gso_kinds"]:
        return None, f"Unknown GSO kind(s) {', '.join(unknown) or '(none given)'}; expected {', '.join(config.GSO_KINDS)}."

    grids = ("lambda_cut_quantiles", "betas", "rhos", "ms", "ns", "ts")
    empty = [name for name in grids if not data[name]]
    if empty:
        return None, f"Empty hyperparameter grid(s): {', '.join(empty)}."
    if not _in_unit_interval(data["lambda_cut_quantiles"]):
        return None, "lambda_cut_quantiles must lie in [0, 1]."
    if not (_in_unit_interval(data["ms"]) and _in_unit_interval(data["ns"])):
        return None, "UEM parameters m and n must lie in [0, 1]."
    if any(beta < 0 for beta in data["betas"]):
        return None, "betas must be nonnegative."
    if any(rho <= 0 for rho in data["rhos"]) or data["fig1_rho"] <= 0:
        return None, "rho values must be positive."
    if any(t < 1 for t in data["ts"]):
        return None, "Diffusion scales t must be at least 1."
    if not 0.0 <= data["fig1_n"] <= 1.0:
        return None, "fig1_n must lie in [0, 1]."

    anomaly = None
    station = experiment in config.STATION_EXPERIMENTS
    if experiment == "uniform" or station:
        try:
            anomaly = AnomalySpec(*(data[key] for key in _ANOMALY_KEYS))
        except (KeyError, ValueError) as exc:
            return None, f"Invalid anomaly settings: {exc}"
        if anomaly.max_anomalous_sensors > data["n_nodes"]:
            return None, "max_anomalous_sensors cannot exceed n_nodes."

    if experiment in ("wave", "uniform"):
        sizes = [data.get(key, 0) for key in ("train_healthy", "train_anomalous", "test_healthy", "test_anomalous")]
        if min(sizes) < 1:
            return None, "Every train/test class needs at least one sample."
    if experiment == "uniform" and data["low"] > data["high"]:
        return None, "low must not exceed high."
    if station:
        if not data.get("station_csv"):
            return None, f"The {experiment} experiment needs station_csv."
        if data.get("sampling", "random") not in config.SAMPLING_MODES:
            return None, f"sampling must be one of {', '.join(config.SAMPLING_MODES)}."
        bbox = data.get("bbox")
        if bbox is not None and len(bbox) != 4:
            return None, "bbox must be lat_min,lat_max,lon_min,lon_max."

    names = {f.name for f in fields(ExperimentConfig)}
    values = {key: value for key, value in data.items() if key in names}
    values["anomaly"] = anomaly
    for key in ("gso_kinds", "lambda_cut_quantiles", "betas", "rhos", "ms", "ns", "ts"):
        values[key] = tuple(values[key])
    if values.get("bbox") is not None:
        values["bbox"] = tuple(values["bbox"])
    return ExperimentConfig(**values), None


def write_config_file(cfg, path):
    """Write the resolved config back out in the flat key = value format."""
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if f.name == "anomaly":
            if value is not None:
                lines += [f"{key} = {getattr(value, key)}" for key in _ANOMALY_KEYS]
            continue
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{f.name} = {value}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# --- Runs ---

@dataclass
class RunResult:
    run_index: int
    seed: int
    kind_f1: dict = field(default_factory=dict)
    kind_choice: dict = field(default_factory=dict)
    cell_f1: dict = field(default_factory=dict)
    uem_choice: tuple = None
    grid_tables: list = field(default_factory=list)
    spectra: dict = field(default_factory=dict)
    graph: object = None


def _station_graph(series, cfg, rng, seed):
    """Draw n_nodes stations until their k-NN graph over lat and lon is connected."""
    if cfg.n_nodes > series.n_stations:
        raise ConfigError(f"n_nodes={cfg.n_nodes} exceeds the {series.n_stations} stations available.")
    for attempt in range(1, config.MAX_GRAPH_ATTEMPTS + 1):
        chosen = np.sort(rng.choice(series.n_stations, size=cfg.n_nodes, replace=False))
        try:
            return build_knn_graph(series.coords[chosen], cfg.k, seed=seed), chosen
        except DisconnectedGraphError:
            logger.warning(f"Disconnected station graph (attempt {attempt}), drawing other stations")
    raise DisconnectedGraphError(f"disconnected graph: no connected station subset after {config.MAX_GRAPH_ATTEMPTS} draws")


def build_run_data(cfg, rng, seed, series=None):
    """Graph plus (train, test) datasets for one run."""
    sizes = {
        "train_healthy": cfg.train_healthy, "train_anomalous": cfg.train_anomalous,
        "test_healthy": cfg.test_healthy, "test_anomalous": cfg.test_anomalous,
    }
    if cfg.experiment in config.STATION_EXPERIMENTS:
        graph, chosen = _station_graph(series, cfg, rng, seed)
        train, test = station_datasets(
            series.samples[:, chosen], cfg.n_samples, cfg.anomaly, rng, sampling=cfg.sampling
        )
        return graph, train, test

    graph = sample_knn_graph(cfg.n_nodes, cfg.k, rng, seed=seed)
    if cfg.experiment == "wave":
        train, test = wave_datasets(graph.coords, sizes, rng)
    else:
        train, test = uniform_datasets(cfg.n_nodes, sizes, cfg.anomaly, rng, lo=cfg.low, hi=cfg.high)
    return graph, train, test


def _uem_cells(result, factory, train, test):
    """Test F1 of the CV winner inside every (m, n, t) cell of a UEM sweep."""
    cells = {}
    for idx, point in enumerate(result.structures):
        cells.setdefault((point["m"], point["n"], point["t"]), []).append(idx)
    scores = {}
    for cell, indices in cells.items():
        model = refit(factory, train, result.best_point(indices))
        scores[cell] = f1_score(evaluate(model, test))
    return scores


def run_single(cfg, run_index, series=None):
    """One training/test pair: every GSO kind goes through grid search and test scoring."""
    seed = cfg.seed + run_index
    rng = make_rng(seed)
    graph, train, test = build_run_data(cfg, rng, seed, series)
    outcome = RunResult(run_index=run_index, seed=seed, graph=graph)
    logger.info(f"Run {run_index} (seed {seed}): {graph.n_nodes} nodes, {len(train)} train / {len(test)} test signals")

    for label in cfg.gso_kinds:
        factory = basis_factory(graph, label)
        structures = structure_grid(label, cfg.rhos, cfg.ms, cfg.ns, cfg.ts)
        result = grid_search_cv(
            factory, train, structures, cfg.lambda_cut_quantiles, cfg.betas, folds=cfg.folds, seed=seed
        )
        outcome.kind_f1[label] = f1_score(evaluate(result.model, test))
        outcome.kind_choice[label] = result.best
        logger.info(f"Run {run_index} {label}: test F1 {outcome.kind_f1[label]:.4f}")

        if label == "uem":
            outcome.cell_f1 = _uem_cells(result, factory, train, test)
            best = result.best.structure
            outcome.uem_choice = (best["m"], best["n"], best["t"])
        if cfg.export_grid:
            outcome.grid_tables.append(result.table(gso_kind=label))
        if run_index == 0:
            basis = result.model.basis
            for name, signals in (("healthy", test.healthy), ("anomalous", test.anomalous)):
                if len(signals):
                    outcome.spectra[f"{label}_{name}"] = spectrum_frame(basis, gft(basis, signals[0]))
    return outcome


def _write_csv(frame, path, **kwargs):
    frame.to_csv(path, index=False, float_format=config.CSV_FLOAT_FORMAT, **kwargs)
    logger.info(f"Wrote {path}")


def _degree_cell(cell, lattice_order):
    """Map a cell whose GSO is a positive multiple of the extended degree matrix to one representative.

    P(1, n) is D(t) for every n and P(m, 0.5) is m D(t), so all of these cells share one
    eigenbasis and one relative cut, hence one detector. The representative is the first
    m = 1 cell at the same t; lattices without m = 1 leave the cell unchanged.
    """
    m, n, t = cell
    if m == 1.0 or (n == 0.5 and m > 0):
        for candidate in lattice_order:
            if candidate[0] == 1.0 and candidate[2] == t:
                return candidate
    return cell


def _mode_cell(choices, lattice_order):
    """Most frequent cell; ties go to the cell earliest in lattice order."""
    counts = Counter(choices)
    top = max(counts.values())
    return next(cell for cell in lattice_order if counts.get(cell) == top)


def summarize(cfg, results):
    """One row per GSO kind: mean and std of test F1, plus the best and modal UEM cells."""
    rows = []
    for label in cfg.gso_kinds:
        scores = np.array([r.kind_f1[label] for r in results])
        row = {"gso_kind": label, "mean_f1": scores.mean(), "std_f1": scores.std(), "runs": len(results)}
        if label == "uem":
            lattice = [(m, n, t) for m in cfg.ms for n in cfg.ns for t in cfg.ts]
            cell_means = {cell: np.mean([r.cell_f1[cell] for r in results]) for cell in lattice}
            best_cell = _degree_cell(max(lattice, key=lambda cell: cell_means[cell]), lattice)
            best_scores = np.array([r.cell_f1[best_cell] for r in results])
            modal = _mode_cell([_degree_cell(r.uem_choice, lattice) for r in results], lattice)
            row.update({
                "best_cell_m": best_cell[0], "best_cell_n": best_cell[1], "best_cell_t": best_cell[2],
                "best_cell_mean_f1": best_scores.mean(), "best_cell_std_f1": best_scores.std(),
                "modal_m": modal[0], "modal_n": modal[1], "modal_t": modal[2],
            })
        rows.append(row)
    return pd.DataFrame(rows)


def heatmap_frame(cfg, results, t):
    """Mean and std of test F1 per (m, n) cell at diffusion scale t."""
    rows = []
    for m in cfg.ms:
        for n in cfg.ns:
            scores = np.array([r.cell_f1[(m, n, t)] for r in results])
            rows.append({"m": m, "n": n, "mean_f1": scores.mean(), "std_f1": scores.std()})
    return pd.DataFrame(rows)


def runs_frame(cfg, results):
    """Long table of per-run test F1 and the hyperparameters grid search chose."""
    rows = []
    for r in results:
        for label in cfg.gso_kinds:
            choice = r.kind_choice[label]
            rows.append({
                "run": r.run_index, "seed": r.seed, "gso_kind": label, "f1": r.kind_f1[label],
                "lambda_cut_q": choice.lambda_cut_q, "beta": choice.beta,
                **{key: choice.structure.get(key, np.nan) for key in ("rho", "m", "n", "t")},
            })
    return pd.DataFrame(rows)


def eigencurve_frame(graph, rho, n, ms=config.M_GRID, ts=config.T_GRID):
    """Sorted UEM eigenvalues against m at fixed n, long format (t, m, index, eigenvalue)."""
    b = consensus_matrix(graph)
    rows = []
    for t in ts:
        curves = eigencurves(extended_adjacency(b, t, rho), n, ms)
        for m, values in zip(ms, curves):
            rows.extend({"t": t, "m": m, "index": l, "eigenvalue": v} for l, v in enumerate(values))
    return pd.DataFrame(rows)


def run_experiment(cfg):
    """Run every configured run and write the CSV artifacts; returns {artifact: path}."""
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"Cannot create output directory {cfg.output_dir}: {exc.strerror}")

    series = ingest_station_csv(cfg.station_csv, cfg.bbox) if cfg.experiment in config.STATION_EXPERIMENTS else None
    logger.info(f"Running '{cfg.experiment}' for {cfg.runs} runs over {', '.join(cfg.gso_kinds)}")
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_single, repeat(cfg), range(cfg.runs), repeat(series)))
    else:
        results = [run_single(cfg, i, series) for i in range(cfg.runs)]

    paths = {}
    out = cfg.output_dir
    paths["config"] = os.path.join(out, "config_used.txt")
    write_config_file(cfg, paths["config"])
    paths["summary"] = os.path.join(out, "summary.csv")
    _write_csv(summarize(cfg, results), paths["summary"])
    paths["runs"] = os.path.join(out, "runs.csv")
    _write_csv(runs_frame(cfg, results), paths["runs"])

    if "uem" in cfg.gso_kinds:
        for t in cfg.ts:
            paths[f"heatmap_t{t}"] = os.path.join(out, f"heatmap_t{t}.csv")
            _write_csv(heatmap_frame(cfg, results, t), paths[f"heatmap_t{t}"])

    spectra_dir = os.path.join(out, "spectra")
    os.makedirs(spectra_dir, exist_ok=True)
    for name, frame in results[0].spectra.items():
        _write_csv(frame, os.path.join(spectra_dir, f"{name}.csv"))
    paths["spectra"] = spectra_dir

    paths["eigcurves"] = os.path.join(out, "eigcurves.csv")
    _write_csv(eigencurve_frame(results[0].graph, cfg.fig1_rho, cfg.fig1_n, cfg.ms, cfg.ts), paths["eigcurves"])
    paths["graph"] = os.path.join(out, "graph_run0.txt")
    write_edge_list(results[0].graph, paths["graph"])

    if cfg.export_grid:
        grid_dir = os.path.join(out, "grid")
        os.makedirs(grid_dir, exist_ok=True)
        columns = ["gso_kind", "m", "n", "t", "rho", "max_hops", "lambda_cut_q", "beta", "mean_cv_f1"]
        for r in results:
            _write_csv(pd.concat(r.grid_tables)[columns], os.path.join(grid_dir, f"run{r.run_index:03d}.csv"))
        paths["grid"] = grid_dir
    return paths


# --- Figure reproductions ---

def showcase_graph(seed, n_nodes, k):
    """Random connected k-NN graph used by the figure exports."""
    return sample_knn_graph(n_nodes, k, make_rng(seed), seed=seed)


def export_fig1(out_dir, seed=0, n_nodes=config.FIG1_SETTINGS["n_nodes"], k=config.FIG1_SETTINGS["k"],
                rho=config.FIG1_SETTINGS["rho"], n=config.FIG1_SETTINGS["n"], ms=config.M_GRID, ts=config.T_GRID):
    """Eigenvalue-vs-m curves on a fresh sensor graph."""
    os.makedirs(out_dir, exist_ok=True)
    graph = showcase_graph(seed, n_nodes, k)
    path = os.path.join(out_dir, "eigcurves.csv")
    _write_csv(eigencurve_frame(graph, rho, n, ms, ts), path)
    write_edge_list(graph, os.path.join(out_dir, "graph.txt"))
    return path


def _showcase_name(t, m, n):
    return f"uem_t{t}_m{m:.1f}_n{n:.1f}.csv"


def export_matrices(out_dir, seed=0, n_nodes=config.SHOWCASE_SETTINGS["n_nodes"], k=config.SHOWCASE_SETTINGS["k"],
                    rho=config.SHOWCASE_SETTINGS["rho"], pairs=config.SHOWCASE_PAIRS, ts=config.T_GRID):
    """Dense UEM matrices (row-major, no header) for heatmap rendering."""
    matrices_dir = os.path.join(out_dir, "matrices")
    os.makedirs(matrices_dir, exist_ok=True)
    graph = showcase_graph(seed, n_nodes, k)
    b = consensus_matrix(graph)
    written = []
    for t in ts:
        ext = extended_adjacency(b, t, rho)
        for m, n in pairs:
            path = os.path.join(matrices_dir, _showcase_name(t, m, n))
            pd.DataFrame(build_uem(ext, m, n).entries).to_csv(
                path, index=False, header=False, float_format=config.CSV_FLOAT_FORMAT
            )
            written.append(path)
    write_edge_list(graph, os.path.join(out_dir, "graph.txt"))
    return written


def export_spectra(out_dir, seed=0, n_nodes=config.SHOWCASE_SETTINGS["n_nodes"], k=config.SHOWCASE_SETTINGS["k"],
                   rho=config.SHOWCASE_SETTINGS["rho"], pairs=config.SHOWCASE_PAIRS, ts=config.T_GRID):
    """UEM-GFT of one x ~ U(0, 1) signal under each showcased (m, n, t)."""
    spectra_dir = os.path.join(out_dir, "spectra")
    os.makedirs(spectra_dir, exist_ok=True)
    rng = make_rng(seed)
    graph = sample_knn_graph(n_nodes, k, rng, seed=seed)
    x = uniform_healthy(n_nodes, 0.0, 1.0, rng)
    b = consensus_matrix(graph)
    written = []
    for t in ts:
        ext = extended_adjacency(b, t, rho)
        for m, n in pairs:
            basis = decompose(build_uem(ext, m, n).entries, source=f"uem(m={m},n={n},t={t},rho={rho})")
            path = os.path.join(spectra_dir, _showcase_name(t, m, n))
            _write_csv(spectrum_frame(basis, gft(basis, x)), path)
            written.append(path)
    return written
