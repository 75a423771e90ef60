"""Synthetic signal generation, anomaly injection and station CSV ingestion.

Every generator draws from numpy's PCG64 bit generator seeded with a 64-bit integer
(see make_rng), so a seed fully determines a dataset.
"""
import io
import logging

import numpy as np
import pandas as pd

from config import RNG_ALGORITHM, SAMPLING_MODES
from models import Label, LabeledDataset, StationFormatError, StationSeries, WaveSignalState

logger = logging.getLogger(__name__)

# Phase increments per sample: step * Uniform[-0.5, 0.5], independent per axis
PHASE_STEP_X = 0.1
PHASE_STEP_Y = 0.05
INTERFERENCE_AMPLITUDE = 0.1


def make_rng(seed):
    """Seeded PCG64 generator; the same seed always yields the same stream."""
    return np.random.Generator(getattr(np.random, RNG_ALGORITHM)(seed))


# --- Smooth wave signals ---

def smooth_wave_sample(coords, state, rng):
    """cos(2 pi x + theta_x) + cos(4 pi y + theta_y) at the current phases, then advance the phases."""
    coords = np.asarray(coords, dtype=float)
    x, y = coords[:, 0], coords[:, 1]
    signal = np.cos(2 * np.pi * x + state.theta_x) + np.cos(2 * np.pi * 2 * y + state.theta_y)
    u_x, u_y = rng.uniform(-0.5, 0.5, size=2)
    updated = WaveSignalState(
        theta_x=state.theta_x + PHASE_STEP_X * u_x,
        theta_y=state.theta_y + PHASE_STEP_Y * u_y,
    )
    return signal, updated


def wave_interference(coords, state):
    """High-frequency interference 0.1 (cos(10 pi x + theta_x) + cos(12 pi y + theta_y))."""
    coords = np.asarray(coords, dtype=float)
    x, y = coords[:, 0], coords[:, 1]
    return INTERFERENCE_AMPLITUDE * (
        np.cos(2 * np.pi * 5 * x + state.theta_x) + np.cos(2 * np.pi * 6 * y + state.theta_y)
    )


def wave_dataset(coords, n_healthy, n_anomalous, state, rng):
    """Consecutive samples of one phase stream; labels are shuffled over the stream.

    Returns the dataset and the phase state after the last sample, so a test set
    can continue the stream of its training set.
    """
    labels = np.array([Label.HEALTHY] * n_healthy + [Label.ANOMALOUS] * n_anomalous, dtype=int)
    labels = rng.permutation(labels)
    signals = np.empty((labels.shape[0], len(coords)))
    for i, label in enumerate(labels):
        # Interference uses the phases the wave sample was drawn with
        current = state
        signals[i], state = smooth_wave_sample(coords, state, rng)
        if label == Label.ANOMALOUS:
            signals[i] += wave_interference(coords, current)
    return LabeledDataset(signals, labels), state


def wave_datasets(coords, sizes, rng):
    """(train, test) for the smooth-wave experiment; phases run on across both sets."""
    state = WaveSignalState()
    train, state = wave_dataset(coords, sizes["train_healthy"], sizes["train_anomalous"], state, rng)
    test, _ = wave_dataset(coords, sizes["test_healthy"], sizes["test_anomalous"], state, rng)
    return train, test


# --- Uniform signals and injected sensor faults ---

def uniform_healthy(n, lo, hi, rng):
    return rng.uniform(lo, hi, size=n)


def _nonzero_means(b_max):
    top = int(np.floor(b_max))
    return np.array([v for v in range(-top, top + 1) if v != 0])


def draw_anomaly(spec, n_nodes, rng):
    """Pick 1..K distinct sensors and a nonzero integer mean in [-b_max, b_max] for each."""
    if spec.max_anomalous_sensors > n_nodes:
        raise ValueError(
            f"max_anomalous_sensors={spec.max_anomalous_sensors} exceeds the {n_nodes} available sensors"
        )
    count = int(rng.integers(1, spec.max_anomalous_sensors + 1))
    sensors = rng.choice(n_nodes, size=count, replace=False)
    means = rng.choice(_nonzero_means(spec.b_max), size=count)
    return sensors, means


def inject_anomaly(x, spec, rng):
    """Additive Gaussian noise N(b, variance) on a random subset of sensors."""
    x = np.asarray(x, dtype=float)
    sensors, means = draw_anomaly(spec, x.shape[0], rng)
    out = x.copy()
    out[sensors] += rng.normal(means, np.sqrt(spec.noise_variance))
    return out


def _faulty_dataset(healthy_rows, n_anomalous, spec, rng):
    """Inject faults into the first n_anomalous rows, then shuffle rows and labels together."""
    signals = np.array(healthy_rows, dtype=float)
    labels = np.zeros(signals.shape[0], dtype=int)
    for i in range(n_anomalous):
        signals[i] = inject_anomaly(signals[i], spec, rng)
        labels[i] = Label.ANOMALOUS
    order = rng.permutation(signals.shape[0])
    return LabeledDataset(signals[order], labels[order])


def uniform_datasets(n_nodes, sizes, spec, rng, lo=-15.0, hi=15.0):
    """(train, test) where healthy signals are i.i.d. Uniform[lo, hi] per sensor."""
    datasets = []
    for prefix in ("train", "test"):
        n_healthy, n_anomalous = sizes[f"{prefix}_healthy"], sizes[f"{prefix}_anomalous"]
        rows = [uniform_healthy(n_nodes, lo, hi, rng) for _ in range(n_healthy + n_anomalous)]
        datasets.append(_faulty_dataset(rows, n_anomalous, spec, rng))
    return tuple(datasets)


def station_datasets(samples, n_samples, spec, rng, sampling="random"):
    """Take n_samples rows, fault half of them, and split each class evenly into train and test.

    `sampling="random"` draws the rows without replacement; `"first"` takes the leading
    rows in time order, so every run sees the same samples and differs only in its faults.
    """
    if sampling not in SAMPLING_MODES:
        raise ValueError(f"Unknown sampling mode '{sampling}', expected one of {', '.join(SAMPLING_MODES)}")
    samples = np.asarray(samples, dtype=float)
    available = samples.shape[0]
    if n_samples > available:
        logger.warning(f"Requested {n_samples} station samples but only {available} are available, using all")
        n_samples = available
    if n_samples < 4:
        raise ValueError(f"Need at least 4 station samples to build train and test sets, got {n_samples}")
    if sampling == "first":
        chosen = samples[:n_samples]
    else:
        chosen = samples[rng.choice(available, size=n_samples, replace=False)]
    n_anomalous = n_samples // 2
    pool = _faulty_dataset(chosen, n_anomalous, spec, rng)

    train_idx, test_idx = [], []
    for label in (Label.HEALTHY, Label.ANOMALOUS):
        members = np.flatnonzero(pool.labels == label)
        half = (members.shape[0] + 1) // 2
        train_idx.extend(members[:half])
        test_idx.extend(members[half:])
    return pool.subset(np.sort(train_idx)), pool.subset(np.sort(test_idx))


# --- Station CSV ---

def _parse_header(lines, path):
    if not lines or not lines[0].startswith("#unit="):
        raise StationFormatError(f"Malformed header in {path}: first line must be '#unit=F' or '#unit=C'")
    unit = lines[0].strip()[len("#unit="):]
    if unit not in ("F", "C"):
        raise StationFormatError(f"Malformed header in {path}: unknown unit '{unit}'")
    if len(lines) < 2 or lines[1].strip() != "#station,lat,lon":
        raise StationFormatError(f"Malformed header in {path}: second line must be '#station,lat,lon'")

    ids, coords = [], []
    row = 2
    while row < len(lines) and lines[row].startswith("@"):
        parts = lines[row].strip()[1:].split(",")
        if len(parts) != 3:
            raise StationFormatError(f"Malformed station line {row + 1} in {path}: '{lines[row].strip()}'")
        try:
            coords.append((float(parts[1]), float(parts[2])))
        except ValueError:
            raise StationFormatError(f"Non-numeric station coordinate on line {row + 1} in {path}")
        ids.append(parts[0])
        row += 1
    if not ids:
        raise StationFormatError(f"Malformed header in {path}: no '@id,lat,lon' station lines")
    return unit, ids, np.array(coords), row


def ingest_station_csv(path, bbox=None):
    """Read a station CSV into degrees-Celsius (or native-unit) samples.

    `bbox` is (lat_min, lat_max, lon_min, lon_max) in degrees, west longitudes negative.
    Rows with a missing value at any selected station are dropped.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    unit, ids, coords, data_start = _parse_header(lines, path)

    width = 1 + len(ids)
    for number, line in enumerate(lines[data_start:], start=data_start + 1):
        if line.strip() and line.count(",") + 1 != width:
            raise StationFormatError(
                f"Malformed row on line {number} in {path}: expected {width} cells, got {line.count(',') + 1}"
            )
    body = "\n".join(line for line in lines[data_start:] if line.strip())
    frame = pd.read_csv(
        io.StringIO(body), header=None, names=["date", *ids], index_col=False, dtype=str, keep_default_na=False
    ) if body else pd.DataFrame(columns=["date", *ids])

    selected = np.ones(len(ids), dtype=bool)
    if bbox is not None:
        lat_min, lat_max, lon_min, lon_max = bbox
        selected = (
            (coords[:, 0] >= lat_min) & (coords[:, 0] <= lat_max)
            & (coords[:, 1] >= lon_min) & (coords[:, 1] <= lon_max)
        )
    if not selected.any():
        raise StationFormatError(f"empty result: no station of {path} lies inside the bounding box")
    kept_ids = [sid for sid, keep in zip(ids, selected) if keep]

    values = frame[kept_ids].replace("", np.nan)
    try:
        values = values.apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as exc:
        raise StationFormatError(f"Non-numeric cell in {path}: {exc}")
    complete = values.notna().all(axis=1).to_numpy()
    dropped = int((~complete).sum())
    if dropped:
        logger.warning(f"Dropped {dropped} rows with missing values from {path}")
    samples = values.to_numpy(dtype=float)[complete]
    if samples.shape[0] == 0:
        raise StationFormatError(f"empty result: no complete rows left in {path}")
    if unit == "F":
        samples = (samples - 32.0) * 5.0 / 9.0

    return StationSeries(
        station_ids=tuple(kept_ids),
        coords=coords[selected],
        dates=tuple(frame["date"].to_numpy()[complete]),
        samples=samples,
        unit="C" if unit == "F" else unit,
    )


def write_station_csv(series, path, unit="C"):
    """Write `series` in the station CSV format; missing values (NaN) become empty cells."""
    lines = [f"#unit={unit}", "#station,lat,lon"]
    for sid, (lat, lon) in zip(series.station_ids, series.coords):
        lines.append(f"@{sid},{float(lat)!r},{float(lon)!r}")
    for date, row in zip(series.dates, series.samples):
        cells = ["" if np.isnan(v) else repr(float(v)) for v in row]
        lines.append(",".join([str(date), *cells]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
