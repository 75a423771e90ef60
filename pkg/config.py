# Configuration constants

# Consensus matrix Z = I - eps*L with eps = 1 / (CONSENSUS_STEP_FACTOR * max_degree)
CONSENSUS_STEP_FACTOR = 1.25

# Tolerances
SYMMETRY_TOL = 1e-10
STOCHASTIC_TOL = 1e-12

# Random number generator used by every generator in the package (numpy bit generator name)
RNG_ALGORITHM = "PCG64"

# Attempts at drawing sensor positions before giving up on a connected k-NN graph
MAX_GRAPH_ATTEMPTS = 100

# Hyperparameter lattices
M_GRID = tuple(i / 10 for i in range(11))
N_GRID = tuple(i / 10 for i in range(11))
T_GRID = (1, 2)
RHO_GRID = tuple(i / 10 for i in range(1, 11))
LAMBDA_CUT_QUANTILES = tuple(i / 10 for i in range(1, 10))
BETA_GRID = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
DEFAULT_FOLDS = 5

# Stable GSO identifiers used by CLI flags and result tables
GSO_KINDS = ("gft", "df1", "df2", "sp2", "sp3", "mrk", "uem")

# Experiment presets: dataset sizes and anomaly settings per experiment
EXPERIMENT_PRESETS = {
    "wave": {
        "n_nodes": 30,
        "k": 3,
        "runs": 50,
        "train_healthy": 150,
        "train_anomalous": 150,
        "test_healthy": 150,
        "test_anomalous": 150,
    },
    "uniform": {
        "n_nodes": 30,
        "k": 3,
        "runs": 50,
        "train_healthy": 100,
        "train_anomalous": 100,
        "test_healthy": 100,
        "test_anomalous": 100,
        "low": -15.0,
        "high": 15.0,
        "b_max": 4,
        "noise_variance": 1.0,
        "max_anomalous_sensors": 2,
    },
    "station": {
        "n_nodes": 30,
        "k": 3,
        "runs": 50,
        "n_samples": 350,
        "sampling": "random",
        "b_max": 5,
        "noise_variance": 1.0,
        "max_anomalous_sensors": 5,
        "bbox": (30.0, 49.0, -120.0, -90.0),
    },
    # Monthly sea surface temperatures; every run uses the first 500 months
    "sst": {
        "n_nodes": 30,
        "k": 3,
        "runs": 50,
        "n_samples": 500,
        "sampling": "first",
        "b_max": 4,
        "noise_variance": 0.6,
        "max_anomalous_sensors": 3,
    },
    # Daily PM2.5 means in ug/m3, 220 of the available days per run
    "pm25": {
        "n_nodes": 30,
        "k": 3,
        "runs": 50,
        "n_samples": 220,
        "sampling": "random",
        "b_max": 3,
        "noise_variance": 0.8,
        "max_anomalous_sensors": 2,
    },
}

# Presets that read their signals from a station CSV
STATION_EXPERIMENTS = ("station", "sst", "pm25")

# How a station run picks its samples: a random subset, or the leading rows in file order
SAMPLING_MODES = ("random", "first")

# Figure reproductions
FIG1_SETTINGS = {"n_nodes": 10, "k": 3, "rho": 0.4, "n": 1.0}
SHOWCASE_SETTINGS = {"n_nodes": 50, "k": 3, "rho": 0.3}
SHOWCASE_PAIRS = ((0.0, 0.0), (0.5, 1.0), (1.0, 1.0), (0.3, 0.7), (0.6, 0.6), (0.8, 0.2))

# Float format for CSV artifacts (full precision, round-trips exactly)
CSV_FLOAT_FORMAT = "%.17g"
