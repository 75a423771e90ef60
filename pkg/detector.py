"""Spectral anomaly detector: threshold training on healthy signals, classification,
F1 scoring, and grid search with stratified k-fold cross-validation."""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import StratifiedKFold

from config import DEFAULT_FOLDS
from models import ConfusionCounts, DetectorError, DetectorModel, Label
from spectral import gft_batch, relative_cut

logger = logging.getLogger(__name__)


def partial_thresholds(basis, signals, lambda_cut):
    """tau_p per signal: the largest |coefficient| above lambda_cut (0 when nothing passes)."""
    coeffs = np.abs(gft_batch(basis, np.atleast_2d(signals)))
    return np.max(coeffs[:, basis.eigenvalues > lambda_cut], axis=1, initial=0.0)


def fit_threshold(basis, healthy, lambda_cut, beta):
    """tau = mean(tau_p) + beta * std(tau_p), population standard deviation."""
    healthy = np.asarray(healthy, dtype=float)
    if healthy.size == 0:
        raise DetectorError("Cannot fit a threshold on an empty healthy set.")
    tau_p = partial_thresholds(basis, healthy, lambda_cut)
    tau = tau_p.mean() + beta * tau_p.std()
    return DetectorModel(basis=basis, lambda_cut=lambda_cut, beta=beta, tau=float(tau))


def detection_statistic(model, x):
    """Largest |coefficient| of x above the model's lambda_cut."""
    return float(partial_thresholds(model.basis, x, model.lambda_cut)[0])


def classify(model, x):
    """Anomalous iff the largest filtered |coefficient| exceeds tau (strictly)."""
    if detection_statistic(model, x) > model.tau:
        return Label.ANOMALOUS
    return Label.HEALTHY


def predict(model, signals):
    """Vectorised classify over the rows of `signals`; returns 0/1 labels."""
    stats = partial_thresholds(model.basis, signals, model.lambda_cut)
    return (stats > model.tau).astype(int)


def confusion_counts(y_true, y_pred):
    """TP, FP, FN and TN with anomalous as the positive class."""
    tn, fp, fn, tp = confusion_matrix(y_true, y_pred, labels=[Label.HEALTHY, Label.ANOMALOUS]).ravel()
    return ConfusionCounts(tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn))


def _f1(tp, fp, fn):
    tp, fp, fn = (np.asarray(v, dtype=float) for v in (tp, fp, fn))
    denominator = 2 * tp + fp + fn
    return np.divide(2 * tp, denominator, out=np.zeros_like(denominator), where=denominator > 0)


def f1_score(counts):
    """F1 = 2TP / (2TP + FP + FN); 0 when the denominator is 0."""
    return float(_f1(counts.tp, counts.fp, counts.fn))


def evaluate(model, dataset):
    """Confusion counts of the model's predictions on a labeled dataset."""
    return confusion_counts(dataset.labels, predict(model, dataset.signals))


# --- Grid search ---

@dataclass(frozen=True)
class GridPoint:
    lambda_cut_q: float
    beta: float
    structure: dict
    mean_cv_f1: float


@dataclass
class GridSearchResult:
    """Outcome of grid_search_cv.

    `scores` has shape (len(quantiles), len(betas), len(structures)), which is also
    the tie-break order: lambda_cut outer, then beta, then the structure points.
    """
    best: GridPoint
    model: DetectorModel
    scores: np.ndarray
    quantiles: tuple
    betas: tuple
    structures: list
    skipped_folds: list = field(default_factory=list)

    def best_point(self, structure_indices=None):
        """Best point restricted to a subset of structure indices (lattice order kept)."""
        if structure_indices is None:
            structure_indices = range(len(self.structures))
        structure_indices = list(structure_indices)
        sub = self.scores[:, :, structure_indices]
        q_idx, b_idx, s_pos = np.unravel_index(int(np.argmax(sub)), sub.shape)
        return GridPoint(
            lambda_cut_q=self.quantiles[q_idx],
            beta=self.betas[b_idx],
            structure=dict(self.structures[structure_indices[s_pos]]),
            mean_cv_f1=float(sub[q_idx, b_idx, s_pos]),
        )

    def table(self, gso_kind=""):
        """One row per lattice point, in lattice order."""
        nq, nb, ns = self.scores.shape
        frame = pd.DataFrame({
            "gso_kind": gso_kind,
            "lambda_cut_q": np.repeat(self.quantiles, nb * ns),
            "beta": np.tile(np.repeat(self.betas, ns), nq),
        })
        for key in ("m", "n", "t", "rho", "max_hops"):
            values = [point.get(key, np.nan) for point in self.structures]
            frame[key] = np.tile(values, nq * nb)
        frame["mean_cv_f1"] = self.scores.ravel()
        return frame


def _fold_plan(labels, folds, seed):
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    plan, skipped = [], []
    for fold, (train_idx, held_idx) in enumerate(splitter.split(np.zeros(len(labels)), labels)):
        fit_idx = train_idx[labels[train_idx] == Label.HEALTHY]
        if fit_idx.size == 0:
            logger.warning(f"CV fold {fold} has no healthy training signals, skipping it")
            skipped.append(fold)
            continue
        plan.append((fit_idx, held_idx, labels[held_idx] == Label.ANOMALOUS))
    return plan, skipped


def _cv_f1(stats, plan, betas):
    """Mean held-out F1 across folds for every beta at once."""
    total = np.zeros(len(betas))
    for fit_idx, held_idx, anomalous in plan:
        tau_p = stats[fit_idx]
        tau = tau_p.mean() + betas * tau_p.std()
        flagged = stats[held_idx][:, None] > tau[None, :]
        truth = anomalous[:, None]
        tp = np.sum(flagged & truth, axis=0)
        fp = np.sum(flagged & ~truth, axis=0)
        fn = np.sum(~flagged & truth, axis=0)
        total += _f1(tp, fp, fn)
    return total / len(plan)


def grid_search_cv(basis_factory, train, structures, lambda_cut_quantiles, betas,
                   folds=DEFAULT_FOLDS, seed=0):
    """Select (lambda_cut, beta, structure) by mean CV F1 and refit tau on all healthy signals.

    `basis_factory(point)` returns the SpectralBasis for one structure point
    (e.g. {"rho": 0.4, "m": 0.5, "n": 1.0, "t": 1}); lambda_cut values are
    relative positions in that basis' eigenvalue range.
    """
    labels = np.asarray(train.labels)
    if folds < 2:
        raise DetectorError(f"Cross-validation needs at least 2 folds, got {folds}.")
    if not (np.any(labels == Label.HEALTHY) and np.any(labels == Label.ANOMALOUS)):
        raise DetectorError("Training set must contain both healthy and anomalous signals.")
    if not structures:
        raise DetectorError("Empty hyperparameter lattice.")

    plan, skipped = _fold_plan(labels, folds, seed)
    if not plan:
        raise DetectorError("All cross-validation folds were skipped (no healthy training signals).")

    quantiles = tuple(lambda_cut_quantiles)
    betas = tuple(betas)
    beta_array = np.asarray(betas, dtype=float)
    scores = np.empty((len(quantiles), len(betas), len(structures)))
    for s_idx, point in enumerate(structures):
        basis = basis_factory(point)
        coeffs = np.abs(gft_batch(basis, train.signals))
        for q_idx, quantile in enumerate(quantiles):
            keep = basis.eigenvalues > relative_cut(basis, quantile)
            stats = np.max(coeffs[:, keep], axis=1, initial=0.0)
            scores[q_idx, :, s_idx] = _cv_f1(stats, plan, beta_array)

    result = GridSearchResult(
        best=None, model=None, scores=scores, quantiles=quantiles, betas=betas,
        structures=list(structures), skipped_folds=skipped,
    )
    result.best = result.best_point()
    result.model = refit(basis_factory, train, result.best)
    logger.debug(
        f"Grid search over {scores.size} points picked {result.best.structure} "
        f"q={result.best.lambda_cut_q} beta={result.best.beta} (CV F1 {result.best.mean_cv_f1:.4f})"
    )
    return result


def refit(basis_factory, train, point):
    """Fit tau for a selected point on every healthy training signal."""
    basis = basis_factory(point.structure)
    return fit_threshold(basis, train.healthy, relative_cut(basis, point.lambda_cut_q), point.beta)
