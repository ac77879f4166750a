"""Evaluation harness: MSE reports, true-vs-predicted scatter export, and the
four named experiments (fine sweep, coarse sweep, interpolation, multi-band
model comparison).
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import dataset as ds
from .audio import DEFAULT_SAMPLE_RATE, note_corpus
from .eq import BAND_NAMES
from .models import (TrainConfig, predict, train_forest, train_linear, train_mlp)

# Default note for the reproduction runs: low fundamental with enough partials
# that every EQ band overlaps real signal energy, so all five gains are
# observable in the features.
REPRODUCTION_PITCH = "C2"
REPRODUCTION_PARTIALS = 300


def reproduction_corpus(sample_rate: int = DEFAULT_SAMPLE_RATE):
    return note_corpus([REPRODUCTION_PITCH], sample_rate,
                       partial_count=REPRODUCTION_PARTIALS)


@dataclass(frozen=True)
class EvalReport:
    experiment_id: str
    model_kind: str
    overall_mse: float
    per_band_mse: np.ndarray
    n_samples: int
    seed: int
    config_digest: str = ""


@dataclass(frozen=True)
class ExperimentResult:
    report: EvalReport
    sample_ids: list
    predictions: np.ndarray
    targets: np.ndarray


def mse(predictions: np.ndarray, targets: np.ndarray):
    """(overall, per_band): mean squared error over (sample, band) pairs."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ValueError("prediction/target shape mismatch")
    if predictions.size == 0:
        raise ValueError("empty prediction set")
    sq = (predictions - targets) ** 2
    per_band = sq.mean(axis=0)
    return float(sq.mean()), per_band


def make_report(experiment_id, model_kind, predictions, targets, seed,
                config: dict | None = None) -> EvalReport:
    overall, per_band = mse(predictions, targets)
    digest = ""
    if config is not None:
        digest = hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()
        ).hexdigest()[:16]
    return EvalReport(experiment_id, model_kind, overall, per_band,
                      len(predictions), seed, digest)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "experiment_id": report.experiment_id,
        "model_kind": report.model_kind,
        "overall_mse": report.overall_mse,
        "per_band_mse": list(report.per_band_mse),
        "n_samples": report.n_samples,
        "seed": report.seed,
        "config_digest": report.config_digest,
    }


def save_report(report: EvalReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def scatter_export(sample_ids, predictions, targets, path) -> None:
    """One CSV row per (sample, band): sample_id, band_name, true_db, predicted_db."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if not (len(sample_ids) == len(predictions) == len(targets)):
        raise ValueError("length mismatch")
    with open(path, "w") as fh:
        fh.write("sample_id,band_name,true_db,predicted_db\n")
        for sid, pred, true in zip(sample_ids, predictions, targets):
            for band, name in enumerate(BAND_NAMES):
                fh.write(f"{sid},{name},{float(true[band])!r},{float(pred[band])!r}\n")


def scatter_import(path):
    """Parse a scatter CSV back to (sample_ids, predictions, targets)."""
    ids, preds, trues = [], {}, {}
    with open(path) as fh:
        next(fh)
        for line in fh:
            sid, name, true_db, pred_db = line.rstrip("\n").split(",")
            if sid not in preds:
                ids.append(sid)
                preds[sid] = [0.0] * 5
                trues[sid] = [0.0] * 5
            band = BAND_NAMES.index(name)
            preds[sid][band] = float(pred_db)
            trues[sid][band] = float(true_db)
    return ids, np.array([preds[i] for i in ids]), np.array([trues[i] for i in ids])


def _evaluate_split(manifest, model, test_idx, experiment_id, kind, seed, config):
    x = manifest.feature_matrix()[test_idx]
    y = manifest.target_matrix()[test_idx]
    preds = predict(model, x)
    report = make_report(experiment_id, kind, preds, y, seed, config)
    ids = [manifest.samples[i].sample_id for i in test_idx]
    return ExperimentResult(report, ids, preds, y)


def _single_band_experiment(corpus, grid, experiment_id, seed,
                            stft=None) -> ExperimentResult:
    stft = ds.StftConfig() if stft is None else stft
    manifest = ds.build_dataset(corpus, ds.single_band_settings(grid), stft=stft, seed=seed)
    train_idx, test_idx = ds.split(manifest, 0.8, seed)
    model = train_linear(manifest.feature_matrix()[train_idx],
                         manifest.target_matrix()[train_idx])
    config = {"grid": list(np.asarray(grid, dtype=float)), "train_fraction": 0.8}
    return _evaluate_split(manifest, model, test_idx, experiment_id, "linear", seed, config)


def experiment_single_band_fine(corpus, seed: int = 42) -> ExperimentResult:
    """1 dB single-band sweep, linear regression, 80/20 held-out MSE."""
    return _single_band_experiment(corpus, ds.FINE_GRID, "single_band_fine", seed)


def experiment_single_band_coarse(corpus, seed: int = 42) -> ExperimentResult:
    """4 dB single-band sweep; smaller train set degrades the held-out MSE."""
    return _single_band_experiment(corpus, ds.COARSE_GRID, "single_band_coarse", seed)


def experiment_interpolation(corpus, seed: int = 42) -> ExperimentResult:
    """Train on the 4 dB grid points of the 1 dB sweep, validate in between."""
    manifest = ds.build_dataset(corpus, ds.single_band_settings(ds.FINE_GRID), seed=seed)
    train_idx, val_idx = ds.interpolation_split(manifest, ds.COARSE_GRID)
    model = train_linear(manifest.feature_matrix()[train_idx],
                         manifest.target_matrix()[train_idx])
    config = {"coarse_grid": list(ds.COARSE_GRID)}
    return _evaluate_split(manifest, model, val_idx, "interpolation", "linear", seed, config)


def experiment_multi_band(corpus, limit: int = 3000, seed: int = 42,
                          train_config: TrainConfig | None = None,
                          tree_count: int = 50, jobs: int = 1):
    """Multi-band 4 dB grid comparison: linear vs forest vs MLP on one shared
    80/20 split. Returns results in that order."""
    if limit is not None and limit < 500:
        raise ValueError("multi-band experiment needs limit >= 500")
    manifest = ds.build_dataset(corpus, ds.multi_band_settings(ds.COARSE_GRID),
                                limit=limit, seed=seed, jobs=jobs)
    train_idx, test_idx = ds.split(manifest, 0.8, seed)
    x_train = manifest.feature_matrix()[train_idx]
    y_train = manifest.target_matrix()[train_idx]
    cfg = train_config or TrainConfig(seed=seed)
    config = {"limit": limit, "hidden_dim": cfg.hidden_dim, "epochs": cfg.epochs,
              "tree_count": tree_count}

    results = []
    for kind, model in (
        ("linear", train_linear(x_train, y_train)),
        ("forest", train_forest(x_train, y_train, tree_count=tree_count, seed=seed)),
        ("mlp", train_mlp(x_train, y_train, cfg)),
    ):
        results.append(
            _evaluate_split(manifest, model, test_idx, "multi_band", kind, seed, config)
        )
    return results
