"""Labeled dataset construction: gain grids, single-band sweeps, multi-band
Cartesian combinations, EQ application + feature extraction, and a JSON
manifest with optional CSV export.
"""

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer, write_wav
from .eq import BAND_NAMES, EqBandSpec, apply_eq, standard_bands
from .features import FEATURE_NAMES, StftConfig, extract_features

MANIFEST_SCHEMA_VERSION = 1

FINE_GRID = np.arange(-12.0, 13.0, 1.0)          # 25 values, 1 dB steps
COARSE_GRID = np.arange(-12.0, 13.0, 4.0)        # {-12,-8,-4,0,4,8,12}


def validate_grid(values_db) -> np.ndarray:
    grid = np.asarray(values_db, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("gain grid must be nonempty")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("gain grid must be strictly ascending")
    if np.any(np.abs(grid) > 12.0):
        raise ValueError("gain grid values must lie within [-12, +12] dB")
    return grid


def single_band_settings(grid) -> np.ndarray:
    """One band active per setting: band-major, then ascending gain.

    A 25-value grid yields 125 settings (the 0 dB setting repeats per band)."""
    grid = validate_grid(grid)
    settings = np.zeros((5 * grid.size, 5))
    for band in range(5):
        settings[band * grid.size:(band + 1) * grid.size, band] = grid
    return settings


def multi_band_settings(grid) -> np.ndarray:
    """Full Cartesian product grid^5, lexicographic (band 0 slowest)."""
    grid = validate_grid(grid)
    return np.array(list(itertools.product(grid, repeat=5)))


@dataclass(frozen=True)
class DatasetSample:
    sample_id: str
    base_label: str
    gains_db: np.ndarray      # the applied EqSetting, 5 dB values
    features: np.ndarray      # flattened 17-dim FeatureVector


@dataclass(frozen=True)
class DatasetManifest:
    sample_rate: int
    stft: StftConfig
    bands: list
    samples: list
    split_seed: int
    schema_version: int = MANIFEST_SCHEMA_VERSION

    def feature_matrix(self) -> np.ndarray:
        return np.array([s.features for s in self.samples])

    def target_matrix(self) -> np.ndarray:
        return np.array([s.gains_db for s in self.samples])


def build_dataset(corpus, settings, bands=None, stft: StftConfig = StftConfig(),
                  limit=None, seed: int = 42, jobs: int = 1,
                  keep_audio_dir=None) -> DatasetManifest:
    """Apply every (note, setting) pair, extract features, assemble a manifest.

    With `limit`, a uniform random subset of pairs is drawn with `seed`; the
    manifest keeps settings order either way, so output is deterministic."""
    bands = standard_bands() if bands is None else bands
    corpus = list(corpus)
    settings = np.asarray(settings, dtype=np.float64)
    if not corpus:
        raise ValueError("corpus must be nonempty")
    if settings.ndim != 2 or settings.shape[1] != 5:
        raise ValueError("settings must be an (n, 5) array of dB gains")

    total = len(corpus) * len(settings)
    pair_indices = np.arange(total)
    if limit is not None:
        if not 0 < limit <= total:
            raise ValueError(f"limit must be in [1, {total}]")
        rng = np.random.default_rng(seed)
        pair_indices = np.sort(rng.choice(total, size=limit, replace=False))

    def make_sample(pair):
        note_idx, setting_idx = divmod(int(pair), len(settings))
        label, buffer = corpus[note_idx]
        gains = settings[setting_idx]
        processed = apply_eq(buffer, gains, bands)
        features = extract_features(processed, stft).to_array()
        if keep_audio_dir is not None:
            write_wav(processed, f"{keep_audio_dir}/{label}-{setting_idx:05d}.wav")
        return DatasetSample(
            sample_id=f"{label}-{setting_idx:05d}",
            base_label=label,
            gains_db=gains.copy(),
            features=features,
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            samples = list(pool.map(make_sample, pair_indices))
    else:
        samples = [make_sample(pair) for pair in pair_indices]

    sample_rate = corpus[0][1].sample_rate
    return DatasetManifest(sample_rate, stft, list(bands), samples, seed)


def split(manifest: DatasetManifest, train_fraction: float, seed: int):
    """Seeded shuffle; first floor(n * fraction) train, remainder test."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(manifest.samples)
    order = np.random.default_rng(seed).permutation(n)
    cut = int(n * train_fraction)
    train, test = order[:cut], order[cut:]
    if len(train) == 0 or len(test) == 0:
        raise ValueError("split produced an empty side")
    return train, test


def interpolation_split(manifest: DatasetManifest, coarse_grid):
    """Single-band sweep split: samples whose active-band gain sits on the
    coarse grid train; the in-between gains validate. All-zero settings train."""
    coarse = validate_grid(coarse_grid)
    train, validation = [], []
    for i, sample in enumerate(manifest.samples):
        active = sample.gains_db[np.nonzero(sample.gains_db)[0]]
        if active.size > 1:
            raise ValueError("interpolation split requires a single-band sweep manifest")
        gain = float(active[0]) if active.size else 0.0
        if np.any(np.isclose(coarse, gain)):
            train.append(i)
        else:
            validation.append(i)
    if not validation:
        raise ValueError("coarse grid covers the whole sweep; validation set empty")
    return np.array(train), np.array(validation)


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "schema_version": manifest.schema_version,
        "sample_rate": manifest.sample_rate,
        "stft": {"frame_size": manifest.stft.frame_size, "hop_size": manifest.stft.hop_size},
        "bands": [
            {"center_hz": b.center_hz, "filter_kind": b.filter_kind, "q": b.q}
            for b in manifest.bands
        ],
        "split_seed": manifest.split_seed,
        "samples": [
            {
                "sample_id": s.sample_id,
                "base_label": s.base_label,
                "gains_db": list(s.gains_db),
                "features": list(s.features),
            }
            for s in manifest.samples
        ],
    }


def manifest_from_dict(doc: dict) -> DatasetManifest:
    if doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ValueError(f"unsupported manifest schema_version {doc.get('schema_version')}")
    samples = [
        DatasetSample(
            sample_id=s["sample_id"],
            base_label=s["base_label"],
            gains_db=np.array(s["gains_db"], dtype=np.float64),
            features=np.array(s["features"], dtype=np.float64),
        )
        for s in doc["samples"]
    ]
    return DatasetManifest(
        sample_rate=doc["sample_rate"],
        stft=StftConfig(doc["stft"]["frame_size"], doc["stft"]["hop_size"]),
        bands=[
            EqBandSpec(b["center_hz"], b["filter_kind"], b["q"]) for b in doc["bands"]
        ],
        samples=samples,
        split_seed=doc["split_seed"],
    )


def save_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w") as fh:
        json.dump(manifest_to_dict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> DatasetManifest:
    with open(path) as fh:
        return manifest_from_dict(json.load(fh))


def export_csv(manifest: DatasetManifest, path) -> None:
    """Flat per-sample view: id, label, five gains, then the 17 features."""
    gain_cols = [name.lower() for name in BAND_NAMES]
    header = ["sample_id", "base_label"] + gain_cols + FEATURE_NAMES
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for s in manifest.samples:
            row = [s.sample_id, s.base_label]
            row += [repr(float(g)) for g in s.gains_db]
            row += [repr(float(v)) for v in s.features]
            fh.write(",".join(row) + "\n")
