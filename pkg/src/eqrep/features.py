"""Timbral feature extraction: the 17-dimensional vector of file-level means
of spectral centroid, bandwidth, rolloff, MFCCs 0-12, and RMS energy.

Flattened feature order is fixed and models depend on it:
[centroid, bandwidth, rolloff, mfcc0..mfcc12, rms].
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .audio import AudioBuffer

N_MFCC = 13
N_MELS = 40
ROLLOFF_FRACTION = 0.85
LOG_FLOOR = 1e-10

FEATURE_NAMES = (
    ["centroid_hz", "bandwidth_hz", "rolloff_hz"]
    + [f"mfcc_{i}" for i in range(N_MFCC)]
    + ["rms"]
)
FEATURE_DIM = len(FEATURE_NAMES)  # 17


@dataclass(frozen=True)
class StftConfig:
    frame_size: int = 2048
    hop_size: int = 512

    def __post_init__(self):
        if self.frame_size < 2 or self.frame_size & (self.frame_size - 1):
            raise ValueError("frame_size must be a power of two")
        if not 0 < self.hop_size <= self.frame_size:
            raise ValueError("hop_size must be in (0, frame_size]")


@dataclass(frozen=True)
class FeatureVector:
    centroid_hz: float
    bandwidth_hz: float
    rolloff_hz: float
    mfcc_mean: np.ndarray  # coefficients 0..12
    rms: float

    def to_array(self) -> np.ndarray:
        return np.concatenate(
            [[self.centroid_hz, self.bandwidth_hz, self.rolloff_hz],
             np.asarray(self.mfcc_mean, dtype=np.float64), [self.rms]]
        )

    @classmethod
    def from_array(cls, values) -> "FeatureVector":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (FEATURE_DIM,):
            raise ValueError(f"expected {FEATURE_DIM} features")
        return cls(values[0], values[1], values[2], values[3:16].copy(), values[16])


def hann_window(frame_size: int) -> np.ndarray:
    # periodic Hann, the usual STFT analysis window
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(frame_size) / frame_size)


def frame_signal(samples: np.ndarray, config: StftConfig) -> np.ndarray:
    """Frame-major matrix of full frames at hop stride; no padding."""
    n = len(samples)
    if n < config.frame_size:
        raise ValueError("buffer shorter than one frame")
    count = 1 + (n - config.frame_size) // config.hop_size
    idx = np.arange(config.frame_size) + config.hop_size * np.arange(count)[:, None]
    return samples[idx]


def stft_magnitudes(buffer: AudioBuffer, config: StftConfig) -> np.ndarray:
    """Hann-windowed magnitude spectra, frame_size/2 + 1 bins per frame."""
    frames = frame_signal(buffer.samples, config)
    return np.abs(np.fft.rfft(frames * hann_window(config.frame_size), axis=1))


def fft_bin_freqs(frame_size: int, sample_rate: int) -> np.ndarray:
    return np.fft.rfftfreq(frame_size, d=1.0 / sample_rate)


def spectral_centroid(magnitudes: np.ndarray, bin_freqs: np.ndarray) -> np.ndarray:
    """Magnitude-weighted mean frequency per frame; 0 for an all-zero frame."""
    mags = np.atleast_2d(magnitudes)
    total = mags.sum(axis=1)
    out = np.zeros(len(mags))
    nz = total > 0
    out[nz] = (mags[nz] * bin_freqs).sum(axis=1) / total[nz]
    return out if magnitudes.ndim == 2 else out[0]

def spectral_bandwidth(magnitudes: np.ndarray, bin_freqs: np.ndarray,
                       centroid) -> np.ndarray:
    """Magnitude-weighted std of frequency around the centroid (order 2)."""
    mags = np.atleast_2d(magnitudes)
    cents = np.atleast_1d(np.asarray(centroid, dtype=np.float64))
    total = mags.sum(axis=1)
    out = np.zeros(len(mags))
    nz = total > 0
    dev2 = (bin_freqs[None, :] - cents[:, None]) ** 2
    out[nz] = np.sqrt((mags[nz] * dev2[nz]).sum(axis=1) / total[nz])
    return out if magnitudes.ndim == 2 else out[0]


def spectral_rolloff(magnitudes: np.ndarray, bin_freqs: np.ndarray,
                     fraction: float = ROLLOFF_FRACTION) -> np.ndarray:
    """Lowest frequency where cumulative energy reaches fraction * total."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    mags = np.atleast_2d(magnitudes)
    energy = mags ** 2
    cum = np.cumsum(energy, axis=1)
    total = cum[:, -1]
    out = np.zeros(len(mags))
    nz = total > 0
    # first bin whose cumulative energy meets the threshold
    thresh = fraction * total[nz]
    idx = np.argmax(cum[nz] >= thresh[:, None], axis=1)
    out[nz] = bin_freqs[idx]
    return out if magnitudes.ndim == 2 else out[0]


def hz_to_mel(freq_hz):
    return 2595.0 * np.log10(1.0 + np.asarray(freq_hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, frame_size: int, sample_rate: int) -> np.ndarray:
    """Triangular filters, centers uniform on the HTK mel scale over [0, Nyquist],
    each peak-normalized to 1. Shape (n_mels, frame_size/2 + 1)."""
    bin_freqs = fft_bin_freqs(frame_size, sample_rate)
    mel_points = np.linspace(0.0, hz_to_mel(sample_rate / 2), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    weights = np.zeros((n_mels, len(bin_freqs)))
    for m in range(n_mels):
        lo, center, hi = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        up = (bin_freqs - lo) / (center - lo)
        down = (hi - bin_freqs) / (hi - center)
        weights[m] = np.maximum(0.0, np.minimum(up, down))
        if weights[m].max() == 0.0:
            raise ValueError(f"mel filter {m} spans less than one FFT bin")
    return weights


def mel_log_energies(magnitudes: np.ndarray, filterbank: np.ndarray) -> np.ndarray:
    """log(filterbank @ power + floor), frame-major."""
    power = magnitudes ** 2
    return np.log(power @ filterbank.T + LOG_FLOOR)


def mfcc_frames(buffer: AudioBuffer, config: StftConfig, n_mels: int = N_MELS) -> np.ndarray:
    """Per-frame MFCCs 0..12: log mel energies -> orthonormal DCT-II."""
    mags = stft_magnitudes(buffer, config)
    fbank = mel_filterbank(n_mels, config.frame_size, buffer.sample_rate)
    logmel = mel_log_energies(mags, fbank)
    return dct(logmel, type=2, norm="ortho", axis=1)[:, :N_MFCC]


def mfcc_means(buffer: AudioBuffer, config: StftConfig, n_mels: int = N_MELS) -> np.ndarray:
    return mfcc_frames(buffer, config, n_mels).mean(axis=0)


def rms_frames(buffer: AudioBuffer, config: StftConfig) -> np.ndarray:
    """Per-frame RMS of raw (unwindowed) samples."""
    frames = frame_signal(buffer.samples, config)
    return np.sqrt((frames ** 2).mean(axis=1))


def rms_mean(buffer: AudioBuffer, config: StftConfig) -> float:
    return float(rms_frames(buffer, config).mean())


def extract_features(buffer: AudioBuffer, config: StftConfig = StftConfig()) -> FeatureVector:
    """Assemble the 17-dim feature vector of file-level means."""
    mags = stft_magnitudes(buffer, config)
    bin_freqs = fft_bin_freqs(config.frame_size, buffer.sample_rate)
    centroid = spectral_centroid(mags, bin_freqs)
    bandwidth = spectral_bandwidth(mags, bin_freqs, centroid)
    rolloff = spectral_rolloff(mags, bin_freqs)
    fbank = mel_filterbank(N_MELS, config.frame_size, buffer.sample_rate)
    mfcc = dct(mel_log_energies(mags, fbank), type=2, norm="ortho", axis=1)[:, :N_MFCC]
    return FeatureVector(
        centroid_hz=float(centroid.mean()),
        bandwidth_hz=float(bandwidth.mean()),
        rolloff_hz=float(rolloff.mean()),
        mfcc_mean=mfcc.mean(axis=0),
        rms=rms_mean(buffer, config),
    )
