from .audio_types import *
from .transforms import stft
import logging
import numpy as np
from scipy import fft

logger = logging.getLogger('pywmbench.audio_core.features')

LOG_FLOOR = 1e-10


def hz_to_mel(freq):
    return 2595.0 * np.log10(1.0 + np.asarray(freq, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, spec: FrameSpec, sample_rate: int) -> np.ndarray:
    """
    Triangular filters [n_mels x num_bins] spaced equally on the mel scale from 0 Hz to Nyquist.
    Every row sums to 1. A filter narrower than the bin spacing collapses onto the bin nearest to
    its center.
    """
    num_bins = spec.num_bins
    if n_mels < 1 or n_mels > num_bins:
        raise ValueError(f"n_mels must be in [1, {num_bins}] for frame length {spec.frame_len} but is {n_mels}.")

    bin_freqs = np.arange(num_bins) * sample_rate / spec.frame_len
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    fb = np.zeros((n_mels, num_bins))
    for m in range(n_mels):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        fb[m] = np.maximum(0.0, np.minimum(rising, falling))
        total = fb[m].sum()
        if total > 0:
            fb[m] /= total
        else:
            fb[m, int(np.argmin(np.abs(bin_freqs - center)))] = 1.0
    return fb


def log_mel(spg: Spectrogram, n_mels: int = 40) -> FeatureMatrix:
    """natural log of mel-filtered power, floored at 1e-10"""
    fb = mel_filterbank(n_mels, spg.spec, spg.sample_rate)
    power = np.abs(spg.frames) ** 2
    rows = np.log(power @ fb.T + LOG_FLOOR)
    return FeatureMatrix(rows, FeatureKind.log_mel, spg.spec, spg.sample_rate)


def mfcc(features: FeatureMatrix, n_coeffs: int = 13) -> FeatureMatrix:
    """
    Orthonormal DCT-II of log-mel rows keeping coefficients 1..n_coeffs. Coefficient 0 (overall
    loudness) is dropped.
    """
    if features.kind != FeatureKind.log_mel:
        raise ValueError(f"MFCCs are computed from log-mel features, got {features.kind.value}.")
    if n_coeffs < 1 or n_coeffs >= features.dim:
        raise ValueError(f"n_coeffs must be in [1, {features.dim - 1}] for {features.dim} mel bands "
                         f"but is {n_coeffs}.")
    cepstra = fft.dct(features.rows, type=2, norm='ortho', axis=1)
    return FeatureMatrix(cepstra[:, 1:n_coeffs + 1], FeatureKind.mfcc, features.spec, features.sample_rate)


def compute_mfcc(buf: AudioBuffer, spec: FrameSpec, n_mels: int = 40, n_coeffs: int = 13) -> FeatureMatrix:
    return mfcc(log_mel(stft(buf, spec), n_mels), n_coeffs)
