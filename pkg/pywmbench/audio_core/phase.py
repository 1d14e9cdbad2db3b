from .audio_types import *
from .transforms import overlap_add, stft, istft
import logging
import numpy as np
from scipy import fft

logger = logging.getLogger('pywmbench.audio_core.phase')


def _bin_weights(num_bins: int, frame_len: int) -> np.ndarray:
    # multiplicity of each one-sided bin in the two-sided spectrum
    weights = np.full(num_bins, 2.0)
    weights[0] = 1.0
    if frame_len % 2 == 0:
        weights[-1] = 1.0
    return weights


def spectral_convergence(estimate: np.ndarray, target: np.ndarray, frame_len: int) -> float:
    """
    ||estimate - target||_F / ||target||_F of two one-sided magnitude spectrograms, evaluated over the
    full two-sided spectrum. Returns 0 for an all-zero target.
    """
    weights = _bin_weights(target.shape[1], frame_len)
    denominator = np.sqrt(np.sum(weights * target ** 2))
    if denominator == 0:
        return 0.0
    return float(np.sqrt(np.sum(weights * (estimate - target) ** 2)) / denominator)


def _project(frames: np.ndarray, spec: FrameSpec) -> np.ndarray:
    # least-squares signal of the given STFT frames, no weight floor
    w = spec.window_values()
    time_frames = fft.irfft(frames, n=spec.frame_len, axis=1) * w
    return overlap_add(time_frames, spec, w * w)


def griffin_lim(magnitude: np.ndarray, spec: FrameSpec, iterations: int = 60, seed: int = 0,
                sample_rate: int = CANONICAL_RATE, callback=None) -> AudioBuffer:
    """
    Iterative phase reconstruction from a magnitude spectrogram.

    The initial phase is drawn uniformly from [0, 2*pi) with numpy's default_rng(seed). Each iteration
    takes the least-squares signal of the current estimate, re-analyses it and keeps its phase with the
    target magnitude, so the spectral convergence never increases.

    :param magnitude: [num_frames x num_bins] target magnitudes
    :param callback: optional callable(iteration, spectral_convergence) invoked once per iteration
    :return: waveform of (num_frames - 1) * hop + frame_len samples
    """
    magnitude = np.asarray(magnitude, dtype=np.float64)
    if magnitude.ndim != 2 or magnitude.shape[1] != spec.num_bins:
        raise DimensionException(f"Magnitude shape {magnitude.shape} does not match {spec.num_bins} bins of "
                                 f"frame spec {spec.to_dict()}.")
    if iterations < 1:
        raise ValueError(f"Griffin-Lim needs at least 1 iteration but got {iterations}.")
    if not spec.is_cola():
        raise FrameSpecException(f"Frame spec {spec.to_dict()} is not COLA and can't be inverted.")

    length = (magnitude.shape[0] - 1) * spec.hop + spec.frame_len
    if not np.any(magnitude):
        return AudioBuffer(np.zeros(length), sample_rate)

    rng = np.random.default_rng(seed)
    estimate = magnitude * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=magnitude.shape))
    for iteration in range(iterations):
        waveform = _project(estimate, spec)
        rebuilt = stft(AudioBuffer(waveform, sample_rate), spec).frames
        sc = spectral_convergence(np.abs(rebuilt), magnitude, spec.frame_len)
        logger.debug(f"Griffin-Lim iteration {iteration}: spectral convergence {sc:.6f}")
        if callback is not None:
            callback(iteration, sc)
        estimate = magnitude * np.exp(1j * np.angle(rebuilt))

    return istft(Spectrogram(estimate, spec, sample_rate))
