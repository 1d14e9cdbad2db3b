from .channel_types import *
from ..audio_core import AudioBuffer, CANONICAL_RATE, load_wav, resample
from ..utils.signal_math import power, rms, tile_to_length
import logging
import numpy as np
from scipy import fft
from scipy import signal

logger = logging.getLogger('pywmbench.channel.noise')

NOISE_RMS = 0.1
BABBLE_STREAMS = 6
BABBLE_BAND = (300.0, 3400.0)


def _normalize(x: np.ndarray) -> np.ndarray:
    level = rms(x)
    if level == 0:
        return x
    return x * (NOISE_RMS / level)


def _white(rng: np.random.Generator, length: int) -> np.ndarray:
    x = rng.standard_normal(length)
    return x - x.mean()


def _pink(rng: np.random.Generator, length: int) -> np.ndarray:
    # amplitude ~ f^(-1/2), i.e. power falls by 3 dB per octave
    spectrum = fft.rfft(rng.standard_normal(length))
    freqs = np.arange(len(spectrum), dtype=np.float64)
    shaping = np.zeros(len(spectrum))
    shaping[1:] = 1.0 / np.sqrt(freqs[1:])
    return fft.irfft(spectrum * shaping, n=length)


def _babble(seed: int, length: int, sample_rate: int) -> np.ndarray:
    streams = [_pink(np.random.default_rng(child), length)
               for child in np.random.SeedSequence(seed).spawn(BABBLE_STREAMS)]
    mixture = np.sum([_normalize(s) for s in streams], axis=0)
    high = min(BABBLE_BAND[1], 0.45 * sample_rate)
    sos = signal.butter(4, [BABBLE_BAND[0], high], btype='bandpass', fs=sample_rate, output='sos')
    return signal.sosfilt(sos, mixture)


def make_noise(kind: NoiseKind, length: int, sample_rate: int = CANONICAL_RATE, seed: int = 0) -> AudioBuffer:
    """
    Seeded stationary noise with RMS 0.1.

    white: zero-mean Gaussian. pink: white noise shaped to -3 dB/octave in the frequency domain.
    babble_proxy: sum of 6 independently seeded pink streams through a 300-3400 Hz bandpass, a
    speech-shaped stand-in for crowd noise.
    """
    kind = NoiseKind(kind)
    if length <= 0:
        raise ValueError(f"Noise length must be positive but is {length}.")
    if kind == NoiseKind.white:
        samples = _white(np.random.default_rng(seed), length)
    elif kind == NoiseKind.pink:
        samples = _pink(np.random.default_rng(seed), length)
    else:
        samples = _babble(seed, length, sample_rate)
    return AudioBuffer(_normalize(samples), sample_rate)


def load_noise_excerpt(path, length: int, sample_rate: int, rng: np.random.Generator) -> AudioBuffer:
    """A random excerpt of a noise recording, tiled if the recording is too short."""
    noise = load_wav(path)
    if noise.sample_rate != sample_rate:
        noise = resample(noise, sample_rate)
    offset = int(rng.integers(0, len(noise)))
    rolled = np.roll(noise.samples, -offset)
    return AudioBuffer(tile_to_length(rolled, length), sample_rate)


def add_noise_at_snr(buf: AudioBuffer, noise: AudioBuffer, snr_db: float) -> AudioBuffer:
    """
    Mixes noise scaled so that 10*log10(P_signal / P_noise) equals snr_db over the full length. Noise
    longer than the signal is trimmed, shorter noise is tiled.
    """
    buf.require_samples(1)
    signal_power = power(buf.samples)
    if signal_power == 0:
        raise SnrUndefinedException("Can't mix noise at a given SNR into an all-zero signal.")
    noise_samples = tile_to_length(noise.samples, len(buf))
    noise_power = power(noise_samples)
    if noise_power == 0:
        raise SnrUndefinedException("Can't scale all-zero noise to a given SNR.")
    scale = np.sqrt(signal_power / (noise_power * 10.0 ** (snr_db / 10.0)))
    logger.debug(f"Mixing noise at {snr_db:.2f} dB SNR (scale {scale:.4g}).")
    return buf.with_samples(buf.samples + scale * noise_samples)
