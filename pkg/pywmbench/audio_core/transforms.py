from .audio_types import *
import logging
import math
import numpy as np
from scipy import fft
from scipy import signal

from ..utils.signal_math import fix_length

logger = logging.getLogger('pywmbench.audio_core.transforms')

KAISER_BETA = 8.6
# one-sided filter length, counted in samples of the lower of the two rates
TAPS_PER_SIDE = 64


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """
    Polyphase resampling with a Kaiser-windowed sinc (beta 8.6, 64 taps per side at the lower rate).
    Output length is round(len * target / source).
    """
    target_rate = int(target_rate)
    if target_rate <= 0:
        raise ValueError(f"Target rate must be positive but got {target_rate}.")
    if target_rate == buf.sample_rate:
        return AudioBuffer(buf.samples.copy(), buf.sample_rate)

    g = math.gcd(target_rate, buf.sample_rate)
    up = target_rate // g
    down = buf.sample_rate // g
    max_rate = max(up, down)
    half_len = TAPS_PER_SIDE * max_rate
    h = signal.firwin(2 * half_len + 1, 1.0 / max_rate, window=('kaiser', KAISER_BETA))
    out = signal.resample_poly(buf.samples, up, down, window=h)

    out_len = int(round(len(buf) * target_rate / buf.sample_rate))
    out = fix_length(out, out_len)
    logger.debug(f"Resampled {len(buf)} samples from {buf.sample_rate} Hz to {out_len} samples at "
                 f"{target_rate} Hz (up={up}, down={down}).")
    return AudioBuffer(out, target_rate)


def to_canonical_rate(buf: AudioBuffer) -> AudioBuffer:
    if buf.sample_rate == CANONICAL_RATE:
        return buf
    logger.info(f"Resampling input from {buf.sample_rate} Hz to the canonical {CANONICAL_RATE} Hz.")
    return resample(buf, CANONICAL_RATE)


def frame_signal(samples: np.ndarray, spec: FrameSpec) -> np.ndarray:
    """
    Unpadded framing, [num_frames x frame_len]. Inputs shorter than one frame are zero-padded to one frame.
    """
    if len(samples) < spec.frame_len:
        samples = np.concatenate([samples, np.zeros(spec.frame_len - len(samples))])
    view = np.lib.stride_tricks.sliding_window_view(samples, spec.frame_len)
    return view[::spec.hop]


def stft(buf: AudioBuffer, spec: FrameSpec) -> Spectrogram:
    buf.require_samples(1)
    frames = frame_signal(buf.samples, spec) * spec.window_values()
    return Spectrogram(fft.rfft(frames, axis=1), spec, buf.sample_rate)


def overlap_add(frames: np.ndarray, spec: FrameSpec, weights: np.ndarray, floor: float = None) -> np.ndarray:
    """
    Adds time-domain frames at hop spacing and divides by the overlapped sum of `weights`.

    With `floor` None the division is exact wherever the weight sum is non-zero (the least-squares
    inverse of the windowed STFT). With a floor, weight sums below floor * max are replaced by that
    value so that barely covered edge samples stay bounded.
    """
    num_frames = frames.shape[0]
    length = (num_frames - 1) * spec.hop + spec.frame_len
    acc = np.zeros(length)
    norm = np.zeros(length)
    for idx in range(num_frames):
        start = idx * spec.hop
        acc[start:start + spec.frame_len] += frames[idx]
        norm[start:start + spec.frame_len] += weights
    if floor is None:
        out = np.zeros(length)
        nonzero = norm > 0
        out[nonzero] = acc[nonzero] / norm[nonzero]
        return out
    return acc / np.maximum(norm, floor * norm.max())


def istft(spg: Spectrogram, exact: bool = False) -> AudioBuffer:
    """
    Weighted overlap-add inverse of stft. Reconstruction is exact over the region covered by
    frame_len / hop windows; the first and last frame_len - hop samples are attenuated.

    :param exact: divide by the window power sum without a floor (least-squares inverse, may amplify
                  the barely covered edge samples)
    """
    spec = spg.spec
    if not spec.is_cola():
        raise FrameSpecException(f"Frame spec {spec.to_dict()} does not satisfy the constant-overlap-add "
                                 f"condition (deviation {spec.cola_deviation():.3g}).")
    w = spec.window_values()
    frames = fft.irfft(spg.frames, n=spec.frame_len, axis=1) * w
    samples = overlap_add(frames, spec, w * w, floor=None if exact else 1e-3)
    return AudioBuffer(samples, spg.sample_rate)


def padded_stft(buf: AudioBuffer, spec: FrameSpec) -> Spectrogram:
    """
    stft of the buffer zero-padded by frame_len on both sides, so every input sample is fully
    covered. Invert with istft followed by unpad.
    """
    padded = np.pad(buf.samples, spec.frame_len)
    return stft(AudioBuffer(padded, buf.sample_rate), spec)


def unpad(samples: np.ndarray, spec: FrameSpec, length: int) -> np.ndarray:
    return fix_length(samples[spec.frame_len:], length)


def dct_ii(block: np.ndarray) -> np.ndarray:
    """orthonormal DCT-II"""
    block = np.asarray(block, dtype=np.float64)
    if block.shape[-1] < 2:
        raise ValueError(f"DCT block length must be at least 2 but is {block.shape[-1]}.")
    return fft.dct(block, type=2, norm='ortho', axis=-1)


def idct(coeffs: np.ndarray) -> np.ndarray:
    """inverse of dct_ii"""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[-1] < 2:
        raise ValueError(f"DCT block length must be at least 2 but is {coeffs.shape[-1]}.")
    return fft.idct(coeffs, type=2, norm='ortho', axis=-1)
