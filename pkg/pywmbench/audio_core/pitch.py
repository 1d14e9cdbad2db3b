from .audio_types import *
from .transforms import frame_signal
import logging
import numpy as np
from scipy import fft

logger = logging.getLogger('pywmbench.audio_core.pitch')

MIN_F0 = 50.0
MAX_F0 = 500.0
VOICING_THRESHOLD = 0.5
SILENCE_RMS = 1e-4
# the smallest lag whose peak reaches this fraction of the best peak wins, which avoids octave errors
PEAK_FRACTION = 0.85


def normalized_autocorrelation(frames: np.ndarray) -> np.ndarray:
    """
    r[t] = sum x[n] x[n+t] / sqrt(E_head(t) E_tail(t)) per frame, where the energies cover the two
    overlapping segments. Zero where a segment has no energy.
    """
    frame_len = frames.shape[1]
    spectrum = fft.rfft(frames, n=2 * frame_len, axis=1)
    acf = fft.irfft(np.abs(spectrum) ** 2, n=2 * frame_len, axis=1)[:, :frame_len]

    energy = np.cumsum(frames ** 2, axis=1)
    total = energy[:, -1:]
    lags = np.arange(frame_len)
    head = energy[:, frame_len - 1 - lags]
    tail = total - np.concatenate([np.zeros((frames.shape[0], 1)), energy[:, :-1]], axis=1)
    denominator = np.sqrt(np.maximum(head * tail, 0.0))
    r = np.zeros_like(acf)
    valid = denominator > 1e-12
    r[valid] = acf[valid] / denominator[valid]
    return r


def estimate_f0(buf: AudioBuffer, spec: FrameSpec) -> PitchTrack:
    """
    Per-frame f0 from the normalized autocorrelation peak in the lag range [sr/500, sr/50]. A frame is
    voiced if the peak exceeds 0.5 and its RMS exceeds 1e-4.
    """
    buf.require_samples(1)
    frames = frame_signal(buf.samples, spec)
    rms = np.sqrt(np.mean(frames ** 2, axis=1))
    frames = frames - frames.mean(axis=1, keepdims=True)
    r = normalized_autocorrelation(frames)

    sr = buf.sample_rate
    min_lag = max(int(np.ceil(sr / MAX_F0)), 2)
    max_lag = min(int(np.floor(sr / MIN_F0)), spec.frame_len - 2)
    f0 = np.zeros(frames.shape[0])
    if max_lag <= min_lag:
        logger.warning(f"Frame length {spec.frame_len} is too short for pitch lags at {sr} Hz. All frames "
                       f"are reported unvoiced.")
        return PitchTrack(f0)

    for idx in range(frames.shape[0]):
        if rms[idx] <= SILENCE_RMS:
            continue
        row = r[idx]
        segment = row[min_lag:max_lag + 1]
        best = segment.max()
        if best <= VOICING_THRESHOLD:
            continue
        lag = None
        for t in range(min_lag, max_lag + 1):
            if row[t] >= PEAK_FRACTION * best and row[t] >= row[t - 1] and row[t] > row[t + 1]:
                lag = t
                break
        if lag is None or row[lag] <= VOICING_THRESHOLD:
            continue
        curvature = row[lag - 1] - 2.0 * row[lag] + row[lag + 1]
        offset = 0.0 if curvature == 0 else 0.5 * (row[lag - 1] - row[lag + 1]) / curvature
        f0[idx] = float(np.clip(sr / (lag + offset), MIN_F0, MAX_F0))

    return PitchTrack(f0)
