from .channel_types import *
from ..audio_core import AudioBuffer, FrameSpec, padded_stft, istft, unpad, resample, Spectrogram
from ..utils.signal_math import fix_length
from dataclasses import dataclass
import logging
import numpy as np

logger = logging.getLogger('pywmbench.channel.distortions')

CODEC_FRAME_SPEC = FrameSpec(1024, 256, "hann")


def resample_chain(buf: AudioBuffer, intermediate_rate: int) -> AudioBuffer:
    """Down/up (or up/down) through intermediate_rate and back, trimmed or padded to the input length."""
    there = resample(buf, intermediate_rate)
    back = resample(there, buf.sample_rate)
    if abs(len(back) - len(buf)) > 2:
        logger.warning(f"Resampling chain through {intermediate_rate} Hz changed the length by "
                       f"{len(back) - len(buf)} samples.")
    return buf.with_samples(fix_length(back.samples, len(buf)))


@dataclass(frozen=True)
class CodecParameters:
    cutoff_hz: float
    keep_fraction: float
    step_db: float

    @staticmethod
    def for_bitrate(bitrate_kbps: float) -> 'CodecParameters':
        """linear in bitrate between 64 kbps (coarsest) and 192 kbps (finest)"""
        if not BITRATE_LIMITS[0] <= bitrate_kbps <= BITRATE_LIMITS[1]:
            raise ValueError(f"Bitrate must be in [{BITRATE_LIMITS[0]}, {BITRATE_LIMITS[1]}] kbps but is "
                             f"{bitrate_kbps}.")
        position = (bitrate_kbps - 64.0) / 128.0
        return CodecParameters(cutoff_hz=4000.0 + position * 3500.0,
                               keep_fraction=0.3 + 0.5 * position,
                               step_db=2.0 - 1.25 * position)


def codec_proxy(buf: AudioBuffer, bitrate_kbps: float, seed: int = 0, dither: bool = False) -> AudioBuffer:
    """
    Perceptual codec stand-in: lowpass, per-frame sparsification to the K strongest bins and log-magnitude
    quantization, phases untouched. K, cutoff and step follow CodecParameters.for_bitrate.

    :param seed: seeds the quantization dither
    :param dither: add uniform dither of +- half a step before quantizing
    """
    params = CodecParameters.for_bitrate(bitrate_kbps)
    buf.require_samples(1)
    spec = CODEC_FRAME_SPEC
    spg = padded_stft(buf, spec)
    magnitude = spg.magnitude()
    phase = np.angle(spg.frames)

    freqs = np.arange(spec.num_bins) * buf.sample_rate / spec.frame_len
    magnitude[:, freqs > params.cutoff_hz] = 0.0

    keep = int(round(spec.num_bins * params.keep_fraction))
    # stable sort: among equal magnitudes the lower bin survives
    order = np.argsort(-magnitude, axis=1, kind='stable')
    sparse = np.zeros_like(magnitude)
    rows = np.arange(magnitude.shape[0])[:, None]
    sparse[rows, order[:, :keep]] = magnitude[rows, order[:, :keep]]

    nonzero = sparse > 0
    level_db = 20.0 * np.log10(sparse[nonzero])
    if dither:
        level_db += np.random.default_rng(seed).uniform(-0.5, 0.5, size=level_db.shape) * params.step_db
    sparse[nonzero] = 10.0 ** (params.step_db * np.round(level_db / params.step_db) / 20.0)

    coded = istft(Spectrogram(sparse * np.exp(1j * phase), spec, buf.sample_rate))
    out = unpad(coded.samples, spec, len(buf))
    peak = np.max(np.abs(buf.samples))
    out = np.clip(out, -2.0 * peak, 2.0 * peak)
    logger.debug(f"Codec proxy at {bitrate_kbps} kbps: cutoff {params.cutoff_hz:.0f} Hz, keep {keep} bins, "
                 f"step {params.step_db:.3f} dB.")
    return buf.with_samples(out)
