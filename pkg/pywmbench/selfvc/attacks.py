from .selfvc_types import *
from .pool import MIN_POOL_SECONDS, build_pool, query_features
from .knn import knn_select, average_neighbours
from ..audio_core import (AudioBuffer, FrameSpec, griffin_lim, mel_filterbank, overlap_add, padded_stft, unpad,
                          to_canonical_rate)
import dataclasses
import logging
import numpy as np

logger = logging.getLogger('pywmbench.selfvc.attacks')

COPY_SYNTHESIS_SPEC = FrameSpec(1024, 256, "hann")
VOCODER_MELS = 80


def self_vc_attack(buf: AudioBuffer, reference: AudioBuffer = None, cfg: SelfVcConfig = None,
                   seed: int = 0) -> AudioBuffer:
    """
    Self voice conversion: every frame of `buf` is replaced by the mean of its k nearest frames in a
    matching pool of the same speaker and the result is resynthesized. The output has the canonical rate
    and the length of the (resampled) input.

    :param reference: pool audio, required in separate_reference mode and ignored otherwise
    :param seed: initial Griffin-Lim phase
    :raises ReferenceException: reference missing or shorter than 1 s
    :raises EmptyCandidateException: exclusion window leaves fewer than k pool frames for a query
    """
    cfg = cfg if cfg is not None else SelfVcConfig()
    buf = to_canonical_rate(buf)
    buf.require_samples(1)
    if not np.any(buf.samples):
        return buf.with_samples(np.zeros(len(buf)))

    spec = cfg.frame_spec
    padded = buf.with_samples(np.pad(buf.samples, spec.frame_len))
    if cfg.pool_mode == PoolMode.separate_reference:
        if reference is None:
            raise ReferenceException("Self-VC in separate_reference mode needs a reference recording of the "
                                     "same speaker.")
        pool = build_pool(reference, cfg, "reference")
    else:
        if buf.duration < MIN_POOL_SECONDS:
            raise ReferenceException(f"Source lasts {buf.duration:.2f} s but at least {MIN_POOL_SECONDS} s are "
                                     f"required to serve as its own matching pool.")
        # query i and pool frame i are the same frame, which the exclusion window relies on
        pool = build_pool(padded, cfg, "source")

    features, source_magnitudes = query_features(padded, pool, cfg)
    if cfg.resynth == Resynthesis.griffin_lim:
        converted = average_neighbours(knn_select(features, pool, cfg), pool.magnitudes)
        if cfg.match_energy:
            converted = match_frame_energy(converted, source_magnitudes)
        out = griffin_lim(converted, spec, cfg.gl_iterations, seed, padded.sample_rate).samples
    else:
        nearest = knn_select(features, pool, dataclasses.replace(cfg, k=1))[:, 0]
        w = spec.window_values()
        out = overlap_add(pool.frames[nearest] * w, spec, w, floor=1e-3)

    logger.info(f"Self-VC converted {features.num_frames} frames against a pool of {pool.size} frames "
                f"({cfg.pool_mode.value}, {cfg.resynth.value}).")
    return buf.with_samples(unpad(out, spec, len(buf)))


def match_frame_energy(converted: np.ndarray, source: np.ndarray) -> np.ndarray:
    """rescales every converted magnitude frame to the energy of the source frame it replaces"""
    target = np.sum(source * source, axis=1)
    current = np.sum(converted * converted, axis=1)
    gain = np.divide(target, current, out=np.zeros_like(current), where=current > 0)
    return converted * np.sqrt(gain)[:, None]


def vocoder_magnitude(magnitude: np.ndarray, spec: FrameSpec, sample_rate: int,
                      representation: Representation) -> np.ndarray:
    """the magnitude a vocoder of the given input representation has available"""
    if representation == Representation.linear:
        return magnitude
    fb = mel_filterbank(VOCODER_MELS, spec, sample_rate)
    mel = magnitude @ fb.T
    return np.maximum(mel @ np.linalg.pinv(fb).T, 0.0)


def copy_synthesis_attack(buf: AudioBuffer, gl_iterations: int = 60, seed: int = 0,
                          representation: Representation = Representation.mel) -> AudioBuffer:
    """
    Vocoder-style resynthesis: |STFT| of the input, Griffin-Lim from a seeded random phase, trimmed to
    the input length. With the default mel representation the magnitude first passes through an 80-band
    mel filterbank and its pseudo-inverse, as a mel vocoder only sees the smoothed envelope. The linear
    representation keeps the full magnitude.
    """
    representation = Representation(representation)
    buf = to_canonical_rate(buf)
    buf.require_samples(1)
    if not np.any(buf.samples):
        return buf.with_samples(np.zeros(len(buf)))

    spec = COPY_SYNTHESIS_SPEC
    magnitude = vocoder_magnitude(padded_stft(buf, spec).magnitude(), spec, buf.sample_rate, representation)
    out = griffin_lim(magnitude, spec, gl_iterations, seed, buf.sample_rate)
    logger.info(f"Copy synthesis ({representation.value}) of {len(buf)} samples with {gl_iterations} iterations.")
    return buf.with_samples(unpad(out.samples, spec, len(buf)))
