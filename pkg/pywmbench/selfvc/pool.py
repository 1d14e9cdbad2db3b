from .selfvc_types import *
from ..audio_core import (AudioBuffer, FeatureMatrix, FeatureKind, stft, log_mel, mfcc, estimate_f0, frame_signal,
                          to_canonical_rate)
import logging
import numpy as np

logger = logging.getLogger('pywmbench.selfvc.pool')

MIN_POOL_SECONDS = 1.0
# log-F0 assigned to unvoiced frames
UNVOICED_LOG_F0 = np.log(50.0)


def raw_features(buf: AudioBuffer, cfg: SelfVcConfig):
    """
    Un-normalized matching features and STFT magnitudes of buf. MFCCs, plus a log-F0 column when
    pitch matching is enabled.
    """
    spec = cfg.frame_spec
    spg = stft(buf, spec)
    rows = mfcc(log_mel(spg, cfg.n_mels), cfg.n_mfcc).rows
    if cfg.pitch_weight > 0:
        track = estimate_f0(buf, spec)
        log_f0 = np.where(track.voicing, np.log(np.maximum(track.f0, 1.0)), UNVOICED_LOG_F0)
        rows = np.hstack([rows, log_f0[:, None]])
    return rows, spg.magnitude()


def weight_features(normalized: np.ndarray, cfg: SelfVcConfig) -> np.ndarray:
    if cfg.pitch_weight > 0:
        normalized = normalized.copy()
        normalized[:, -1] *= cfg.pitch_weight
    return normalized


def build_pool(reference: AudioBuffer, cfg: SelfVcConfig = None, source_id: str = "reference") -> MatchingPool:
    """
    Matching pool of a reference recording: per-dimension mean/variance normalized MFCCs computed over the
    pool itself, with frame-aligned magnitudes and waveform frames.

    :raises ReferenceException: reference shorter than 1 s
    """
    cfg = cfg if cfg is not None else SelfVcConfig()
    if reference is None:
        raise ReferenceException("A reference recording is required to build the matching pool.")
    reference = to_canonical_rate(reference)
    if reference.duration < MIN_POOL_SECONDS:
        raise ReferenceException(f"Reference '{source_id}' lasts {reference.duration:.2f} s but at least "
                                 f"{MIN_POOL_SECONDS} s are required.")
    rows, magnitudes = raw_features(reference, cfg)
    stats = NormStats.of(rows)
    features = FeatureMatrix(weight_features(stats.apply(rows), cfg), FeatureKind.mfcc, cfg.frame_spec,
                             reference.sample_rate)
    frames = np.array(frame_signal(reference.samples, cfg.frame_spec))
    logger.debug(f"Built pool '{source_id}' with {features.num_frames} frames of dimension {features.dim}.")
    return MatchingPool(features, magnitudes, frames, source_id, stats)


def query_features(buf: AudioBuffer, pool: MatchingPool, cfg: SelfVcConfig):
    """source features normalized with the pool's statistics, and the source magnitudes"""
    rows, magnitudes = raw_features(buf, cfg)
    normalized = weight_features(pool.norm_stats.apply(rows), cfg)
    return FeatureMatrix(normalized, FeatureKind.mfcc, cfg.frame_spec, buf.sample_rate), magnitudes
