from .selfvc_types import *
from ..audio_core import AudioBuffer, FrameSpec, PitchTrack, stft, compute_mfcc, estimate_f0, LOG_FLOOR
from ..utils.signal_math import snr_db
import logging
import numpy as np

logger = logging.getLogger('pywmbench.selfvc.quality')

MCD_SCALE = 10.0 / np.log(10.0) * np.sqrt(2.0)
MCD_COEFFS = 13
MIN_JOINTLY_VOICED = 10
QUALITY_SPEC = FrameSpec(1024, 256, "hann")


def mel_cepstral_distortion(c1: np.ndarray, c2: np.ndarray) -> float:
    """
    (10 / ln 10) * sqrt(2) * mean over frames of ||c1 - c2||. Rows are frames of cepstral coefficients
    1..13, coefficient 0 excluded.
    """
    c1 = np.atleast_2d(np.asarray(c1, dtype=np.float64))
    c2 = np.atleast_2d(np.asarray(c2, dtype=np.float64))
    if c1.shape != c2.shape:
        raise QualityException(f"Cepstra shapes differ: {c1.shape} vs {c2.shape}.")
    return float(MCD_SCALE * np.mean(np.linalg.norm(c1 - c2, axis=1)))


def log_spectral_distance(original: AudioBuffer, transformed: AudioBuffer, spec: FrameSpec = QUALITY_SPEC) -> float:
    """
    Mean over frames of the RMS over bins of 20*log10((|S1| + eps) / (|S2| + eps)), eps = 1e-10.
    """
    _require_comparable(original, transformed)
    m1 = stft(original, spec).magnitude()
    m2 = stft(transformed, spec).magnitude()
    diff = 20.0 * np.log10((m1 + LOG_FLOOR) / (m2 + LOG_FLOOR))
    return float(np.mean(np.sqrt(np.mean(diff ** 2, axis=1))))


def f0_correlation(first: PitchTrack, second: PitchTrack):
    """
    Pearson correlation of f0 over the frames voiced in both tracks. None when fewer than 10 frames are
    jointly voiced, or when one contour is flat and the contours differ.
    """
    joint = first.voicing & second.voicing
    if np.sum(joint) < MIN_JOINTLY_VOICED:
        return None
    a = first.f0[joint]
    b = second.f0[joint]
    if np.std(a) == 0 or np.std(b) == 0:
        return 1.0 if np.array_equal(a, b) else None
    return float(np.corrcoef(a, b)[0, 1])


def voiced_overlap(first: PitchTrack, second: PitchTrack) -> float:
    """jointly voiced frames over frames voiced in either track, 1 when neither is voiced"""
    either = np.sum(first.voicing | second.voicing)
    if either == 0:
        return 1.0
    return float(np.sum(first.voicing & second.voicing) / either)


def speaker_similarity(c1: np.ndarray, c2: np.ndarray) -> float:
    """cosine similarity of the utterance-mean MFCC vectors"""
    m1 = np.mean(c1, axis=0)
    m2 = np.mean(c2, axis=0)
    n1 = np.linalg.norm(m1)
    n2 = np.linalg.norm(m2)
    if n1 == 0 or n2 == 0:
        return 1.0 if np.array_equal(m1, m2) else 0.0
    return float(np.dot(m1, m2) / (n1 * n2))


def _require_comparable(original: AudioBuffer, transformed: AudioBuffer):
    if len(original) != len(transformed):
        raise QualityException(f"Signals must have equal length for frame-synchronous comparison but have "
                               f"{len(original)} and {len(transformed)} samples.")
    if original.sample_rate != transformed.sample_rate:
        raise QualityException(f"Sample rates differ: {original.sample_rate} Hz vs {transformed.sample_rate} Hz.")
    original.require_samples(1)


def quality_report(original: AudioBuffer, transformed: AudioBuffer, spec: FrameSpec = QUALITY_SPEC) -> QualityReport:
    _require_comparable(original, transformed)
    c1 = compute_mfcc(original, spec, 40, MCD_COEFFS).rows
    c2 = compute_mfcc(transformed, spec, 40, MCD_COEFFS).rows
    track1 = estimate_f0(original, spec)
    track2 = estimate_f0(transformed, spec)
    report = QualityReport(
        mcd_db=mel_cepstral_distortion(c1, c2),
        lsd_db=log_spectral_distance(original, transformed, spec),
        f0_corr=f0_correlation(track1, track2),
        voiced_overlap=voiced_overlap(track1, track2),
        snr_db=snr_db(original.samples, transformed.samples),
        speaker_sim=speaker_similarity(c1, c2),
    )
    logger.debug(f"Quality: {report.to_dict()}")
    return report
