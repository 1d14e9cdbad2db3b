from .watermark_types import *
from ..audio_core import AudioBuffer
from ..utils.signal_math import snr_db
import numpy as np


def bitwise_accuracy(expected: Payload, got: Payload) -> float:
    """fraction of positions where the payloads agree"""
    if expected.length != got.length:
        raise PayloadException(f"Can't compare payloads of length {expected.length} and {got.length}.")
    return float(np.mean(expected.bits == got.bits))


def attacker_performance(accuracy: float) -> float:
    """1 - bitwise extraction accuracy; 0.5 is chance level"""
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError(f"Accuracy must be in [0, 1] but is {accuracy}.")
    return 1.0 - accuracy


def embedding_snr(original: AudioBuffer, watermarked: AudioBuffer) -> float:
    """SNR in dB of the watermarked signal with the embedding change as noise"""
    if len(original) != len(watermarked):
        raise WatermarkException(f"Length mismatch: {len(original)} vs {len(watermarked)} samples.")
    return snr_db(original.samples, watermarked.samples)
