from ..audio_core import AudioBuffer, CANONICAL_RATE, load_wav, to_canonical_rate
from ..utils.seeding import derive_rng
from ..utils.signal_math import fix_length, raised_cosine_ramp, rms
import logging
from pathlib import Path
import numpy as np
from scipy import signal

logger = logging.getLogger('pywmbench.evalharness.corpus')

PEAK_LEVEL = 0.5
CROSSFADE_S = 0.010
MIN_SEGMENT_S = 0.2
MAX_SEGMENT_S = 0.6
VOICED_PROBABILITY = 0.7
F0_RANGE = (80.0, 300.0)
FORMANT_RANGES = [(300.0, 800.0), (900.0, 2300.0), (2400.0, 3200.0)]
FORMANT_BANDWIDTHS = [80.0, 120.0, 160.0]
VOICED_RMS = 0.2
UNVOICED_RMS = 0.05


class SyntheticVoice(object):

    def __init__(self, rng: np.random.Generator):
        """
        Speaker characteristics of one synthetic utterance: formant centers and a base F0.
        """
        self.formants = np.array([rng.uniform(lo, hi) for lo, hi in FORMANT_RANGES])
        self.base_f0 = rng.uniform(100.0, 220.0)

    def voiced_segment(self, length: int, rng: np.random.Generator, sample_rate: int) -> np.ndarray:
        """
        Sawtooth at a gliding, slightly vibrating F0 through three cascaded formant resonators.
        """
        start_f0 = np.clip(self.base_f0 * rng.uniform(0.8, 1.25), *F0_RANGE)
        glide = rng.uniform(0.85, 1.15)
        t = np.arange(length) / sample_rate
        contour = start_f0 * glide ** (np.arange(length) / length)
        contour *= 1.0 + 0.005 * np.sin(2 * np.pi * 5.0 * t + rng.uniform(0, 2 * np.pi))
        contour = np.clip(contour, *F0_RANGE)

        phase = np.cumsum(contour) / sample_rate + rng.uniform()
        source = 2.0 * (phase % 1.0) - 1.0

        # vowel quality varies per segment around the speaker's formants
        formants = self.formants * rng.uniform(0.85, 1.15, size=3)
        out = source
        for freq, bandwidth in zip(formants, FORMANT_BANDWIDTHS):
            out = resonator(out, min(freq, 0.45 * sample_rate), bandwidth, sample_rate)
        return out

    @staticmethod
    def unvoiced_segment(length: int, rng: np.random.Generator, sample_rate: int) -> np.ndarray:
        """band-limited noise burst"""
        lo = rng.uniform(1500.0, 2500.0)
        hi = min(rng.uniform(4500.0, 6500.0), 0.45 * sample_rate)
        sos = signal.butter(2, [lo, hi], btype='bandpass', fs=sample_rate, output='sos')
        return signal.sosfilt(sos, rng.standard_normal(length))


def resonator(x: np.ndarray, freq: float, bandwidth: float, sample_rate: int) -> np.ndarray:
    """two-pole resonator with unity gain at DC"""
    r = np.exp(-np.pi * bandwidth / sample_rate)
    a = [1.0, -2.0 * r * np.cos(2.0 * np.pi * freq / sample_rate), r * r]
    return signal.lfilter([sum(a)], a, x)


def synthesize_utterance(voice: SyntheticVoice, rng: np.random.Generator, num_samples: int,
                         sample_rate: int) -> np.ndarray:
    crossfade = int(round(CROSSFADE_S * sample_rate))
    fade_in = raised_cosine_ramp(crossfade)
    out = np.zeros(0)
    while len(out) < num_samples:
        seg_len = int(rng.integers(int(MIN_SEGMENT_S * sample_rate), int(MAX_SEGMENT_S * sample_rate) + 1))
        if rng.random() < VOICED_PROBABILITY:
            segment = voice.voiced_segment(seg_len + crossfade, rng, sample_rate)
            level = VOICED_RMS
        else:
            segment = voice.unvoiced_segment(seg_len + crossfade, rng, sample_rate)
            level = UNVOICED_RMS
        segment *= level * rng.uniform(0.7, 1.0) / max(rms(segment), 1e-12)
        if len(out) == 0:
            out = segment
        else:
            segment[:crossfade] *= fade_in
            out[-crossfade:] = out[-crossfade:] * fade_in[::-1] + segment[:crossfade]
            out = np.concatenate([out, segment[crossfade:]])
    out = fix_length(out, num_samples)
    return out * (PEAK_LEVEL / np.max(np.abs(out)))


def gen_test_corpus(count: int, duration_s: float = 4.0, seed: int = 0,
                    sample_rate: int = CANONICAL_RATE) -> list:
    """
    Speech-like synthetic utterances: voiced segments (sawtooth source, F0 80-300 Hz, three formants) and
    unvoiced noise bursts of 200-600 ms joined by 10 ms crossfades, peak-normalized to 0.5.

    Each utterance has its own synthetic voice. The result is a pure function of the arguments.
    """
    if count < 1:
        raise ValueError(f"Corpus needs at least 1 utterance but count is {count}.")
    if duration_s < 2.0:
        raise ValueError(f"Utterances must last at least 2 s but duration is {duration_s} s.")
    num_samples = int(round(duration_s * sample_rate))
    corpus = []
    for index in range(count):
        voice = SyntheticVoice(derive_rng("corpus_voice", seed, index))
        samples = synthesize_utterance(voice, derive_rng("corpus_content", seed, index, 0), num_samples, sample_rate)
        corpus.append(AudioBuffer(samples, sample_rate))
    logger.info(f"Generated {count} synthetic utterances of {duration_s} s (seed {seed}).")
    return corpus


def gen_reference(index: int, duration_s: float = 4.0, seed: int = 0, variant: int = 1,
                  sample_rate: int = CANONICAL_RATE) -> AudioBuffer:
    """
    Different content spoken by the same synthetic voice as utterance `index` of gen_test_corpus(seed=seed).
    """
    if variant < 1:
        raise ValueError("Variant 0 is the corpus utterance itself; references need variant >= 1.")
    if duration_s < 1.0:
        raise ValueError(f"References must last at least 1 s but duration is {duration_s} s.")
    voice = SyntheticVoice(derive_rng("corpus_voice", seed, index))
    num_samples = int(round(duration_s * sample_rate))
    samples = synthesize_utterance(voice, derive_rng("corpus_content", seed, index, variant), num_samples,
                                   sample_rate)
    return AudioBuffer(samples, sample_rate)


def load_corpus(paths) -> list:
    """Reads wav files and resamples them to the canonical rate."""
    corpus = []
    for path in paths:
        corpus.append(to_canonical_rate(load_wav(path)))
        logger.debug(f"Loaded {path} ({corpus[-1].duration:.2f} s).")
    return corpus


def list_wav_files(directory) -> list:
    files = sorted(Path(directory).glob("*.wav"))
    if not files:
        raise FileNotFoundError(f"No wav files found in {directory}.")
    return files
