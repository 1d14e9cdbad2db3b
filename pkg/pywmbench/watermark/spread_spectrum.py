from .watermark_types import *
from .blocks import BlockWatermarker
from ..audio_core import AudioBuffer, dct_ii, idct
import logging
import numpy as np

logger = logging.getLogger('pywmbench.watermark.spread_spectrum')

DEGENERATE_NORM = 1e-12


def pn_sequence(key: WatermarkKey, block_index: int, width: int) -> np.ndarray:
    """±1 chips of one block, independent per (key, block)"""
    return key.generator("pn", block_index).integers(0, 2, size=width) * 2.0 - 1.0


def normalized_correlation(band: np.ndarray, chips: np.ndarray) -> float:
    """<v, p> / (||v|| sqrt(W)); about N(0, 1/W) for chips independent of v"""
    return float(np.dot(band, chips) / (np.linalg.norm(band) * np.sqrt(len(chips))))


class SpreadSpectrumWatermarker(BlockWatermarker):
    """
    Additive ±1 chips in a mid-frequency DCT band, detected by the sign of the correlation.

    By default the chip amplitude is beta * band RMS. In informed mode it is raised or lowered so that
    the correlation of the marked band with the chips is at least beta * band RMS in the direction of
    the bit, whatever the host's own correlation is.
    """
    name = SchemeName.spread_spectrum.value

    def __init__(self, config: SpreadSpectrumConfig = None):
        super().__init__(config if config is not None else SpreadSpectrumConfig())

    def _embed_block(self, block: np.ndarray, bit: bool, block_index: int, key: WatermarkKey):
        lo, hi = self.config.band
        coeffs = dct_ii(block)
        band = coeffs[lo:hi]
        norm = np.linalg.norm(band)
        if norm < DEGENERATE_NORM:
            logger.debug(f"Block {block_index}: silent band, skipping.")
            return None
        width = hi - lo
        chips = pn_sequence(key, block_index, width)
        sign = 1.0 if bit else -1.0
        target = self.config.beta * norm / np.sqrt(width)
        if self.config.informed:
            host = np.dot(band, chips) / width
            amplitude = max(target - sign * host, 0.0)
        else:
            amplitude = target
        coeffs[lo:hi] = band + amplitude * sign * chips
        return idct(coeffs)

    def _detect_block(self, block: np.ndarray, block_index: int, key: WatermarkKey):
        lo, hi = self.config.band
        band = dct_ii(block)[lo:hi]
        if np.linalg.norm(band) < DEGENERATE_NORM:
            return None
        return normalized_correlation(band, pn_sequence(key, block_index, hi - lo))


def embed_spread_spectrum(buf: AudioBuffer, payload: Payload, key: WatermarkKey,
                          cfg: SpreadSpectrumConfig = None) -> AudioBuffer:
    return SpreadSpectrumWatermarker(cfg).embed(buf, payload, key)


def detect_spread_spectrum(buf: AudioBuffer, key: WatermarkKey, payload_len: int = DEFAULT_PAYLOAD_LEN,
                           cfg: SpreadSpectrumConfig = None) -> DetectionResult:
    return SpreadSpectrumWatermarker(cfg).detect(buf, key, payload_len)
