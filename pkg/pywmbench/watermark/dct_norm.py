from .watermark_types import *
from .blocks import BlockWatermarker
from ..audio_core import AudioBuffer, dct_ii, idct
from ..utils.signal_math import edge_taper
import logging
import numpy as np

logger = logging.getLogger('pywmbench.watermark.dct_norm')

# blocks whose band norm is below this carry no watermark
DEGENERATE_NORM = 1e-12
# tapered blocks are re-quantized until the band norm is this close (in steps) to a coset point
NORM_TOLERANCE = 0.01
MAX_REQUANTIZE = 12


def quantizer_step(block: np.ndarray, cfg: DctNormConfig) -> float:
    """adaptive step: alpha * block RMS * sqrt(band width), floored at delta_min"""
    block_rms = np.sqrt(np.mean(block * block))
    return max(cfg.alpha * block_rms * np.sqrt(cfg.band_width), cfg.delta_min)


def quantize_norm(norm: float, step: float, bit: bool) -> float:
    """
    Nearest point of the coset step * (2m + bit). For bit 0 the zero point is excluded so the band
    never vanishes.
    """
    b = 1 if bit else 0
    m = int(np.round((norm / step - b) / 2.0))
    m = max(m, 0 if b else 1)
    return step * (2 * m + b)


def coset_distances(norm: float, step: float):
    """
    distances (in steps) from norm to the nearest bit-0 and bit-1 coset points, restricted to the
    points quantize_norm can produce
    """
    q = norm / step
    d1 = abs(q - (2.0 * max(np.floor((q - 1.0) / 2.0 + 0.5), 0.0) + 1.0))
    d0 = abs(q - 2.0 * max(np.floor(q / 2.0 + 0.5), 1.0))
    return d0, d1


class DctNormWatermarker(BlockWatermarker):
    """
    Quantization index modulation of the L2 norm of a low-frequency DCT band per block.

    The band is scaled uniformly to the nearest quantizer point of the bit's coset. With energy
    compensation the remaining coefficients are rescaled so the block energy (and with it the
    adaptive step seen by the detector) stays the same. The change is tapered off over smooth_len
    samples at both block edges so that neighbouring blocks join without a step. Tapering pulls the
    norm off the coset point, so the tapered block is quantized again until it sits on the point.
    """
    name = SchemeName.dct_norm.value

    def __init__(self, config: DctNormConfig = None):
        super().__init__(config if config is not None else DctNormConfig())
        self.taper = edge_taper(self.config.block_len, self.config.smooth_len)

    def _quantize_coeffs(self, coeffs: np.ndarray, step: float, bit: bool, block_index: int, warn: bool):
        """coefficients with the band norm moved onto the coset point, or None for a degenerate band"""
        cfg = self.config
        band = slice(cfg.coeff_lo, cfg.coeff_hi)
        norm = np.linalg.norm(coeffs[band])
        if norm < DEGENERATE_NORM:
            return None
        target = quantize_norm(norm, step, bit)
        total_energy = float(np.sum(coeffs * coeffs))
        marked = coeffs.copy()
        marked[band] *= target / norm

        if cfg.energy_compensation:
            outside = np.ones(len(coeffs), dtype=bool)
            outside[band] = False
            outside_energy = total_energy - norm * norm
            remaining = total_energy - target * target
            if remaining > 0 and outside_energy > DEGENERATE_NORM ** 2:
                marked[outside] *= np.sqrt(remaining / outside_energy)
            elif warn:
                logger.warning(f"Block {block_index}: energy compensation impossible (band needs {target:.4g}, "
                               f"block norm is {np.sqrt(total_energy):.4g}).")
        return marked

    def _embed_block(self, block: np.ndarray, bit: bool, block_index: int, key: WatermarkKey):
        cfg = self.config
        current = block
        for iteration in range(MAX_REQUANTIZE):
            coeffs = dct_ii(current)
            step = quantizer_step(current, cfg)
            if iteration > 0:
                norm = np.linalg.norm(coeffs[cfg.coeff_lo:cfg.coeff_hi])
                if abs(norm - quantize_norm(norm, step, bit)) <= NORM_TOLERANCE * step:
                    break
            marked = self._quantize_coeffs(coeffs, step, bit, block_index, warn=iteration == 0)
            if marked is None:
                if iteration == 0:
                    logger.debug(f"Block {block_index}: band norm is degenerate, skipping.")
                    return None
                break
            current = current + (idct(marked) - current) * self.taper
        else:
            logger.debug(f"Block {block_index}: norm not on the coset point after {MAX_REQUANTIZE} passes.")
        return current

    def _detect_block(self, block: np.ndarray, block_index: int, key: WatermarkKey):
        cfg = self.config
        coeffs = dct_ii(block)
        norm = np.linalg.norm(coeffs[cfg.coeff_lo:cfg.coeff_hi])
        if norm < DEGENERATE_NORM:
            return None
        d0, d1 = coset_distances(norm, quantizer_step(block, cfg))
        # (losing distance - winning distance) / step, signed towards bit 1
        return d0 - d1


def embed_dct_norm(buf: AudioBuffer, payload: Payload, key: WatermarkKey, cfg: DctNormConfig = None) -> AudioBuffer:
    return DctNormWatermarker(cfg).embed(buf, payload, key)


def detect_dct_norm(buf: AudioBuffer, key: WatermarkKey, payload_len: int = DEFAULT_PAYLOAD_LEN,
                    cfg: DctNormConfig = None) -> DetectionResult:
    return DctNormWatermarker(cfg).detect(buf, key, payload_len)
