from .watermark_types import *
from ..audio_core import AudioBuffer
import logging
import numpy as np

logger = logging.getLogger('pywmbench.watermark.blocks')


def block_assignment(num_samples: int, block_len: int, payload_len: int, key: WatermarkKey,
                     require_full_payload: bool = True) -> np.ndarray:
    """
    Maps each block of the fixed grid anchored at sample 0 to the payload bit it carries.

    The blocks are visited in a key-seeded random order and bits are assigned cyclically along that
    order, so block order[j] carries bit j mod payload_len.

    :param require_full_payload: raise unless every bit gets at least one block (embedding). Detection
                                 only needs a single block.
    :return: int array of length num_samples // block_len
    """
    num_blocks = num_samples // block_len
    needed = payload_len if require_full_payload else 1
    if num_blocks < needed:
        raise InsufficientAudioException(f"Audio of {num_samples} samples holds {num_blocks} blocks of {block_len} "
                                         f"samples but at least {needed * block_len} samples are required.")
    order = key.generator("block_order", num_blocks).permutation(num_blocks)
    assignment = np.empty(num_blocks, dtype=int)
    assignment[order] = np.arange(num_blocks) % payload_len
    return assignment


def combine_soft_scores(block_scores: np.ndarray, assignment: np.ndarray, payload_len: int) -> np.ndarray:
    """Sums the per-block scores of every bit. Erased blocks are expected to score 0."""
    return np.bincount(assignment, weights=block_scores, minlength=payload_len)[:payload_len]


def decide(soft_scores: np.ndarray) -> Payload:
    return Payload(soft_scores > 0)


class BlockWatermarker(object):
    """
    Base class of the block-based schemes. Subclasses implement _embed_block and _detect_block on
    a single block of samples; this class handles the block grid, the key-seeded bit assignment,
    erasures and soft combining.
    """
    name = None

    def __init__(self, config):
        self.config = config

    @property
    def block_len(self) -> int:
        return self.config.block_len

    def min_samples(self, payload_len: int) -> int:
        return payload_len * self.block_len

    def embed(self, buf: AudioBuffer, payload: Payload, key: WatermarkKey) -> AudioBuffer:
        assignment = block_assignment(len(buf), self.block_len, payload.length, key)
        out = buf.samples.copy()
        erased = []
        for idx, bit_idx in enumerate(assignment):
            start = idx * self.block_len
            block = buf.samples[start:start + self.block_len]
            marked = self._embed_block(block, bool(payload.bits[bit_idx]), idx, key)
            if marked is None:
                erased.append(idx)
                continue
            out[start:start + self.block_len] = marked
        if erased:
            logger.warning(f"{self.name}: {len(erased)} of {len(assignment)} blocks carry no watermark "
                           f"(degenerate blocks {erased}).")
        logger.debug(f"{self.name}: embedded {payload.length} bits into {len(assignment)} blocks.")
        return buf.with_samples(out)

    def detect(self, buf: AudioBuffer, key: WatermarkKey, payload_len: int) -> DetectionResult:
        if not 1 <= payload_len <= MAX_PAYLOAD_LEN:
            raise PayloadException(f"Payload length must be in [1, {MAX_PAYLOAD_LEN}] but is {payload_len}.")
        assignment = block_assignment(len(buf), self.block_len, payload_len, key, require_full_payload=False)
        scores = np.zeros(len(assignment))
        erased = []
        for idx in range(len(assignment)):
            start = idx * self.block_len
            score = self._detect_block(buf.samples[start:start + self.block_len], idx, key)
            if score is None:
                erased.append(idx)
            else:
                scores[idx] = score
        soft = combine_soft_scores(scores, assignment, payload_len)
        if erased:
            logger.warning(f"{self.name}: {len(erased)} of {len(assignment)} blocks erased during detection.")
        if len(assignment) < payload_len:
            logger.warning(f"{self.name}: only {len(assignment)} blocks for {payload_len} bits. Bits without a "
                           f"block decode to 0.")
        return DetectionResult(decide(soft), soft, erased)

    def _embed_block(self, block: np.ndarray, bit: bool, block_index: int, key: WatermarkKey):
        """returns the marked block or None for a degenerate block"""
        raise NotImplementedError

    def _detect_block(self, block: np.ndarray, block_index: int, key: WatermarkKey):
        """returns the signed soft score of the block or None for a degenerate block"""
        raise NotImplementedError
