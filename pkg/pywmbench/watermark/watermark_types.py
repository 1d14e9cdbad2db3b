from dataclasses import dataclass, field
from enum import Enum
import logging
import numpy as np

from ..utils.config import config_from_dict, config_to_dict
from ..utils.errors import PywmbenchException, ConfigException
from ..utils.hexbits import bits_to_hex, hex_to_bits
from ..utils.seeding import derive_rng, MAX_SEED

logger = logging.getLogger('pywmbench.watermark.watermark_types')

DEFAULT_PAYLOAD_LEN = 32
MAX_PAYLOAD_LEN = 256


class WatermarkException(PywmbenchException):
    pass


class InsufficientAudioException(WatermarkException):
    pass


class PayloadException(WatermarkException):
    pass


class SchemeName(Enum):
    dct_norm = "dct_norm"
    spread_spectrum = "spread_spectrum"
    echo = "echo"


class Payload(object):

    def __init__(self, bits):
        """
        Fixed-length bit vector carried by the watermark.

        :param bits: sequence of booleans or 0/1 values, 1 to 256 entries
        """
        bits = np.asarray(bits)
        if bits.ndim != 1:
            raise PayloadException(f"Payload bits must be a flat sequence but have shape {bits.shape}.")
        if not 1 <= len(bits) <= MAX_PAYLOAD_LEN:
            raise PayloadException(f"Payload length must be in [1, {MAX_PAYLOAD_LEN}] but is {len(bits)}.")
        if bits.dtype != bool and not np.all((bits == 0) | (bits == 1)):
            raise PayloadException("Payload bits must be 0 or 1.")
        self.bits = bits.astype(bool)

    @property
    def length(self) -> int:
        return len(self.bits)

    def __len__(self):
        return len(self.bits)

    def __eq__(self, other):
        return isinstance(other, Payload) and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"Payload('{self.to_bitstring()}')"

    def to_hex(self) -> str:
        return bits_to_hex(self.bits)

    def to_bitstring(self) -> str:
        return ''.join('1' if b else '0' for b in self.bits)

    def signs(self) -> np.ndarray:
        """+1 for bit 1, -1 for bit 0"""
        return np.where(self.bits, 1.0, -1.0)

    def complement(self) -> 'Payload':
        return Payload(~self.bits)

    @staticmethod
    def from_hex(hex_str: str, length: int = None) -> 'Payload':
        """
        Most-significant bit first. Without `length` every hex digit yields 4 bits.
        """
        try:
            return Payload(hex_to_bits(hex_str, length))
        except ValueError as err:
            raise PayloadException(f"Invalid hex payload '{hex_str}': {err}") from err

    @staticmethod
    def from_bitstring(bitstring: str) -> 'Payload':
        if not bitstring or set(bitstring) - {'0', '1'}:
            raise PayloadException(f"'{bitstring}' is not a string of 0 and 1.")
        return Payload([c == '1' for c in bitstring])

    @staticmethod
    def random(length: int, rng: np.random.Generator) -> 'Payload':
        if not 1 <= length <= MAX_PAYLOAD_LEN:
            raise PayloadException(f"Payload length must be in [1, {MAX_PAYLOAD_LEN}] but is {length}.")
        return Payload(rng.integers(0, 2, size=length).astype(bool))


@dataclass(frozen=True)
class WatermarkKey:
    """
    Secret shared by embedder and detector. Seeds the block order and the PN chips.
    """
    seed: int

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise WatermarkException(f"Key seed must be an integer but is {self.seed!r}.")
        if not 0 <= int(self.seed) < MAX_SEED:
            raise WatermarkException(f"Key seed must be a 64-bit unsigned integer but is {self.seed}.")
        object.__setattr__(self, 'seed', int(self.seed))

    def generator(self, purpose: str, *parts) -> np.random.Generator:
        return derive_rng("watermark_key", self.seed, purpose, *parts)


def _check_band(lo: int, hi: int, block_len: int, lo_name: str, hi_name: str):
    if not 0 <= lo < hi <= block_len:
        raise ConfigException(f"need 0 <= {lo_name} < {hi_name} <= block_len but got {lo_name}={lo}, "
                              f"{hi_name}={hi}, block_len={block_len}", hi_name)


@dataclass
class DctNormConfig:
    block_len: int = 2048
    coeff_lo: int = 4
    coeff_hi: int = 132
    # quantizer step relative to block RMS * sqrt(band width)
    alpha: float = 0.1
    delta_min: float = 1e-3
    smooth_len: int = 64
    energy_compensation: bool = True

    def __post_init__(self):
        if self.block_len < 2:
            raise ConfigException(f"must be at least 2 but is {self.block_len}", "block_len")
        _check_band(self.coeff_lo, self.coeff_hi, self.block_len, "coeff_lo", "coeff_hi")
        if not 0 <= self.smooth_len < self.block_len / 2:
            raise ConfigException(f"must be in [0, block_len/2) but is {self.smooth_len}", "smooth_len")
        if not self.alpha > 0:
            raise ConfigException(f"must be positive but is {self.alpha}", "alpha")
        if not self.delta_min > 0:
            raise ConfigException(f"must be positive but is {self.delta_min}", "delta_min")

    @property
    def band_width(self) -> int:
        return self.coeff_hi - self.coeff_lo

    @staticmethod
    def from_dict(data: dict, path: str = "") -> 'DctNormConfig':
        return config_from_dict(DctNormConfig, data, path)

    def to_dict(self) -> dict:
        return config_to_dict(self)


@dataclass
class SpreadSpectrumConfig:
    block_len: int = 2048
    band: tuple = (32, 1024)
    # chip amplitude relative to band RMS; the added energy is beta**2 times the band energy
    beta: float = 0.05
    # scale the chips per block so that the host's own correlation can't flip the bit
    informed: bool = False

    def __post_init__(self):
        self.band = tuple(int(b) for b in self.band)
        if len(self.band) != 2:
            raise ConfigException(f"must have two entries but is {self.band}", "band")
        if self.block_len < 2:
            raise ConfigException(f"must be at least 2 but is {self.block_len}", "block_len")
        if not 0 <= self.band[0] < self.band[1] <= self.block_len:
            raise ConfigException(f"must lie within [0, {self.block_len}] with lo < hi but is {list(self.band)}",
                                  "band")
        if not self.beta > 0:
            raise ConfigException(f"must be positive but is {self.beta}", "beta")

    @property
    def band_width(self) -> int:
        return self.band[1] - self.band[0]

    @staticmethod
    def from_dict(data: dict, path: str = "") -> 'SpreadSpectrumConfig':
        return config_from_dict(SpreadSpectrumConfig, data, path)

    def to_dict(self) -> dict:
        return config_to_dict(self)


@dataclass
class EchoConfig:
    block_len: int = 4096
    delay0: int = 100
    delay1: int = 150
    echo_gain: float = 0.3
    taper: int = 128
    # the echo is made from the signal above this frequency, 0 echoes the full band
    highpass_hz: float = 2000.0
    # per-block cap: the echo stays at least this far below the block energy
    block_snr_db: float = 26.0

    def __post_init__(self):
        if self.block_len < 8:
            raise ConfigException(f"must be at least 8 but is {self.block_len}", "block_len")
        if self.delay0 == self.delay1:
            raise ConfigException(f"must differ from delay0 ({self.delay0})", "delay1")
        for name in ["delay0", "delay1"]:
            delay = getattr(self, name)
            # two neighbours on each side are needed for the prominence score
            if not 3 <= delay < self.block_len / 4:
                raise ConfigException(f"must be in [3, block_len/4) but is {delay}", name)
        if not 0 < self.echo_gain < 1:
            raise ConfigException(f"must be in (0, 1) but is {self.echo_gain}", "echo_gain")
        if not 0 <= 2 * self.taper <= self.block_len:
            raise ConfigException(f"must be in [0, block_len/2] but is {self.taper}", "taper")
        if self.highpass_hz < 0:
            raise ConfigException(f"must not be negative but is {self.highpass_hz}", "highpass_hz")
        if not self.block_snr_db > 0:
            raise ConfigException(f"must be positive but is {self.block_snr_db}", "block_snr_db")

    @staticmethod
    def from_dict(data: dict, path: str = "") -> 'EchoConfig':
        return config_from_dict(EchoConfig, data, path)

    def to_dict(self) -> dict:
        return config_to_dict(self)


@dataclass
class DetectionResult:
    """
    Recovered payload. soft_scores are positive for bit 1 and negative for bit 0; a bit whose blocks
    were all erased has score 0 and decodes to 0.
    """
    bits: Payload
    soft_scores: np.ndarray
    # indices of blocks that carried no usable signal
    erasures: list = field(default_factory=list)

    def __post_init__(self):
        self.soft_scores = np.asarray(self.soft_scores, dtype=np.float64)
        if len(self.soft_scores) != self.bits.length:
            raise WatermarkException(f"Got {len(self.soft_scores)} soft scores for {self.bits.length} bits.")

    @property
    def num_erasures(self) -> int:
        return len(self.erasures)
