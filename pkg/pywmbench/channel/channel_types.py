from dataclasses import dataclass, field
from enum import Enum
import logging

from ..utils.config import config_from_dict, config_to_dict, join_path
from ..utils.errors import PywmbenchException, ConfigException

logger = logging.getLogger('pywmbench.channel.channel_types')

SNR_LIMITS = (10.0, 30.0)
BITRATE_LIMITS = (64, 192)
INTERMEDIATE_RATES = (8000, 11025, 22050, 44100)


class ChannelException(PywmbenchException):
    pass


class SnrUndefinedException(ChannelException):
    pass


class NoiseKind(Enum):
    white = "white"
    pink = "pink"
    babble_proxy = "babble_proxy"


class StageKind(Enum):
    gaussian_noise = "gaussian_noise"
    background_noise = "background_noise"
    resample_chain = "resample_chain"
    codec_proxy = "codec_proxy"


class Placement(Enum):
    off = "off"
    pre_attack = "pre_attack"
    post_attack = "post_attack"
    both = "both"

    @property
    def before_attack(self) -> bool:
        return self in (Placement.pre_attack, Placement.both)

    @property
    def after_attack(self) -> bool:
        return self in (Placement.post_attack, Placement.both)


def _enum_field(enum_class, value, name):
    if value is None or isinstance(value, enum_class):
        return value
    try:
        return enum_class(value)
    except ValueError as err:
        allowed = ', '.join(member.value for member in enum_class)
        raise ConfigException(f"'{value}' is not one of {allowed}", name) from err


@dataclass
class ChannelStage:
    """
    One distortion stage. Which parameters are required depends on `kind`:

    - gaussian_noise: snr_db
    - background_noise: snr_db and noise_kind or noise_file
    - resample_chain: intermediate_rate
    - codec_proxy: bitrate_kbps

    `seed` drives the stage's own randomness (noise realisation, codec dither). Stages built from a
    config without a seed get one when the channel is drawn.
    """
    kind: StageKind = None
    snr_db: float = None
    noise_kind: NoiseKind = None
    noise_file: str = None
    intermediate_rate: int = None
    bitrate_kbps: int = None
    seed: int = None

    def __post_init__(self):
        if self.kind is None:
            raise ConfigException("stage kind is required", "kind")
        self.kind = _enum_field(StageKind, self.kind, "kind")
        self.noise_kind = _enum_field(NoiseKind, self.noise_kind, "noise_kind")

        if self.kind in (StageKind.gaussian_noise, StageKind.background_noise):
            if self.snr_db is None:
                raise ConfigException(f"{self.kind.value} needs snr_db", "snr_db")
            if isinstance(self.snr_db, bool) or not isinstance(self.snr_db, (int, float)):
                raise ConfigException(f"expected a number but got {self.snr_db!r}", "snr_db")
            self.snr_db = float(self.snr_db)
            if not SNR_LIMITS[0] <= self.snr_db <= SNR_LIMITS[1]:
                raise ConfigException(f"must be in [{SNR_LIMITS[0]:g}, {SNR_LIMITS[1]:g}] but is {self.snr_db}",
                                      "snr_db")
        if self.kind == StageKind.gaussian_noise:
            self.noise_kind = NoiseKind.white
        if self.kind == StageKind.background_noise and self.noise_kind is None and self.noise_file is None:
            raise ConfigException("background_noise needs noise_kind or noise_file", "noise_kind")
        if self.kind == StageKind.resample_chain:
            if self.intermediate_rate not in INTERMEDIATE_RATES:
                raise ConfigException(f"must be one of {list(INTERMEDIATE_RATES)} but is {self.intermediate_rate}",
                                      "intermediate_rate")
            self.intermediate_rate = int(self.intermediate_rate)
        if self.kind == StageKind.codec_proxy:
            if self.bitrate_kbps is None or not BITRATE_LIMITS[0] <= self.bitrate_kbps <= BITRATE_LIMITS[1]:
                raise ConfigException(f"must be in [{BITRATE_LIMITS[0]}, {BITRATE_LIMITS[1]}] but is "
                                      f"{self.bitrate_kbps}", "bitrate_kbps")
        if self.seed is not None:
            self.seed = int(self.seed)

    def with_seed(self, seed: int) -> 'ChannelStage':
        return ChannelStage(self.kind, self.snr_db, self.noise_kind, self.noise_file, self.intermediate_rate,
                            self.bitrate_kbps, seed)

    @staticmethod
    def from_dict(data: dict, path: str = "") -> 'ChannelStage':
        return config_from_dict(ChannelStage, data, path)

    def to_dict(self) -> dict:
        """only the parameters that apply to this kind of stage"""
        return {key: value for key, value in config_to_dict(self).items() if value is not None}


@dataclass
class ChannelSpec:
    """
    Transmission channel. With an empty `stages` list the channel is the random compound of one noise
    stage, an optional resampling chain and a codec stage, drawn per utterance within the given ranges.
    Otherwise `stages` are applied in order.
    """
    enabled: bool = True
    stages: list = field(default_factory=list)
    noise_kinds: tuple = ("white", "pink", "babble_proxy")
    snr_range: tuple = (10.0, 30.0)
    resample_probability: float = 0.5
    intermediate_rates: tuple = INTERMEDIATE_RATES
    bitrate_range: tuple = BITRATE_LIMITS
    # directory of wav files used as background noise instead of the synthetic kinds
    noise_dir: str = None
    # seeded dither before the codec proxy quantizes magnitudes
    codec_dither: bool = False

    def __post_init__(self):
        stages = []
        for idx, stage in enumerate(self.stages or []):
            if isinstance(stage, ChannelStage):
                stages.append(stage)
            else:
                stages.append(ChannelStage.from_dict(stage, join_path("stages", idx)))
        self.stages = stages
        self.noise_kinds = tuple(_enum_field(NoiseKind, kind, join_path("noise_kinds", idx))
                                 for idx, kind in enumerate(self.noise_kinds))
        if not self.noise_kinds:
            raise ConfigException("at least one noise kind is required", "noise_kinds")

        self.snr_range = tuple(float(s) for s in self.snr_range)
        if len(self.snr_range) != 2 or not SNR_LIMITS[0] <= self.snr_range[0] <= self.snr_range[1] <= SNR_LIMITS[1]:
            raise ConfigException(f"must be an increasing pair within [{SNR_LIMITS[0]:g}, {SNR_LIMITS[1]:g}] but "
                                  f"is {list(self.snr_range)}", "snr_range")
        self.bitrate_range = tuple(int(b) for b in self.bitrate_range)
        if len(self.bitrate_range) != 2 or \
                not BITRATE_LIMITS[0] <= self.bitrate_range[0] <= self.bitrate_range[1] <= BITRATE_LIMITS[1]:
            raise ConfigException(f"must be an increasing pair within [{BITRATE_LIMITS[0]}, {BITRATE_LIMITS[1]}] "
                                  f"but is {list(self.bitrate_range)}", "bitrate_range")
        self.intermediate_rates = tuple(int(r) for r in self.intermediate_rates)
        unsupported = [r for r in self.intermediate_rates if r not in INTERMEDIATE_RATES]
        if unsupported or not self.intermediate_rates:
            raise ConfigException(f"rates must be taken from {list(INTERMEDIATE_RATES)} but got "
                                  f"{list(self.intermediate_rates)}", "intermediate_rates")
        if not 0.0 <= self.resample_probability <= 1.0:
            raise ConfigException(f"must be in [0, 1] but is {self.resample_probability}", "resample_probability")

    @property
    def random_compound(self) -> bool:
        return len(self.stages) == 0

    @staticmethod
    def from_dict(data: dict, path: str = "") -> 'ChannelSpec':
        return config_from_dict(ChannelSpec, data, path)

    def to_dict(self) -> dict:
        result = config_to_dict(self)
        result["stages"] = [stage.to_dict() for stage in self.stages]
        result["noise_kinds"] = [kind.value for kind in self.noise_kinds]
        return result
