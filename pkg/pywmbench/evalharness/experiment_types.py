from dataclasses import dataclass, field
from enum import Enum
import logging
import numpy as np

from ..audio_core import CANONICAL_RATE
from ..channel import ChannelSpec, Placement
from ..selfvc import SelfVcConfig, QualityReport, Representation
from ..watermark import SchemeName, SchemeRegistry, MAX_PAYLOAD_LEN
from ..utils.config import config_from_dict, config_to_dict, coerce_value, join_path
from ..utils.errors import PywmbenchException, ConfigException

logger = logging.getLogger('pywmbench.evalharness.experiment_types')

SCHEMA_VERSION = 1


class ExperimentException(PywmbenchException):
    pass


class EmptyReportException(ExperimentException):
    pass


class AttackName(Enum):
    none = "none"
    # copy synthesis through the mel spectrogram, the vocoder baseline
    copy_synthesis = "copy_synthesis"
    copy_synthesis_linear = "copy_synthesis_linear"
    self_vc = "self_vc"

    @property
    def representation(self) -> Representation:
        return Representation.linear if self == AttackName.copy_synthesis_linear else Representation.mel


@dataclass
class CopySynthesisConfig:
    gl_iterations: int = 60

    def __post_init__(self):
        if self.gl_iterations < 1:
            raise ConfigException(f"must be at least 1 but is {self.gl_iterations}", "gl_iterations")

    @staticmethod
    def from_dict(data: dict, path: str = "") -> 'CopySynthesisConfig':
        return config_from_dict(CopySynthesisConfig, data, path)

    def to_dict(self) -> dict:
        return config_to_dict(self)


@dataclass
class CorpusSpec:
    """
    Either a synthetic corpus (count, duration_s, seed) or wav files, listed in `paths` or found in
    `directory`. Synthetic utterance i gets a reference of reference_duration_s seconds spoken by the same voice.
    """
    count: int = 50
    duration_s: float = 4.0
    seed: int = 42
    reference_duration_s: float = 4.0
    paths: tuple = None
    directory: str = None

    def __post_init__(self):
        if self.paths is not None:
            self.paths = tuple(str(p) for p in self.paths)
        if self.directory is not None and not isinstance(self.directory, str):
            raise ConfigException(f"expected a directory path but got {self.directory!r}", "directory")
        if self.paths is not None and self.directory is not None:
            raise ConfigException("give either paths or directory, not both", "paths")
        if self.is_synthetic:
            if self.count < 1:
                raise ConfigException(f"must be at least 1 but is {self.count}", "count")
            if self.duration_s < 2.0:
                raise ConfigException(f"must be at least 2 s but is {self.duration_s}", "duration_s")
        if self.reference_duration_s < 1.0:
            raise ConfigException(f"must be at least 1 s but is {self.reference_duration_s}",
                                  "reference_duration_s")

    @property
    def is_synthetic(self) -> bool:
        return self.paths is None and self.directory is None

    @staticmethod
    def from_dict(data, path: str = "") -> 'CorpusSpec':
        if isinstance(data, list):
            data = {"paths": data}
        if isinstance(data, dict) and data.get("paths") is not None:
            paths = data["paths"]
            if not isinstance(paths, list) or len(paths) == 0:
                raise ConfigException(f"expected a non-empty list of wav paths but got {paths!r}",
                                      join_path(path, "paths"))
            data = dict(data, paths=[coerce_value(p, "", join_path(join_path(path, "paths"), idx))
                                     for idx, p in enumerate(paths)])
        return config_from_dict(CorpusSpec, data, path)

    def to_dict(self) -> dict:
        result = config_to_dict(self)
        return {k: v for k, v in result.items() if v is not None}


@dataclass
class SchemeEntry:
    name: SchemeName
    config: object

    @staticmethod
    def from_dict(data, path: str = "") -> 'SchemeEntry':
        """A scheme name, or a mapping with `name` and optional `config` overrides of the preset."""
        if isinstance(data, str):
            data = {"name": data}
        if not isinstance(data, dict):
            raise ConfigException(f"expected a scheme name or mapping but got {data!r}", path)
        unknown = sorted(set(data) - {"name", "config"})
        if unknown:
            raise ConfigException(f"unknown field(s): {', '.join(unknown)}", path)
        name = coerce_value(data.get("name"), SchemeName.dct_norm, join_path(path, "name"))
        config = SchemeRegistry.build_config(name.value, data.get("config"), join_path(path, "config"))
        return SchemeEntry(name, config)

    def to_dict(self) -> dict:
        return {"name": self.name.value, "config": self.config.to_dict()}


@dataclass
class AttackEntry:
    name: AttackName
    config: object = None

    CONFIG_CLASSES = {
        AttackName.copy_synthesis: CopySynthesisConfig,
        AttackName.copy_synthesis_linear: CopySynthesisConfig,
        AttackName.self_vc: SelfVcConfig,
    }

    @staticmethod
    def from_dict(data, path: str = "") -> 'AttackEntry':
        if isinstance(data, str):
            data = {"name": data}
        if not isinstance(data, dict):
            raise ConfigException(f"expected an attack name or mapping but got {data!r}", path)
        unknown = sorted(set(data) - {"name", "config"})
        if unknown:
            raise ConfigException(f"unknown field(s): {', '.join(unknown)}", path)
        name = coerce_value(data.get("name"), AttackName.none, join_path(path, "name"))
        config_class = AttackEntry.CONFIG_CLASSES.get(name)
        if config_class is None:
            if data.get("config"):
                raise ConfigException("the 'none' attack takes no configuration", join_path(path, "config"))
            return AttackEntry(name)
        return AttackEntry(name, config_class.from_dict(data.get("config"), join_path(path, "config")))

    def to_dict(self) -> dict:
        result = {"name": self.name.value}
        if self.config is not None:
            result["config"] = self.config.to_dict()
        return result


@dataclass
class ExperimentSpec:
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    schemes: list = field(default_factory=list)
    attacks: list = field(default_factory=list)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    placements: list = field(default_factory=lambda: [Placement.off, Placement.post_attack])
    payload_len: int = 8
    global_seed: int = 0
    workers: int = 1
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if not self.schemes:
            raise ConfigException("at least one scheme is required", "schemes")
        if not self.attacks:
            raise ConfigException("at least one attack is required", "attacks")
        if not self.placements:
            raise ConfigException("at least one channel placement is required", "channel.placements")
        if not 1 <= self.payload_len <= MAX_PAYLOAD_LEN:
            raise ConfigException(f"must be in [1, {MAX_PAYLOAD_LEN}] but is {self.payload_len}", "payload_len")
        if self.workers < 1:
            raise ConfigException(f"must be at least 1 but is {self.workers}", "workers")
        if self.corpus.is_synthetic:
            num_samples = int(round(self.corpus.duration_s * CANONICAL_RATE))
            if num_samples < self.min_samples:
                raise ConfigException(f"{self.corpus.duration_s} s utterances can't hold {self.payload_len} bits, "
                                      f"{self.min_samples} samples are needed", "corpus.duration_s")

    @property
    def min_samples(self) -> int:
        """payload_len times the largest block length of the configured schemes"""
        return self.payload_len * max(entry.config.block_len for entry in self.schemes)

    @property
    def num_cells(self) -> int:
        return len(self.schemes) * len(self.attacks) * len(self.placements)

    @staticmethod
    def from_dict(data: dict) -> 'ExperimentSpec':
        """
        Validates a complete experiment document. Errors carry the schema path of the offending field.
        """
        if not isinstance(data, dict):
            raise ConfigException(f"expected a mapping but got {type(data).__name__}", "")
        known = {"schema_version", "corpus", "schemes", "attacks", "channel", "payload_len", "global_seed",
                 "workers"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigException(f"unknown field(s): {', '.join(str(u) for u in unknown)}", "")
        if "schema_version" not in data:
            raise ConfigException("is required", "schema_version")
        version = coerce_value(data["schema_version"], SCHEMA_VERSION, "schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigException(f"version {version} is not supported, expected {SCHEMA_VERSION}", "schema_version")

        schemes = _entries(data.get("schemes"), "schemes", SchemeEntry.from_dict)
        attacks = _entries(data.get("attacks"), "attacks", AttackEntry.from_dict)

        channel_data = data.get("channel") or {}
        if not isinstance(channel_data, dict):
            raise ConfigException(f"expected a mapping but got {type(channel_data).__name__}", "channel")
        channel_data = dict(channel_data)
        placements = channel_data.pop("placements", ["off", "post_attack"])
        if isinstance(placements, str):
            placements = [placements]
        if not isinstance(placements, list):
            raise ConfigException(f"expected a placement or a list of placements but got {placements!r}",
                                  "channel.placements")
        placements = [coerce_value(p, Placement.off, f"channel.placements[{idx}]") for idx, p in enumerate(placements)]

        kwargs = {}
        for name, template in [("payload_len", 8), ("global_seed", 0), ("workers", 1)]:
            if name in data:
                kwargs[name] = coerce_value(data[name], template, name)
        return ExperimentSpec(
            corpus=CorpusSpec.from_dict(data.get("corpus"), "corpus"),
            schemes=schemes,
            attacks=attacks,
            channel=ChannelSpec.from_dict(channel_data, "channel"),
            placements=placements,
            schema_version=version,
            **kwargs
        )

    def to_dict(self) -> dict:
        channel = self.channel.to_dict()
        channel["placements"] = [p.value for p in self.placements]
        return {
            "schema_version": self.schema_version,
            "corpus": self.corpus.to_dict(),
            "schemes": [entry.to_dict() for entry in self.schemes],
            "attacks": [entry.to_dict() for entry in self.attacks],
            "channel": channel,
            "payload_len": self.payload_len,
            "global_seed": self.global_seed,
            "workers": self.workers,
        }


def _entries(data, path: str, parse) -> list:
    if not isinstance(data, list) or len(data) == 0:
        raise ConfigException(f"expected a non-empty list but got {data!r}", path)
    return [parse(item, join_path(path, idx)) for idx, item in enumerate(data)]


@dataclass
class EvalRow:
    """
    Outcome of one (utterance, scheme, attack, channel placement) cell. Rows with an error carry no
    metrics.
    """
    scheme: str
    attack: str
    channel_placement: str
    utterance_id: str
    bit_accuracy: float = None
    attacker_perf: float = None
    quality: QualityReport = None
    channel_draws: list = field(default_factory=list)
    payload_hex: str = None
    embedding_snr_db: float = None
    error: str = None

    def __post_init__(self):
        if self.error is None and self.bit_accuracy is not None:
            expected = 1.0 - self.bit_accuracy
            if self.attacker_perf is None:
                self.attacker_perf = expected
            elif abs(self.attacker_perf - expected) > 1e-12:
                raise ExperimentException(f"Attacker performance {self.attacker_perf} is not 1 - "
                                          f"{self.bit_accuracy}.")

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def cell(self) -> tuple:
        return self.scheme, self.attack, self.channel_placement

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "attack": self.attack,
            "channel_placement": self.channel_placement,
            "utterance_id": self.utterance_id,
            "payload_hex": self.payload_hex,
            "bit_accuracy": self.bit_accuracy,
            "attacker_perf": self.attacker_perf,
            "embedding_snr_db": self.embedding_snr_db,
            "quality": None if self.quality is None else self.quality.to_dict(),
            "channel_draws": self.channel_draws,
            "error": self.error,
        }

    @staticmethod
    def from_dict(data: dict) -> 'EvalRow':
        quality = data.get("quality")
        return EvalRow(
            scheme=data["scheme"],
            attack=data["attack"],
            channel_placement=data["channel_placement"],
            utterance_id=data["utterance_id"],
            bit_accuracy=data.get("bit_accuracy"),
            attacker_perf=data.get("attacker_perf"),
            quality=None if quality is None else QualityReport(**quality),
            channel_draws=data.get("channel_draws", []),
            payload_hex=data.get("payload_hex"),
            embedding_snr_db=data.get("embedding_snr_db"),
            error=data.get("error"),
        )


# metrics aggregated per grid cell, in report column order
METRICS = ["bit_accuracy", "attacker_perf", "embedding_snr_db", "mcd_db", "lsd_db", "f0_corr", "voiced_overlap",
           "snr_db", "speaker_sim"]


@dataclass
class EvalReport:
    rows: list
    aggregates: list
    spec: dict
    version: str
    global_seed: int

    @property
    def successful_rows(self) -> list:
        return [row for row in self.rows if row.ok]

    @property
    def error_rows(self) -> list:
        return [row for row in self.rows if not row.ok]

    def aggregate(self, scheme: str, attack: str, placement: str) -> dict:
        for agg in self.aggregates:
            if (agg["scheme"], agg["attack"], agg["channel_placement"]) == (scheme, attack, placement):
                return agg
        raise KeyError(f"No aggregate for scheme {scheme}, attack {attack}, channel {placement}.")

    def mean(self, metric: str, scheme: str, attack: str, placement: str = "off") -> float:
        value = self.aggregate(scheme, attack, placement)[f"{metric}_mean"]
        return np.nan if value is None else value

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "global_seed": self.global_seed,
            "spec": self.spec,
            "aggregates": self.aggregates,
            "rows": [row.to_dict() for row in self.rows],
        }

    @staticmethod
    def from_dict(data: dict) -> 'EvalReport':
        return EvalReport(
            rows=[EvalRow.from_dict(row) for row in data["rows"]],
            aggregates=data["aggregates"],
            spec=data["spec"],
            version=data["version"],
            global_seed=data["global_seed"],
        )
