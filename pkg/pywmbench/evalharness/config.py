from .experiment_types import *
import logging
from pathlib import Path
import yaml

logger = logging.getLogger('pywmbench.evalharness.config')


class ExperimentDefaults(object):
    """
    Fallback values for experiment documents, read once from experiment_defaults.yml.
    """

    @staticmethod
    def get_defaults() -> dict:

        if not hasattr(ExperimentDefaults, "DEFAULTS"):
            module_path = Path(__file__).parent

            defaults_path = module_path / 'experiment_defaults.yml'
            with open(defaults_path, 'r') as stream:
                ExperimentDefaults.DEFAULTS = yaml.safe_load(stream)

        return dict(ExperimentDefaults.DEFAULTS)


def apply_defaults(document: dict) -> dict:
    """
    Missing top-level keys are taken from the defaults. corpus and channel mappings are merged key by key,
    unless the corpus names wav files through paths or a directory.
    """
    merged = ExperimentDefaults.get_defaults()
    for key, value in document.items():
        default = merged.get(key)
        if isinstance(default, dict) and isinstance(value, dict):
            if key == "corpus" and ("paths" in value or "directory" in value):
                merged[key] = value
            else:
                merged[key] = dict(default, **value)
        else:
            merged[key] = value
    return merged


def parse_experiment(document) -> ExperimentSpec:
    """
    Validates an experiment document (already parsed from JSON or YAML). schema_version is mandatory,
    everything else falls back to the defaults.
    """
    if not isinstance(document, dict):
        raise ConfigException(f"expected a mapping at the top level but got {type(document).__name__}", "")
    if "schema_version" not in document:
        raise ConfigException("is required", "schema_version")
    return ExperimentSpec.from_dict(apply_defaults(document))


def load_experiment(path) -> ExperimentSpec:
    """
    Reads a JSON or YAML experiment file. Both are parsed by the YAML loader.

    :raises ConfigException: malformed document or invalid field, with the schema path
    :raises OSError: unreadable file
    """
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as stream:
        try:
            document = yaml.safe_load(stream)
        except yaml.YAMLError as err:
            logger.error(f"Can't parse experiment file {path}: {err}")
            raise ConfigException(f"malformed document: {err}", "") from err
    spec = parse_experiment(document)
    logger.info(f"Loaded experiment {path}: {len(spec.schemes)} schemes, {len(spec.attacks)} attacks, "
                f"{len(spec.placements)} channel placements.")
    return spec
