from dataclasses import fields, MISSING
from enum import Enum
import logging
import numbers

from .errors import ConfigException

logger = logging.getLogger('pywmbench.utils.config')


def join_path(path: str, name) -> str:
    if isinstance(name, int):
        return f"{path}[{name}]"
    if not path:
        return name
    return f"{path}.{name}"


def coerce_value(value, template, path: str):
    """
    Converts a value read from a yaml or json document to the type of `template` (the field default).
    """
    if isinstance(template, bool):
        if not isinstance(value, bool):
            raise ConfigException(f"expected true or false but got {value!r}", path)
        return value
    if isinstance(template, Enum):
        try:
            return type(template)(value)
        except ValueError as err:
            allowed = ', '.join(member.value for member in type(template))
            raise ConfigException(f"'{value}' is not one of {allowed}", path) from err
    if isinstance(template, numbers.Integral):
        if isinstance(value, bool) or not isinstance(value, numbers.Real) or int(value) != value:
            raise ConfigException(f"expected an integer but got {value!r}", path)
        return int(value)
    if isinstance(template, numbers.Real):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise ConfigException(f"expected a number but got {value!r}", path)
        return float(value)
    if isinstance(template, tuple):
        # entries are coerced like the first default entry, lengths are checked by the config itself
        if not isinstance(value, (list, tuple)) or len(value) == 0:
            raise ConfigException(f"expected a non-empty list but got {value!r}", path)
        element = template[0] if template else None
        return tuple(coerce_value(v, element, join_path(path, idx)) for idx, v in enumerate(value))
    if isinstance(template, str):
        if not isinstance(value, str):
            raise ConfigException(f"expected a string but got {value!r}", path)
        return value
    return value


def config_from_dict(cls, data: dict, path: str = ""):
    """
    Builds the dataclass `cls` from a mapping. Missing fields keep their defaults, unknown fields are
    rejected. Validation errors raised by the dataclass are re-raised with the full field path.
    """
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigException(f"expected a mapping but got {type(data).__name__}", path)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigException(f"unknown field(s): {', '.join(str(u) for u in unknown)}", path)

    kwargs = {}
    for name, value in data.items():
        default = known[name].default
        if default is MISSING and known[name].default_factory is not MISSING:
            default = known[name].default_factory()
        kwargs[name] = value if default is MISSING else coerce_value(value, default, join_path(path, name))
    try:
        return cls(**kwargs)
    except ConfigException as err:
        logger.debug(f"Invalid {cls.__name__} at '{path}': {err}")
        raise ConfigException(err.message, join_path(path, err.path) if err.path else path) from err


def config_to_dict(config) -> dict:
    result = {}
    for f in fields(config):
        value = getattr(config, f.name)
        if isinstance(value, Enum):
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        result[f.name] = value
    return result
