from .watermark_types import *
from .dct_norm import DctNormWatermarker
from .spread_spectrum import SpreadSpectrumWatermarker
from .echo_hiding import EchoWatermarker
import logging
from pathlib import Path
import yaml

logger = logging.getLogger('pywmbench.watermark.schemes')


class SchemeRegistry(object):
    """
    Looks up watermarking schemes by name. Default configurations are read once from schemes.yml.
    """
    WATERMARKERS = {
        SchemeName.dct_norm: (DctNormWatermarker, DctNormConfig),
        SchemeName.spread_spectrum: (SpreadSpectrumWatermarker, SpreadSpectrumConfig),
        SchemeName.echo: (EchoWatermarker, EchoConfig),
    }

    @staticmethod
    def names() -> list:
        return [name.value for name in SchemeRegistry.WATERMARKERS]

    @staticmethod
    def get_defaults(scheme_name: str) -> dict:

        if not hasattr(SchemeRegistry, "DEFAULTS"):
            module_path = Path(__file__).parent

            defaults_path = module_path / 'schemes.yml'
            with open(defaults_path, 'r') as stream:
                SchemeRegistry.DEFAULTS = yaml.safe_load(stream)

        if scheme_name in SchemeRegistry.DEFAULTS:
            return dict(SchemeRegistry.DEFAULTS[scheme_name])
        else:
            logger.error(f"Trying to use unknown watermarking scheme {scheme_name}.")
            raise ValueError(f'{scheme_name} is not an available watermarking scheme. '
                             f'Choose one of {", ".join(SchemeRegistry.names())}.')

    @staticmethod
    def build_config(scheme_name: str, overrides: dict = None, path: str = ""):
        """
        Scheme defaults updated with `overrides`, validated into the scheme's config class.
        """
        settings = SchemeRegistry.get_defaults(scheme_name)
        if overrides:
            if not isinstance(overrides, dict):
                raise ConfigException(f"expected a mapping but got {type(overrides).__name__}", path)
            settings.update(overrides)
        _, config_class = SchemeRegistry.WATERMARKERS[SchemeName(scheme_name)]
        return config_class.from_dict(settings, path)

    @staticmethod
    def get_watermarker(scheme_name: str, config=None):
        """
        :param scheme_name: dct_norm, spread_spectrum or echo
        :param config: matching config object, a dict of overrides or None for the defaults
        """
        if config is None or isinstance(config, dict):
            config = SchemeRegistry.build_config(scheme_name, config)
        watermarker_class, config_class = SchemeRegistry.WATERMARKERS[SchemeName(scheme_name)]
        if not isinstance(config, config_class):
            raise ConfigException(f"{scheme_name} needs a {config_class.__name__} but got {type(config).__name__}")
        return watermarker_class(config)


def get_watermarker(scheme_name: str, config=None):
    return SchemeRegistry.get_watermarker(scheme_name, config)
