__version__ = "0.1.0"

from . import audio_core, watermark, channel, selfvc, evalharness
