from .audio_types import *
from .audio_io import *
from .transforms import *
from .features import *
from .phase import *
from .pitch import *
