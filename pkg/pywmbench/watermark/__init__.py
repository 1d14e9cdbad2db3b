from .watermark_types import *
from .blocks import *
from .dct_norm import *
from .spread_spectrum import *
from .echo_hiding import *
from .metrics import *
from .schemes import *
