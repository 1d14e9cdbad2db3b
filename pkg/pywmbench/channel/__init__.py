from .channel_types import *
from .noise import *
from .distortions import *
from .channel import *
