from .corpus import *
from .experiment_types import *
from .config import *
from .report import *
from .experiment import *
