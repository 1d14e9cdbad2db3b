from .selfvc_types import *
from .pool import *
from .knn import *
from .attacks import *
from .quality import *
