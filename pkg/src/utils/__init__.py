# Utility modules
from .constants import *
