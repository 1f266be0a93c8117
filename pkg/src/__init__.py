# NLItp - Nonlinear Real Arithmetic Interpolation and Model Checking
from .utils.version import __version__
