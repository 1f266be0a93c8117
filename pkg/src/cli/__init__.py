# Command-line modules
from .app import NLItpApp, RunConfig, RunReport, build_parser, main, parse_args
