# Parser modules
from .script import parse_script, parse_polys, parse_model, print_term, print_model
from .system import parse_system
