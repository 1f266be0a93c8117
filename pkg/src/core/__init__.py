# Core modules
from .errors import NLItpError, ParseError, SortError
from .poly import Polynomial, VarOrder
from .model import Assignment, Clause, Formula, Literal, PolyConstraint, ExtendedConstraint
from .mcsat import Solver, SolverConfig, Status
from .itp import interpolate, eliminate_extended
from .gen import implicant, generalize
from .mc import TransitionSystem, check
