"""nearkit: solvers for generalized matrix nearness problems
min over X in S of ||A - B X C|| in Schatten norms.

Exact Frobenius solvers live in :mod:`nearkit.frobsolve`, Schatten proximal
operators in :mod:`nearkit.prox`, and the norm-general iterative driver in
:mod:`nearkit.dykstra`.
"""

from . import constraints, dykstra, experiments, frobsolve, io, matlin, prox
from .constraints import CapabilityError
from .dykstra import NearnessProblem, SolveReport, SolverOptions, solve
from .matlin import NumericError
from .prox import schatten_norm

__version__ = "0.1.0"

__all__ = [
    "constraints", "dykstra", "frobsolve", "io", "matlin", "prox",
    "CapabilityError", "NumericError",
    "NearnessProblem", "SolverOptions", "SolveReport",
    "solve", "schatten_norm", "__version__",
]
