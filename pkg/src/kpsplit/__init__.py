"""Split-step Fourier / semi-Lagrangian discontinuous Galerkin solvers for the KP equation."""

from ._kernels import BACKEND
from .costmodel import CostModelInput, exp2_cost, strang_cost
from .dg import DGField1D, DGField2D, DGGrid, gauss_legendre_rule
from .errors import Divergence, InvalidArgument, KPError, NumericalFailure, SingularJacobian, StepRejected
from .exact import bessel_j, burgers_sine_exact
from .initial import GridSpec, InitialCondition, make_initial
from .integrators import Scheme, SchemeConfig, evolve, exp2_step, strang_step
from .sldg import CharSolver, CharSolverConfig, sldg_step, sldg_step_rows
from .spectral import GridField2D, KPParams, ProjectionTransfer, apply_propagator

__all__ = [
    "BACKEND", "CharSolver", "CharSolverConfig", "CostModelInput", "DGField1D", "DGField2D", "DGGrid",
    "Divergence", "GridField2D", "GridSpec", "InitialCondition", "InvalidArgument", "KPError",
    "KPParams", "NumericalFailure", "ProjectionTransfer", "Scheme", "SchemeConfig",
    "SingularJacobian", "StepRejected", "apply_propagator", "bessel_j", "burgers_sine_exact",
    "evolve", "exp2_cost", "exp2_step", "gauss_legendre_rule", "make_initial", "sldg_step",
    "sldg_step_rows", "strang_cost", "strang_step",
]
__version__ = "0.1.0"
