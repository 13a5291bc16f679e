"""Pseudospectral solvers and audits for 2D viscous Hamilton-Jacobi equations
and stationary mean field games on the flat torus."""

from .audit import EstimateReport, adversarial_ratio_search, audit, check_identities, young_decomposition
from .errors import BlowUp, DegenerateSource, NegativeV, NonConvergence, PositivityLoss, SolverError
from .fokker_planck import FPSolution, drift_from_hamiltonian, solve_fp
from .hj import (
    HamiltonianSpec,
    HJProblem,
    HJSolution,
    continuation_solve,
    convexity_audit_1d,
    solve_hj,
    solve_hj_1d,
)
from .mfg import CouplingSpec, MFGProblem, MFGSolution, alpha_sweep, solve_mfg, solve_mfg_hopf_cole
from .torus import Field2D, SpectralField

__version__ = "0.1.0"
