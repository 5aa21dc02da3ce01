"""Exact symbolic and numeric toolkit for the open Toda lattice.

Symmetry fields, Lie-derivative calculus, Lagrangian one-form hierarchies,
Lagrange and Poisson brackets, recursion operators and Hamiltonians, plus
numerical integration for trajectory-level checks.
"""

from .errors import (
    DomainError,
    GaugeError,
    KernelError,
    NotHamiltonianError,
    SingularEvaluationError,
    SingularStructureError,
    StiffnessError,
    TodaError,
)
from .expr import Expr, RationalExpr, Ring, parse
from .lattice import LatticeConfig, PhaseState, SecondOrderState, flow_field, hamiltonian0
from .symmetry import commutator_table, lie_bracket, lie_derivative, master_residual, symmetry_field
from .tensors import Matrix, OneForm, SigmaMatrix, VectorField
from .hierarchy import HierarchyLevel, StrongSymmetry, base_level, curl, lift, strong_symmetry

__version__ = "0.1.0"
