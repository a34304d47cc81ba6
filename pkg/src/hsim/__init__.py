"""Laplace-Beltrami eigenpairs on triangle meshes by hierarchical subspace iteration."""

from .errors import HsimError, NumericalError
from .hierarchy import Hierarchy, build_hierarchy, plan_levels
from .mesh import TriangleMesh, load_mesh
from .operators import OperatorPair, assemble
from .sim import EigenSolution, SimConfig, sim_solve
from .solver import HsimConfig, HsimReport, hsim_solve, sim_baseline_solve

__all__ = [
    "EigenSolution",
    "Hierarchy",
    "HsimConfig",
    "HsimError",
    "HsimReport",
    "NumericalError",
    "OperatorPair",
    "SimConfig",
    "TriangleMesh",
    "assemble",
    "build_hierarchy",
    "hsim_solve",
    "load_mesh",
    "plan_levels",
    "sim_baseline_solve",
    "sim_solve",
]
