"""Numerical checks of Rellich-type identities for Dirichlet eigenfunctions on polytopes."""
from .exact import ExactEigenfunction, exact_neumann_masses
from .fem_eigen import EigenPair, SpectrumRequest, assemble, solve_spectrum
from .geometry import (
    ApexPoint,
    Face,
    HypothesisFails,
    InscribedBall,
    NoSuchPoint,
    NotTangential,
    Polytope,
    build_polytope,
    corollary2_apex,
    equal_volume_apex,
    inscribed_ball,
    signed_distance,
    signed_pyramid_volume,
    total_volume,
)
from .meshing import Mesh, refine, triangulate
from .neumann import FemSource, NeumannReport, neumann_masses, neumann_masses_fem, rellich_boundary_integral
from .verify import IdentityReport, Skipped, SuiteConfig, run_suite

__version__ = "0.1.0"
