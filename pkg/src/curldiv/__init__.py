"""Finite element solver for 3-D curl-div boundary value problems.

Two single-field formulations on tetrahedral meshes: a divergence-free
Raviart-Thomas subspace with tangential boundary data, and a curl-free
Nedelec subspace with normal boundary data.  Gauge fixing by a
boundary-first tree-cotree decomposition with explicit homology
generators; both reduced systems are symmetric positive definite.
"""

from .mesh import Mesh, MeshError, build_mesh
from .meshes import (hollow_ball_mesh, single_tet_mesh, solid_torus_mesh,
                     structured_cube_mesh)
from .topology import (HomologyBasis, TopologyError, TreeCotree, betti,
                       build_boundary_first_tree, domain_homology_basis,
                       fundamental_cycle, surface_cycle_basis)
from .elements import (CoefficientField, ElementError, FEFunction, Space,
                       differential, eval_at_points, eval_fe, interpolate,
                       locate_tet, zero_function)
from .gauge import (GaugedCurlBasis, ReducedNodalBasis, build_L_star,
                    build_N_star, curl_image_basis, verify_periods)
from .lifts import (CurlData, DivergenceData, LiftError, clean_curl_data,
                    component_fluxes, cycle_period, nedelec_potential,
                    rt_potential)
from .solver import (AssembledSystem, NormalProblem, Solution, SolverError,
                     TangentialProblem, assemble_normal, assemble_tangential,
                     edge_mass_matrix, error_norms, recover_solution,
                     rt_mass_matrix, solve_spd, validate_tangential)
from .mms import MMSCase, MMSError, REGISTRY, discrete_alpha, discrete_beta, get_case
from .msh import GmshData, MshParseError, read_gmsh, write_gmsh
from .vtk import write_vtk
from .cli import (ProblemConfig, compute_topology, parse_config,
                  run_convergence, solve_on_mesh, topology_report)
from .quadrature import QuadratureError, QuadratureRule, make_quadrature
from .kernels import HAVE_NUMBA

__version__ = "0.1.0"
