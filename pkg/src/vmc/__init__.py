"""Virtual Markov chains: coherent families of chains on ``1..N`` with a cemetery.

Exact rational projections of transition matrices and paths, compatibility of
initial marginals, equilibrium and stationary families, the doubly-stochastic
virtual polytope, virtual permutations, and Monte Carlo samplers.
"""

__version__ = "0.1.0"

from .birkhoff import (
    Condition,
    KernelVerdict,
    PairConvexityReport,
    Segment,
    classify_pair,
    convex_combination_in_b,
    ds_project,
    kernel_witness_suite,
    miracle_identity_check,
)
from .compat import (
    CanonicalDataEstimate,
    D2Vector,
    canonical_data_estimate,
    check_compatibility,
    delta_vid,
    psi,
    psi_inverse,
)
from .equilibrium import equilibrium_dist, equilibrium_family, stationary_family
from .errors import VmcError
from .examples import (
    LadderParams,
    ladder_vtm,
    reflecting_walk_vtm,
    splitting_vtm_vid,
    uniform_vtm,
)
from .initdist import BernoulliHierarchy, MarkovianInitialLaw, VidPrefix, law_from_marginals, marginals
from .monotone import MonotonePrefix, brute_force_vertices, extreme_witness
from .pathspace import PathPrefix, Tail, project_path, visit_indices
from .sim import sample_vmc, simulate_renewal, simulate_splitting
from .transmat import TruncatedTM, VtmPrefix, check_vtm_prefix, project_tm, project_tm_to
from .vperm import VPermPrefix, random_prefix, vtm_of

__all__ = [name for name in dir() if not name.startswith("_")]
