"""Complex Schottky groups on homogeneous rational manifolds."""

import os

# cap BLAS threads before numpy loads
_threads = os.environ.get("SCHOTTKY_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .numlin import DEFAULT_TOL, Tolerances, SubspaceBasis, intersect_dim, rank_with_tol  # noqa: E402
from .rootsys import RootSystem, build_root_system, parabolic  # noqa: E402
from .satake import (ClassificationRecord, classify_all, hypersurface_records,  # noqa: E402
                     minimal_orbit_codim, sigma_for, form_from_label)
from .geom import FlagModel, PairCore, make_model, parse_model, schottky_pair_core  # noqa: E402
from .schottky import (MoveSearchOptions, PingPongCertificate, SchottkyGroupSpec,  # noqa: E402
                       build_group, certify_ping_pong, reduced_word_count, reduced_words)
from .invariants import (InvariantReport, LieSubalgebra, fixed_subalgebra,  # noqa: E402
                         generic_orbit_codim, kuranishi_dimension, topology_report,
                         verify_rational_invariance, zariski_closure_algebra)
