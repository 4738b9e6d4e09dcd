"""Aleksandrov--Clark measures of matrix-valued Schur functions.

Build a Schur function with :func:`construct`, pair it with a unitary in a
:class:`ClarkFrame`, then compute atoms, densities, Caratheodory data and
angular derivatives.  ``CLARKKIT_THREADS`` caps BLAS threads when set before
the first import.
"""

import os as _os

_threads = _os.environ.get("CLARKKIT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .atoms import MatrixMeasure, clark_measure, directional_carrier, find_atoms, point_mass  # noqa: E402
from .caratheodory import boundary_gram, boundary_kernel, cad, cara_condition, codirection_space, verify_cad_pointmass  # noqa: E402
from .herglotz import ClarkFrame, ac_density, defect, resolvent  # noqa: E402
from .limits import LimitResult, StolzPath, make_path, nt_limit  # noqa: E402
from .linalg import Subspace, pinv, proj, range_basis  # noqa: E402
from .schur import SchurFunction, construct  # noqa: E402
from .singularity import alpha_sweep, shared_atoms, vector_mutual_singularity  # noqa: E402

__all__ = [
    "ClarkFrame",
    "LimitResult",
    "MatrixMeasure",
    "SchurFunction",
    "StolzPath",
    "Subspace",
    "ac_density",
    "alpha_sweep",
    "boundary_gram",
    "boundary_kernel",
    "cad",
    "cara_condition",
    "clark_measure",
    "codirection_space",
    "construct",
    "defect",
    "directional_carrier",
    "find_atoms",
    "make_path",
    "nt_limit",
    "pinv",
    "point_mass",
    "proj",
    "range_basis",
    "resolvent",
    "shared_atoms",
    "vector_mutual_singularity",
    "verify_cad_pointmass",
]
