"""Fourier-Hermite pseudospectral toolkit for the cubic defocusing NLS with
partial harmonic confinement (two free directions, one trapped direction) and
for its resonant large-box limit system.

Environment switches, read at import time:

* ``PHNLS_NO_EXT=1``   force the pure-numpy kernels even if the compiled
  extension is available.
* ``PHNLS_THREADS=k``  cap the thread count used by the compiled kernels
  (and, best effort, by the BLAS backing the fallback path).
"""

import os as _os

_threads = _os.environ.get("PHNLS_THREADS")
if _threads:
    # best effort for BLAS pools; only effective if numpy is not loaded yet
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from . import analysis, cli, dcr, hermite, pnls, propagators, state, tensor

__all__ = [
    "analysis",
    "cli",
    "dcr",
    "hermite",
    "pnls",
    "propagators",
    "state",
    "tensor",
    "__version__",
]
