"""Process-wide knobs: numba toggle and dense/Lanczos size caps."""

import os

#: Set ``QHC_DISABLE_NUMBA=1`` to force the pure-numpy kernel path.
DISABLE_NUMBA = os.environ.get("QHC_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

#: Largest Hilbert-space dimension we assemble as a dense matrix.
DENSE_CAP = 2**20

#: Largest state vector the matrix-free Lanczos path will allocate.
LANCZOS_CAP = 2**24

numba_options = {
    "nopython": True,
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
}


class CapExceeded(ValueError):
    """Requested dimension is above the configured cap."""


def check_dense(dim, cap=None):
    cap = DENSE_CAP if cap is None else cap
    if dim > cap:
        raise CapExceeded(f"dimension {dim} exceeds dense cap {cap}")


def check_lanczos(dim, cap=None):
    cap = LANCZOS_CAP if cap is None else cap
    if dim > cap:
        raise CapExceeded(f"dimension {dim} exceeds Lanczos cap {cap}")
