"""Hot inner loops.

Every kernel has a numba implementation and a pure-numpy twin with the same
signature.  The numba path is used unless ``QHC_DISABLE_NUMBA`` is set (see
:mod:`qhc._config`) or numba fails to import.  Both paths are exercised by the
test-suite and compared in ``benchmarks/bench_kernels.py``.

Basis convention: site 0 is the most significant digit of the flat index.
"""

import numpy as np

from . import _config

try:  # pragma: no cover - exercised implicitly
    import numba
    from numba import prange

    # prefer OpenMP/workqueue over an outdated TBB that only emits warnings
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def strides(dims):
    dims = np.asarray(dims, dtype=np.int64)
    out = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        out[i] = out[i + 1] * dims[i + 1]
    return out


def support_offsets(dims, support):
    """Index bookkeeping for applying an operator on ``support``.

    Returns ``(bases, offsets)`` such that the amplitudes touched by the
    operator for a fixed configuration of the other sites are
    ``psi[base + offsets]``, with ``offsets`` ordered row-major over the
    support.
    """
    dims = np.asarray(dims, dtype=np.int64)
    st = strides(dims)
    support = list(support)
    sup_dims = dims[support]
    k = int(np.prod(sup_dims)) if len(support) else 1
    offsets = np.zeros(k, dtype=np.int64)
    if support:
        grid = np.indices(sup_dims).reshape(len(support), -1)
        offsets = (grid * st[support][:, None]).sum(axis=0)
    rest = [i for i in range(len(dims)) if i not in set(support)]
    if rest:
        rgrid = np.indices(dims[rest]).reshape(len(rest), -1)
        bases = (rgrid * st[rest][:, None]).sum(axis=0)
    else:
        bases = np.zeros(1, dtype=np.int64)
    return np.ascontiguousarray(bases, dtype=np.int64), np.ascontiguousarray(offsets)


# ---------------------------------------------------------------------------
# numpy reference path


def _apply_term_np(psi, out, bases, offsets, mat):
    idx = bases[:, None] + offsets[None, :]
    out[idx] += psi[idx] @ mat.T


def _classical_diagonal_np(n, ei, ej, w, field):
    b = np.arange(2**n, dtype=np.int64)
    x = 1 - 2 * ((b[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1)
    e = np.zeros(2**n)
    for i, j, wij in zip(ei, ej, w):
        e += wij * x[:, i] * x[:, j]
    e += x @ np.asarray(field, dtype=float)
    return e


def _cnf_violations_np(n, var, neg, arity):
    b = np.arange(2**n, dtype=np.int64)
    bits = (b[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    count = np.zeros(2**n, dtype=np.int64)
    for c in range(var.shape[0]):
        sat = np.zeros(2**n, dtype=bool)
        for t in range(arity[c]):
            val = bits[:, var[c, t]].astype(bool)
            sat |= ~val if neg[c, t] else val
        count += ~sat
    return count


# ---------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @numba.njit(parallel=True, cache=True, nogil=True)
    def _apply_term_nb(psi, out, bases, offsets, mat, nchunk):  # pragma: no cover - jitted
        # one chunk of bases per thread, each with a single scratch buffer
        k = offsets.shape[0]
        nb = bases.shape[0]
        nchunk = max(1, min(nchunk, nb))
        for ch in prange(nchunk):
            buf = np.empty(k, dtype=psi.dtype)
            for bi in range(ch * nb // nchunk, (ch + 1) * nb // nchunk):
                b = bases[bi]
                for c in range(k):
                    buf[c] = psi[b + offsets[c]]
                for r in range(k):
                    acc = 0.0j
                    for c in range(k):
                        acc += mat[r, c] * buf[c]
                    out[b + offsets[r]] += acc

    @numba.njit(parallel=True, cache=True, nogil=True)
    def _classical_diagonal_nb(n, ei, ej, w, field):  # pragma: no cover - jitted
        size = 1 << n
        e = np.zeros(size)
        for b in prange(size):
            acc = 0.0
            for t in range(ei.shape[0]):
                xi = 1 - 2 * ((b >> (n - 1 - ei[t])) & 1)
                xj = 1 - 2 * ((b >> (n - 1 - ej[t])) & 1)
                acc += w[t] * xi * xj
            for i in range(n):
                acc += field[i] * (1 - 2 * ((b >> (n - 1 - i)) & 1))
            e[b] = acc
        return e

    @numba.njit(parallel=True, cache=True, nogil=True)
    def _cnf_violations_nb(n, var, neg, arity):  # pragma: no cover - jitted
        # a clause is violated iff every literal is false: (b & mask) == pattern
        m = var.shape[0]
        mask = np.zeros(m, dtype=np.int64)
        pattern = np.zeros(m, dtype=np.int64)
        for c in range(m):
            for t in range(arity[c]):
                bit = np.int64(1) << (n - 1 - var[c, t])
                mask[c] |= bit
                if neg[c, t] == 1:
                    pattern[c] |= bit
        size = 1 << n
        count = np.zeros(size, dtype=np.int64)
        for b in prange(size):
            v = 0
            for c in range(m):
                if (b & mask[c]) == pattern[c]:
                    v += 1
            count[b] = v
        return count


def use_numba():
    return HAVE_NUMBA and not _config.DISABLE_NUMBA


def apply_term(psi, out, bases, offsets, mat, backend=None):
    """``out += (mat on support) @ psi`` for a flat complex state ``psi``."""
    if (backend or ("numba" if use_numba() else "numpy")) == "numba":
        _apply_term_nb(psi, out, bases, offsets, np.ascontiguousarray(mat, dtype=np.complex128),
                       numba.get_num_threads())
    else:
        _apply_term_np(psi, out, bases, offsets, mat)


def classical_diagonal(n, edges, weights, field, backend=None):
    """Energies ``sum J_ij x_i x_j + sum f_i x_i`` for every basis string, x = 1 - 2b."""
    ei = np.array([e[0] for e in edges], dtype=np.int64)
    ej = np.array([e[1] for e in edges], dtype=np.int64)
    w = np.asarray(weights, dtype=float)
    field = np.asarray(field, dtype=float)
    if (backend or ("numba" if use_numba() else "numpy")) == "numba":
        return _classical_diagonal_nb(n, ei, ej, w, field)
    return _classical_diagonal_np(n, ei, ej, w, field)


def cnf_violations(n, clauses, backend=None):
    """Number of violated clauses for every assignment (bit 1 = True)."""
    m = len(clauses)
    var = np.zeros((max(m, 1), 3), dtype=np.int64)
    neg = np.zeros((max(m, 1), 3), dtype=np.int64)
    arity = np.zeros(max(m, 1), dtype=np.int64)
    for c, clause in enumerate(clauses):
        arity[c] = len(clause)
        for t, lit in enumerate(clause):
            var[c, t] = abs(lit) - 1
            neg[c, t] = 1 if lit < 0 else 0
    if m == 0:
        return np.zeros(2**n, dtype=np.int64)
    if (backend or ("numba" if use_numba() else "numpy")) == "numba":
        return _cnf_violations_nb(n, var, neg, arity)
    return _cnf_violations_np(n, var, neg, arity)
