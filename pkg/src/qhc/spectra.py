"""Exact spectra, thermal states, correlations and entanglement."""

from __future__ import annotations

import io as _io
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import _config
from .hamiltonian import LocalHamiltonian, LocalTerm, assemble, embed_operator


class ConvergenceError(RuntimeError):
    pass


def _as_matrix(H, cap=None):
    if isinstance(H, LocalHamiltonian):
        return assemble(H, cap)
    H = np.asarray(H)
    _config.check_dense(H.shape[0], cap)
    return H


def degeneracy_tol(norm):
    return 1e-8 * max(1.0, float(norm))


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    ground_energy: float
    gap: float
    ground_degeneracy: int
    eigenvectors: Optional[np.ndarray] = None
    tau: float = 0.0

    @property
    def ground_space(self):
        if self.eigenvectors is None:
            raise ValueError("eigenvectors were not requested")
        return self.eigenvectors[:, : self.ground_degeneracy]

    def decide(self, a, b):
        """Raw k-LH decision: True if lambda_min <= a, False if >= b, None in between."""
        if self.ground_energy <= a:
            return True
        if self.ground_energy >= b:
            return False
        return None


def spectral_summary(evals, evecs=None) -> SpectralResult:
    evals = np.sort(np.asarray(evals, dtype=float))
    norm = np.max(np.abs(evals)) if len(evals) else 0.0
    tau = degeneracy_tol(norm)
    e0 = evals[0]
    above = evals[evals > e0 + tau]
    gap = float(above[0] - e0) if len(above) else 0.0
    deg = int(np.sum(evals <= e0 + tau))
    return SpectralResult(evals, float(e0), gap, deg, evecs, tau)


def dense_spectrum(H, want_vectors=False, cap=None) -> SpectralResult:
    """Full Hermitian eigendecomposition of ``H`` (LocalHamiltonian or matrix)."""
    M = _as_matrix(H, cap)
    if want_vectors:
        w, v = np.linalg.eigh(M)
        return spectral_summary(w, v)
    return spectral_summary(np.linalg.eigvalsh(M))


def _diagonal_if_classical(H: LocalHamiltonian):
    if not all(np.count_nonzero(t.matrix - np.diag(np.diag(t.matrix))) == 0 for t in H.terms):
        return None
    diag = np.zeros(H.dim)
    for t, (bases, offsets) in zip(H.terms, H._get_plans()):
        idx = bases[:, None] + offsets[None, :]
        diag[idx] += np.diag(t.matrix).real[None, :]
    return diag


def lanczos_ground(H: LocalHamiltonian, tol=1e-10, max_iter=None, seed=0, k=1, cap=None):
    """Lowest eigenpair(s) via ARPACK on the matrix-free Hamiltonian.

    Returns ``(energy, vector)`` for ``k == 1`` and ``(energies, vectors)`` otherwise.
    """
    dim = H.dim
    _config.check_lanczos(dim, cap)
    if dim <= max(64, 4 * k + 8):
        w, v = np.linalg.eigh(assemble(H))
        if k == 1:
            return float(w[0]), v[:, 0]
        return w[:k], v[:, :k]
    diag = _diagonal_if_classical(H)
    if diag is not None:
        # Krylov methods stall on diagonal operators with few distinct values
        order = np.argsort(diag, kind="stable")[:k]
        vecs = np.zeros((dim, k), dtype=complex)
        vecs[order, np.arange(k)] = 1.0
        if k == 1:
            return float(diag[order[0]]), vecs[:, 0]
        return diag[order], vecs
    op = H.linear_operator(cap)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    maxiter = max_iter if max_iter is not None else max(1000, 10 * dim)
    try:
        w, v = eigsh(op, k=k, which="SA", v0=v0, tol=tol * 1e-2, maxiter=maxiter,
                     ncv=min(dim - 1, max(2 * k + 1, 40)))
    except ArpackNoConvergence as exc:
        raise ConvergenceError(f"Lanczos did not converge after {maxiter} iterations") from exc
    order = np.argsort(w)
    w, v = w[order].real, v[:, order]
    if k == 1:
        vec = v[:, 0] / np.linalg.norm(v[:, 0])
        return float(w[0]), vec
    return w, v


# ---------------------------------------------------------------------------
# thermal states


@dataclass
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple

    def validate(self, tol=1e-10):
        m = self.matrix
        if abs(np.trace(m).real - 1.0) > tol:
            raise ValueError("density matrix trace deviates from 1")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise ValueError("density matrix is not PSD")
        return self


def _dims_of(H, dims=None):
    if dims is not None:
        return tuple(dims)
    if isinstance(H, LocalHamiltonian):
        return H.dims
    d = np.asarray(H).shape[0]
    return (d,)


def gibbs_state(H, beta, cap=None) -> DensityMatrix:
    """rho = exp(-beta H) / Z, computed with a ground-energy shift."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    w, v = np.linalg.eigh(_as_matrix(H, cap))
    p = np.exp(-beta * (w - w[0]))
    p /= p.sum()
    rho = (v * p) @ v.conj().T
    return DensityMatrix(rho, _dims_of(H))


def log_partition_function(H, beta, cap=None):
    w = np.linalg.eigvalsh(_as_matrix(H, cap))
    return float(-beta * w[0] + np.log(np.sum(np.exp(-beta * (w - w[0])))))


def partition_function(H, beta, cap=None):
    """Z = Tr exp(-beta H); may overflow to inf for extreme beta * ||H||."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    with np.errstate(over="ignore"):
        return float(np.exp(log_partition_function(H, beta, cap)))


def gibbs_expectation(H, beta, M=None, cap=None):
    """Tr(M rho_beta); ``M`` defaults to H."""
    Hm = _as_matrix(H, cap)
    rho = gibbs_state(Hm, beta).matrix
    Mm = Hm if M is None else _observable(M, _dims_of(H))
    return float(np.real(np.trace(Mm @ rho)))


def _observable(M, dims):
    if isinstance(M, LocalTerm):
        return embed_operator(M.matrix, M.support, dims)
    if isinstance(M, LocalHamiltonian):
        return assemble(M)
    return np.asarray(M)


def sim_expectation(H, rho, M, t, cap=None):
    """Tr[M U^dag rho U] / Tr[U^dag rho U] with U = exp(iHt), ``t`` possibly complex."""
    Hm = _as_matrix(H, cap)
    dims = _dims_of(H)
    R = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    Mm = _observable(M, dims)
    w, v = np.linalg.eigh(Hm)
    t = complex(t)
    # a scalar shift of H rescales numerator and denominator alike
    ref = w[0] if t.imag >= 0 else w[-1]
    phase = np.exp(1j * (w - ref) * t)
    U = (v * phase) @ v.conj().T
    evolved = U.conj().T @ R @ U
    den = np.trace(evolved)
    if abs(den) < 1e-300:
        raise ValueError("vanishing normalisation in simulation expectation")
    return float(np.real(np.trace(Mm @ evolved) / den))


# ---------------------------------------------------------------------------
# states, correlations, entanglement


def _check_norm(psi):
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalised (norm {nrm:.3e})")


def apply_local(psi, op, sites, dims):
    """Apply ``op`` (legs in the order of ``sites``) to a flat state vector."""
    n = len(dims)
    sites = list(sites)
    t = np.asarray(psi).reshape(dims)
    k = len(sites)
    ldims = [dims[s] for s in sites]
    o = np.asarray(op).reshape(ldims + ldims)
    t = np.tensordot(o, t, axes=(list(range(k, 2 * k)), sites))
    rest = [i for i in range(n) if i not in sites]
    order = sites + rest
    t = np.moveaxis(t, list(range(n)), order)
    return t.reshape(-1)


def reduced_density(state, subset, dims) -> DensityMatrix:
    """Partial trace onto ``subset`` (ascending order)."""
    dims = tuple(dims)
    n = len(dims)
    subset = sorted(int(s) for s in subset)
    if not subset or len(subset) >= n + 1 or any(s < 0 or s >= n for s in subset):
        raise ValueError(f"invalid subset {subset}")
    if len(set(subset)) != len(subset):
        raise ValueError("repeated site in subset")
    rest = [i for i in range(n) if i not in subset]
    dA = int(np.prod([dims[s] for s in subset]))
    if isinstance(state, DensityMatrix) or np.asarray(state).ndim == 2:
        R = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
        t = R.reshape(dims + dims)
        perm = subset + rest + [n + s for s in subset] + [n + r for r in rest]
        dB = R.shape[0] // dA
        t = t.transpose(perm).reshape(dA, dB, dA, dB)
        return DensityMatrix(np.einsum("ajbj->ab", t), tuple(dims[s] for s in subset))
    psi = np.asarray(state).ravel()
    _check_norm(psi)
    m = psi.reshape(dims).transpose(subset + rest).reshape(dA, -1)
    return DensityMatrix(m @ m.conj().T, tuple(dims[s] for s in subset))


def two_point_correlation(state, O_m, O_n, m, n, dims):
    """Tr[rho (O_m (x) O_n)] with identities elsewhere."""
    dims = tuple(dims)
    if m == n:
        raise ValueError("sites must differ")
    for s in (m, n):
        if s < 0 or s >= len(dims):
            raise ValueError(f"site {s} out of range")
    if isinstance(state, DensityMatrix) or np.asarray(state).ndim == 2:
        rho = reduced_density(state, [m, n], dims).matrix
        op = np.kron(O_m, O_n) if m < n else np.kron(O_n, O_m)
        return complex(np.trace(rho @ op))
    psi = np.asarray(state).ravel()
    phi = apply_local(apply_local(psi, O_n, [n], dims), O_m, [m], dims)
    return complex(np.vdot(psi, phi))


def correlation_table(state, O, dims, pairs=None):
    n = len(dims)
    if pairs is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return [(i, j, two_point_correlation(state, O, O, i, j, dims).real) for i, j in pairs]


def schmidt_coefficients(state, cut, dims):
    """Schmidt coefficients across sites [0, cut) | [cut, n)."""
    dims = tuple(dims)
    if cut < 1 or cut >= len(dims):
        raise ValueError(f"cut must be in [1, {len(dims) - 1}]")
    psi = np.asarray(state).ravel()
    _check_norm(psi)
    dA = int(np.prod(dims[:cut]))
    return np.linalg.svd(psi.reshape(dA, -1), compute_uv=False)


def schmidt_rank(state, cut, dims, tol=1e-8):
    s = schmidt_coefficients(state, cut, dims)
    return int(np.sum(s > tol))


def entropy_from_schmidt(s, cutoff=1e-12):
    s = np.asarray(s)
    s = s[s > cutoff]
    p = s**2
    return max(0.0, float(-np.sum(p * np.log2(p))))


def entanglement_entropy(state, cut, dims):
    """Von Neumann entropy (bits) of the left block [0, cut)."""
    return entropy_from_schmidt(schmidt_coefficients(state, cut, dims))


def von_neumann_entropy(rho):
    R = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = np.linalg.eigvalsh(R)
    w = w[w > 1e-24]
    return float(-np.sum(w * np.log2(w)))


# ---------------------------------------------------------------------------
# CSV emitters


def _csv(header, rows):
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(x if isinstance(x, str) else (f"{x:d}" if isinstance(x, (int, np.integer)) else f"{x:.17g}")
                           for x in row) + "\n")
    return buf.getvalue()


def spectrum_csv(eigenvalues):
    return _csv(["index", "eigenvalue"], [(i, float(e)) for i, e in enumerate(eigenvalues)])


def correlation_csv(rows):
    return _csv(["i", "j", "value"], [(int(i), int(j), float(v)) for i, j, v in rows])


def entropy_csv(rows):
    return _csv(["cut", "entropy"], [(int(c), float(s)) for c, s in rows])


def csv_table(header, rows):
    return _csv(header, rows)
