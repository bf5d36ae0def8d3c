"""Matrix product states: construction, canonical forms, overlaps, energies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..hamiltonian import LocalHamiltonian


@dataclass
class MPS:
    """Site tensors A_i of shape (D_{i-1}, d, D_i) with D_0 = D_n = 1."""

    tensors: list
    canonical_form: str = "none"
    center: int = -1

    def __post_init__(self):
        self.tensors = [np.asarray(A, dtype=complex) for A in self.tensors]
        if not self.tensors:
            raise ValueError("empty MPS")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bond dimensions must be 1")
        for A, B in zip(self.tensors, self.tensors[1:]):
            if A.shape[2] != B.shape[0]:
                raise ValueError("bond dimension mismatch")

    @property
    def n(self):
        return len(self.tensors)

    @property
    def d(self):
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self):
        return [1] + [A.shape[2] for A in self.tensors]

    def copy(self):
        return MPS([A.copy() for A in self.tensors], self.canonical_form, self.center)

    def to_dense(self):
        v = self.tensors[0].reshape(-1, self.tensors[0].shape[2])
        for A in self.tensors[1:]:
            v = (v @ A.reshape(A.shape[0], -1)).reshape(-1, A.shape[2])
        return v.reshape(-1)

    def norm(self):
        return float(np.sqrt(abs(mps_inner(self, self))))


def max_bond_dims(n, d, D):
    return [min(D, d**i, d ** (n - i)) for i in range(n + 1)]


def product_mps(local_states):
    return MPS([np.asarray(s, dtype=complex).reshape(1, -1, 1) for s in local_states], "left", len(local_states) - 1)


def random_mps(n, d, D, seed=0, normalize=True):
    rng = np.random.default_rng(seed)
    dims = max_bond_dims(n, d, D)
    ts = [rng.standard_normal((dims[i], d, dims[i + 1])) + 1j * rng.standard_normal((dims[i], d, dims[i + 1]))
          for i in range(n)]
    m = MPS(ts)
    if normalize:
        right_canonicalize(m)
    return m


def mps_from_state(psi, Dmax, d=2):
    """Left-to-right successive Schmidt decompositions, keeping at most Dmax values."""
    if Dmax < 1:
        raise ValueError("Dmax must be >= 1")
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("state must be normalised")
    n = int(round(np.log(psi.size) / np.log(d)))
    if d**n != psi.size:
        raise ValueError("state size is not a power of d")
    tensors = []
    rest = psi.reshape(1, -1)
    Dl = 1
    for i in range(n - 1):
        m = rest.reshape(Dl * d, -1)
        U, s, Vh = np.linalg.svd(m, full_matrices=False)
        keep = min(Dmax, int(np.sum(s > 1e-14 * max(s[0], 1e-300))) or 1)
        # svd returns descending values; stable ordering keeps the earlier index on ties
        U, s, Vh = U[:, :keep], s[:keep], Vh[:keep]
        tensors.append(U.reshape(Dl, d, keep))
        rest = s[:, None] * Vh
        Dl = keep
    last = rest.reshape(Dl, d, 1)
    nrm = np.linalg.norm(last)
    tensors.append(last / nrm)
    return MPS(tensors, "left", n - 1)


def left_canonicalize(m: MPS, upto=None):
    """QR sweep making sites [0, upto) left-canonical; the norm moves right."""
    upto = m.n - 1 if upto is None else upto
    for i in range(upto):
        A = m.tensors[i]
        Dl, d, Dr = A.shape
        Q, R = np.linalg.qr(A.reshape(Dl * d, Dr))
        k = Q.shape[1]
        m.tensors[i] = Q.reshape(Dl, d, k)
        m.tensors[i + 1] = np.tensordot(R, m.tensors[i + 1], axes=(1, 0))
    if upto == m.n - 1:
        last = m.tensors[-1]
        m.tensors[-1] = last / np.linalg.norm(last)
        m.canonical_form, m.center = "left", m.n - 1
    return m


def right_canonicalize(m: MPS, downto=0):
    """LQ sweep making sites (downto, n) right-canonical; the norm moves left."""
    for i in range(m.n - 1, downto, -1):
        A = m.tensors[i]
        Dl, d, Dr = A.shape
        Q, R = np.linalg.qr(A.reshape(Dl, d * Dr).T)
        k = Q.shape[1]
        m.tensors[i] = Q.T.reshape(k, d, Dr)
        m.tensors[i - 1] = np.tensordot(m.tensors[i - 1], R.T, axes=(2, 0))
    if downto == 0:
        first = m.tensors[0]
        m.tensors[0] = first / np.linalg.norm(first)
        m.canonical_form, m.center = "right", 0
    return m


def mixed_canonicalize(m: MPS, center):
    left_canonicalize(m, center)
    right_canonicalize(m, center)
    c = m.tensors[center]
    m.tensors[center] = c / np.linalg.norm(c)
    m.canonical_form, m.center = "mixed", center
    return m


def is_left_isometry(A, tol=1e-10):
    Dl, d, Dr = A.shape
    M = A.reshape(Dl * d, Dr)
    return np.max(np.abs(M.conj().T @ M - np.eye(Dr))) < tol


def is_right_isometry(A, tol=1e-10):
    Dl, d, Dr = A.shape
    M = A.reshape(Dl, d * Dr)
    return np.max(np.abs(M @ M.conj().T - np.eye(Dl))) < tol


def mps_inner(a: MPS, b: MPS):
    """<a|b> by left-to-right transfer matrices."""
    if a.n != b.n or a.d != b.d:
        raise ValueError("MPS shapes differ")
    E = np.ones((1, 1), dtype=complex)
    for A, B in zip(a.tensors, b.tensors):
        # E[a', b'] = sum conj(A[a,s,a']) E[a,b] B[b,s,b']
        E = np.einsum("ab,asc,bsd->cd", E, A.conj(), B, optimize=True)
    return complex(E[0, 0])


def _left_envs(m):
    envs = [np.ones((1, 1), dtype=complex)]
    for A in m.tensors:
        envs.append(np.einsum("ab,asc,bsd->cd", envs[-1], A.conj(), A, optimize=True))
    return envs


def _right_envs(m):
    envs = [np.ones((1, 1), dtype=complex)]
    for A in reversed(m.tensors):
        envs.append(np.einsum("asc,bsd,cd->ab", A.conj(), A, envs[-1], optimize=True))
    return envs[::-1]


def mps_expectation(m: MPS, H: LocalHamiltonian):
    """<m|H|m> / <m|m> summed term by term over left/right environments."""
    if H.n != m.n or any(d != m.d for d in H.dims):
        raise ValueError("Hamiltonian and MPS shapes differ")
    L, R = _left_envs(m), _right_envs(m)
    norm = L[-1][0, 0].real
    total = 0.0
    d = m.d
    for t in H.terms:
        s0, s1 = t.support[0], t.support[-1]
        span = list(range(s0, s1 + 1))
        block = m.tensors[s0]
        for i in span[1:]:
            block = np.tensordot(block, m.tensors[i], axes=(-1, 0))
        # block legs: (Dl, d x len(span), Dr)
        op_axes = [1 + span.index(s) for s in t.support]
        op = t.matrix.reshape([d] * (2 * t.k))
        applied = np.tensordot(op, block, axes=(list(range(t.k, 2 * t.k)), op_axes))
        applied = np.moveaxis(applied, list(range(t.k)), op_axes)
        Dl, Dr = block.shape[0], block.shape[-1]
        bra = block.reshape(Dl, -1, Dr)
        ket = applied.reshape(Dl, -1, Dr)
        val = np.einsum("ab,asc,bsd,cd->", L[s0], bra.conj(), ket, R[s1 + 1], optimize=True)
        total += val.real
    return float(total / norm)


def mps_schmidt_values(m: MPS, cut):
    """Schmidt coefficients across bond ``cut`` (sites [0,cut) | [cut,n))."""
    c = m.copy()
    mixed_canonicalize(c, cut)
    A = c.tensors[cut]
    return np.linalg.svd(A.reshape(A.shape[0], -1), compute_uv=False)
