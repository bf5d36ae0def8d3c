"""Single-site DMRG driven directly by a nearest-neighbour term list.

No MPO is built.  Each left block carries its own Hamiltonian in the bond
basis plus the operators needed to couple it to the next site; right blocks
mirror that.  Two-site terms are split as sum_k a_k (x) b_k by an operator
Schmidt decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from ..hamiltonian import LocalHamiltonian
from .mps import MPS, max_bond_dims, random_mps, right_canonicalize

DENSE_EFF = 256


def split_two_site(h, d, tol=1e-14):
    """h = sum_k a_k (x) b_k with a_k, b_k d x d."""
    t = np.asarray(h).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    U, s, Vh = np.linalg.svd(t)
    keep = s > tol * max(s[0], 1e-300)
    a = [np.sqrt(x) * U[:, k].reshape(d, d) for k, x in enumerate(s) if keep[k]]
    b = [np.sqrt(x) * Vh[k].reshape(d, d) for k, x in enumerate(s) if keep[k]]
    return a, b


def chain_terms(H: LocalHamiltonian):
    """Collect 1-local terms per site and 2-local terms per bond (i, i+1)."""
    n, d = H.n, H.dims[0]
    if any(x != d for x in H.dims):
        raise ValueError("DMRG needs a uniform local dimension")
    onsite = [np.zeros((d, d), dtype=complex) for _ in range(n)]
    bond = [np.zeros((d * d, d * d), dtype=complex) for _ in range(n - 1)]
    for t in H.terms:
        if t.k == 1:
            onsite[t.support[0]] += t.matrix
        elif t.k == 2 and t.support[1] == t.support[0] + 1:
            bond[t.support[0]] += t.matrix
        else:
            raise ValueError(f"term on {t.support} is not 1D nearest-neighbour")
    splits = [split_two_site(b, d) if np.any(b) else ([], []) for b in bond]
    return onsite, splits


@dataclass
class _Env:
    H: np.ndarray
    ops: list = field(default_factory=list)  # boundary operators coupling to the neighbour


def _grow_left(env, A, onsite, b_prev, a_next):
    """Absorb left-canonical site tensor A into a left block."""
    Dl, d, Dr = A.shape
    # operator acting on (left bond, physical) of the block being absorbed
    Hb = np.einsum("asc,ab,bsd->cd", A.conj(), env.H, A, optimize=True)
    Hb += np.einsum("asc,st,atd->cd", A.conj(), onsite, A, optimize=True)
    for X, bk in zip(env.ops, b_prev):
        Hb += np.einsum("asc,ab,st,btd->cd", A.conj(), X, bk, A, optimize=True)
    ops = [np.einsum("asc,st,atd->cd", A.conj(), ak, A, optimize=True) for ak in a_next]
    return _Env(Hb, ops)


def _grow_right(env, B, onsite, a_next, b_prev):
    """Absorb right-canonical site tensor B into a right block."""
    Hb = np.einsum("csa,ab,dsb->cd", B.conj(), env.H, B, optimize=True)
    Hb += np.einsum("csa,st,dta->cd", B.conj(), onsite, B, optimize=True)
    for Y, ak in zip(env.ops, a_next):
        Hb += np.einsum("csa,ab,st,dtb->cd", B.conj(), Y, ak, B, optimize=True)
    ops = [np.einsum("csa,st,dta->cd", B.conj(), bk, B, optimize=True) for bk in b_prev]
    return _Env(Hb, ops)


def _heff_apply(theta, L, R, onsite, b_left, a_right):
    out = np.tensordot(L.H, theta, axes=(1, 0))
    out += np.tensordot(theta, R.H, axes=(2, 1))
    out += np.einsum("st,atb->asb", onsite, theta)
    for X, bk in zip(L.ops, b_left):
        out += np.einsum("ac,st,ctb->asb", X, bk, theta, optimize=True)
    for Y, ak in zip(R.ops, a_right):
        out += np.einsum("st,atc,bc->asb", ak, theta, Y, optimize=True)
    return out


@dataclass
class DmrgResult:
    energy: float
    mps: MPS
    trace: list  # energy after every local step
    sweep_energies: list
    converged: bool


def dmrg_run(H: LocalHamiltonian, D, sweeps=10, tol=1e-10, seed=0, init=None) -> DmrgResult:
    if D < 1:
        raise ValueError("D must be >= 1")
    n, d = H.n, H.dims[0]
    onsite, splits = chain_terms(H)
    a_of = [s[0] for s in splits] + [[]]  # a_of[i]: left factors of bond (i, i+1)
    b_of = [[]] + [s[1] for s in splits]  # b_of[i]: right factors of bond (i-1, i)
    mps = init.copy() if init is not None else random_mps(n, d, D, seed)
    dims = max_bond_dims(n, d, D)
    if init is not None:
        right_canonicalize(mps)
    A = mps.tensors

    left = [None] * (n + 1)
    right = [None] * (n + 1)
    left[0] = _Env(np.ones((1, 1), dtype=complex), [])
    right[n] = _Env(np.ones((1, 1), dtype=complex), [])
    left[0].H[:] = 0
    right[n].H[:] = 0
    for i in range(n - 1, 0, -1):
        right[i] = _grow_right(right[i + 1], A[i], onsite[i], a_of[i], b_of[i])

    trace, sweep_E = [], []
    energy = np.inf
    rng = np.random.default_rng(seed + 1)

    def optimise(i):
        nonlocal energy
        theta = A[i]
        shape = theta.shape
        L, R = left[i], right[i + 1]
        size = theta.size

        def mv(v):
            return _heff_apply(v.reshape(shape), L, R, onsite[i], b_of[i], a_of[i]).reshape(-1)

        cur = float(np.real(np.vdot(theta.reshape(-1), mv(theta.reshape(-1)))) / np.vdot(theta, theta).real)
        if size <= DENSE_EFF:
            M = np.column_stack([mv(e) for e in np.eye(size, dtype=complex)])
            M = 0.5 * (M + M.conj().T)
            w, v = np.linalg.eigh(M)
            e, vec = w[0], v[:, 0]
        else:
            op = LinearOperator((size, size), matvec=mv, dtype=complex)
            v0 = theta.reshape(-1) + 1e-3 * (rng.standard_normal(size))
            w, v = eigsh(op, k=1, which="SA", v0=v0, tol=1e-13, ncv=min(size - 1, 30))
            e, vec = w[0], v[:, 0]
        if e <= cur:
            A[i] = (vec / np.linalg.norm(vec)).reshape(shape)
            energy = float(e)
        else:
            energy = cur
        trace.append(energy)

    converged = False
    for sw in range(sweeps):
        for i in range(n):
            optimise(i)
            if i < n - 1:
                Dl, dd, Dr = A[i].shape
                U, s, Vh = np.linalg.svd(A[i].reshape(Dl * dd, Dr), full_matrices=False)
                A[i] = U.reshape(Dl, dd, -1)
                A[i + 1] = np.tensordot(s[:, None] * Vh, A[i + 1], axes=(1, 0))
                left[i + 1] = _grow_left(left[i], A[i], onsite[i], b_of[i], a_of[i])
        for i in range(n - 1, 0, -1):
            if i < n - 1:
                optimise(i)
            Dl, dd, Dr = A[i].shape
            U, s, Vh = np.linalg.svd(A[i].reshape(Dl, dd * Dr), full_matrices=False)
            A[i] = Vh.reshape(-1, dd, Dr)
            A[i - 1] = np.tensordot(A[i - 1], U * s[None, :], axes=(2, 0))
            right[i] = _grow_right(right[i + 1], A[i], onsite[i], a_of[i], b_of[i])
        optimise(0)
        sweep_E.append(energy)
        if sw > 0 and abs(sweep_E[-2] - sweep_E[-1]) < tol:
            converged = True
            break
    out = MPS(A, "right", 0)
    assert all(out.bond_dims[i] <= dims[i] for i in range(n + 1))
    return DmrgResult(energy, out, trace, sweep_E, converged)
