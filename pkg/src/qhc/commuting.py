"""Structure Lemma for a commuting pair A on X (x) Y and B on Y (x) Z.

The algebra generated by the Y-blocks of A is closed numerically, its center
is split with a generic Hermitian central element, and each central block is
factored as M_{d1} (x) I_{d2} through a minimal projection and matrix units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DIM_Y = 16
SPAN_TOL = 1e-9
CLUSTER_TOL = 1e-7
RESIDUAL_TOL = 1e-7


@dataclass
class InducedAlgebra:
    generators: list
    basis: np.ndarray  # (k, d, d), orthonormal in the Hilbert-Schmidt inner product

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def d(self):
        return self.basis.shape[1]

    def contains(self, M, tol=SPAN_TOL):
        v = np.asarray(M).reshape(-1)
        Bv = self.basis.reshape(self.dim, -1)
        coef = Bv.conj() @ v
        return np.linalg.norm(v - coef @ Bv) <= tol * max(1.0, np.linalg.norm(v))

    def hermitian_basis(self):
        """Real-linear Hermitian spanning set of the algebra."""
        hs = []
        for b in self.basis:
            hs.append(0.5 * (b + b.conj().T))
            hs.append(0.5j * (b.conj().T - b))
        H = np.array(hs)
        flat = H.reshape(len(hs), -1)
        # keep an independent subset
        U, s, Vh = np.linalg.svd(np.concatenate([flat.real, flat.imag], axis=1), full_matrices=False)
        r = int(np.sum(s > SPAN_TOL * max(1.0, s[0])))
        coef = U[:, :r].T  # real combinations
        return np.einsum("rk,kij->rij", coef, H)


def _orthonormal_extend(basis, cands, tol=SPAN_TOL):
    """Append the part of ``cands`` (m, d*d) outside span(basis) (k, d*d), orthonormalised."""
    if basis.shape[0]:
        cands = cands - (cands @ basis.conj().T) @ basis
    if not cands.shape[0]:
        return basis
    U, s, Vh = np.linalg.svd(cands, full_matrices=False)
    keep = s > tol * max(1.0, np.sqrt(cands.shape[1]))
    new = Vh[keep]
    if basis.shape[0] and new.shape[0]:
        # re-orthogonalise once for numerical hygiene
        new = new - (new @ basis.conj().T) @ basis
        q, _ = np.linalg.qr(new.T)
        new = q.T
    return np.concatenate([basis, new], axis=0) if new.shape[0] else basis


def generated_algebra(generators, d):
    """Unital *-algebra generated by ``generators`` (d x d matrices)."""
    gens = [np.asarray(g, dtype=complex) for g in generators]
    seed = [np.eye(d, dtype=complex)] + gens + [g.conj().T for g in gens]
    basis = _orthonormal_extend(np.zeros((0, d * d), dtype=complex), np.array([s.reshape(-1) for s in seed]))
    while True:
        k = basis.shape[0]
        mats = basis.reshape(k, d, d)
        prods = np.einsum("aij,bjk->abik", mats, mats).reshape(k * k, d * d)
        new = _orthonormal_extend(basis, prods)
        if new.shape[0] == k:
            return new.reshape(k, d, d)
        basis = new


def operator_blocks(A, dims, side):
    """A_ij on Y from A on X (x) Y (side='left') or B_kl from B on Y (x) Z (side='right')."""
    A = np.asarray(A, dtype=complex)
    if side == "left":
        dX, dY = dims
        T = A.reshape(dX, dY, dX, dY)
        return [T[i, :, j, :] for i in range(dX) for j in range(dX)]
    if side == "right":
        dY, dZ = dims
        T = A.reshape(dY, dZ, dY, dZ)
        return [T[:, k, :, l] for k in range(dZ) for l in range(dZ)]
    raise ValueError("side must be 'left' or 'right'")


def induced_algebra(A, dims, side="left") -> InducedAlgebra:
    """Algebra on Y generated by the blocks of A. ``dims``: (dX, dY) or (dY, dZ)."""
    A = np.asarray(A)
    if np.max(np.abs(A - A.conj().T)) > 1e-10:
        raise ValueError("operator must be Hermitian")
    dY = dims[1] if side == "left" else dims[0]
    if dY > MAX_DIM_Y:
        raise ValueError(f"dim(Y) = {dY} exceeds the supported {MAX_DIM_Y}")
    gens = operator_blocks(A, dims, side)
    return InducedAlgebra(gens, generated_algebra(gens, dY))


def pairwise_commutation_check(algA: InducedAlgebra, algB: InducedAlgebra, tol=1e-9):
    if algA.d != algB.d:
        raise ValueError("algebras act on different spaces")
    a, b = algA.basis, algB.basis
    ab = np.einsum("aij,bjk->abik", a, b)
    ba = np.einsum("bij,ajk->abik", b, a)
    return bool(np.max(np.abs(ab - ba)) < tol)


def center(alg: InducedAlgebra, tol=SPAN_TOL):
    """Hermitian basis of the center of the algebra."""
    B = alg.basis
    k, d = B.shape[0], B.shape[1]
    # column i: stacked commutators [b_i, b_j] over j
    comm = np.einsum("iab,jbc->ijac", B, B) - np.einsum("jab,ibc->ijac", B, B)
    M = comm.reshape(k, -1).T
    _, s, Vh = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    null = Vh[r:].conj()  # coefficient vectors
    Z = np.einsum("ri,iab->rab", null, B)
    herm = [0.5 * (z + z.conj().T) for z in Z] + [0.5j * (z.conj().T - z) for z in Z]
    flat = np.array([h.reshape(-1) for h in herm])
    U2, s2, Vh2 = np.linalg.svd(np.concatenate([flat.real, flat.imag], axis=1), full_matrices=False)
    rr = int(np.sum(s2 > tol * max(1.0, s2[0])))
    return np.einsum("rk,kab->rab", U2[:, :rr].T, np.array(herm))


def _clusters(w, tol=CLUSTER_TOL):
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > tol:
            groups.append([i])
        else:
            groups[-1].append(i)
    return groups


@dataclass
class AlgebraDecomposition:
    blocks: list  # [(W_i: dY x d1*d2 isometry, (d1, d2))]
    dims: tuple  # (dX, dY, dZ)
    residuals: list = field(default_factory=list)  # [(resA, resB)] per block

    @property
    def block_dims(self):
        return [bd for _, bd in self.blocks]


def _factor_block(Ui, hermA, rng):
    """Basis of range(Ui) in which the restricted algebra is M_d1 (x) I_d2."""
    loc = np.einsum("ya,kyz,zb->kab", Ui.conj(), hermA, Ui)
    h = np.einsum("k,kab->ab", rng.standard_normal(len(loc)), loc)
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    groups = _clusters(w)
    sizes = {len(g) for g in groups}
    if len(sizes) != 1:
        return None
    d1, d2 = len(groups), sizes.pop()
    P = [v[:, g] for g in groups]  # orthonormal bases of the eigenspaces
    F1 = P[0]  # anchor: minimal projection of the lowest eigenvalue
    cols = [F1]
    for k in range(1, d1):
        # pick the algebra element with the largest P_k a P_1 component
        best, T = -1.0, None
        for a in loc:
            t = P[k].conj().T @ a @ F1
            nrm = np.linalg.norm(t)
            if nrm > best:
                best, T = nrm, t
        if best < 1e-8:
            return None
        U, s, Vh = np.linalg.svd(T)
        cols.append(P[k] @ (U @ Vh))
    # column (k, l) = V_k F1 e_l, index k * d2 + l
    basis = np.concatenate(cols, axis=1)
    return Ui @ basis, (d1, d2)


def _block_residuals(A, B, W, bd, dims):
    dX, dY, dZ = dims
    d1, d2 = bd
    IX, IZ = np.eye(dX), np.eye(dZ)
    Ab = np.kron(IX, W).conj().T @ A @ np.kron(IX, W)
    T = Ab.reshape(dX * d1, d2, dX * d1, d2)
    Ai = np.einsum("albl->ab", T) / d2
    resA = np.max(np.abs(Ab - np.kron(Ai, np.eye(d2)))) if Ab.size else 0.0
    Bb = np.kron(W, IZ).conj().T @ B @ np.kron(W, IZ)
    T = Bb.reshape(d1, d2 * dZ, d1, d2 * dZ)
    Bi = np.einsum("kakb->ab", T) / d1
    resB = np.max(np.abs(Bb - np.kron(np.eye(d1), Bi))) if Bb.size else 0.0
    return float(resA), float(resB), Ai, Bi


def structure_decompose(A, B, dims, seed=0, retries=4) -> AlgebraDecomposition:
    """Y = (+)_i Y_i1 (x) Y_i2 with A acting on X (x) Y_i1 and B on Y_i2 (x) Z."""
    dX, dY, dZ = dims
    A, B = np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)
    if A.shape != (dX * dY,) * 2 or B.shape != (dY * dZ,) * 2:
        raise ValueError("operator shapes do not match dims")
    AI = np.kron(A, np.eye(dZ))
    IB = np.kron(np.eye(dX), B)
    if np.linalg.norm(AI @ IB - IB @ AI, 2) > 1e-9:
        raise ValueError("A (x) I and I (x) B do not commute")
    alg = induced_algebra(A, (dX, dY), "left")
    Zc = center(alg)
    hermA = alg.hermitian_basis()
    rng = np.random.default_rng(seed)
    for attempt in range(retries):
        c = np.einsum("k,kab->ab", rng.standard_normal(len(Zc)), Zc)
        w, v = np.linalg.eigh(0.5 * (c + c.conj().T))
        blocks, res = [], []
        ok = True
        for g in _clusters(w):
            out = _factor_block(v[:, g], hermA, rng)
            if out is None:
                ok = False
                break
            W, bd = out
            rA, rB, _, _ = _block_residuals(A, B, W, bd, dims)
            if max(rA, rB) > RESIDUAL_TOL:
                ok = False
                break
            blocks.append((W, bd))
            res.append((rA, rB))
        if ok:
            return AlgebraDecomposition(blocks, tuple(dims), res)
    raise np.linalg.LinAlgError("factorisation residual above tolerance; spectrum too degenerate")


def decoupled_ground_energy(A, B, dec: AlgebraDecomposition):
    """min over blocks of lambda_min(A_i on X (x) Y_i1) + lambda_min(B_i on Y_i2 (x) Z)."""
    best = np.inf
    for W, bd in dec.blocks:
        _, _, Ai, Bi = _block_residuals(np.asarray(A), np.asarray(B), W, bd, dec.dims)
        e = np.linalg.eigvalsh(Ai)[0] + np.linalg.eigvalsh(Bi)[0]
        best = min(best, e)
    return float(best)


def dense_ground_energy(A, B, dims):
    dX, dY, dZ = dims
    H = np.kron(A, np.eye(dZ)) + np.kron(np.eye(dX), B)
    return float(np.linalg.eigvalsh(H)[0])


def decomposition_to_json(dec: AlgebraDecomposition):
    return {
        "dims": list(dec.dims),
        "blocks": [{"d1": d1, "d2": d2, "residual_A": rA, "residual_B": rB}
                   for ((_, (d1, d2)), (rA, rB)) in zip(dec.blocks, dec.residuals)],
    }


# ---------------------------------------------------------------------------
# planted instances


def _rand_herm(d, rng):
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (M + M.conj().T)


def planted_pair(block_dims, dX, dZ, rng):
    """Commuting (A, B) with Y = (+)_i C^{d1} (x) C^{d2} hidden by a random unitary on Y.

    With dX = 1 the blocks of A generate a commutative algebra, so the plant
    is only recoverable for dX >= 2.
    """
    from scipy.stats import unitary_group

    dY = sum(a * b for a, b in block_dims)
    A = np.zeros((dX, dY, dX, dY), dtype=complex)
    B = np.zeros((dY, dZ, dY, dZ), dtype=complex)
    off = 0
    for d1, d2 in block_dims:
        Ai = _rand_herm(dX * d1, rng)
        Bi = _rand_herm(d2 * dZ, rng)
        sl = slice(off, off + d1 * d2)
        A[:, sl, :, sl] = np.kron(Ai, np.eye(d2)).reshape(dX, d1, d2, dX, d1, d2).reshape(dX, d1 * d2, dX, d1 * d2)
        B[sl, :, sl, :] = np.kron(np.eye(d1), Bi).reshape(d1 * d2, dZ, d1 * d2, dZ)
        off += d1 * d2
    U = unitary_group.rvs(dY, random_state=rng) if dY > 1 else np.eye(1)
    A = np.kron(np.eye(dX), U) @ A.reshape(dX * dY, -1) @ np.kron(np.eye(dX), U).conj().T
    B = np.kron(U, np.eye(dZ)) @ B.reshape(dY * dZ, -1) @ np.kron(U, np.eye(dZ)).conj().T
    return 0.5 * (A + A.conj().T), 0.5 * (B + B.conj().T)


def random_block_dims(rng, max_dim_y=12):
    """Random block structure with sum d1*d2 <= max_dim_y."""
    dims = []
    total = 0
    while True:
        d1, d2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        if total + d1 * d2 > max_dim_y:
            break
        dims.append((d1, d2))
        total += d1 * d2
        if rng.random() < 0.35:
            break
    return dims or [(1, 1)]
