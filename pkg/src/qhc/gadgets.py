"""3-local to 2-local perturbation gadget.

A 3-local qubit Hamiltonian is rewritten as ``Y - 6 sum_i B_i1 B_i2 B_i3`` with
1-local PSD factors, then simulated by a 2-local Hamiltonian on three extra
mediator qubits per triple.  Self-energies are computed exactly from the
Schur complement of the low-energy block.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import I2, PAULI, LocalHamiltonian, LocalTerm, assemble, kron

_P = [I2, PAULI.sx, PAULI.sy, PAULI.sz]
X, Z = PAULI.sx, PAULI.sz


@dataclass
class ThreeLocalDecomposition:
    Y: LocalHamiltonian
    triples: list  # [(B1, B2, B3, (i, j, k))]
    scale: float = 1.0

    @property
    def n(self):
        return self.Y.n

    @property
    def M(self):
        return len(self.triples)

    def three_local_part(self):
        """Dense sum_i B_i1 B_i2 B_i3 on the system."""
        n = self.n
        out = np.zeros((2**n, 2**n), dtype=complex)
        for B1, B2, B3, sup in self.triples:
            ops = [I2] * n
            for s, B in zip(sup, (B1, B2, B3)):
                ops[s] = B
            out += kron(*ops)
        return out

    def reassemble(self):
        return assemble(self.Y) - 6 * self.three_local_part()


def pauli_coefficients(term: LocalTerm):
    """{((site, pauli), ...): real coefficient} for the non-identity legs of each string."""
    k = term.k
    out = {}
    for idx in itertools.product(range(4), repeat=k):
        c = np.trace(kron(*[_P[a] for a in idx]) @ term.matrix).real / 2**k
        if c != 0.0:
            key = tuple((term.support[t], a) for t, a in enumerate(idx) if a)
            out[key] = out.get(key, 0.0) + c
    return out


def _pauli_string_term(key, coeff, n):
    if not key:
        return LocalTerm((0,), coeff * np.eye(2))
    sup = tuple(s for s, _ in key)
    return LocalTerm(sup, coeff * kron(*[_P[a] for _, a in key]))


def decompose_3local(H: LocalHamiltonian, scale=1.0, tol=1e-14) -> ThreeLocalDecomposition:
    """Rewrite ``scale * H`` as Y - 6 sum B1 (x) B2 (x) B3.

    Each weight-3 Pauli component c s_a s_b s_c is replaced by
    -|c| (I + t_a s_a)(I + t_b s_b)(I + t_c s_c) with signs t chosen so that
    t_a t_b t_c = -sign(c); the lower-weight remainder goes into Y.
    """
    if any(d != 2 for d in H.dims):
        raise ValueError("decomposition needs qubit sites")
    if H.locality > 3:
        raise ValueError("input must be at most 3-local")
    coeffs = {}
    for t in H.terms:
        for key, c in pauli_coefficients(t).items():
            coeffs[key] = coeffs.get(key, 0.0) + scale * c
    triples = []
    lower = {}
    for key, c in sorted(coeffs.items()):
        if len(key) < 3:
            lower[key] = lower.get(key, 0.0) + c
            continue
        if abs(c) <= tol:
            continue
        signs = (-np.sign(c), 1.0, 1.0)
        amp = (abs(c) / 6.0) ** (1.0 / 3.0)
        Bs = [amp * (I2 + s * _P[a]) for s, (_, a) in zip(signs, key)]
        triples.append((*Bs, tuple(s for s, _ in key)))
        # remainder |c| * prod over proper subsets
        for r in range(3):
            for sub in itertools.combinations(range(3), r):
                k2 = tuple(key[i] for i in sub)
                lower[k2] = lower.get(k2, 0.0) + abs(c) * float(np.prod([signs[i] for i in sub]))
    # merge Pauli strings by support into 1- and 2-local terms
    bysup = {}
    for key, c in sorted(lower.items()):
        if abs(c) <= tol:
            continue
        t = _pauli_string_term(key, c, H.n)
        bysup[t.support] = bysup.get(t.support, 0) + t.matrix
    Y = LocalHamiltonian(H.n, H.dims, [LocalTerm(s, m) for s, m in sorted(bysup.items())], {"model": "Y"})
    return ThreeLocalDecomposition(Y, triples, float(scale))


# ---------------------------------------------------------------------------
# gadget


@dataclass
class GadgetHamiltonian:
    H_tilde: LocalHamiltonian
    Q: LocalHamiltonian
    P: LocalHamiltonian
    delta: float
    n_system: int
    mediators: list = field(default_factory=list)  # one site triple per B-triple

    @property
    def Delta(self):
        return 1.0 / self.delta**3


def build_gadget(dec: ThreeLocalDecomposition, delta) -> GadgetHamiltonian:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    n, M = dec.n, dec.M
    N = n + 3 * M
    dims = [2] * N
    ZZ = np.kron(Z, Z)
    q_terms, p_terms = [], []
    meds = []
    for i, (B1, B2, B3, sup) in enumerate(dec.triples):
        m = tuple(n + 3 * i + r for r in range(3))
        meds.append(m)
        for a, b in itertools.combinations(m, 2):
            q_terms.append(LocalTerm((a, b), -ZZ / (4 * delta**3)))
        q_terms.append(LocalTerm((m[0],), 3 * np.eye(2) / (4 * delta**3)))
        for s, B, med in zip(sup, (B1, B2, B3), m):
            p_terms.append(LocalTerm((s,), B @ B / delta))
            p_terms.append(LocalTerm((s, med), -np.kron(B, X) / delta**2))
    p_terms = list(dec.Y.terms) + p_terms
    meta = {"model": "gadget", "delta": float(delta)}
    Q = LocalHamiltonian(N, dims, q_terms, {"model": "Q"})
    P = LocalHamiltonian(N, dims, p_terms, {"model": "P"})
    Ht = LocalHamiltonian(N, dims, q_terms + p_terms, meta)
    return GadgetHamiltonian(Ht, Q, P, float(delta), n, meds)


def effective_hamiltonian(dec: ThreeLocalDecomposition) -> LocalHamiltonian:
    """Y (x) I_C - 6 sum_i B_i1 B_i2 B_i3 (x) sigma^x_{C_i}, one logical qubit per triple."""
    n, M = dec.n, dec.M
    dims = [2] * (n + M)
    terms = list(dec.Y.terms)
    for i, (B1, B2, B3, sup) in enumerate(dec.triples):
        terms.append(LocalTerm(tuple(sup) + (n + i,), -6 * kron(B1, B2, B3, X)))
    return LocalHamiltonian(n + M, dims, terms, {"model": "H_eff"})


# ---------------------------------------------------------------------------
# self-energy


def code_indices(n, M):
    """Full-space indices of the low space: system (x) span{|000>, |111>} per triple."""
    out = np.empty(2 ** (n + M), dtype=np.int64)
    for x in range(2**n):
        for c in range(2**M):
            idx = x
            for i in range(M):
                bit = (c >> (M - 1 - i)) & 1
                idx = idx * 8 + (7 if bit else 0)
            out[x * 2**M + c] = idx
    return out


def split_blocks(g: GadgetHamiltonian, A, lambda_star=None):
    """Blocks (A_-, A_-+, A_+-, A_+) of a dense operator, low space in logical order."""
    lam = g.Delta / 2 if lambda_star is None else lambda_star
    if not 0 < lam <= g.Delta:
        raise ValueError("lambda_star must lie in (0, 1/delta^3]")
    lo = code_indices(g.n_system, len(g.mediators))
    mask = np.ones(A.shape[0], dtype=bool)
    mask[lo] = False
    hi = np.flatnonzero(mask)
    return A[np.ix_(lo, lo)], A[np.ix_(lo, hi)], A[np.ix_(hi, lo)], A[np.ix_(hi, hi)]


def self_energy(g: GadgetHamiltonian, z, lambda_star=None, Ht=None):
    """Sigma_-(z) = z I_- - R_-(z)^-1, evaluated as the exact Schur complement
    H_- + H_-+ (z - H_+)^-1 H_+- on the low space."""
    Ht = assemble(g.H_tilde) if Ht is None else Ht
    Hm, Hmp, Hpm, Hp = split_blocks(g, Ht, lambda_star)
    K = z * np.eye(Hp.shape[0]) - Hp
    try:
        cond = np.linalg.cond(K)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(f"z = {z} is (close to) an eigenvalue of the high block")
    return Hm + Hmp @ np.linalg.solve(K, Hpm)


def self_energy_direct(g: GadgetHamiltonian, z, lambda_star=None, Ht=None):
    """Literal definition z I_- - (Pi_- (z - H~)^-1 Pi_-)^-1; fails at eigenvalues of H~."""
    Ht = assemble(g.H_tilde) if Ht is None else Ht
    R = np.linalg.inv(z * np.eye(Ht.shape[0]) - Ht)
    lo = code_indices(g.n_system, len(g.mediators))
    Rm = R[np.ix_(lo, lo)]
    return z * np.eye(len(lo)) - np.linalg.inv(Rm)


def series_terms(g: GadgetHamiltonian, z):
    """Orders 1-3 of the self-energy series with R_+ = (z - Delta)^-1."""
    P = assemble(g.P)
    Pm, Pmp, Ppm, Pp = split_blocks(g, P)
    r = 1.0 / (z - g.Delta)
    return {1: Pm, 2: r * Pmp @ Ppm, 3: r**2 * Pmp @ Pp @ Ppm}


@dataclass
class SelfEnergyReport:
    z_grid: np.ndarray
    lambda_star: float
    sigma_minus: list
    deviation: float
    deviations: np.ndarray


def z_grid_for(H_eff_norm, points=21):
    eps0 = 0.1 * H_eff_norm
    return np.linspace(-H_eff_norm - eps0, H_eff_norm + eps0, points)


def self_energy_report(dec, delta, z_grid=None, lambda_star=None) -> SelfEnergyReport:
    g = build_gadget(dec, delta)
    Heff = assemble(effective_hamiltonian(dec))
    nrm = float(np.linalg.norm(Heff, 2))
    zs = z_grid_for(nrm) if z_grid is None else np.asarray(z_grid, dtype=float)
    Ht = assemble(g.H_tilde)
    sig = [self_energy(g, z, lambda_star, Ht) for z in zs]
    dev = np.array([np.linalg.norm(s - Heff, 2) for s in sig])
    lam = g.Delta / 2 if lambda_star is None else lambda_star
    return SelfEnergyReport(zs, lam, sig, float(dev.max()), dev)


# ---------------------------------------------------------------------------
# closeness of low spectra


def validate_gadget(dec: ThreeLocalDecomposition, delta_grid=(0.1, 0.05, 0.025)):
    """Rows (delta, eps, lambda_min_Htilde, lambda_min_Heff, n_low, hypotheses_ok)."""
    Heff = assemble(effective_hamiltonian(dec))
    we = np.linalg.eigvalsh(Heff)
    rows = []
    for delta in delta_grid:
        g = build_gadget(dec, delta)
        Ht = assemble(g.H_tilde)
        wt = np.linalg.eigvalsh(Ht)
        lam = g.Delta / 2
        low = wt[wt < lam]
        k = min(len(low), len(we))
        eps = float(np.max(np.abs(low[:k] - we[:k]))) if k else np.inf
        pn = float(np.linalg.norm(assemble(g.P), 2))
        ok = pn < g.Delta / 2 and len(low) == len(we)
        rows.append((float(delta), eps, float(wt[0]), float(we[0]), len(low), bool(ok)))
    return rows


def gadget_csv(rows):
    lines = ["delta,max_j_deviation,lambda_min_Htilde,lambda_min_Heff"]
    for d, e, a, b, *_ in rows:
        lines.append(f"{d:.17g},{e:.17g},{a:.17g},{b:.17g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# test instances


def zzz_hamiltonian():
    return LocalHamiltonian(3, 2, [LocalTerm((0, 1, 2), kron(Z, Z, Z))], {"model": "zzz"})


def random_single_triple(rng, n=3, y_scale=0.3):
    """Random 2-local part plus one random weight-3 Pauli string."""
    terms = []
    for i in range(n):
        c = rng.standard_normal(3) * y_scale
        terms.append(LocalTerm((i,), sum(ci * P for ci, P in zip(c, _P[1:]))))
    for i, j in itertools.combinations(range(n), 2):
        a, b = rng.integers(1, 4, size=2)
        terms.append(LocalTerm((i, j), y_scale * rng.standard_normal() * np.kron(_P[a], _P[b])))
    sup = tuple(sorted(rng.choice(n, 3, replace=False)))
    ps = rng.integers(1, 4, size=3)
    c = rng.uniform(0.5, 1.5) * rng.choice([-1, 1])
    terms.append(LocalTerm(sup, c * kron(*[_P[a] for a in ps])))
    return LocalHamiltonian(n, 2, terms, {"model": "random-triple"})


def random_3local(rng, n=3):
    """Dense random Hermitian term on three qubits plus random 1-local fields."""
    A = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    terms = [LocalTerm((0, 1, 2), (A + A.conj().T) / 4)]
    for i in range(n):
        B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        terms.append(LocalTerm((i,), (B + B.conj().T) / 2))
    return LocalHamiltonian(n, 2, terms, {"model": "random-3local"})
