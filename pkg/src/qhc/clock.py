"""Circuit-to-Hamiltonian compiler with a Feynman-Kitaev clock.

Register layout: proof qubits ``0..m-1``, ancilla qubits ``m..N-1``, then the
clock.  In the direct encoding the clock is one site of dimension L+1; in the
unary encoding it is L qubits ``c_1..c_L`` at sites ``N..N+L-1`` and time j
is the string 1^j 0^(L-j).  The circuit accepts when qubit 0 reads |1> at the
end, so H_out penalises |0> on qubit 0 at time L.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._config import check_dense
from .hamiltonian import I2, LocalHamiltonian, LocalTerm, assemble, make_term
from .spectra import apply_local

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
RAISE = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|


@dataclass
class QuantumCircuit:
    N: int
    m: int
    gates: list  # [(targets tuple, unitary)], applied in order V_1 .. V_L

    def __post_init__(self):
        self.N, self.m = int(self.N), int(self.m)
        if self.N < 1 or not 0 <= self.m <= self.N:
            raise ValueError("need N >= 1 and 0 <= m <= N")
        if not self.gates:
            raise ValueError("circuit needs at least one gate")
        clean = []
        for k, (tg, U) in enumerate(self.gates):
            tg = tuple(int(t) for t in tg)
            U = np.asarray(U, dtype=complex)
            if len(tg) not in (1, 2) or len(set(tg)) != len(tg) or any(t < 0 or t >= self.N for t in tg):
                raise ValueError(f"gate {k}: bad targets {tg}")
            if U.shape != (2 ** len(tg),) * 2:
                raise ValueError(f"gate {k}: matrix shape {U.shape} does not fit {len(tg)} qubits")
            if np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))) > 1e-10:
                raise ValueError(f"gate {k} is not unitary")
            clean.append((tg, U))
        self.gates = clean

    @property
    def L(self):
        return len(self.gates)

    def run(self, state, upto=None):
        """V_upto ... V_1 applied to a 2^N state vector."""
        psi = np.asarray(state, dtype=complex)
        for tg, U in self.gates[: self.L if upto is None else upto]:
            psi = apply_local(psi, U, tg, (2,) * self.N)
        return psi

    def unitary(self, upto=None):
        dim = 2**self.N
        return np.column_stack([self.run(e, upto) for e in np.eye(dim, dtype=complex)])

    def initial_state(self, proof):
        proof = np.asarray(proof, dtype=complex).ravel()
        if proof.size != 2**self.m:
            raise ValueError(f"proof must have dimension 2^{self.m}")
        if abs(np.linalg.norm(proof) - 1) > 1e-10:
            raise ValueError("proof must be normalised")
        anc = np.zeros(2 ** (self.N - self.m), dtype=complex)
        anc[0] = 1.0
        return np.kron(proof, anc)


# ---------------------------------------------------------------------------
# acceptance


def acceptance_operator(circ: QuantumCircuit):
    """POVM element on the proof space: <0_a| V^dag |1><1|_0 V |0_a>."""
    V = circ.unitary()
    dp, da = 2**circ.m, 2 ** (circ.N - circ.m)
    iso = V.reshape(2**circ.N, dp, da)[:, :, 0]  # V restricted to ancilla |0...0>
    out = iso.reshape(2, -1, dp)[1]  # rows with qubit 0 = 1
    M = out.conj().T @ out
    return 0.5 * (M + M.conj().T)


def acceptance_probability(circ: QuantumCircuit, proof):
    psi = circ.run(circ.initial_state(proof))
    return float(np.linalg.norm(psi.reshape(2, -1)[1]) ** 2)


def best_proof(circ: QuantumCircuit):
    """(max acceptance probability, maximising proof)."""
    w, v = np.linalg.eigh(acceptance_operator(circ))
    return float(w[-1]), v[:, -1]


def measured_epsilon(circ: QuantumCircuit, regime="yes"):
    """Acceptance error read off the acceptance POVM.

    ``yes``: 1 - max acceptance (the best proof is accepted with prob 1 - eps).
    ``no``: max acceptance (every proof is accepted with prob <= eps).
    """
    p, _ = best_proof(circ)
    return 1.0 - p if regime == "yes" else p


# ---------------------------------------------------------------------------
# compilation


@dataclass
class ClockHamiltonian:
    parts: dict  # name -> LocalHamiltonian
    encoding: str
    layout: dict
    circuit: QuantumCircuit = field(repr=False, default=None)

    @property
    def dims(self):
        return next(iter(self.parts.values())).dims

    @property
    def n(self):
        return len(self.dims)

    def total(self, names=None):
        names = list(self.parts) if names is None else names
        terms = [t for k in names for t in self.parts[k].terms]
        return LocalHamiltonian(self.n, self.dims, terms, {"model": f"kitaev-{self.encoding}", "parts": list(names)})

    def matrix(self, names=None, cap=None):
        return assemble(self.total(names), cap)


def clock_matrix(L):
    """Tridiagonal clock factor E of the propagation term in the rotated frame."""
    E = np.diag(np.ones(L + 1)) - 0.5 * (np.eye(L + 1, k=1) + np.eye(L + 1, k=-1))
    E[0, 0] = E[L, L] = 0.5
    return E


def clock_spectrum(L):
    k = np.arange(L + 1)
    return 1.0 - np.cos(np.pi * k / (L + 1))


def _ketbra(a, b, dim):
    M = np.zeros((dim, dim), dtype=complex)
    M[a, b] = 1.0
    return M


def _in_operator(n_anc):
    da = 2**n_anc
    return np.eye(da, dtype=complex) - _ketbra(0, 0, da)


def _compile_direct(circ, h_in):
    N, m, L = circ.N, circ.m, circ.L
    c = N
    dims = [2] * N + [L + 1]
    anc = list(range(m, N))
    H_in = []
    if anc:
        if h_in == "split":
            H_in = [LocalTerm((a, c), np.kron(P1, _ketbra(0, 0, L + 1))) for a in anc]
        else:
            H_in = [LocalTerm(tuple(anc) + (c,), np.kron(_in_operator(len(anc)), _ketbra(0, 0, L + 1)))]
    H_out = [LocalTerm((0, c), np.kron(P0, _ketbra(L, L, L + 1)))]
    H_prop = []
    for j, (tg, V) in enumerate(circ.gates, start=1):
        Id = np.eye(V.shape[0])
        mat = (
            -0.5 * np.kron(V, _ketbra(j, j - 1, L + 1))
            - 0.5 * np.kron(V.conj().T, _ketbra(j - 1, j, L + 1))
            + 0.5 * np.kron(Id, _ketbra(j, j, L + 1) + _ketbra(j - 1, j - 1, L + 1))
        )
        H_prop.append(make_term(list(tg) + [c], mat, dims))
    parts = {
        "H_in": LocalHamiltonian(N + 1, dims, H_in, {"model": "H_in"}),
        "H_prop": LocalHamiltonian(N + 1, dims, H_prop, {"model": "H_prop"}),
        "H_out": LocalHamiltonian(N + 1, dims, H_out, {"model": "H_out"}),
    }
    layout = {"proof": list(range(m)), "ancilla": anc, "clock": [c]}
    return parts, layout


def _unary_clock_ops(j, L):
    """(sites offsets, transition |j><j-1|, diagonal |j><j|+|j-1><j-1|) on clock qubits."""
    sites, trans, diag = [], [], []
    if j >= 2:
        sites.append(j - 2)
        trans.append(P1)
        diag.append(P1)
    sites.append(j - 1)
    trans.append(RAISE)
    diag.append(I2)
    if j <= L - 1:
        sites.append(j)
        trans.append(P0)
        diag.append(P0)
    T, D = trans[0], diag[0]
    for a, b in zip(trans[1:], diag[1:]):
        T, D = np.kron(T, a), np.kron(D, b)
    return sites, T, D


def _compile_unary(circ, h_in):
    N, m, L = circ.N, circ.m, circ.L
    n = N + L
    dims = [2] * n
    cq = [N + k for k in range(L)]  # c_1 .. c_L
    anc = list(range(m, N))
    H_in = []
    if anc:
        if h_in == "split":
            H_in = [LocalTerm((a, cq[0]), np.kron(P1, P0)) for a in anc]
        else:
            H_in = [LocalTerm(tuple(anc) + (cq[0],), np.kron(_in_operator(len(anc)), P0))]
    H_out = [LocalTerm((0, cq[-1]), np.kron(P0, P1))]
    H_prop = []
    for j, (tg, V) in enumerate(circ.gates, start=1):
        offs, T, D = _unary_clock_ops(j, L)
        Id = np.eye(V.shape[0])
        mat = -0.5 * np.kron(V, T) - 0.5 * np.kron(V.conj().T, T.conj().T) + 0.5 * np.kron(Id, D)
        H_prop.append(make_term(list(tg) + [cq[o] for o in offs], mat, dims))
    H_stab = [LocalTerm((cq[k], cq[k + 1]), np.kron(P0, P1)) for k in range(L - 1)]
    parts = {
        "H_in": LocalHamiltonian(n, dims, H_in, {"model": "H_in"}),
        "H_prop": LocalHamiltonian(n, dims, H_prop, {"model": "H_prop"}),
        "H_out": LocalHamiltonian(n, dims, H_out, {"model": "H_out"}),
        "H_stab": LocalHamiltonian(n, dims, H_stab, {"model": "H_stab"}),
    }
    layout = {"proof": list(range(m)), "ancilla": anc, "clock": cq}
    return parts, layout


def compile_circuit(circ: QuantumCircuit, encoding="direct", h_in="printed", cap=None) -> ClockHamiltonian:
    """Build H_in, H_prop, H_out (and H_stab for the unary clock).

    ``h_in="printed"`` keeps the ancilla projector as one term on all ancillas
    plus the clock; ``"split"`` uses one 2-local term per ancilla qubit,
    which has the same null space.
    """
    if h_in not in ("printed", "split"):
        raise ValueError("h_in must be 'printed' or 'split'")
    if encoding == "direct":
        check_dense(2**circ.N * (circ.L + 1), cap)
        parts, layout = _compile_direct(circ, h_in)
    elif encoding == "unary":
        check_dense(2 ** (circ.N + circ.L), cap)
        parts, layout = _compile_unary(circ, h_in)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    return ClockHamiltonian(parts, encoding, layout, circ)


# ---------------------------------------------------------------------------
# history state and frame change


def unary_index(j, L):
    """Flat clock index of 1^j 0^(L-j) with c_1 most significant."""
    return 2**L - 2 ** (L - j)


def history_state(circ: QuantumCircuit, proof, encoding="direct", cap=None):
    L = circ.L
    dc = L + 1 if encoding == "direct" else 2**L
    check_dense(2**circ.N * dc, cap)
    psi = circ.initial_state(proof)
    out = np.zeros((2**circ.N, dc), dtype=complex)
    for j in range(L + 1):
        col = j if encoding == "direct" else unary_index(j, L)
        out[:, col] = psi
        if j < L:
            tg, U = circ.gates[j]
            psi = apply_local(psi, U, tg, (2,) * circ.N)
    return out.reshape(-1) / np.sqrt(L + 1)


def unary_embedding(N, L):
    """Isometry from the direct layout (qubits x (L+1) clock) into the unary layout."""
    dq = 2**N
    W = np.zeros((dq * 2**L, dq * (L + 1)))
    for j in range(L + 1):
        u = unary_index(j, L)
        for x in range(dq):
            W[x * 2**L + u, x * (L + 1) + j] = 1.0
    return W


def frame_change(circ: QuantumCircuit):
    """W = sum_j V_j...V_1 (x) |j><j| in the direct layout."""
    L = circ.L
    dq = 2**circ.N
    W = np.zeros((dq * (L + 1), dq * (L + 1)), dtype=complex)
    for j in range(L + 1):
        W += np.kron(circ.unitary(upto=j), _ketbra(j, j, L + 1))
    return W


def valid_clock_projector(L):
    """Diagonal of the projector onto valid unary clock strings (c_1 first)."""
    diag = np.zeros(2**L)
    for j in range(L + 1):
        diag[unary_index(j, L)] = 1.0
    return diag


# ---------------------------------------------------------------------------
# QMA verifier for a local Hamiltonian


def normalise_terms(H: LocalHamiltonian, tol=1e-10):
    """Terms as full-support PSD operators scaled so that 0 <= H_j <= I.

    Returns ``(terms, scale)`` where ``terms`` are the rescaled LocalTerms and
    ``scale`` is the common factor divided out.
    """
    if not H.terms:
        raise ValueError("Hamiltonian has no terms")
    norms = [np.linalg.eigvalsh(t.matrix) for t in H.terms]
    scale = max(1.0, max(float(w[-1]) for w in norms))
    for t, w in zip(H.terms, norms):
        if w[0] < -tol:
            raise ValueError(f"term on {t.support} is not PSD (min eigenvalue {w[0]:.3e})")
    return [LocalTerm(t.support, t.matrix / scale) for t in H.terms], scale


def qma_verify_probability(H: LocalHamiltonian, state):
    """Probability of outcome 1 of the random-term verifier: 1 - <psi|H|psi>/r."""
    terms, _ = normalise_terms(H)
    Hn = LocalHamiltonian(H.n, H.dims, terms)
    psi = np.asarray(state, dtype=complex).ravel()
    energy = np.vdot(psi, Hn.matvec(psi)).real / np.vdot(psi, psi).real
    return float(1.0 - energy / len(terms))


def verifier_unitary(term: LocalTerm):
    """W_j on (term support) (x) answer qubit: |l>|0> -> |l>(sqrt(l)|0> + sqrt(1-l)|1>)."""
    w, v = np.linalg.eigh(term.matrix)
    w = np.clip(w, 0.0, 1.0)
    dim = len(w)
    W = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for s in range(dim):
        R = np.array([[np.sqrt(w[s]), -np.sqrt(1 - w[s])], [np.sqrt(1 - w[s]), np.sqrt(w[s])]])
        W += np.kron(np.outer(v[:, s], v[:, s].conj()), R)
    return W


def sample_verifier(H: LocalHamiltonian, state, shots, rng):
    """Monte-Carlo run of the dilated verifier; returns the fraction of outcome 1."""
    terms, _ = normalise_terms(H)
    psi = np.asarray(state, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    dims = tuple(H.dims) + (2,)
    full = np.kron(psi, np.array([1.0, 0.0]))
    p1 = []
    for t in terms:
        W = verifier_unitary(t)
        out = apply_local(full, W, list(t.support) + [H.n], dims)
        p1.append(float(np.linalg.norm(out.reshape(-1, 2)[:, 1]) ** 2))
    j = rng.integers(len(terms), size=shots)
    hits = rng.random(shots) < np.asarray(p1)[j]
    return float(hits.mean())


# ---------------------------------------------------------------------------
# Geometric Lemma


@dataclass
class GeometricReport:
    v: float
    angle: float
    bound: float
    lambda_min_actual: float


def _null_projector(A, tol):
    w, U = np.linalg.eigh(A)
    thr = tol * max(1.0, abs(w).max())
    N = U[:, w <= thr]
    nonzero = w[w > thr]
    return N @ N.conj().T, (float(nonzero.min()) if nonzero.size else np.inf), w


def geometric_bound(A1, A2, tol=1e-9) -> GeometricReport:
    """Lower bound 2 v sin^2(alpha/2) on lambda_min(A1 + A2) for PSD A1, A2."""
    A1, A2 = np.asarray(A1), np.asarray(A2)
    P1_, v1, w1 = _null_projector(A1, tol)
    P2_, v2, w2 = _null_projector(A2, tol)
    for w in (w1, w2):
        if w[0] < -tol * max(1.0, abs(w).max()):
            raise ValueError("operators must be PSD")
    v = min(v1, v2)
    if not np.isfinite(v):
        raise ValueError("both operators vanish")
    cos_a = float(np.linalg.norm(P1_ @ P2_, 2)) if P1_.any() and P2_.any() else 0.0
    if cos_a >= 1 - 1e-10:
        raise ValueError("null spaces intersect")
    alpha = float(np.arccos(min(cos_a, 1.0)))
    bound = 2 * v * np.sin(alpha / 2) ** 2
    lam = float(np.linalg.eigvalsh(A1 + A2)[0])
    assert lam >= bound - 1e-9, (lam, bound)
    return GeometricReport(v, alpha, float(bound), lam)


def clock_geometric_report(ch: ClockHamiltonian, cap=None) -> GeometricReport:
    """Geometric Lemma with A1 = H_in + H_out and A2 = H_prop."""
    A1 = ch.matrix(["H_in", "H_out"], cap)
    A2 = ch.matrix(["H_prop"], cap)
    return geometric_bound(A1, A2)


def angle_cos2(ch: ClockHamiltonian, cap=None):
    """cos^2 of the angle between the null spaces of H_in + H_out and H_prop."""
    return float(np.cos(clock_geometric_report(ch, cap).angle) ** 2)


# ---------------------------------------------------------------------------
# toy verifiers


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def toy_yes_circuit(L):
    """One proof qubit, identity gates: accepts |1> with certainty, rejects |0>."""
    return QuantumCircuit(1, 1, [((0,), np.eye(2))] * L)


def toy_no_circuit(L):
    """Proof qubit and one ancilla; the first gate swaps them, so every proof is rejected."""
    return QuantumCircuit(2, 1, [((0, 1), SWAP)] + [((0,), np.eye(2))] * (L - 1))


def param_verifier(theta, L=2):
    """Two-qubit verifier: RY(theta) on the proof then CNOT into the ancilla, padded to L gates."""
    gates = [((0,), ry(theta)), ((0, 1), CNOT)] + [((1,), np.eye(2))] * max(0, L - 2)
    return QuantumCircuit(2, 1, gates[: max(L, 2)])
