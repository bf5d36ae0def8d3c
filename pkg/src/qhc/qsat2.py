"""Quantum 2-SAT: rank reduction, filter-based clause generation, saturated solve.

Logical qubits start as the original qubits 0..n-1.  A rank-2 clause merges
its two qubits into a fresh logical qubit (id larger than every existing id)
through an isometry onto the clause's null space; a rank-3 clause fixes its
pair.  Every logical qubit remembers which original qubits it spans and the
isometry from C^2 into their joint space, so a final product assignment on
logical qubits unwinds to blocks of original qubits.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.linalg

from .hamiltonian import LocalHamiltonian, LocalTerm, assemble

RANK_TOL = 1e-9
ZERO_TOL = 1e-10
INDEP_TOL = 1e-8
SAT_TOL = 1e-8

PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
M_PSI = PSI_MINUS.reshape(2, 2)
M_PSI_INV = np.linalg.inv(M_PSI)
E = np.array([[0, 1], [-1, 0]], dtype=complex)  # i * sigma_y


class Unsat(Exception):
    def __init__(self, witness):
        super().__init__(witness)
        self.witness = witness


def range_projector(M, tol=RANK_TOL):
    M = np.asarray(M, dtype=complex)
    M = 0.5 * (M + M.conj().T)
    w, v = np.linalg.eigh(M)
    keep = w > tol * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    V = v[:, keep]
    return V @ V.conj().T


def null_basis(M, tol=RANK_TOL):
    M = 0.5 * (M + M.conj().T)
    w, v = np.linalg.eigh(M)
    return v[:, w <= tol * max(1.0, float(np.max(np.abs(w), initial=0.0)))]


def projector_from_vectors(vectors):
    vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vs:
        return np.zeros((4, 4), dtype=complex)
    return range_projector(sum(np.outer(v, v.conj()) for v in vs))


def clause_rank(pi, tol=RANK_TOL):
    pi = np.asarray(pi, dtype=complex)
    if np.max(np.abs(pi - pi.conj().T)) > 1e-8 or np.max(np.abs(pi @ pi - pi)) > 1e-8:
        raise ValueError("clause is not an orthogonal projector")
    return int(np.sum(np.linalg.eigvalsh(pi) > tol))


def swap_legs(op, da=2, db=2):
    """Operator on (a, b) re-expressed with legs (b, a)."""
    return op.reshape(da, db, da, db).transpose(1, 0, 3, 2).reshape(da * db, da * db)


# ---------------------------------------------------------------------------
# filters


@dataclass
class FilterPair:
    A: np.ndarray
    C: np.ndarray


def local_filter(phi, side="left"):
    """Operator F with phi = (F (x) I)|psi-> (left) or (I (x) F)|psi-> (right)."""
    Phi = np.asarray(phi, dtype=complex).reshape(2, 2)
    if side == "left":
        A = Phi @ M_PSI_INV
        return FilterPair(A, np.eye(2, dtype=complex))
    if side == "right":
        C = (M_PSI_INV @ Phi).T
        return FilterPair(np.eye(2, dtype=complex), C)
    raise ValueError("side must be 'left' or 'right'")


def filtered_singlet(A, C):
    """(A (x) C)|psi-> as a 4-vector."""
    return (A @ M_PSI @ C.T).reshape(-1)


# ---------------------------------------------------------------------------
# instance


@dataclass
class QsatInstance:
    n: int
    clauses: dict  # (i, j) with i < j -> 4x4 projector on logical qubits
    merge_log: list = field(default_factory=list)
    expansions: dict = field(default_factory=dict)  # logical id -> (orig tuple, isometry 2^k x 2)
    fixed: list = field(default_factory=list)  # (orig tuple, state vector)
    unary: dict = field(default_factory=dict)  # logical id -> 2x2 PSD
    next_id: int = 0
    source: list = None  # ((i, j), [forbidden vectors]) as ingested, kept for serialisation

    @classmethod
    def from_projectors(cls, n, clauses):
        """``clauses``: iterable of ((i, j), operator); repeated pairs are rank-combined."""
        acc = {}
        for (i, j), P in clauses:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"bad clause pair {(i, j)}")
            P = np.asarray(P, dtype=complex)
            if i > j:
                i, j, P = j, i, swap_legs(P)
            acc[(i, j)] = acc.get((i, j), 0) + P
        cl = {k: range_projector(v) for k, v in sorted(acc.items())}
        exp = {q: ((q,), np.eye(2, dtype=complex)) for q in range(n)}
        return cls(n, cl, [], exp, [], {}, n)

    @classmethod
    def from_vectors(cls, n, clauses):
        """``clauses``: iterable of ((i, j), [forbidden 4-vectors])."""
        clauses = [((int(i), int(j)), [np.asarray(v, dtype=complex) for v in vs]) for (i, j), vs in clauses]
        inst = cls.from_projectors(n, [((i, j), projector_from_vectors(vs)) for (i, j), vs in clauses])
        inst.source = clauses
        return inst

    def copy(self):
        return copy.deepcopy(self)

    @property
    def logical(self):
        return sorted(self.expansions)

    def neighbours(self, q):
        out = []
        for (i, j) in self.clauses:
            if i == q:
                out.append(j)
            elif j == q:
                out.append(i)
        return sorted(out)

    def clause(self, a, b):
        """Projector with legs ordered (a, b), or None."""
        if a < b:
            return self.clauses.get((a, b))
        P = self.clauses.get((b, a))
        return None if P is None else swap_legs(P)

    def max_rank(self):
        return max((clause_rank(P) for P in self.clauses.values()), default=0)

    def hamiltonian(self):
        """Sum of current clauses and pending 1-local constraints on the logical qubits."""
        ids = self.logical
        pos = {q: k for k, q in enumerate(ids)}
        terms = []
        for (i, j), P in self.clauses.items():
            a, b = pos[i], pos[j]
            terms.append(LocalTerm((a, b), P) if a < b else LocalTerm((b, a), swap_legs(P)))
        for q, G in self.unary.items():
            terms.append(LocalTerm((pos[q],), G))
        return LocalHamiltonian(len(ids), 2, terms, {"model": "qsat2"})

    def original_hamiltonian(self):
        if self.next_id != self.n or self.fixed:
            raise ValueError("instance has been rewritten")
        return self.hamiltonian()

    def lift(self, a, c, P):
        """Clause on logical (a, c) as (orig support sorted, operator) on original qubits."""
        oa, Wa = self.expansions[a]
        oc, Wc = self.expansions[c]
        W = np.kron(Wa, Wc)
        op = W @ P @ W.conj().T
        return _sort_legs(oa + oc, op)


def _sort_legs(sites, op):
    k = len(sites)
    order = list(np.argsort(sites))
    T = op.reshape([2] * (2 * k)).transpose(order + [k + o for o in order])
    return tuple(sorted(sites)), T.reshape(2**k, 2**k)


def _sort_state(sites, vec):
    k = len(sites)
    order = list(np.argsort(sites))
    return tuple(sorted(sites)), np.asarray(vec).reshape([2] * k).transpose(order).reshape(-1)


# ---------------------------------------------------------------------------
# rewriting steps


def _fix(inst: QsatInstance, qubits, state, why):
    """Fix logical ``qubits`` (one or two) to ``state`` and push incident clauses to 1-local form."""
    qubits = list(qubits)
    origs, W = (), np.ones((1, 1), dtype=complex)
    for q in qubits:
        o, Wq = inst.expansions.pop(q)
        origs += o
        W = np.kron(W, Wq)
    inst.fixed.append((origs, W @ state))
    inst.merge_log.append({"kind": "fix", "qubits": qubits, "state": state, "reason": why})
    pending = inst.unary
    for q in qubits:
        G = pending.pop(q, None)
        if G is not None:
            # constraint already on a fixed qubit: must be satisfied by the fixed state
            if len(qubits) == 1:
                bad = np.real(np.vdot(state, G @ state))
            else:
                k = qubits.index(q)
                op = np.kron(G, np.eye(2)) if k == 0 else np.kron(np.eye(2), G)
                bad = np.real(np.vdot(state, op @ state))
            if bad > RANK_TOL:
                raise Unsat(f"fixed qubits {qubits} violate a 1-local constraint")
    for (i, j) in list(inst.clauses):
        if i not in qubits and j not in qubits:
            continue
        P = inst.clauses.pop((i, j))
        if i in qubits and j in qubits:
            if np.real(np.vdot(state, P @ state)) > RANK_TOL:
                raise Unsat(f"forced state on {qubits} violates clause {(i, j)}")
            continue
        q, k = (i, j) if i in qubits else (j, i)
        Pq = P if q == i else swap_legs(P)
        # G_k = (<state| (x) I_k)(P_qk (x) I_rest)(|state> (x) I_k)
        if len(qubits) == 1:
            T = Pq.reshape(2, 2, 2, 2)
            G = np.einsum("a,akbl,b->kl", state.conj(), T, state)
        else:
            pos = qubits.index(q)
            T = Pq.reshape(2, 2, 2, 2)
            S = state.reshape(2, 2)
            if pos == 0:
                G = np.einsum("xy,xkal,ay->kl", S.conj(), T, S)
            else:
                G = np.einsum("xy,ykal,xa->kl", S.conj(), T, S)
        pending[k] = pending.get(k, 0) + G


def _process_unary(inst: QsatInstance):
    while inst.unary:
        q = min(inst.unary)
        G = inst.unary.pop(q)
        Pq = range_projector(G)
        r = int(round(np.real(np.trace(Pq))))
        if r == 2:
            raise Unsat(f"1-local constraint on logical qubit {q} has rank 2")
        if r == 1:
            u = null_basis(Pq)[:, 0]
            _fix(inst, [q], u, "1-local")
        inst.merge_log.append({"kind": "unary", "qubit": q, "rank": r})


def _merge(inst: QsatInstance, i, j, P):
    W = null_basis(P)  # 4 x 2 isometry onto the allowed space
    c = inst.next_id
    inst.next_id += 1
    oi, Wi = inst.expansions.pop(i)
    oj, Wj = inst.expansions.pop(j)
    inst.expansions[c] = (oi + oj, np.kron(Wi, Wj) @ W)
    inst.merge_log.append({"kind": "merge", "qubits": [i, j], "new": c, "isometry": W})
    acc = {}
    I2 = np.eye(2)
    for (a, b) in list(inst.clauses):
        if a not in (i, j) and b not in (i, j):
            continue
        Q = inst.clauses.pop((a, b))
        q, k = (a, b) if a in (i, j) else (b, a)
        Qq = Q if q == a else swap_legs(Q)  # legs (q, k)
        # embed on (i, j, k) then conjugate with W on (i, j)
        T = Qq.reshape(2, 2, 2, 2)
        if q == i:
            M = np.einsum("akbl,jm->ajkbml", T, I2).reshape(8, 8)
        else:
            M = np.einsum("akbl,im->iakmbl", T, I2).reshape(8, 8)
        WW = np.kron(W, I2)
        acc[k] = acc.get(k, 0) + WW.conj().T @ M @ WW  # legs (c, k)
    # pending 1-local constraints on i or j become 1-local on c
    for q in (i, j):
        G = inst.unary.pop(q, None)
        if G is not None:
            op = np.kron(G, I2) if q == i else np.kron(I2, G)
            inst.unary[c] = inst.unary.get(c, 0) + W.conj().T @ op @ W
    for k, Mk in acc.items():
        Pk = range_projector(Mk)
        if np.real(np.trace(Pk)) < 0.5:
            continue
        inst.clauses[(k, c)] = swap_legs(Pk)  # c is the largest id
    return c


def rank_reduction(inst: QsatInstance) -> QsatInstance:
    """One reduction on the first clause of rank >= 2 (returns a new instance).

    Raises :class:`Unsat` when the reduction exposes a contradiction.
    """
    inst = inst.copy()
    _reduce_once(inst)
    return inst


def _reduce_once(inst):
    before = len(inst.expansions)
    for key in sorted(inst.clauses):
        P = inst.clauses[key]
        r = clause_rank(P)
        if r < 2:
            continue
        i, j = key
        if r == 4:
            raise Unsat(f"clause on {key} has rank 4")
        if r == 3:
            v = null_basis(P)[:, 0]
            del inst.clauses[key]
            _fix(inst, [i, j], v, "rank-3")
        else:
            del inst.clauses[key]
            _merge(inst, i, j, P)
        _process_unary(inst)
        assert len(inst.expansions) < before
        return True
    return False


def _drop_empty(inst):
    for key in list(inst.clauses):
        if clause_rank(inst.clauses[key]) == 0:
            del inst.clauses[key]


# ---------------------------------------------------------------------------
# clause generation


def _rank1_vector(P):
    w, v = np.linalg.eigh(P)
    return v[:, -1]


def generate_constraints(inst: QsatInstance):
    """Add one new independent clause implied by a triple a-b-c.

    Returns ``(new instance, (a, c, vector))`` or ``(inst, None)`` when saturated.
    """
    inst = inst.copy()
    added = _generate_once(inst)
    return inst, added


def _generate_once(inst):
    ids = inst.logical
    for b in ids:
        nb = inst.neighbours(b)
        for a, c in combinations(nb, 2):
            Pab, Pbc = inst.clause(a, b), inst.clause(b, c)
            if clause_rank(Pab) != 1 or clause_rank(Pbc) != 1:
                continue
            A = local_filter(_rank1_vector(Pab), "left").A
            C = local_filter(_rank1_vector(Pbc), "right").C
            phi = filtered_singlet(A, C)  # legs (a, c)
            nrm = np.linalg.norm(phi)
            if nrm <= ZERO_TOL:
                continue
            phi = phi / nrm
            old = inst.clause(a, c)
            if old is not None:
                # already in the span of the existing clause?
                if np.linalg.norm(phi - old @ phi) <= INDEP_TOL:
                    continue
                newP = range_projector(old + np.outer(phi, phi.conj()))
                assert clause_rank(newP) > clause_rank(old)
            else:
                newP = np.outer(phi, phi.conj())
            inst.clauses[(a, c)] = newP
            inst.merge_log.append({"kind": "generate", "triple": (a, b, c), "pair": (a, c), "vector": phi})
            return (a, c, phi)
    return None


# ---------------------------------------------------------------------------
# saturated solve and unwinding


def solve_saturated(inst: QsatInstance, check=True):
    """Product assignment {logical id: 2-vector} for a saturated rank-<=1 system."""
    assign = {}
    diag = {"rounds": 0, "max_distance": 0}
    for q in inst.logical:
        if q in assign:
            continue
        diag["rounds"] += 1
        assign[q] = np.array([1, 0], dtype=complex)
        start_nb = set(inst.neighbours(q))
        queue = [q]
        while queue:
            p = queue.pop(0)
            for k in inst.neighbours(p):
                P = inst.clause(p, k)
                phi = _rank1_vector(P).reshape(2, 2)
                r = assign[p].conj() @ phi
                if k in assign:
                    continue
                if np.linalg.norm(r) <= ZERO_TOL:
                    continue
                assign[k] = E @ r.conj() / np.linalg.norm(r)
                if k not in start_nb and k != q:
                    diag["max_distance"] = 2
                    if check:
                        raise AssertionError(f"clause ({p},{k}) constrains a qubit at distance 2 from start {q}")
                queue.append(k)
        if check:
            for (i, j), P in inst.clauses.items():
                if i in assign and j in assign:
                    v = np.kron(assign[i], assign[j])
                    if np.linalg.norm(P @ v) > SAT_TOL:
                        raise AssertionError(f"clause {(i, j)} violated; system was not saturated")
    return assign, diag


@dataclass
class QsatResolution:
    verdict: str
    assignment: list  # [(orig qubits sorted, state vector)]
    witness: str = ""
    log: list = field(default_factory=list)
    instance: QsatInstance = None

    def state(self, n):
        """Full 2^n vector of the product-of-blocks assignment."""
        if self.verdict != "SAT":
            raise ValueError("no assignment for an unsatisfiable instance")
        psi = np.ones(1, dtype=complex)
        sites = []
        for blk, vec in self.assignment:
            psi = np.kron(psi, vec)
            sites += list(blk)
        return _sort_state(tuple(sites), psi)[1]


def solve(inst: QsatInstance, check=True, trace=None) -> QsatResolution:
    """Full algorithm.  ``trace`` (a list) receives every intermediate instance."""
    work = inst.copy()
    try:
        _drop_empty(work)
        while True:
            while _reduce_once(work):
                _drop_empty(work)
                if trace is not None:
                    trace.append(work.copy())
            added = _generate_once(work)
            if trace is not None and added is not None:
                trace.append(work.copy())
            if added is None:
                break
    except Unsat as exc:
        return QsatResolution("UNSAT", [], exc.witness, work.merge_log, work)
    assign, _ = solve_saturated(work, check=check)
    blocks = [_sort_state(o, s) for o, s in work.fixed]
    for q in work.logical:
        o, W = work.expansions[q]
        blocks.append(_sort_state(o, W @ assign[q]))
    blocks = [(b, v / np.linalg.norm(v)) for b, v in sorted(blocks, key=lambda x: x[0])]
    res = QsatResolution("SAT", blocks, "", work.merge_log, work)
    if check:
        psi = res.state(inst.n)
        r = max_clause_residual(inst, psi)
        if r > SAT_TOL:
            raise AssertionError(f"assignment residual {r:.2e} exceeds tolerance")
    return res


def max_clause_residual(inst: QsatInstance, psi):
    """max ||Pi_ij psi|| over the clauses of an original-qubit instance."""
    n = inst.n
    t = np.asarray(psi).reshape([2] * n)
    worst = 0.0
    for (i, j), P in inst.clauses.items():
        T = P.reshape(2, 2, 2, 2)
        out = np.tensordot(T, t, axes=([2, 3], [i, j]))
        worst = max(worst, float(np.linalg.norm(out)))
    return worst


def dense_oracle(inst: QsatInstance, tol=1e-9, basis=True):
    """(satisfiable, null-space basis) of the assembled clause sum.

    With ``basis=False`` only the lowest eigenvalue is computed and the second
    entry is None.
    """
    H = assemble(inst.hamiltonian())
    if not basis:
        w0 = scipy.linalg.eigh(H, eigvals_only=True, subset_by_index=[0, 0])[0]
        return bool(w0 < tol), None
    w, v = np.linalg.eigh(H)
    null = v[:, w < tol]
    return bool(w[0] < tol), null


# ---------------------------------------------------------------------------
# generators


def random_instance(n, n_clauses, rng, ranks=(1, 2, 3), graph="random"):
    """Random clauses of the given ranks on random (or path) pairs."""
    out = []
    for t in range(n_clauses):
        if graph == "path":
            i = t % (n - 1)
            j = i + 1
        else:
            i, j = rng.choice(n, 2, replace=False)
        r = int(rng.choice(ranks))
        vs = [rng.standard_normal(4) + 1j * rng.standard_normal(4) for _ in range(r)]
        out.append(((int(i), int(j)), vs))
    return QsatInstance.from_vectors(n, out)


def classical_clause(lit_a, lit_b):
    """Rank-1 diagonal projector forbidding the assignment that falsifies (lit_a or lit_b).

    Literals are +-(qubit+1); the forbidden basis state sets each literal false.
    """
    ba = 0 if lit_a > 0 else 1
    bb = 0 if lit_b > 0 else 1
    v = np.zeros(4, dtype=complex)
    v[2 * ba + bb] = 1.0
    return np.outer(v, v)


def from_2cnf(n, clauses):
    items = []
    for la, lb in clauses:
        i, j = abs(la) - 1, abs(lb) - 1
        items.append(((i, j), classical_clause(la, lb)))
    return QsatInstance.from_projectors(n, items)
