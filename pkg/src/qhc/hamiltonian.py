"""Qudit operators, local terms and the model builders.

Conventions: sites are 0-based, a term's tensor legs follow ascending site
order and non-support sites are padded with identities.  Site 0 is the most
significant digit of the flat basis index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from . import _config, _kernels

HERM_TOL = 1e-12


# ---------------------------------------------------------------------------
# spin operators


@dataclass(frozen=True)
class SpinOperators:
    spin: Fraction
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def d(self):
        return self.sz.shape[0]


def spin_operators(spin) -> SpinOperators:
    """Pauli matrices for spin 1/2, the spin-1 matrices for spin 1."""
    s = Fraction(spin).limit_denominator(4)
    if s == Fraction(1, 2):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
    elif s == 1:
        r = 1 / np.sqrt(2)
        sx = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        # printed with the label sigma_x twice; the second matrix is sigma_y
        sy = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
        sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    else:
        raise ValueError(f"unsupported spin {spin}; expected 1/2 or 1")
    return SpinOperators(s, sx, sy, sz)


PAULI = spin_operators(Fraction(1, 2))
I2 = np.eye(2, dtype=complex)
X, Y, Z = PAULI.sx, PAULI.sy, PAULI.sz


def kron(*ops):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def is_hermitian(m, tol=HERM_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) < tol


# ---------------------------------------------------------------------------
# terms and Hamiltonians


@dataclass(frozen=True)
class LocalTerm:
    support: tuple
    matrix: np.ndarray

    def __post_init__(self):
        sup = tuple(int(s) for s in self.support)
        object.__setattr__(self, "support", sup)
        mat = np.array(self.matrix, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if len(sup) == 0:
            raise ValueError("term support is empty")
        if any(b <= a for a, b in zip(sup, sup[1:])):
            raise ValueError(f"support {sup} must be strictly increasing")
        if not is_hermitian(mat, tol=1e-10):
            raise ValueError(f"term on {sup} is not Hermitian")

    @property
    def k(self):
        return len(self.support)

    def __eq__(self, other):
        if not isinstance(other, LocalTerm):
            return NotImplemented
        return self.support == other.support and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


def make_term(support, matrix, dims=None) -> LocalTerm:
    """Build a term from an arbitrary support order by permuting legs into ascending order."""
    support = [int(s) for s in support]
    matrix = np.asarray(matrix, dtype=complex)
    if len(set(support)) != len(support):
        raise ValueError(f"repeated site in support {support}")
    order = np.argsort(support)
    if np.all(order == np.arange(len(support))):
        return LocalTerm(tuple(support), matrix)
    k = len(support)
    if dims is None:
        loc = round(matrix.shape[0] ** (1.0 / k))
        ldims = [loc] * k
    else:
        ldims = [dims[s] for s in support]
    t = matrix.reshape(ldims + ldims)
    perm = list(order) + [k + o for o in order]
    t = t.transpose(perm)
    dd = int(np.prod(ldims))
    return LocalTerm(tuple(sorted(support)), t.reshape(dd, dd))


class LocalHamiltonian:
    """H = sum of local terms on ``n`` sites of dimensions ``dims``."""

    def __init__(self, n, dims, terms, metadata=None):
        self.n = int(n)
        if isinstance(dims, (int, np.integer)):
            dims = [int(dims)] * self.n
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != self.n:
            raise ValueError("dims length does not match n")
        self.terms = tuple(terms)
        self.metadata = dict(metadata or {})
        for t in self.terms:
            if t.support[0] < 0 or t.support[-1] >= self.n:
                raise ValueError(f"term support {t.support} outside [0, {self.n})")
            expect = int(np.prod([self.dims[s] for s in t.support]))
            if t.matrix.shape != (expect, expect):
                raise ValueError(f"term on {t.support} has shape {t.matrix.shape}, expected {expect}")
        self._plans = None

    def __repr__(self):
        name = self.metadata.get("model", "custom")
        return f"LocalHamiltonian({name}, n={self.n}, terms={len(self.terms)})"

    def __eq__(self, other):
        if not isinstance(other, LocalHamiltonian):
            return NotImplemented
        return (
            self.n == other.n
            and self.dims == other.dims
            and len(self.terms) == len(other.terms)
            and all(a == b for a, b in zip(self.terms, other.terms))
            and self.metadata == other.metadata
        )

    __hash__ = None

    @property
    def dim(self):
        return int(np.prod(self.dims, dtype=object))

    @property
    def locality(self):
        return max((t.k for t in self.terms), default=0)

    def __add__(self, other):
        if self.dims != other.dims:
            raise ValueError("site layouts differ")
        return LocalHamiltonian(self.n, self.dims, self.terms + other.terms, {"model": "sum"})

    def scaled(self, c):
        return LocalHamiltonian(
            self.n, self.dims, [LocalTerm(t.support, c * t.matrix) for t in self.terms], dict(self.metadata)
        )

    def norm_bound(self):
        """Triangle-inequality bound sum_i ||H_i||."""
        return float(sum(np.linalg.norm(t.matrix, 2) for t in self.terms))

    # -- matrix-free application -------------------------------------------

    def _get_plans(self):
        if self._plans is None:
            cache = {}
            plans = []
            for t in self.terms:
                if t.support not in cache:
                    cache[t.support] = _kernels.support_offsets(self.dims, t.support)
                plans.append(cache[t.support])
            self._plans = plans
        return self._plans

    def matvec(self, psi, backend=None):
        psi = np.ascontiguousarray(psi, dtype=np.complex128).ravel()
        out = np.zeros_like(psi)
        for t, (bases, offsets) in zip(self.terms, self._get_plans()):
            _kernels.apply_term(psi, out, bases, offsets, t.matrix, backend=backend)
        return out

    def linear_operator(self, cap=None):
        _config.check_lanczos(self.dim, cap)
        dim = self.dim

        def mv(v):
            v = np.asarray(v)
            if v.ndim == 2:
                return np.column_stack([self.matvec(v[:, i]) for i in range(v.shape[1])])
            return self.matvec(v)

        return LinearOperator((dim, dim), matvec=mv, rmatvec=mv, dtype=np.complex128)

    def expectation(self, psi):
        psi = np.asarray(psi, dtype=complex).ravel()
        return float(np.real(np.vdot(psi, self.matvec(psi))))

    # -- assembly --------------------------------------------------------------

    def to_sparse(self, cap=None):
        _config.check_lanczos(self.dim, cap)
        rows, cols, vals = [], [], []
        for t, (bases, offsets) in zip(self.terms, self._get_plans()):
            k = len(offsets)
            r = bases[:, None, None] + offsets[None, :, None]
            c = bases[:, None, None] + offsets[None, None, :]
            rows.append(np.broadcast_to(r, (len(bases), k, k)).ravel())
            cols.append(np.broadcast_to(c, (len(bases), k, k)).ravel())
            vals.append(np.broadcast_to(t.matrix, (len(bases), k, k)).ravel())
        if not rows:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        m = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.dim, self.dim)
        )
        return m.tocsr()


def assemble(H: LocalHamiltonian, cap=None) -> np.ndarray:
    """Dense matrix of ``H`` (terms tensored with identities and summed)."""
    _config.check_dense(H.dim, cap)
    dim = H.dim
    full = np.zeros((dim, dim), dtype=complex)
    for t, (bases, offsets) in zip(H.terms, H._get_plans()):
        r = bases[:, None, None] + offsets[None, :, None]
        c = bases[:, None, None] + offsets[None, None, :]
        full[r, c] += t.matrix[None, :, :]
    return full


def embed_operator(op, support, dims):
    """Dense operator ``op`` on ``support`` padded with identities (for small systems)."""
    H = LocalHamiltonian(len(dims), dims, [make_term(support, op, dims)])
    return assemble(H)


# ---------------------------------------------------------------------------
# builders


def _bonds(n, bc):
    if bc not in ("open", "periodic"):
        raise ValueError(f"boundary condition must be 'open' or 'periodic', got {bc!r}")
    bonds = [(i, i + 1) for i in range(n - 1)]
    if bc == "periodic" and n > 2:
        bonds.append((0, n - 1))
    return bonds


def _need_chain(n):
    if n < 2:
        raise ValueError(f"need n >= 2 sites, got {n}")


def _two_site(op, i, j, d):
    # op given in (i, j) leg order; make_term sorts legs when j < i
    return make_term([i, j], op, [d] * (max(i, j) + 1))


def build_classical_ising(adjacency, field=None, mu=1.0, n=None) -> LocalHamiltonian:
    """Diagonal H(x) = sum J_ij x_i x_j + mu sum m_i x_i with x_i = 1 - 2 b_i.

    ``adjacency`` is a list of ``(i, j, J_ij)``.
    """
    edges = [(int(i), int(j), float(w)) for i, j, w in adjacency]
    for i, j, _ in edges:
        if i == j:
            raise ValueError(f"self-loop on site {i}")
    if n is None:
        n = max([max(i, j) + 1 for i, j, _ in edges] + [len(field) if field is not None else 0])
    field = np.zeros(n) if field is None else np.asarray(field, dtype=float)
    if len(field) != n:
        raise ValueError("field length does not match site count")
    zz = np.diag([1.0, -1.0, -1.0, 1.0])
    terms = [make_term([i, j], w * zz) for i, j, w in edges]
    terms += [LocalTerm((i,), mu * field[i] * Z) for i in range(n) if field[i] != 0.0]
    meta = {"model": "classical_ising", "edges": [[i, j, w] for i, j, w in edges],
            "field": field.tolist(), "mu": float(mu)}
    return LocalHamiltonian(n, 2, terms, meta)


def classical_ising_energies(adjacency, field=None, mu=1.0, n=None, backend=None):
    """Enumerate H(x) over all 2^n configurations (fast oracle path)."""
    edges = [(int(i), int(j)) for i, j, _ in adjacency]
    w = [float(c) for _, _, c in adjacency]
    if n is None:
        n = max([max(e) + 1 for e in edges] + [len(field) if field is not None else 0])
    f = np.zeros(n) if field is None else mu * np.asarray(field, dtype=float)
    return _kernels.classical_diagonal(n, edges, w, f, backend=backend)


def build_tfim(n, J=1.0, g=1.0, bc="open") -> LocalHamiltonian:
    """H = -J sum Z_i Z_j - g sum X_i."""
    _need_chain(n)
    terms = [_two_site(-J * kron(Z, Z), i, j, 2) for i, j in _bonds(n, bc)]
    terms += [LocalTerm((i,), -g * X) for i in range(n)]
    return LocalHamiltonian(n, 2, terms, {"model": "tfim", "J": float(J), "g": float(g), "bc": bc})


def build_heisenberg(n, Jx=1.0, Jy=1.0, Jz=1.0, h=0.0, bc="open", spin=Fraction(1, 2)) -> LocalHamiltonian:
    """H = -sum (Jx XX + Jy YY + Jz ZZ) + h sum Z.  Negative J gives the antiferromagnet."""
    _need_chain(n)
    ops = spin_operators(spin)
    bond = -(Jx * kron(ops.sx, ops.sx) + Jy * kron(ops.sy, ops.sy) + Jz * kron(ops.sz, ops.sz))
    terms = [_two_site(bond, i, j, ops.d) for i, j in _bonds(n, bc)]
    if h != 0.0:
        terms += [LocalTerm((i,), h * ops.sz) for i in range(n)]
    meta = {"model": "heisenberg", "Jx": float(Jx), "Jy": float(Jy), "Jz": float(Jz), "h": float(h),
            "bc": bc, "spin": str(Fraction(spin))}
    return LocalHamiltonian(n, ops.d, terms, meta)


def build_afm_heisenberg(n, bc="open") -> LocalHamiltonian:
    """sum sigma_i . sigma_j on qubits."""
    H = build_heisenberg(n, -1.0, -1.0, -1.0, 0.0, bc)
    H.metadata["model"] = "afm_heisenberg"
    return H


def aklt_bond():
    s = spin_operators(1)
    ss = kron(s.sx, s.sx) + kron(s.sy, s.sy) + kron(s.sz, s.sz)
    return ss + ss @ ss / 3.0


def build_aklt(n, bc="open") -> LocalHamiltonian:
    """H = sum S_i.S_{i+1} + (S_i.S_{i+1})^2 / 3 on qutrits."""
    _need_chain(n)
    bond = aklt_bond()
    terms = [_two_site(bond, i, j, 3) for i, j in _bonds(n, bc)]
    return LocalHamiltonian(n, 3, terms, {"model": "aklt", "bc": bc})


@dataclass(frozen=True)
class CnfFormula:
    """Clauses as tuples of signed 1-based literals (DIMACS style)."""

    n_vars: int
    clauses: tuple = field(default_factory=tuple)

    def __post_init__(self):
        cl = tuple(tuple(int(x) for x in c) for c in self.clauses)
        object.__setattr__(self, "clauses", cl)
        for c in cl:
            if len(c) == 0:
                raise ValueError("empty clause")
            if any(x == 0 or abs(x) > self.n_vars for x in c):
                raise ValueError(f"literal out of range in clause {c}")
            if len({abs(x) for x in c}) != len(c):
                raise ValueError(f"clause {c} references a variable twice")

    def violations(self, backend=None):
        """Violated-clause count per assignment (bit 1 = True, var 1 most significant)."""
        return _kernels.cnf_violations(self.n_vars, list(self.clauses), backend=backend)

    def satisfied_by(self, assignment):
        return all(any((lit > 0) == bool(assignment[abs(lit) - 1]) for lit in c) for c in self.clauses)


def embed_cnf(formula: CnfFormula) -> LocalHamiltonian:
    """One diagonal projector per clause onto its unique violating assignment."""
    if not formula.clauses:
        raise ValueError("empty formula")
    terms = []
    for c in formula.clauses:
        if len(c) > 3:
            raise ValueError(f"clause {c} has arity > 3")
        lits = sorted(c, key=abs)
        # violating bit for literal v is 0, for literal -v is 1
        bad = 0
        for lit in lits:
            bad = 2 * bad + (1 if lit < 0 else 0)
        diag = np.zeros(2 ** len(lits))
        diag[bad] = 1.0
        terms.append(LocalTerm(tuple(abs(x) - 1 for x in lits), np.diag(diag)))
    meta = {"model": "cnf", "clauses": [list(c) for c in formula.clauses]}
    return LocalHamiltonian(formula.n_vars, 2, terms, meta)


def build_model(name, n, bc="open", **params) -> LocalHamiltonian:
    """Name-based builder used by the CLI."""
    name = name.lower()
    if name == "tfim":
        return build_tfim(n, params.get("J", 1.0), params.get("g", 1.0), bc)
    if name in ("heisenberg", "xxz"):
        return build_heisenberg(n, params.get("Jx", 1.0), params.get("Jy", 1.0), params.get("Jz", 1.0),
                                params.get("h", 0.0), bc)
    if name == "xx":
        return build_heisenberg(n, 1.0, 1.0, 0.0, params.get("h", 0.0), bc)
    if name in ("afm", "afm_heisenberg"):
        return build_afm_heisenberg(n, bc)
    if name == "aklt":
        return build_aklt(n, bc)
    if name in ("ising", "classical_ising"):
        J = params.get("J", 1.0)
        adj = [(i, j, J) for i, j in _bonds(n, bc)]
        return build_classical_ising(adj, np.full(n, params.get("h", 0.0)), 1.0, n=n)
    raise ValueError(f"unknown model {name!r}")


MODELS = ("tfim", "heisenberg", "xx", "afm", "aklt", "ising")
