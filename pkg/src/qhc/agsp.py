"""Approximate ground-space projections (AGSPs) and 1D area-law bounds.

An AGSP ``K`` fixes the ground state, shrinks the orthogonal complement
(``||K|perp>||^2 <= Delta``) and has operator Schmidt rank ``D`` across a
cut.  Here ``K = C_ell(H)``, a rescaled Chebyshev polynomial evaluated
through the eigendecomposition of ``H``; the certificate reports measured
values next to the closed-form bound ``4 exp(-4 ell sqrt(eps/||H||))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import _config
from .hamiltonian import LocalHamiltonian, assemble
from .spectra import entanglement_entropy, lanczos_ground, schmidt_coefficients

INVARIANCE_TOL = 1e-8
SCHMIDT_REL_TOL = 1e-9
ZERO_TOL = 1e-8


class FrustratedError(ValueError):
    """Input Hamiltonian is not frustration-free (and no shift was requested)."""


# ---------------------------------------------------------------------------
# Chebyshev polynomials


def chebyshev_T(ell: int) -> np.ndarray:
    """Power-basis coefficients (lowest degree first) of T_ell, built by the recurrence."""
    if ell < 0:
        raise ValueError("ell must be non-negative")
    a, b = np.array([1.0]), np.array([0.0, 1.0])
    if ell == 0:
        return a
    for _ in range(ell - 1):
        a, b = b, npoly.polysub(npoly.polymulx(2 * b), a)
    return b


def cheb_eval(ell, x):
    """T_ell(x) for scalar or array x, stable inside and outside [-1, 1]."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    inside = np.abs(x) <= 1
    out[inside] = np.cos(ell * np.arccos(x[inside]))
    xo = x[~inside]
    out[~inside] = np.sign(xo) ** ell * np.cosh(ell * np.arccosh(np.abs(xo)))
    return out


@dataclass(frozen=True)
class ScaledChebyshev:
    """C_ell(x) = T_ell((N + eps - 2x)/(N - eps)) / T_ell((N + eps)/(N - eps))."""

    ell: int
    eps: float
    normH: float

    @property
    def normalizer(self):
        return float(cheb_eval(self.ell, (self.normH + self.eps) / (self.normH - self.eps)))

    def __call__(self, x):
        y = (self.normH + self.eps - 2 * np.asarray(x, dtype=float)) / (self.normH - self.eps)
        return cheb_eval(self.ell, y) / self.normalizer

    def coefficients(self):
        """Power-basis coefficients in x."""
        N, e = self.normH, self.eps
        lin = np.array([(N + e) / (N - e), -2.0 / (N - e)])
        c = np.array([0.0])
        for k, tk in enumerate(chebyshev_T(self.ell)):
            c = npoly.polyadd(c, tk * npoly.polypow(lin, k))
        return c / self.normalizer

    @property
    def delta_bound(self):
        return 4.0 * math.exp(-4.0 * self.ell * math.sqrt(self.eps / self.normH))


def scaled_cheb(ell, eps, normH) -> ScaledChebyshev:
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not (0 < eps < normH):
        raise ValueError(f"need 0 < eps < normH, got eps={eps}, normH={normH}")
    return ScaledChebyshev(int(ell), float(eps), float(normH))


def delta_bound(ell, eps, normH):
    return 4.0 * math.exp(-4.0 * ell * math.sqrt(eps / normH))


# ---------------------------------------------------------------------------
# Hamiltonian truncation


@dataclass
class TruncatedHamiltonian:
    s: int
    t: float
    H_prime: np.ndarray
    window: tuple  # first and last bond of the untruncated segment
    dims: tuple
    flank_norms: tuple = (0.0, 0.0)

    @property
    def norm_bound(self):
        return self.s + 2 * self.t


def bond_terms(H: LocalHamiltonian):
    """Group a 1D nearest-neighbour Hamiltonian into one matrix per bond (i, i+1).

    One-site terms go to the bond on their right (the last site to the bond on its left).
    """
    n = H.n
    if n < 2:
        raise ValueError("need at least two sites")
    dims = H.dims
    bonds = [np.zeros((dims[i] * dims[i + 1],) * 2, dtype=complex) for i in range(n - 1)]
    for t in H.terms:
        if t.k == 1:
            i = t.support[0]
            b = min(i, n - 2)
            if b == i:
                bonds[b] += np.kron(t.matrix, np.eye(dims[i + 1]))
            else:
                bonds[b] += np.kron(np.eye(dims[i - 1]), t.matrix)
        elif t.k == 2 and t.support[1] == t.support[0] + 1:
            bonds[t.support[0]] += t.matrix
        else:
            raise ValueError(f"term on {t.support} is not nearest-neighbour")
    return bonds


def _chain_sum(bonds, dims, lo, hi):
    """Dense sum of bonds lo..hi-1 acting on sites lo..hi."""
    sub = dims[lo:hi + 1]
    D = int(np.prod(sub))
    out = np.zeros((D, D), dtype=complex)
    for b in range(lo, hi):
        left = int(np.prod(sub[: b - lo]))
        right = int(np.prod(sub[b - lo + 2:]))
        out += np.kron(np.kron(np.eye(left), bonds[b]), np.eye(right))
    return out


def _clip(A, t):
    w, v = np.linalg.eigh(A)
    return (v * np.minimum(w, t)) @ v.conj().T, float(w[-1]) if len(w) else 0.0


def window_bonds(n, cut, s):
    """Bonds [lo, hi] of the s-bond segment centred on the bond crossing ``cut``."""
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut must be in [1, {n - 1}]")
    lo = cut - 1 - (s - 1) // 2
    hi = lo + s - 1
    if s < 1 or lo < 0 or hi > n - 2:
        raise ValueError(f"window of {s} bonds around cut {cut} leaves the chain of {n} sites")
    return lo, hi


def truncate_hamiltonian(H: LocalHamiltonian, cut, s, t, cap=None) -> TruncatedHamiltonian:
    """H' = H_L^{<=t} + H_1 + ... + H_s + H_R^{<=t} with bond terms normalised in [0, 1]."""
    _config.check_dense(H.dim, cap)
    n, dims = H.n, tuple(H.dims)
    bonds = bond_terms(H)
    for b, h in enumerate(bonds):
        w = np.linalg.eigvalsh(h)
        if w[0] < -1e-10 or w[-1] > 1 + 1e-10:
            raise ValueError(f"bond {b} has spectrum [{w[0]:.3g}, {w[-1]:.3g}], outside [0, 1]")
    lo, hi = window_bonds(n, cut, s)
    # H_L acts on sites 0..lo, H_R on sites hi+1..n-1
    dl = int(np.prod(dims[: lo + 1]))
    dr = int(np.prod(dims[hi + 1:]))
    HL, nl = _clip(_chain_sum(bonds, dims, 0, lo), t) if lo > 0 else (np.zeros((dl, dl)), 0.0)
    HR, nr = _clip(_chain_sum(bonds, dims, hi + 1, n - 1), t) if hi + 1 < n - 1 else (np.zeros((dr, dr)), 0.0)
    Hp = np.zeros((H.dim, H.dim), dtype=complex)
    for b in range(lo, hi + 1):
        left = int(np.prod(dims[:b]))
        right = int(np.prod(dims[b + 2:]))
        Hp += np.kron(np.kron(np.eye(left), bonds[b]), np.eye(right))
    Hp += np.kron(HL, np.eye(H.dim // dl))
    Hp += np.kron(np.eye(H.dim // dr), HR)
    return TruncatedHamiltonian(s, float(t), Hp, (lo, hi), dims, (nl, nr))


def truncation_sweep(H: LocalHamiltonian, cut, s, ts=(1, 2, 3)):
    """Rows (t, ||H'||, gap of H') for each truncation level."""
    rows = []
    for t in ts:
        tr = truncate_hamiltonian(H, cut, s, t)
        w = np.linalg.eigvalsh(tr.H_prime)
        tau = 1e-8 * max(1.0, abs(w[-1]))
        above = w[w > w[0] + tau]
        rows.append((t, float(w[-1]), float(above[0] - w[0]) if len(above) else 0.0))
    return rows


def ff_ising_chain(n) -> LocalHamiltonian:
    """Frustration-free ferromagnet with unique ground state |0...0>.

    Bonds (I - ZZ)/2, plus (I - Z)/2 on site 0; bond 0 is halved so every bond lies in [0, 1].
    """
    from .hamiltonian import LocalTerm

    Z = np.diag([1.0, -1.0])
    zz = (np.eye(4) - np.kron(Z, Z)) / 2
    b0 = (zz + np.kron((np.eye(2) - Z) / 2, np.eye(2))) / 2
    terms = [LocalTerm((0, 1), b0.astype(complex))]
    terms += [LocalTerm((i, i + 1), zz.astype(complex)) for i in range(1, n - 1)]
    return LocalHamiltonian(n, 2, terms, {"model": "ff_ising", "bc": "open"})


# ---------------------------------------------------------------------------
# operator Schmidt rank


def operator_schmidt_values(K, cut, dims):
    """Singular values of K reshaped as (left in/out) x (right in/out)."""
    dims = tuple(dims)
    dA = int(np.prod(dims[:cut]))
    dB = int(np.prod(dims[cut:]))
    R = np.asarray(K).reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)
    return np.linalg.svd(R, compute_uv=False)


def operator_schmidt_rank(K, cut, dims, rel_tol=SCHMIDT_REL_TOL):
    s = operator_schmidt_values(K, cut, dims)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


# ---------------------------------------------------------------------------
# AGSP construction


@dataclass
class AgspCertificate:
    K: np.ndarray
    cut: int
    ell: int
    Delta_bound: float
    Delta_measured: float
    D_measured: int
    invariance_error: float
    eps: float = 0.0
    normH: float = 0.0
    shift: float = 0.0
    power: int = 1
    dims: tuple = ()
    ground: Optional[np.ndarray] = field(default=None, repr=False)
    eigenvalues: Optional[np.ndarray] = field(default=None, repr=False)
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)
    filter_values: Optional[np.ndarray] = field(default=None, repr=False)

    def ok(self):
        return (self.invariance_error < INVARIANCE_TOL
                and self.Delta_measured <= self.Delta_bound + 1e-8)

    def to_json(self):
        return {
            "cut": self.cut, "ell": self.ell, "power": self.power,
            "eps": self.eps, "normH": self.normH, "shift": self.shift,
            "Delta_bound": self.Delta_bound, "Delta_measured": self.Delta_measured,
            "D_measured": self.D_measured, "invariance_error": self.invariance_error,
            "DxDelta": self.D_measured * self.Delta_measured,
        }


def _dense(H, dims, cap):
    if isinstance(H, LocalHamiltonian):
        return assemble(H, cap), tuple(H.dims)
    if isinstance(H, TruncatedHamiltonian):
        return H.H_prime, H.dims
    M = np.asarray(H)
    _config.check_dense(M.shape[0], cap)
    if dims is None:
        raise ValueError("dims are required for a bare matrix")
    return M, tuple(dims)


def _real_if_possible(M):
    if np.iscomplexobj(M) and not np.any(M.imag):
        return M.real.copy()
    return M


def _check_frustration_free(H, w):
    if abs(w[0]) > ZERO_TOL * max(1.0, abs(w[-1])):
        raise FrustratedError(
            f"ground energy {w[0]:.6g} is not 0: the AGSP construction handles frustration-free "
            "Hamiltonians; pass shift=True to use H - E0 instead")
    if isinstance(H, LocalHamiltonian):
        for k, t in enumerate(H.terms):
            if np.linalg.eigvalsh(t.matrix)[0] < -1e-10:
                raise FrustratedError(f"term {k} on {t.support} is not positive semidefinite")


def _spectral_certificate(w, V, f, cut, dims, ell, eps, normH, bound, shift, power=1, want_K=True):
    g = V[:, :1]
    fv = f ** power
    K = (V * fv) @ V.conj().T
    inv = float(np.linalg.norm(K @ g - g))
    Delta = float(np.max(fv[1:] ** 2)) if len(fv) > 1 else 0.0
    D = operator_schmidt_rank(K, cut, dims)
    return AgspCertificate(K if want_K else None, cut, ell, bound, Delta, D, inv, eps, normH, shift, power,
                           dims, g[:, 0], w, V, f)


def build_agsp(H, ell, cut, eps=None, dims=None, shift=False, cap=None) -> AgspCertificate:
    """Certificate for K = C_ell(H) across ``cut`` (sites [0, cut) | [cut, n)).

    ``eps`` defaults to the measured gap.  With ``shift=True`` the construction
    uses H - E0, which is what makes a frustrated chain such as the TFIM usable.
    """
    M, dims = _dense(H, dims, cap)
    M = _real_if_possible(M)
    w, V = np.linalg.eigh(M)
    E0 = float(w[0])
    if shift:
        w = w - E0
    else:
        _check_frustration_free(H, w)
    normH = float(w[-1])
    tau = 1e-8 * max(1.0, normH)
    if len(w) > 1 and w[1] - w[0] <= tau:
        raise ValueError("ground space is degenerate; the AGSP certificate needs a unique ground state")
    gap = float(w[1] - w[0])
    eps = gap if eps is None else float(eps)
    if eps > gap + tau:
        raise ValueError(f"eps={eps} exceeds the measured gap {gap}")
    C = scaled_cheb(ell, eps, normH)
    f = C(w)
    return _spectral_certificate(w, V, f, cut, dims, ell, eps, normH, C.delta_bound, E0 if shift else 0.0)


def agsp_power(cert: AgspCertificate, k) -> AgspCertificate:
    """Certificate of K^k, measured afresh; its bound entry is Delta(K)^k."""
    c = _spectral_certificate(cert.eigenvalues, cert.eigenvectors, cert.filter_values, cert.cut, cert.dims,
                              cert.ell, cert.eps, cert.normH, cert.Delta_measured ** k, cert.shift, k)
    return c


def first_attempt(H, cut, dims=None, shift=False, cap=None) -> AgspCertificate:
    """K = I - H/||H||: invariant ground state, complement shrunk to (1 - eps/||H||)^2."""
    M, dims = _dense(H, dims, cap)
    w, V = np.linalg.eigh(_real_if_possible(M))
    E0 = float(w[0])
    if shift:
        w = w - E0
    else:
        _check_frustration_free(H, w)
    normH = float(w[-1])
    gap = float(w[1] - w[0])
    f = 1 - w / normH
    bound = (1 - gap / normH) ** 2
    return _spectral_certificate(w, V, f, cut, dims, 1, gap, normH, bound, E0 if shift else 0.0)


def measure_agsp(K, ground, cut, dims):
    """Measure (invariance, Delta, D) for an arbitrary matrix K and ground basis."""
    K = np.asarray(K)
    G = np.asarray(ground).reshape(K.shape[0], -1)
    inv = float(max(np.linalg.norm(K @ G[:, j] - G[:, j]) for j in range(G.shape[1])))
    # orthonormal complement of the ground space
    Q, _ = np.linalg.qr(np.hstack([G, np.eye(K.shape[0])]))
    comp = Q[:, G.shape[1]:]
    Delta = float(np.linalg.norm(K @ comp, 2) ** 2)
    return inv, Delta, operator_schmidt_rank(K, cut, dims)


# ---------------------------------------------------------------------------
# area-law bounds


def entropy_bound(D, Delta, mu):
    """4 l0 log D + Delta/(1-Delta)^2 log(D^6/Delta) in bits, l0 = ceil(log mu^2 / log Delta) >= 1."""
    if not 0 < Delta < 1:
        raise ValueError("need 0 < Delta < 1")
    if D < 1 or not 0 < mu <= 1:
        raise ValueError("need D >= 1 and 0 < mu <= 1")
    l0 = max(1, math.ceil(math.log(mu**2) / math.log(Delta) - 1e-12))
    return 4 * l0 * math.log2(D) + Delta / (1 - Delta) ** 2 * math.log2(D**6 / Delta)


def overlap_bound(D, Delta=None):
    """1/sqrt(2D); only a valid lower bound on the best product overlap when D * Delta <= 1/2."""
    if Delta is not None and D * Delta > 0.5:
        raise ValueError("overlap bound needs D * Delta <= 1/2")
    return 1.0 / math.sqrt(2 * D)


def product_overlap(state, cut, dims):
    """Best overlap with a product state across the cut: the top Schmidt coefficient."""
    return float(schmidt_coefficients(state, cut, dims)[0])


def repeated_application(cert: AgspCertificate, phi, ells=range(1, 6)):
    """Rows (l, overlap, lower bound, distance) for K^l |phi> normalised."""
    V, f, g = cert.eigenvectors, cert.filter_values, cert.ground
    c = V.conj().T @ np.asarray(phi)
    mu = abs(np.vdot(g, phi)) / np.linalg.norm(phi)
    rows = []
    for ell in ells:
        cl = c * f**ell
        v = V @ cl
        v /= np.linalg.norm(v)
        ov = abs(np.vdot(g, v))
        lb = mu / math.sqrt(mu**2 + cert.Delta_measured**ell * (1 - mu**2))
        # fix the global phase before measuring the distance
        ph = np.vdot(g, v)
        dist = float(np.linalg.norm(v * (abs(ph) / ph if ph != 0 else 1) - g))
        rows.append((ell, float(ov), float(lb), dist))
    return rows


def eckart_young(state, approx, cut, dims):
    """(|<approx|state>|^2, sum of the top-r squared Schmidt coefficients) with r = rank(approx)."""
    a = np.asarray(approx) / np.linalg.norm(approx)
    s = schmidt_coefficients(state, cut, dims)
    sa = schmidt_coefficients(a, cut, dims)
    r = int(np.sum(sa > 1e-12 * sa[0]))
    return float(abs(np.vdot(a, state)) ** 2), float(np.sum(s[:r] ** 2)), r


def truncate_state(state, cut, dims, r):
    """Best rank-r approximation across the cut (unnormalised)."""
    dA = int(np.prod(dims[:cut]))
    U, s, Vh = np.linalg.svd(np.asarray(state).reshape(dA, -1), full_matrices=False)
    return ((U[:, :r] * s[:r]) @ Vh[:r]).ravel()


def tail_mass(state, cut, dims, r):
    s = schmidt_coefficients(state, cut, dims)
    return float(np.sum(s[r:] ** 2))


def combinatorial_rank_reference(d, ell, s):
    """Reference size (d ell)^max(ell/s, sqrt(ell)) of the combinatorial Schmidt-rank bound, constant 1."""
    return float((d * ell) ** max(ell / s, math.sqrt(ell)))


# ---------------------------------------------------------------------------
# entropy scans


def ground_state(H: LocalHamiltonian, cap=None):
    if H.dim <= 4096:
        M = _real_if_possible(assemble(H, cap))
        w, v = np.linalg.eigh(M)
        return float(w[0]), v[:, 0]
    return lanczos_ground(H, cap=cap)


def area_law_scan(model="tfim", g_values=(2.0,), n_values=range(6, 15), J=1.0, cap=None):
    """Rows (n, g, mid-cut entropy in bits) from exact ground states of open chains."""
    from .hamiltonian import build_model

    rows = []
    for g in g_values:
        for n in n_values:
            H = build_model(model, n, "open", J=J, g=g)
            _, psi = ground_state(H, cap)
            rows.append((int(n), float(g), entanglement_entropy(psi, n // 2, H.dims)))
    return rows


__all__ = [
    "FrustratedError", "chebyshev_T", "cheb_eval", "ScaledChebyshev", "scaled_cheb", "delta_bound",
    "TruncatedHamiltonian", "bond_terms", "window_bonds", "truncate_hamiltonian", "truncation_sweep",
    "ff_ising_chain", "operator_schmidt_values", "operator_schmidt_rank", "AgspCertificate",
    "build_agsp", "agsp_power", "first_attempt", "measure_agsp", "entropy_bound", "overlap_bound",
    "product_overlap", "repeated_application", "eckart_young", "truncate_state", "tail_mass",
    "combinatorial_rank_reference", "ground_state", "area_law_scan",
]
