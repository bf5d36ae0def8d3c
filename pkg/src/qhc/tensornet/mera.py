"""Binary 1D MERA with periodic boundary, and causal-cone contraction.

Layer ``l`` (0 = top) acts on ``m = 2**(l+1)`` sites.  Going down, each
coarse site p is expanded by an isometry adjoint into sites (2p, 2p+1), then
disentangler adjoints act on pairs (2k+1, 2k+2 mod m).  The top state is |0>.
Isometries V are stored as d x d^2 matrices with V V^dag = I and
disentanglers U as d^2 x d^2 unitaries, both in the coarse-graining direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from ..spectra import DensityMatrix


@dataclass
class MERANetwork:
    n: int
    d: int
    layers: list  # [{"isometries": (m/2, d, d*d), "disentanglers": (m/2, d*d, d*d)}, ...] top first

    def __post_init__(self):
        L = int(round(np.log2(self.n)))
        if self.n < 2 or 2**L != self.n:
            raise ValueError("n must be a power of 2")
        if len(self.layers) != L:
            raise ValueError(f"expected {L} layers, got {len(self.layers)}")
        d = self.d
        for l, layer in enumerate(self.layers):
            half = 2**l
            V, U = np.asarray(layer["isometries"]), np.asarray(layer["disentanglers"])
            if V.shape != (half, d, d * d) or U.shape != (half, d * d, d * d):
                raise ValueError(f"invalid shapes in layer {l}")

    def check(self, tol=1e-10):
        d = self.d
        for layer in self.layers:
            for V in layer["isometries"]:
                if np.max(np.abs(V @ V.conj().T - np.eye(d))) > tol:
                    return False
            for U in layer["disentanglers"]:
                if np.max(np.abs(U @ U.conj().T - np.eye(d * d))) > tol:
                    return False
        return True

    @property
    def n_layers(self):
        return len(self.layers)


def mera_build_random(n, d=2, seed=0) -> MERANetwork:
    rng = np.random.default_rng(seed)
    layers = []
    for l in range(int(round(np.log2(n)))):
        half = 2**l
        iso = np.array([unitary_group.rvs(d * d, random_state=rng)[:d] for _ in range(half)])
        dis = np.array([unitary_group.rvs(d * d, random_state=rng) for _ in range(half)])
        layers.append({"isometries": iso, "disentanglers": dis})
    return MERANetwork(n, d, layers)


def mera_trivial(n, d=2) -> MERANetwork:
    """Identity disentanglers and isometries with V^dag|a> = |a>|0>."""
    V = np.zeros((d, d * d))
    for a in range(d):
        V[a, a * d] = 1.0
    layers = []
    for l in range(int(round(np.log2(n)))):
        half = 2**l
        layers.append({"isometries": np.array([V] * half, dtype=complex),
                       "disentanglers": np.array([np.eye(d * d)] * half, dtype=complex)})
    return MERANetwork(n, d, layers)


def _disentangler_pairs(m):
    return [(2 * k + 1, (2 * k + 2) % m) for k in range(m // 2)]


def mera_state(net: MERANetwork):
    """Full state vector by brute force (n <= 16)."""
    d = net.d
    psi = np.zeros(d, dtype=complex)
    psi[0] = 1.0
    for l, layer in enumerate(net.layers):
        half = 2**l
        m = 2 * half
        t = psi.reshape([d] * half)
        for p in range(half):
            Vd = layer["isometries"][p].conj().T.reshape(d, d, d)  # (child0, child1, parent)
            # parent leg of site p sits at axis 2p after earlier expansions
            t = np.tensordot(Vd, t, axes=([2], [2 * p]))
            t = np.moveaxis(t, [0, 1], [2 * p, 2 * p + 1])
        for k, (a, b) in enumerate(_disentangler_pairs(m)):
            Ud = layer["disentanglers"][k].conj().T.reshape(d, d, d, d)
            t = np.tensordot(Ud, t, axes=([2, 3], [a, b]))
            t = np.moveaxis(t, [0, 1], [a, b])
        psi = t.reshape(-1)
    return psi


# -- causal cone -------------------------------------------------------------


class _Rho:
    """Density operator on a labelled set of sites; legs ket..., bra...."""

    def __init__(self, sites, data, d):
        self.sites, self.data, self.d = list(sites), data, d

    def apply(self, op, in_sites, out_sites):
        """rho -> op rho op^dag where op maps in_sites legs to out_sites legs."""
        d = self.d
        ki, ko = len(in_sites), len(out_sites)
        T = op.reshape([d] * (ko + ki))
        ax = [self.sites.index(s) for s in in_sites]
        data = np.tensordot(T, self.data, axes=(list(range(ko, ko + ki)), ax))
        rest = [s for s in self.sites if s not in in_sites]
        # ket legs now: out_sites + rest ; bra legs follow
        data = np.tensordot(data, T.conj(), axes=([ko + len(rest) + a for a in ax], list(range(ko, ko + ki))))
        new_sites = list(out_sites) + rest
        nk = len(new_sites)
        # bra legs order: rest bra (in original order minus in), then out_sites bra
        bra_sites = rest + list(out_sites)
        order = sorted(new_sites)
        ket_perm = [new_sites.index(s) for s in order]
        bra_perm = [nk + bra_sites.index(s) for s in order]
        self.data = data.transpose(ket_perm + bra_perm)
        self.sites = order

    def trace_out(self, site):
        k = len(self.sites)
        a = self.sites.index(site)
        self.data = np.trace(self.data, axis1=a, axis2=k + a)
        self.sites.remove(site)

    def matrix(self):
        k = len(self.sites)
        D = self.d**k
        return self.data.reshape(D, D)


def causal_cone(n, site):
    """Sites needed per layer (top first): (before-disentangler set, after set)."""
    L = int(round(np.log2(n)))
    cones = []
    S = {site}
    for l in range(L - 1, -1, -1):
        m = 2 ** (l + 1)
        Sp = set(S)
        for a, b in _disentangler_pairs(m):
            if a in S or b in S:
                Sp |= {a, b}
        cones.append((sorted(Sp), sorted(S)))
        S = {j // 2 for j in Sp}
    return cones[::-1]


def mera_causal_rdm(net: MERANetwork, site: int, return_count=False):
    """Reduced density matrix of ``site`` contracting only causal-cone tensors."""
    if not 0 <= site < net.n:
        raise ValueError("site out of range")
    d = net.d
    cones = causal_cone(net.n, site)
    top = np.zeros((d, d), dtype=complex)
    top[0, 0] = 1.0
    rho = _Rho([0], top, d)
    touched = 0
    max_legs = 1
    for l, layer in enumerate(net.layers):
        m = 2 ** (l + 1)
        need, keep = cones[l]
        parents = sorted({j // 2 for j in need})
        assert sorted(rho.sites) == parents
        # move parent labels out of the child index space before expanding
        rho.sites = [-1 - p for p in rho.sites]
        for p in parents:
            Vd = layer["isometries"][p].conj().T
            rho.apply(Vd, [-1 - p], [2 * p, 2 * p + 1])
            touched += 1
            for c in (2 * p, 2 * p + 1):
                if c not in need:
                    rho.trace_out(c)
            max_legs = max(max_legs, len(rho.sites))
        for k, (a, b) in enumerate(_disentangler_pairs(m)):
            if a in keep or b in keep:
                Ud = layer["disentanglers"][k].conj().T
                rho.apply(Ud, [a, b], [a, b])
                touched += 1
        for s in list(rho.sites):
            if s not in keep:
                rho.trace_out(s)
    dm = DensityMatrix(rho.matrix(), (d,))
    if return_count:
        return dm, {"tensors": touched, "max_legs": max_legs}
    return dm


def mera_local_expectation(net: MERANetwork, obs, site):
    rho = mera_causal_rdm(net, site)
    return float(np.real(np.trace(rho.matrix @ np.asarray(obs))))
