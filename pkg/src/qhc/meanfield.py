"""Mean-field theory of the classical Ising model on a D-dimensional hypercubic lattice.

Units have k_B = 1, so beta = 1/T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ONSAGER_TC_2D = 2.0 / np.log(1.0 + np.sqrt(2.0))


def _check(beta, D, J):
    if beta <= 0 or D < 1 or J <= 0:
        raise ValueError("need beta > 0, D >= 1, J > 0")


def solve_mf(beta, D, J, max_iter=200):
    """All real roots of m = tanh(2 beta D J m), sorted ascending."""
    _check(beta, D, J)
    a = 2.0 * beta * D * J
    if a <= 1.0:
        return [0.0]
    g = lambda m: m - np.tanh(a * m)
    lo, hi = 1e-12, 1.0
    # g < 0 just above 0 when a > 1, g(1) > 0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    m0 = 0.5 * (lo + hi)
    return [-m0, 0.0, m0]


def mf_free_energy(m, beta, D, J, n=1):
    """F_mf = n beta D J m^2 - n ln(2 cosh(2 beta D J m))."""
    a = 2.0 * beta * D * J
    # ln(2 cosh x) = |x| + log1p(exp(-2|x|))
    x = np.abs(a * np.asarray(m, dtype=float))
    return n * beta * D * J * np.asarray(m) ** 2 - n * (x + np.log1p(np.exp(-2 * x)))


def critical_temperature(D, J):
    if D < 1 or J <= 0:
        raise ValueError("need D >= 1, J > 0")
    return 2.0 * D * J


@dataclass
class MeanFieldSolution:
    beta: float
    D: int
    J: float
    n: int
    candidates: list
    physical_m: float
    T_c: float


def mean_field(beta, D, J, n=1) -> MeanFieldSolution:
    roots = solve_mf(beta, D, J)
    cands = [(m, float(mf_free_energy(m, beta, D, J, n))) for m in roots]
    # ties between +m0 and -m0 resolve to the positive branch
    best = min(cands, key=lambda c: (round(c[1], 12), -c[0]))
    return MeanFieldSolution(beta, D, J, n, cands, abs(best[0]), critical_temperature(D, J))


def mf_magnetization_vs_T(D, J, T_grid):
    """Rows (T, m, F_mf per site) for the physical branch."""
    T_grid = np.asarray(T_grid, dtype=float)
    if np.any(T_grid <= 0) or np.any(np.diff(T_grid) <= 0):
        raise ValueError("T grid must be positive and ascending")
    rows = []
    for T in T_grid:
        sol = mean_field(1.0 / T, D, J)
        rows.append((float(T), sol.physical_m, float(mf_free_energy(sol.physical_m, 1.0 / T, D, J))))
    return rows


def exact_chain_magnetization(n, beta, J=1.0, h=1e-3, bc="periodic"):
    """<x_i> of the 1D ferromagnet -J sum x_i x_j - h sum x_i by enumeration.

    The mean-field model above is written for the ferromagnet with energy
    -J sum x_i x_j, so the oracle uses the same sign.
    """
    from .hamiltonian import classical_ising_energies

    adj = [(i, i + 1, -J) for i in range(n - 1)]
    if bc == "periodic":
        adj.append((0, n - 1, -J))
    E = classical_ising_energies(adj, -h * np.ones(n), 1.0, n=n)
    w = np.exp(-beta * (E - E.min()))
    b = np.arange(2**n)
    x0 = 1 - 2 * ((b >> (n - 1)) & 1)
    return float(np.sum(w * x0) / np.sum(w))
