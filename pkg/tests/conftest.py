import itertools
import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def brute_force_sat(n, clauses):
    """Minimum number of violated clauses over all assignments (plain loop oracle)."""
    best = len(clauses)
    for bits in itertools.product((0, 1), repeat=n):
        v = sum(not any((lit > 0) == bool(bits[abs(lit) - 1]) for lit in c) for c in clauses)
        best = min(best, v)
        if best == 0:
            break
    return best


def random_3sat(rng, n, m):
    out = []
    for _ in range(m):
        vs = rng.choice(np.arange(1, n + 1), 3, replace=False)
        sg = rng.choice([-1, 1], 3)
        out.append(tuple(int(v) * int(s) for v, s in zip(vs, sg)))
    return out


def random_psd(rng, d, rank=None):
    rank = d if rank is None else rank
    A = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    return A @ A.conj().T


def random_hermitian(rng, d):
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (A + A.conj().T) / 2


def random_state(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
