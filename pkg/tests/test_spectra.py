import numpy as np
import pytest

from qhc import _config
from qhc.clock import clock_matrix
from qhc.hamiltonian import (
    CnfFormula, LocalHamiltonian, LocalTerm, X, Z, assemble, build_afm_heisenberg, build_aklt, build_tfim,
    embed_cnf, spin_operators,
)
from qhc.spectra import (
    DensityMatrix, apply_local, correlation_csv, dense_spectrum, entanglement_entropy, entropy_csv,
    entropy_from_schmidt, gibbs_expectation, gibbs_state, lanczos_ground, log_partition_function,
    partition_function, reduced_density, schmidt_coefficients, schmidt_rank, sim_expectation, spectral_summary,
    spectrum_csv, two_point_correlation, von_neumann_entropy,
)
from conftest import random_hermitian, random_state

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def random_hamiltonian(rng, n=3):
    terms = [LocalTerm((i, i + 1), random_hermitian(rng, 4)) for i in range(n - 1)]
    terms += [LocalTerm((i,), random_hermitian(rng, 2)) for i in range(n)]
    return LocalHamiltonian(n, 2, terms)


def aklt_edge_up_ground_state(n):
    """The open-chain AKLT ground state with both edge spins up (total Sz = +1).

    Total Sz commutes with H, so a weak field selects that state out of the
    four-fold ground space without moving it.
    """
    H = build_aklt(n)
    sz = spin_operators(1).sz
    field = LocalHamiltonian(n, 3, [LocalTerm((i,), -0.1 * sz) for i in range(n)])
    e, psi = lanczos_ground(H + field)
    assert e == pytest.approx(-2 / 3 * (n - 1) - 0.1)
    assert H.expectation(psi) == pytest.approx(-2 / 3 * (n - 1))
    return psi


class TestDense:
    @pytest.mark.parametrize("L", range(1, 9))
    def test_clock_block(self, L):
        res = dense_spectrum(clock_matrix(L))
        k = np.arange(L + 1)
        assert np.allclose(res.eigenvalues, np.sort(1 - np.cos(np.pi * k / (L + 1))), atol=1e-12)

    def test_identity_gap_zero(self):
        res = dense_spectrum(np.eye(4))
        assert np.allclose(res.eigenvalues, 1) and res.gap == 0 and res.ground_degeneracy == 4

    def test_afm_pair(self):
        res = dense_spectrum(build_afm_heisenberg(2), want_vectors=True)
        assert np.allclose(res.eigenvalues, [-3, 1, 1, 1])
        assert res.gap == pytest.approx(4) and res.ground_degeneracy == 1
        assert abs(np.vdot(SINGLET, res.ground_space[:, 0])) == pytest.approx(1)

    def test_residuals(self, rng):
        H = random_hamiltonian(rng, 4)
        res = dense_spectrum(H, want_vectors=True)
        M = assemble(H)
        for lam, v in zip(res.eigenvalues, res.eigenvectors.T):
            assert np.linalg.norm(M @ v - lam * v) < 1e-9

    def test_ground_space_needs_vectors(self):
        with pytest.raises(ValueError):
            dense_spectrum(np.eye(2)).ground_space

    def test_cap(self):
        with pytest.raises(_config.CapExceeded):
            dense_spectrum(build_tfim(4), cap=8)

    def test_decide(self):
        res = spectral_summary([0.5, 2.0])
        assert res.decide(0.6, 1.0) is True
        assert res.decide(0.1, 0.4) is False
        assert res.decide(0.1, 1.0) is None


class TestLanczos:
    def test_tfim_matches_dense(self):
        H = build_tfim(10, g=0.5)
        e, v = lanczos_ground(H)
        assert abs(e - dense_spectrum(H).ground_energy) < 1e-8
        assert abs(H.expectation(v) - e) < 1e-8

    def test_satisfiable_cnf(self):
        F = CnfFormula(10, [(1, 2, -3), (-1, 4, 5), (6, -7, 8), (9, 10, -2), (-4, -6, 3)])
        assert lanczos_ground(embed_cnf(F))[0] < 1e-8

    def test_diagonal_with_rare_minimum(self):
        # a handful of zero-energy strings among 2^10 defeats plain ARPACK
        d = np.ones(1024)
        d[[5, 700]] = 0.0
        H = LocalHamiltonian(10, 2, [LocalTerm(tuple(range(10)), np.diag(d))])
        e, v = lanczos_ground(H)
        assert e == 0.0 and abs(v[5]) + abs(v[700]) == 1.0
        w, _ = lanczos_ground(H, k=3)
        assert np.allclose(w, [0, 0, 1])

    def test_identity(self):
        H = LocalHamiltonian(7, 2, [LocalTerm((0,), np.eye(2))])
        assert lanczos_ground(H)[0] == pytest.approx(1.0)

    def test_deterministic(self):
        H = build_tfim(9, g=1.1, bc="periodic")
        a, b = lanczos_ground(H, seed=3), lanczos_ground(H, seed=3)
        assert a[0] == b[0] and np.array_equal(a[1], b[1])

    def test_random_suite_agrees(self, rng):
        for n in (7, 9, 11):
            H = random_hamiltonian(rng, n)
            assert abs(lanczos_ground(H)[0] - dense_spectrum(H).ground_energy) < 1e-7

    def test_cap(self):
        with pytest.raises(_config.CapExceeded):
            lanczos_ground(build_tfim(10), cap=100)


class TestThermal:
    def test_infinite_temperature(self):
        rho = gibbs_state(build_tfim(3), 0.0).matrix
        assert np.allclose(rho, np.eye(8) / 8)

    def test_single_qubit_partition_function(self):
        H = LocalHamiltonian(1, 2, [LocalTerm((0,), Z)])
        assert partition_function(H, 1.0) == pytest.approx(2 * np.cosh(1.0))

    def test_low_temperature_projector(self):
        H = build_tfim(2, g=0.0)  # ground space |00>, |11>
        rho = gibbs_state(H, 200.0).matrix
        P = np.zeros((4, 4))
        P[0, 0] = P[3, 3] = 0.5
        assert np.allclose(rho, P, atol=1e-12)

    @pytest.mark.parametrize("beta", [0, 0.1, 1, 10])
    def test_valid_density_matrix(self, rng, beta):
        H = random_hamiltonian(rng)
        DensityMatrix(gibbs_state(H, beta).matrix, (2, 2, 2)).validate()

    def test_no_overflow(self):
        H = build_tfim(3, J=100.0)
        gibbs_state(H, 1e3).validate()
        assert np.isfinite(log_partition_function(H, 1e3))

    def test_negative_beta(self):
        with pytest.raises(ValueError):
            gibbs_state(build_tfim(2), -1.0)

    def test_gibbs_expectation_observable(self, rng):
        H = random_hamiltonian(rng)
        M = LocalTerm((1,), X)
        rho = gibbs_state(H, 0.7).matrix
        full = np.kron(np.kron(np.eye(2), X), np.eye(2))
        assert gibbs_expectation(H, 0.7, M) == pytest.approx(np.trace(full @ rho).real)


class TestSimulation:
    def test_t_zero(self, rng):
        H = random_hamiltonian(rng)
        rho = gibbs_state(random_hamiltonian(rng), 0.5)
        M = LocalTerm((0, 2), np.kron(Z, X))
        Mf = np.kron(np.kron(Z, np.eye(2)), X)
        assert sim_expectation(H, rho, M, 0.0) == pytest.approx(np.trace(Mf @ rho.matrix).real)

    def test_energy_conserved_real_time(self, rng):
        H = random_hamiltonian(rng)
        w, v = np.linalg.eigh(assemble(H))
        rho = np.outer(v[:, 3], v[:, 3].conj())
        for t in (0.0, 0.4, 3.0, -2.0):
            assert sim_expectation(H, rho, H, t) == pytest.approx(w[3], abs=1e-10)

    def test_imaginary_time_is_gibbs(self, rng):
        H = random_hamiltonian(rng)
        mixed = np.eye(8) / 8
        for beta in (0.1, 1.0, 4.0):
            # U = exp(iH t) with t = i beta/2 gives U^dag rho U proportional to exp(-beta H)
            assert sim_expectation(H, mixed, H, 0.5j * beta) == pytest.approx(gibbs_expectation(H, beta))

    def test_imaginary_time_monotone_to_ground(self, rng):
        H = random_hamiltonian(rng)
        mixed = np.eye(8) / 8
        vals = [sim_expectation(H, mixed, H, 1j * b) for b in np.linspace(0, 30, 31)]
        assert np.all(np.diff(vals) <= 1e-12)
        assert vals[-1] == pytest.approx(dense_spectrum(H).ground_energy, abs=1e-6)


class TestStates:
    def test_product_zz(self):
        psi = np.array([1, 0, 0, 0], dtype=complex)
        assert two_point_correlation(psi, Z, Z, 0, 1, (2, 2)) == pytest.approx(1)

    def test_singlet_zz(self):
        assert two_point_correlation(SINGLET, Z, Z, 0, 1, (2, 2)) == pytest.approx(-1)
        rho = DensityMatrix(np.outer(SINGLET, SINGLET), (2, 2))
        assert two_point_correlation(rho, X, X, 1, 0, (2, 2)) == pytest.approx(-1)

    def test_correlation_errors(self):
        with pytest.raises(ValueError):
            two_point_correlation(SINGLET, Z, Z, 0, 0, (2, 2))
        with pytest.raises(ValueError):
            two_point_correlation(SINGLET, Z, Z, 0, 2, (2, 2))

    def test_pure_and_mixed_correlations_agree(self, rng):
        psi = random_state(rng, 3 * 2 * 3)
        A, B = random_hermitian(rng, 3), random_hermitian(rng, 3)
        dims = (3, 2, 3)
        a = two_point_correlation(psi, A, B, 2, 0, dims)
        b = two_point_correlation(np.outer(psi, psi.conj()), A, B, 2, 0, dims)
        ref = np.vdot(psi, np.kron(np.kron(B, np.eye(2)), A) @ psi)
        assert a == pytest.approx(ref) and b == pytest.approx(ref)

    def test_aklt_correlations_decay_exponentially(self):
        e, v = lanczos_ground(build_aklt(8, "periodic"))
        sz = spin_operators(1).sz
        C = np.array([two_point_correlation(v, sz, sz, 0, r, (3,) * 8).real for r in range(1, 5)])
        assert np.all(np.diff(np.abs(C)) < 0)
        assert np.all(np.sign(C) == [-1, 1, -1, 1])
        r = np.arange(1, 5)
        y = np.log(np.abs(C))
        fit = np.polyfit(r, y, 1)
        res = y - np.polyval(fit, r)
        assert 1 - res @ res / np.sum((y - y.mean()) ** 2) > 0.95


class TestEntanglement:
    def test_product_zero(self, rng):
        psi = np.kron(random_state(rng, 2), random_state(rng, 4))
        assert entanglement_entropy(psi, 1, (2, 2, 2)) == pytest.approx(0, abs=1e-12)

    def test_singlet_one_bit(self):
        assert entanglement_entropy(SINGLET, 1, (2, 2)) == pytest.approx(1)

    def test_aklt_schmidt_rank_two(self):
        psi = aklt_edge_up_ground_state(8)
        assert [schmidt_rank(psi, c, (3,) * 8) for c in range(1, 8)] == [2] * 7

    def test_local_unitary_invariance(self, rng):
        dims = (2, 2, 2, 2)
        psi = random_state(rng, 16)
        U = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
        before = entanglement_entropy(psi, 2, dims)
        assert abs(entanglement_entropy(apply_local(psi, U, [0, 1], dims), 2, dims) - before) < 1e-9
        assert abs(entanglement_entropy(apply_local(psi, U, [3, 2], dims), 2, dims) - before) < 1e-9

    def test_entropy_matches_reduced_density(self, rng):
        psi = random_state(rng, 2 * 3 * 2)
        rho = reduced_density(psi, [0, 1], (2, 3, 2))
        assert np.trace(rho.matrix) == pytest.approx(1)
        assert von_neumann_entropy(rho) == pytest.approx(entanglement_entropy(psi, 2, (2, 3, 2)))

    def test_reduced_density_of_mixed(self, rng):
        psi = random_state(rng, 8)
        a = reduced_density(psi, [0, 2], (2, 2, 2)).matrix
        b = reduced_density(np.outer(psi, psi.conj()), [2, 0], (2, 2, 2)).matrix
        assert np.allclose(a, b)

    def test_unnormalised(self):
        with pytest.raises(ValueError):
            schmidt_coefficients(np.ones(4), 1, (2, 2))
        with pytest.raises(ValueError):
            reduced_density(np.ones(4), [0], (2, 2))

    def test_bad_cut_and_subset(self):
        with pytest.raises(ValueError):
            schmidt_coefficients(SINGLET, 2, (2, 2))
        with pytest.raises(ValueError):
            reduced_density(SINGLET, [], (2, 2))

    def test_tiny_coefficients_dropped(self):
        assert entropy_from_schmidt([1.0, 1e-14]) == 0.0


class TestCsv:
    def test_spectrum(self):
        assert spectrum_csv([-1.0, 0.5]) == "index,eigenvalue\n0,-1\n1,0.5\n"

    def test_other_tables(self):
        assert correlation_csv([(0, 1, -0.25)]) == "i,j,value\n0,1,-0.25\n"
        assert entropy_csv([(1, 1.0)]) == "cut,entropy\n1,1\n"

    def test_round_trip_precision(self):
        x = 0.1 + 0.2
        assert float(spectrum_csv([x]).splitlines()[1].split(",")[1]) == x
