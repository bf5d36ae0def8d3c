import numpy as np
import pytest

from qhc.clock import (
    CNOT, SWAP, QuantumCircuit, acceptance_operator, acceptance_probability, angle_cos2, best_proof,
    clock_geometric_report, clock_matrix, clock_spectrum, compile_circuit, frame_change, geometric_bound,
    history_state, measured_epsilon, normalise_terms, param_verifier, qma_verify_probability, ry,
    sample_verifier, toy_no_circuit, toy_yes_circuit, unary_embedding, unary_index, valid_clock_projector,
)
from qhc.hamiltonian import LocalHamiltonian, LocalTerm, assemble
from conftest import random_psd, random_state


def proof_grid():
    return [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.6, 0.8]), np.array([1, 1j]) / np.sqrt(2)]


class TestCircuit:
    def test_validation(self):
        with pytest.raises(ValueError):
            QuantumCircuit(1, 1, [])
        with pytest.raises(ValueError):
            QuantumCircuit(1, 1, [((0,), np.array([[1, 1], [0, 1]]))])
        with pytest.raises(ValueError):
            QuantumCircuit(2, 1, [((0, 0), np.eye(4))])
        with pytest.raises(ValueError):
            QuantumCircuit(2, 3, [((0,), np.eye(2))])
        with pytest.raises(ValueError):
            QuantumCircuit(2, 1, [((0,), np.eye(4))])

    def test_acceptance_probability(self):
        for theta in (0.0, 0.7, np.pi):
            c = param_verifier(theta)
            # RY(theta)|0> has amplitude sin(theta/2) on |1>
            assert acceptance_probability(c, [1, 0]) == pytest.approx(np.sin(theta / 2) ** 2)
        p, v = best_proof(param_verifier(0.7))
        assert p == pytest.approx(1.0)
        assert np.allclose(acceptance_operator(param_verifier(0.7)), acceptance_operator(param_verifier(0.7)).conj().T)

    def test_measured_epsilon(self):
        assert measured_epsilon(toy_yes_circuit(3), "yes") == pytest.approx(0)
        assert measured_epsilon(toy_no_circuit(3), "no") == pytest.approx(0)

    def test_bad_proof(self):
        with pytest.raises(ValueError):
            param_verifier(0.1).initial_state([1, 1])
        with pytest.raises(ValueError):
            param_verifier(0.1).initial_state([1, 0, 0, 0])


class TestCompile:
    @pytest.mark.parametrize("L", range(1, 9))
    def test_clock_factor_spectrum(self, L):
        assert np.allclose(np.linalg.eigvalsh(clock_matrix(L)), clock_spectrum(L), atol=1e-10)
        # identity gates: the assembled propagation term is I (x) E
        Hp = compile_circuit(toy_yes_circuit(L)).matrix(["H_prop"])
        assert np.allclose(np.linalg.eigvalsh(Hp), np.sort(np.repeat(clock_spectrum(L), 2)), atol=1e-10)

    def test_identity_circuit_null_space(self):
        ch = compile_circuit(toy_yes_circuit(1))
        Hip = ch.matrix(["H_in", "H_prop"])
        for psi in proof_grid():
            v = np.kron(psi, np.ones(2) / np.sqrt(2))
            assert np.linalg.norm(Hip @ v) < 1e-12
        # the output term additionally needs the accepted proof |1>
        v = np.kron([0, 1], np.ones(2) / np.sqrt(2))
        assert np.linalg.norm(ch.matrix() @ v) < 1e-12

    def test_parts_psd(self):
        for enc in ("direct", "unary"):
            ch = compile_circuit(param_verifier(0.4, 3), enc)
            for name in ch.parts:
                assert np.linalg.eigvalsh(ch.matrix([name]))[0] > -1e-12

    def test_locality(self):
        ch = compile_circuit(param_verifier(0.4, 4), "unary")
        assert all(t.k <= 5 for part in ch.parts.values() for t in part.terms)
        ch = compile_circuit(param_verifier(0.4, 4), "unary", h_in="split")
        assert ch.parts["H_in"].locality == 2

    def test_split_h_in_same_null_space(self):
        c = QuantumCircuit(3, 1, [((0, 1), CNOT), ((1, 2), CNOT)])
        a = compile_circuit(c).matrix(["H_in"])
        b = compile_circuit(c, h_in="split").matrix(["H_in"])
        assert np.allclose(np.abs(np.diag(a)) < 1e-12, np.abs(np.diag(b)) < 1e-12)

    def test_bad_options(self):
        with pytest.raises(ValueError):
            compile_circuit(toy_yes_circuit(1), "binary")
        with pytest.raises(ValueError):
            compile_circuit(toy_yes_circuit(1), h_in="both")

    def test_stab_violation(self):
        L = 4
        ch = compile_circuit(toy_yes_circuit(L), "unary")
        Hs = ch.matrix(["H_stab"])
        for j in range(L - 1):
            bits = [1] * L
            bits[j], bits[j + 1] = 0, 1
            idx = int("".join(map(str, bits)), 2)
            for x in range(2):
                assert Hs[x * 2**L + idx, x * 2**L + idx].real >= 1

    @pytest.mark.parametrize("L", range(1, 7))
    def test_stab_null_space_is_valid_clock(self, L):
        ch = compile_circuit(toy_yes_circuit(L), "unary")
        d = np.diag(ch.matrix(["H_stab"])).real.reshape(2, 2**L)
        valid = valid_clock_projector(L)
        assert np.array_equal(d[0] == 0, valid == 1) and np.array_equal(d[1] == 0, valid == 1)
        assert [unary_index(j, L) for j in range(L + 1)] == sorted(np.flatnonzero(valid))

    @pytest.mark.parametrize("circ", [param_verifier(0.7, 3), toy_no_circuit(3), QuantumCircuit(
        3, 2, [((0, 1), CNOT), ((2,), ry(0.3)), ((1, 2), CNOT), ((0,), ry(1.1))])])
    def test_frame_change(self, circ):
        ch = compile_circuit(circ)
        W = frame_change(circ)
        dq = 2**circ.N
        assert np.allclose(W.conj().T @ ch.matrix(["H_prop"]) @ W, np.kron(np.eye(dq), clock_matrix(circ.L)), atol=1e-10)
        Hin = ch.matrix(["H_in"])
        assert np.allclose(W.conj().T @ Hin @ W, Hin, atol=1e-10)
        VI = np.kron(circ.unitary(), np.eye(circ.L + 1))
        Ho = ch.matrix(["H_out"])
        assert np.allclose(W.conj().T @ Ho @ W, VI.conj().T @ Ho @ VI, atol=1e-10)

    @pytest.mark.parametrize("N,L", [(1, 1), (1, 4), (2, 2), (2, 4), (3, 3)])
    def test_unary_isospectral(self, N, L, rng):
        gates = []
        for k in range(L):
            if N > 1 and k % 2:
                gates.append(((k % N, (k + 1) % N), CNOT))
            else:
                gates.append(((k % N,), ry(rng.uniform(0, np.pi))))
        circ = QuantumCircuit(N, 1, gates)
        Hd = compile_circuit(circ).matrix()
        Hu = compile_circuit(circ, "unary").matrix()
        Em = unary_embedding(N, L)
        # the valid-clock subspace is invariant and carries the direct spectrum
        assert np.allclose(Hu @ Em, Em @ (Em.T @ Hu @ Em), atol=1e-12)
        assert np.allclose(np.linalg.eigvalsh(Em.T @ Hu @ Em), np.linalg.eigvalsh(Hd), atol=1e-10)


class TestHistory:
    @pytest.mark.parametrize("enc", ["direct", "unary"])
    def test_accepting_in_null_space(self, enc):
        c = param_verifier(0.0, 3)  # ancilla flips iff proof is |1>
        eta = history_state(c, [0, 1], enc)
        H = compile_circuit(c, enc).matrix()
        assert np.linalg.norm(eta) == pytest.approx(1)
        assert np.vdot(eta, H @ eta).real < 1e-10

    def test_identity_history_state(self):
        eta = history_state(toy_yes_circuit(1), [0.6, 0.8])
        assert np.allclose(eta, np.kron([0.6, 0.8], np.ones(2) / np.sqrt(2)))

    @pytest.mark.parametrize("theta", np.linspace(0, np.pi, 7))
    @pytest.mark.parametrize("L", [2, 3, 5])
    def test_energy_bound(self, theta, L):
        c = param_verifier(theta, L)
        ch = compile_circuit(c)
        H = ch.matrix()
        for proof in proof_grid():
            eps = 1 - acceptance_probability(c, proof)
            eta = history_state(c, proof)
            e = np.vdot(eta, H @ eta).real
            assert e <= eps / (L + 1) + 1e-10
            # the bound is attained: only the output term sees the history state
            assert e == pytest.approx(eps / (L + 1), abs=1e-12)

    def test_unary_matches_direct(self):
        c = param_verifier(1.2, 3)
        Em = unary_embedding(c.N, c.L)
        assert np.allclose(Em @ history_state(c, [0.6, 0.8]), history_state(c, [0.6, 0.8], "unary"))


class TestVerifier:
    def test_zero_energy_state(self):
        P = np.diag([1.0, 0.0])
        H = LocalHamiltonian(2, 2, [LocalTerm((0,), P), LocalTerm((1,), P)])
        assert qma_verify_probability(H, np.eye(4)[3]) == pytest.approx(1)

    def test_single_projector(self):
        H = LocalHamiltonian(1, 2, [LocalTerm((0,), np.diag([0.0, 1.0]))])
        assert qma_verify_probability(H, [0, 1]) == pytest.approx(0)

    def test_sampling_matches(self, rng):
        H = LocalHamiltonian(3, 2, [LocalTerm((0, 1), random_psd(rng, 4)), LocalTerm((1, 2), random_psd(rng, 4)),
                                    LocalTerm((0,), random_psd(rng, 2))])
        psi = random_state(rng, 8)
        p = qma_verify_probability(H, psi)
        shots = 100_000
        s = sample_verifier(H, psi, shots, np.random.default_rng(7))
        assert abs(p - s) < 3 * np.sqrt(p * (1 - p) / shots)

    def test_rescaling_and_errors(self, rng):
        H = LocalHamiltonian(1, 2, [LocalTerm((0,), 5 * np.eye(2))])
        terms, scale = normalise_terms(H)
        assert scale == 5 and np.allclose(terms[0].matrix, np.eye(2))
        with pytest.raises(ValueError):
            normalise_terms(LocalHamiltonian(1, 2, [LocalTerm((0,), -np.eye(2))]))
        with pytest.raises(ValueError):
            normalise_terms(LocalHamiltonian(1, 2, []))


class TestGeometric:
    def test_orthogonal_null_spaces(self):
        A1, A2 = np.diag([0.0, 2.0]), np.diag([3.0, 0.0])
        rep = geometric_bound(A1, A2)
        assert rep.angle == pytest.approx(np.pi / 2) and rep.v == 2 and rep.bound == pytest.approx(2)

    def test_intersecting_null_spaces(self):
        with pytest.raises(ValueError):
            geometric_bound(np.diag([0.0, 1.0, 1.0]), np.diag([0.0, 0.0, 1.0]))

    def test_not_psd(self):
        with pytest.raises(ValueError):
            geometric_bound(np.diag([-1.0, 1.0]), np.diag([1.0, 0.0]))

    def test_random_pairs(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 7))
            r1 = int(rng.integers(1, d))
            r2 = int(rng.integers(d - r1, d + 1))
            A1, A2 = random_psd(rng, d, r1), random_psd(rng, d, r2)
            rep = geometric_bound(A1, A2)
            assert rep.bound <= rep.lambda_min_actual + 1e-9
            assert rep.lambda_min_actual == pytest.approx(np.linalg.eigvalsh(A1 + A2)[0])

    @pytest.mark.parametrize("L", [1, 2, 3, 4, 6])
    def test_compiled_no_instance(self, L):
        c = toy_no_circuit(L)
        rep = clock_geometric_report(compile_circuit(c))
        assert 0 < rep.bound <= rep.lambda_min_actual
        eps = measured_epsilon(c, "no")
        assert angle_cos2(compile_circuit(c)) <= 1 - (1 - np.sqrt(eps)) / (L + 1) + 1e-10

    @pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, 2.0, 3.0])
    def test_compiled_no_verifier_cos2(self, theta):
        # swap the proof away, then accept the fresh ancilla with probability sin^2(theta/2)
        for L in (2, 3, 4):
            c = QuantumCircuit(2, 1, [((0, 1), SWAP), ((0,), ry(theta))] + [((1,), np.eye(2))] * (L - 2))
            assert measured_epsilon(c, "no") == pytest.approx(np.sin(theta / 2) ** 2)
            ch = compile_circuit(c)
            rep = clock_geometric_report(ch)
            assert rep.bound <= rep.lambda_min_actual + 1e-12
            eps = measured_epsilon(c, "no")
            assert np.cos(rep.angle) ** 2 <= 1 - (1 - np.sqrt(eps)) / (L + 1) + 1e-10


def test_yes_no_separation():
    rows = []
    for L in range(1, 7):
        yes = np.linalg.eigvalsh(compile_circuit(toy_yes_circuit(L)).matrix())[0]
        no = np.linalg.eigvalsh(compile_circuit(toy_no_circuit(L)).matrix())[0]
        assert abs(yes) < 1e-10
        rows.append(no * L**3)
    assert min(rows) > 0.1
