import numpy as np
import pytest

from qhc.commuting import (
    InducedAlgebra, center, decomposition_to_json, decoupled_ground_energy, dense_ground_energy, generated_algebra,
    induced_algebra, operator_blocks, pairwise_commutation_check, planted_pair, random_block_dims,
    structure_decompose,
)
from qhc.hamiltonian import X, Z
from conftest import random_hermitian

I2 = np.eye(2)


def check_decomposition(A, B, dec, dY):
    Ws = [W for W, _ in dec.blocks]
    assert sum(d1 * d2 for d1, d2 in dec.block_dims) == dY
    G = np.concatenate(Ws, axis=1)
    assert np.abs(G.conj().T @ G - np.eye(dY)).max() < 1e-9
    assert max(max(r) for r in dec.residuals) < 1e-7
    assert abs(decoupled_ground_energy(A, B, dec) - dense_ground_energy(A, B, dec.dims)) < 1e-8


class TestAlgebra:
    def test_scalar_on_y(self, rng):
        C = random_hermitian(rng, 2)
        alg = induced_algebra(np.kron(C, np.eye(3)), (2, 3))
        assert alg.dim == 1 and alg.contains(np.eye(3))

    def test_identity_tensor_d(self, rng):
        D = np.diag([1.0, 2.0, 2.0])
        alg = induced_algebra(np.kron(I2, D), (2, 3))
        assert alg.dim == 2 and alg.contains(D)
        # one generic Hermitian generator spans its own spectral projectors only
        G = random_hermitian(rng, 3)
        assert induced_algebra(np.kron(I2, G), (2, 3)).dim == 3
        # a generic A on X (x) Y has blocks generating the full matrix algebra
        assert induced_algebra(random_hermitian(rng, 6), (2, 3)).dim == 9

    def test_zz(self):
        alg = induced_algebra(np.kron(Z, Z), (2, 2))
        assert alg.dim == 2 and alg.contains(Z) and alg.contains(I2)

    def test_closure(self, rng):
        gens = [np.diag([1, 0, 0, 0]).astype(complex), np.kron(X, I2)]
        alg = InducedAlgebra(gens, generated_algebra(gens, 4))
        for a in alg.basis:
            for b in alg.basis:
                assert alg.contains(a @ b)
            assert alg.contains(a.conj().T)
        assert alg.contains(np.eye(4))

    def test_blocks(self, rng):
        A = random_hermitian(rng, 6)
        blocks = operator_blocks(A, (2, 3), "left")
        assert len(blocks) == 4 and np.allclose(blocks[1], A[:3, 3:])
        blocks = operator_blocks(A, (3, 2), "right")
        assert np.allclose(blocks[1], A[0::2, 1::2])
        with pytest.raises(ValueError):
            operator_blocks(A, (2, 3), "middle")

    def test_rejects(self, rng):
        with pytest.raises(ValueError):
            induced_algebra(np.triu(np.ones((4, 4))), (2, 2))
        with pytest.raises(ValueError):
            induced_algebra(np.eye(34), (2, 17))

    def test_commutation_check(self, rng):
        Y = lambda A, s="left": induced_algebra(A, (2, 2), s)
        assert not pairwise_commutation_check(Y(np.kron(I2, Z)), Y(np.kron(X, I2), "right"))
        assert pairwise_commutation_check(Y(np.kron(X, Z)), Y(np.kron(Z, Z), "right"))
        A, B = planted_pair([(2, 1), (1, 2)], 2, 2, rng)
        assert pairwise_commutation_check(induced_algebra(A, (2, 4)), induced_algebra(B, (4, 2), "right"))

    def test_center(self, rng):
        A, _ = planted_pair([(2, 1), (1, 1), (1, 2)], 2, 1, rng)
        alg = induced_algebra(A, (2, 5))
        Zc = center(alg)
        assert len(Zc) == 3
        for z in Zc:
            assert np.allclose(z, z.conj().T)
            for b in alg.basis:
                assert np.abs(z @ b - b @ z).max() < 1e-8


class TestDecompose:
    def test_diagonal_example(self):
        A, B = np.kron(Z, Z), np.kron(Z, Z)
        dec = structure_decompose(A, B, (2, 2, 2))
        assert sorted(dec.block_dims) == [(1, 1), (1, 1)]
        check_decomposition(A, B, dec, 2)
        assert decoupled_ground_energy(A, B, dec) == pytest.approx(-2)

    def test_trivial_a(self, rng):
        C = random_hermitian(rng, 2)
        A = np.kron(C, np.eye(3))
        B = random_hermitian(rng, 6)
        dec = structure_decompose(A, B, (2, 3, 2))
        assert dec.block_dims == [(1, 3)]
        check_decomposition(A, B, dec, 3)

    def test_b_zero(self, rng):
        A, _ = planted_pair([(2, 1), (1, 2)], 2, 2, rng)
        B = np.zeros((8, 8))
        dec = structure_decompose(A, B, (2, 4, 2))
        assert decoupled_ground_energy(A, B, dec) == pytest.approx(np.linalg.eigvalsh(A)[0])

    def test_non_commuting(self):
        with pytest.raises(ValueError):
            structure_decompose(np.kron(I2, Z), np.kron(X, I2), (2, 2, 2))
        with pytest.raises(ValueError):
            structure_decompose(np.eye(4), np.eye(3), (2, 2, 2))

    @pytest.mark.parametrize("seed", range(40))
    def test_planted(self, seed):
        rng = np.random.default_rng(seed)
        bd = random_block_dims(rng)
        dX, dZ = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        A, B = planted_pair(bd, dX, dZ, rng)
        dY = sum(a * b for a, b in bd)
        assert dY <= 12
        dec = structure_decompose(A, B, (dX, dY, dZ), seed=seed)
        assert sorted(dec.block_dims) == sorted(bd)
        check_decomposition(A, B, dec, dY)

    def test_json(self, rng):
        A, B = planted_pair([(2, 2)], 2, 1, rng)
        out = decomposition_to_json(structure_decompose(A, B, (2, 4, 1)))
        assert out["dims"] == [2, 4, 1]
        assert [(b["d1"], b["d2"]) for b in out["blocks"]] == [(2, 2)]
