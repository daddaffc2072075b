import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepcrit.bases import get_basis, pauli_basis, weyl_basis
from sepcrit.bloch import (
    DensityMatrix,
    all_subsets,
    compare_bounds,
    decompose,
    generalized_pauli_bound,
    m_bound,
    partial_trace,
    purity_from_tensors,
    reconstruct,
    subset_mask,
    weyl_bound,
)
from sepcrit.errors import ValidationError
from sepcrit.states import bennett_ppt_3x3, mix_white_noise, random_pure, random_state
from sepcrit.tensor import outer_product


def bases_for(family, dims):
    return [get_basis(family, d) for d in dims]


def brute_coefficients(rho, bases, subset):
    """(prod d/kappa) Tr((G_i1 x ... x G_iN)^H rho) with identities outside ``subset``."""
    dims = rho.dims
    ranges = [range(1, d * d) if s + 1 in subset else [0] for s, d in enumerate(dims)]
    shape = [d * d - 1 for s, d in enumerate(dims) if s + 1 in subset]
    scale = np.prod([dims[s - 1] / bases[s - 1].kappa for s in subset])
    out = []
    for idx in itertools.product(*ranges):
        op = reduce(np.kron, [b.elements[i] for b, i in zip(bases, idx)])
        out.append(scale * np.trace(op.conj().T @ rho.matrix))
    return np.array(out).reshape(shape)


class TestDensityMatrix:
    def test_validation(self):
        with pytest.raises(ValidationError, match="Hermitian"):
            DensityMatrix([[0.5, 0.1], [0.0, 0.5]], (2,))
        with pytest.raises(ValidationError, match="trace"):
            DensityMatrix(np.eye(2), (2,))
        with pytest.raises(ValidationError, match="negative"):
            DensityMatrix(np.diag([1.5, -0.5]), (2,))
        with pytest.raises(ValidationError, match="shape"):
            DensityMatrix(np.eye(3) / 3, (2, 2))

    def test_tolerates_rounding(self):
        m = np.diag([1.0, -5e-10])
        DensityMatrix(m / np.trace(m), (2,))

    def test_immutable(self):
        rho = DensityMatrix.maximally_mixed((2, 2))
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1


class TestPartialTrace:
    def test_product(self):
        a, b = random_state((2,), seed=1), random_state((3,), seed=2)
        rho = DensityMatrix(np.kron(a.matrix, b.matrix), (2, 3))
        np.testing.assert_allclose(partial_trace(rho, [1]).matrix, a.matrix, atol=1e-14)
        np.testing.assert_allclose(partial_trace(rho, [2]).matrix, b.matrix, atol=1e-14)

    def test_bell_marginal(self):
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        rho = DensityMatrix.from_ket(psi, (2, 2))
        np.testing.assert_allclose(partial_trace(rho, [1]).matrix, np.eye(2) / 2)

    def test_valid_state(self):
        red = partial_trace(random_state((2, 3), seed=4), [2])
        red.check()
        assert red.dims == (3,)

    def test_invalid_subset(self):
        rho = DensityMatrix.maximally_mixed((2, 2))
        with pytest.raises(ValidationError):
            partial_trace(rho, [])
        with pytest.raises(ValidationError):
            partial_trace(rho, [3])


class TestDecompose:
    def test_maximally_mixed_is_zero(self):
        dec = decompose(DensityMatrix.maximally_mixed((2, 3)), bases_for("gellmann", (2, 3)))
        for block in dec.tensors.values():
            np.testing.assert_allclose(block, 0, atol=1e-15)

    def test_zero_ket_pauli(self):
        dec = decompose(DensityMatrix.from_ket([1, 0], (2,)), [pauli_basis()])
        np.testing.assert_allclose(dec.tensor([1]), [0, 0, 1])

    def test_bell_pauli(self):
        rho = DensityMatrix.from_ket(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))
        dec = decompose(rho, [pauli_basis()] * 2)
        np.testing.assert_allclose(dec.tensor([1, 2]), np.diag([1, -1, 1]), atol=1e-15)
        np.testing.assert_allclose(dec.full, brute_coefficients(rho, [pauli_basis()] * 2, (1, 2)))

    @pytest.mark.parametrize("family,dims", [("weyl", (2, 3)), ("hw", (3, 2, 2)), ("canonical", (3, 2))])
    def test_brute_force_oracle(self, family, dims):
        rho = random_state(dims, seed=7)
        bases = bases_for(family, dims)
        dec = decompose(rho, bases)
        for subset in all_subsets(len(dims)):
            np.testing.assert_allclose(dec.tensor(subset), brute_coefficients(rho, bases, subset), atol=1e-13)

    def test_subsets_and_shapes(self):
        dec = decompose(random_state((2, 3, 2), seed=0), bases_for("gellmann", (2, 3, 2)))
        assert sorted(dec.tensors) == sorted(all_subsets(3))
        assert dec.tensor((1, 3)).shape == (3, 3)
        assert dec.tensor([3, 1]).shape == (3, 3)
        assert dec.full.shape == (3, 8, 3)
        assert len(all_subsets(4)) == 15
        assert subset_mask((1, 3)) == 0b101

    def test_hermitian_bases_give_real_tensors(self):
        dec = decompose(random_state((3, 3), seed=3), bases_for("gellmann", (3, 3)))
        for block in dec.tensors.values():
            assert np.max(np.abs(block.imag)) <= 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            decompose(random_state((2, 3), seed=0), bases_for("gellmann", (2, 2)))

    def test_bloch_locality(self):
        dims = (2, 3, 2)
        rho = random_state(dims, seed=11)
        bases = bases_for("weyl", dims)
        dec = decompose(rho, bases)
        for subset in all_subsets(3)[:-1]:
            red = decompose(partial_trace(rho, subset), [bases[s - 1] for s in subset])
            np.testing.assert_allclose(dec.tensor(subset), red.full, atol=1e-10)

    def test_fully_separable_structure(self, rng):
        # T^(S) of a product mixture is the weighted sum of outer products of single-party vectors
        dims = (2, 3, 2)
        bases = bases_for("gellmann", dims)
        weights = rng.dirichlet(np.ones(4))
        total = 0
        expected = 0
        for w in weights:
            kets = [random_pure(d, rng) for d in dims]
            singles = [decompose(DensityMatrix.from_ket(k, (d,)), [b]).full
                       for k, d, b in zip(kets, dims, bases)]
            total = total + w * np.outer(reduce(np.kron, kets), reduce(np.kron, kets).conj())
            expected = expected + w * reduce(outer_product, singles)
        dec = decompose(DensityMatrix(total, dims), bases)
        np.testing.assert_allclose(dec.full, expected, atol=1e-9)


class TestReconstruct:
    def test_maximally_mixed(self):
        rho = DensityMatrix.maximally_mixed((3, 2))
        out = reconstruct(decompose(rho, bases_for("weyl", (3, 2))))
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)

    def test_bennett_hw(self):
        rho = mix_white_noise(bennett_ppt_3x3(), 0.9)
        out = reconstruct(decompose(rho, bases_for("hw", (3, 3))))
        assert np.max(np.abs(out.matrix - rho.matrix)) <= 1e-11

    def test_weyl_non_hermitian(self):
        rho = random_state((3, 3), seed=21)
        out = reconstruct(decompose(rho, [weyl_basis(3)] * 2))
        assert np.max(np.abs(out.matrix - rho.matrix)) <= 1e-11


class TestPurity:
    @given(st.sampled_from([(2, 2), (3, 2), (2, 2, 2)]), st.sampled_from(["weyl", "gellmann", "canonical"]),
           st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_identity(self, dims, family, seed):
        rho = random_state(dims, seed=seed)
        dec = decompose(rho, bases_for(family, dims))
        lhs = np.prod(dims) * rho.purity()
        assert purity_from_tensors(dec) == pytest.approx(lhs, rel=1e-9)

    @pytest.mark.parametrize("family,d", [("weyl", 3), ("gellmann", 4), ("canonical", 2), ("hw", 3)])
    def test_single_system_pure_saturates(self, family, d, rng):
        b = get_basis(family, d)
        for _ in range(20):
            dec = decompose(DensityMatrix.from_ket(random_pure(d, rng), (d,)), [b])
            norm2 = float(np.sum(np.abs(dec.full) ** 2))
            assert norm2 == pytest.approx((d * d - d) / b.kappa, abs=1e-9)

    def test_single_system_mixed_below(self):
        b = get_basis("gellmann", 3)
        dec = decompose(random_state((3,), seed=5), [b])
        assert np.sum(np.abs(dec.full) ** 2) < (9 - 3) / 2 - 1e-3


class TestBound:
    def test_branch_one(self):
        lad = m_bound([3], [3])
        assert (lad.value, lad.case) == (pytest.approx(2.0), 1)

    def test_branch_two(self):
        lad = m_bound([3, 3], [3, 3])
        assert (lad.value, lad.case) == (pytest.approx(8.0), 2)

    def test_branch_three(self):
        lad = m_bound([3, 3, 2], [3, 3, 2])
        assert (lad.value, lad.case) == (pytest.approx(11.5), 3)

    def test_branch_two_for_unbalanced_tripartite(self):
        # prod d / max(d)^2 = 20 / 25 < 1 selects the second branch
        assert m_bound([2, 2, 5], [2, 2, 5]).case == 2
        assert m_bound([2, 2, 4], [2, 2, 4]).case == 3

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            m_bound([1, 3], [1, 3])
        with pytest.raises(ValidationError):
            m_bound([2, 2], [2])

    @pytest.mark.parametrize("dims", [(2, 2), (3, 3), (2, 4), (3, 3, 2), (2, 2, 2)])
    def test_pure_states_below_bound(self, dims, rng):
        bases = bases_for("gellmann", dims)
        bound = m_bound(dims, [b.kappa for b in bases]).value
        for _ in range(50):
            dec = decompose(DensityMatrix.from_ket(random_pure(int(np.prod(dims)), rng), dims), bases)
            assert np.sum(np.abs(dec.full) ** 2) <= bound + 1e-9


class TestCompareBounds:
    def test_qubit_qutrit(self):
        cmp = compare_bounds((3, 2))
        assert cmp.ours - cmp.weyl == pytest.approx(1 - 3 / 2)

    def test_two_qubits(self):
        cmp = compare_bounds((2, 2))
        assert cmp.ours == pytest.approx(cmp.generalized_pauli)

    def test_three_qubits(self):
        cmp = compare_bounds((2, 2, 2))
        assert cmp.ours == pytest.approx(cmp.weyl)
        assert cmp.ours == pytest.approx(4.0)
        assert cmp.generalized_pauli == pytest.approx(5.5)

    def test_weyl_undefined_outside_region(self):
        assert weyl_bound((2, 2, 5)) is None
        assert generalized_pauli_bound((4,)) == 3.0
