import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_complex
from sepcrit.errors import ValidationError
from sepcrit.tensor import (
    UnfoldingSpec,
    all_unfolding_specs,
    frobenius_norm,
    k_mode_product,
    k_mode_unfold,
    mixed_mode_unfold,
    outer_product,
    tensor_product,
    vec,
    vec_k,
)


def loop_unfold(a, spec):
    """Definition 1 evaluated entry by entry with 1-based indices."""
    shape = a.shape
    d = {i + 1: s for i, s in enumerate(shape)}

    def index(modes, pivot, idx):
        k = len(modes)
        span = int(np.prod([d[r] for r in modes[:pivot]]))
        slow = sum((idx[r] - 1) * int(np.prod([d[r2] for r2 in modes[kp + 1:]]))
                   for kp, r in enumerate(modes) if kp >= pivot)
        fast = sum((idx[r] - 1) * int(np.prod([d[r2] for r2 in modes[kp + 1:pivot]]))
                   for kp, r in enumerate(modes) if kp < pivot)
        return span * slow + fast + 1

    rows = int(np.prod([d[r] for r in spec.rows]))
    cols = int(np.prod([d[c] for c in spec.cols]))
    out = np.full((rows, cols), np.nan, dtype=complex)
    for pos in itertools.product(*[range(1, s + 1) for s in shape]):
        idx = {i + 1: p for i, p in enumerate(pos)}
        out[index(spec.rows, spec.n, idx) - 1, index(spec.cols, spec.m, idx) - 1] = a[tuple(p - 1 for p in pos)]
    return out


class TestProducts:
    def test_tensor_product_vectors(self):
        np.testing.assert_array_equal(tensor_product([1, 2], [0, 1]), [0, 1, 0, 2])

    def test_tensor_product_identities(self):
        np.testing.assert_array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_tensor_product_index_oracle(self, rng):
        a = random_complex(rng, (2, 3))
        b = random_complex(rng, (2, 2))
        out = tensor_product(a, b)
        assert out.shape == (4, 6)
        for i1, i2, j1, j2 in itertools.product(range(2), range(3), range(2), range(2)):
            # k_l = (i_l - 1) d'_l + j_l in 1-based form
            np.testing.assert_allclose(out[i1 * 2 + j1, i2 * 2 + j2], a[i1, i2] * b[j1, j2], rtol=1e-15)

    def test_tensor_product_uneven_orders(self, rng):
        a = random_complex(rng, (2, 3, 2))
        b = random_complex(rng, (3,))
        out = tensor_product(a, b)
        assert out.shape == (6, 3, 2)
        np.testing.assert_allclose(out[4, 1, 0], a[1, 1, 0] * b[1])

    def test_matches_kron_for_matrices(self, rng):
        a, b = random_complex(rng, (3, 2)), random_complex(rng, (2, 4))
        np.testing.assert_allclose(tensor_product(a, b), np.kron(a, b))

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_associative_on_vectors(self, n1, n2, n3, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_complex(rng, (n,)) for n in (n1, n2, n3))
        left = tensor_product(tensor_product(a, b), c)
        right = tensor_product(a, tensor_product(b, c))
        np.testing.assert_allclose(left, right, atol=1e-13)
        np.testing.assert_allclose(left, np.kron(np.kron(a, b), c), atol=1e-13)

    def test_outer_rank_one(self):
        np.testing.assert_array_equal(outer_product([1, 2], [3, 4]), [[3, 4], [6, 8]])

    def test_outer_norm_multiplicative(self, rng):
        a, b = random_complex(rng, (3, 2)), random_complex(rng, (4,))
        assert frobenius_norm(outer_product(a, b)) == pytest.approx(frobenius_norm(a) * frobenius_norm(b))

    def test_outer_loop_oracle(self, rng):
        a, b = random_complex(rng, (2, 3, 2)), random_complex(rng, (3, 2))
        out = outer_product(a, b)
        for idx in itertools.product(range(2), range(3), range(2), range(3), range(2)):
            np.testing.assert_allclose(out[idx], a[idx[:3]] * b[idx[3:]], rtol=1e-15)


class TestKModeProduct:
    def test_identity_leaves_tensor(self, rng):
        a = random_complex(rng, (2, 3, 4))
        for k in (1, 2, 3):
            np.testing.assert_allclose(k_mode_product(a, np.eye(a.shape[k - 1]), k), a)

    def test_matrix_case(self, rng):
        a, u = random_complex(rng, (3, 4)), random_complex(rng, (5, 3))
        np.testing.assert_allclose(k_mode_product(a, u, 1), u @ a)

    def test_loop_oracle(self, rng):
        a, u = random_complex(rng, (2, 3, 4)), random_complex(rng, (5, 3))
        out = k_mode_product(a, u, 2)
        assert out.shape == (2, 5, 4)
        ref = np.zeros((2, 5, 4), dtype=complex)
        for i, j, k, l in itertools.product(range(2), range(5), range(4), range(3)):
            ref[i, j, k] += a[i, l, k] * u[j, l]
        np.testing.assert_allclose(out, ref, atol=1e-12)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValidationError):
            k_mode_product(random_complex(rng, (2, 3)), np.eye(2), 2)


class TestKModeUnfold:
    def test_matrix(self, rng):
        a = random_complex(rng, (3, 4))
        np.testing.assert_array_equal(k_mode_unfold(a, 1), a)
        np.testing.assert_array_equal(k_mode_unfold(a, 2), a.T)

    def test_formula_oracle(self, rng):
        a = random_complex(rng, (2, 3, 4))
        d = a.shape
        for k in (1, 2, 3):
            out = k_mode_unfold(a, k)
            for pos in itertools.product(*[range(1, s + 1) for s in d]):
                # j = 1 + sum_{m != k} (i_m - 1) J_m with modes k+1..N, 1..k-1, last fastest
                order = list(range(k + 1, 4)) + list(range(1, k))
                j = 0
                for mode in order:
                    j = j * d[mode - 1] + (pos[mode - 1] - 1)
                assert out[pos[k - 1] - 1, j] == a[tuple(p - 1 for p in pos)]

    def test_mode_out_of_range(self, rng):
        with pytest.raises(ValidationError):
            k_mode_unfold(random_complex(rng, (2, 2)), 3)


class TestVectorization:
    def test_vec_column_major(self):
        np.testing.assert_array_equal(vec([[1, 2], [3, 4]]), [1, 3, 2, 4])

    def test_vec_k_vector(self, rng):
        v = random_complex(rng, (5,))
        np.testing.assert_array_equal(vec_k(v, 1), v)

    def test_vec_k_matrix(self, rng):
        a = random_complex(rng, (3, 4))
        np.testing.assert_array_equal(vec_k(a, 1), vec(a))
        np.testing.assert_array_equal(vec_k(a, 2), vec(a.T))


def _named(shape):
    """Tensor whose entry at 1-based index (i1, ..., iN) encodes that index as digits."""
    a = np.zeros(shape)
    for pos in itertools.product(*[range(s) for s in shape]):
        a[pos] = int("".join(str(p + 1) for p in pos))
    return a


class TestMixedModeUnfold:
    def test_three_way_display(self):
        # columns run over (i2, i3) with i2 fastest; rows follow i1
        out = mixed_mode_unfold(_named((3, 3, 3)), UnfoldingSpec((1,), (2, 3), 1, 1)).real
        expected_first_row = [111, 121, 131, 112, 122, 132, 113, 123, 133]
        np.testing.assert_array_equal(out[0], expected_first_row)
        assert out[0, 1] == 121
        for r in range(3):
            np.testing.assert_array_equal(out[r], np.array(expected_first_row) + 100 * r)

    def test_six_way_display(self):
        out = mixed_mode_unfold(_named((2,) * 6), UnfoldingSpec((1, 2, 3), (4, 5, 6), 1, 2)).real
        assert out.shape == (8, 8)
        np.testing.assert_array_equal(
            out[0], [111111, 111121, 111211, 111221, 111112, 111122, 111212, 111222]
        )
        np.testing.assert_array_equal(out[:, 0], [111111, 211111, 112111, 212111,
                                                  121111, 221111, 122111, 222111])
        assert out[0, 1] == 111121
        assert out[7, 7] == 222222

    def test_reduces_to_k_mode(self, rng):
        a = random_complex(rng, (2, 3, 2, 3))
        for r in range(1, 5):
            cols = tuple(c for c in range(1, 5) if c != r)
            # column ordering r+1..N, 1..r-1 is the pivot at the last mode before r
            m = r - 1 if r > 1 else 3
            np.testing.assert_array_equal(mixed_mode_unfold(a, UnfoldingSpec((r,), cols, 1, m)),
                                          k_mode_unfold(a, r))

    def test_loop_oracle_all_specs(self, rng):
        a = random_complex(rng, (2, 3, 2, 2))
        for spec in all_unfolding_specs(4):
            np.testing.assert_array_equal(mixed_mode_unfold(a, spec), loop_unfold(a, spec))

    @given(st.lists(st.integers(1, 3), min_size=2, max_size=4), st.integers(0, 10**6), st.data())
    @settings(max_examples=60, deadline=None)
    def test_bijective(self, shape, seed, data):
        a = random_complex(np.random.default_rng(seed), tuple(shape))
        specs = list(all_unfolding_specs(len(shape)))
        spec = specs[data.draw(st.integers(0, len(specs) - 1))]
        out = mixed_mode_unfold(a, spec)
        np.testing.assert_array_equal(np.sort_complex(out.ravel()), np.sort_complex(a.ravel()))
        assert frobenius_norm(out) == pytest.approx(frobenius_norm(a), rel=1e-14)

    def test_invalid_specs(self):
        with pytest.raises(ValidationError):
            UnfoldingSpec((1,), ())
        with pytest.raises(ValidationError):
            UnfoldingSpec((1, 2), (2, 3))
        with pytest.raises(ValidationError):
            UnfoldingSpec((1,), (2, 3), 2, 1)
        with pytest.raises(ValidationError):
            mixed_mode_unfold(np.zeros((2, 2, 2)), UnfoldingSpec((1,), (2,)))

    def test_spec_count(self):
        # sum over |R| = k of C(N, k) k (N - k)
        assert len(list(all_unfolding_specs(3))) == 3 * 2 + 3 * 2
        assert len(list(all_unfolding_specs(4))) == 4 * 3 + 6 * 4 + 4 * 3


class TestFrobenius:
    def test_zero(self):
        assert frobenius_norm(np.zeros((2, 3))) == 0.0

    def test_identity(self):
        assert frobenius_norm(np.eye(3)) == pytest.approx(np.sqrt(3))
