import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmslab.spinspace import (SpinOperator, SpinVector, apply, compose, cyclic_shift, inverse,
                              is_hermitian, permutation_matrix, permutation_op, transposition)

perms3 = st.permutations(list(range(3))).map(tuple)


@given(perms3, perms3)
def test_permutation_matrices_are_a_homomorphism(w, v):
    lhs = permutation_matrix(w, 2) @ permutation_matrix(v, 2)
    assert np.array_equal(lhs, permutation_matrix(compose(w, v), 2))


@given(perms3)
def test_inverse(w):
    assert compose(w, inverse(w)) == (0, 1, 2)
    P = permutation_matrix(w, 3)
    assert np.array_equal(P.T, permutation_matrix(inverse(w), 3))


def test_transposition_swaps_factors():
    e = SpinVector.basis([0, 1, 1], 2)
    out = apply(permutation_op(1, 2, 3, 2), e)
    assert np.allclose(out.amplitudes, SpinVector.basis([1, 0, 1], 2).amplitudes)


def test_lazy_and_dense_agree(rng):
    terms = {w: rng.normal() for w in itertools.permutations(range(3))}
    op = SpinOperator(3, 2, terms=terms)
    v = SpinVector.random(3, 2, rng)
    assert np.allclose(apply(op, v).amplitudes, op.dense() @ v.amplitudes)


def test_cyclic_shift_order():
    C = cyclic_shift(4, 2).dense()
    assert np.allclose(np.linalg.matrix_power(C, 4), np.eye(16))


def test_hermitian_pair_sum():
    op = permutation_op(1, 3, 3, 3) + permutation_op(2, 3, 3, 3)
    assert is_hermitian(op)


def test_bad_inputs():
    with pytest.raises(ValueError):
        transposition(2, 2, 3)
    with pytest.raises(IndexError):
        transposition(1, 5, 3)
    with pytest.raises(ValueError):
        SpinOperator(2, 2, matrix=np.eye(3))


def test_json_roundtrip(rng):
    v = SpinVector.random(2, 3, rng)
    assert np.allclose(SpinVector.from_json(v.to_json()).amplitudes, v.amplitudes)
