#!/usr/bin/env python3
"""
Tests for exact linear algebra over Z and Z/n
"""

import pytest

from errors import UnsupportedError, ValidationError
from exactalg import (
    Matrix,
    RingSpec,
    cokernel_presentation,
    hermite_rows,
    random_matrix,
    row_reduce,
    snf,
    solve,
)


def test_ring_parsing():
    assert RingSpec.parse("Z").is_integers
    assert RingSpec.parse("F3").modulus == 3
    assert RingSpec.parse({"Zmod": 4}).name == "Z/4"
    assert RingSpec.parse("Z/4").is_field is False
    with pytest.raises(ValidationError):
        RingSpec.parse("F4")
    with pytest.raises(ValidationError):
        RingSpec.parse("Q")


def test_matrix_entries_are_canonical(F3):
    A = Matrix.from_rows(F3, [[4, -1], [3, 5]])
    assert A.tolist() == [[1, 2], [0, 2]]


def test_matrix_shape_mismatch_rejected(ZZ):
    with pytest.raises(ValidationError):
        Matrix(ZZ, 2, 2, [[1, 2]])
    with pytest.raises(ValidationError):
        Matrix.identity(ZZ, 2) @ Matrix.identity(ZZ, 3)


def test_snf_identity(ZZ):
    dec = snf(Matrix.identity(ZZ, 3))
    assert dec.D == Matrix.identity(ZZ, 3)


def test_snf_zero(ZZ):
    dec = snf(Matrix.zeros(ZZ, 2, 2))
    assert dec.D.is_zero()
    assert dec.rank == 0


def test_snf_two_by_two(ZZ):
    A = Matrix.from_rows(ZZ, [[2, 4], [6, 8]])
    dec = snf(A)
    assert dec.invariant_factors() == (2, 4)
    assert dec.U @ dec.D @ dec.V == A


def test_snf_random_factorizations(rng, ZZ):
    """U D V = A with unimodular U, V and a divisibility chain"""
    for _ in range(40):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        A = random_matrix(rng, ZZ, m, n)
        dec = snf(A)
        assert dec.U @ dec.D @ dec.V == A
        assert abs(dec.U.determinant()) == 1
        assert abs(dec.V.determinant()) == 1
        assert dec.U @ dec.U_inv == Matrix.identity(ZZ, m)
        assert dec.V_inv @ dec.V == Matrix.identity(ZZ, n)
        factors = dec.invariant_factors()
        assert all(d > 0 for d in factors)
        for a, b in zip(factors, factors[1:]):
            assert b % a == 0


def test_snf_over_prime_field(rng, F3):
    for _ in range(20):
        A = random_matrix(rng, F3, 3, 4)
        dec = snf(A)
        assert dec.U @ dec.D @ dec.V == A
        assert all(d == 1 for d in dec.invariant_factors())


def test_solve_identity(ZZ):
    b = Matrix.column(ZZ, [3, -1, 7])
    assert solve(Matrix.identity(ZZ, 3), b) == b


def test_solve_parity_obstruction(ZZ):
    assert solve(Matrix.from_rows(ZZ, [[2]]), Matrix.column(ZZ, [1])) is None


def test_solve_over_composite_ring():
    Z4 = RingSpec.mod(4)
    x = solve(Matrix.from_rows(Z4, [[2]]), Matrix.column(Z4, [2]))
    assert x is not None
    assert x[0, 0] in (1, 3)
    assert solve(Matrix.from_rows(Z4, [[2]]), Matrix.column(Z4, [1])) is None


def test_solve_random_consistent_systems(rng, ZZ):
    for _ in range(30):
        A = random_matrix(rng, ZZ, rng.randint(1, 5), rng.randint(1, 5))
        x0 = random_matrix(rng, ZZ, A.cols, 1)
        x = solve(A, A @ x0)
        assert x is not None
        assert A @ x == A @ x0


def test_solve_ring_mismatch(ZZ, F3):
    with pytest.raises(ValidationError):
        solve(Matrix.identity(ZZ, 1), Matrix.column(F3, [1]))


def test_cokernel_examples(ZZ):
    assert cokernel_presentation(Matrix.from_rows(ZZ, [[2]])).describe() == "Z/2"
    assert cokernel_presentation(Matrix.zeros(ZZ, 1, 1)).describe() == "Z"
    assert cokernel_presentation(Matrix.from_rows(ZZ, [[2, 4], [6, 8]])).describe() == "Z/2 (+) Z/4"


def test_cokernel_needs_pid():
    with pytest.raises(UnsupportedError):
        cokernel_presentation(Matrix.identity(RingSpec.mod(4), 1))


def test_kernel_basis_is_kernel(rng, ZZ):
    for _ in range(20):
        A = random_matrix(rng, ZZ, rng.randint(1, 4), rng.randint(2, 6))
        K = A.kernel_basis()
        assert (A @ K).is_zero()
        assert K.cols == A.cols - A.rank()


def test_determinant_and_inverse(ZZ, F3):
    A = Matrix.from_rows(ZZ, [[2, 1], [1, 1]])
    assert A.determinant() == 1
    assert A @ A.inverse() == Matrix.identity(ZZ, 2)
    B = Matrix.from_rows(F3, [[1, 1], [0, 2]])
    assert B @ B.inverse() == Matrix.identity(F3, 2)


def test_hermite_rows_describes_lattice(ZZ):
    H = hermite_rows(Matrix.from_rows(ZZ, [[8, 8], [0, 1]]))
    assert H.tolist() == [[8, 0], [0, 1]]


def test_row_reduce(F3):
    R = row_reduce(Matrix.from_rows(F3, [[0, 2, 1], [0, 1, 2], [1, 1, 1]]))
    assert R.tolist() == [[1, 0, 2], [0, 1, 2]]
