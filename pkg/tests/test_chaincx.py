#!/usr/bin/env python3
"""
Tests for chain complexes, homology, cones, duals, weights and trimming
"""

import pytest

from chaincx import (
    ChainComplex,
    ChainMap,
    Homotopy,
    cone,
    direct_sum,
    dual,
    dual_dual_iso,
    fiber,
    homology,
    homology_all,
    homology_generators,
    in_heart,
    is_acyclic,
    random_automorphism,
    random_chain_map,
    random_complex,
    shift,
    solve_homotopy,
    trim,
    weight_coconnective,
    weight_connective,
)
from errors import UnsupportedError, ValidationError
from exactalg import Matrix, RingSpec

ZZ = RingSpec.integers()
F3 = RingSpec.mod(3)


def two_torsion() -> ChainComplex:
    """Z <-2- Z in degrees 0 and 1"""
    return ChainComplex.from_maps(ZZ, 0, [Matrix.from_rows(ZZ, [[2]])])


def unit_piece(ring=ZZ) -> ChainComplex:
    return ChainComplex.from_maps(ring, 0, [Matrix.from_rows(ring, [[1]])])


def test_rejects_non_complex():
    d1 = Matrix.from_rows(ZZ, [[1]])
    d2 = Matrix.from_rows(ZZ, [[1]])
    with pytest.raises(ValidationError):
        ChainComplex(ZZ, 0, [1, 1, 1], {1: d1, 2: d2})


def test_rejects_wrong_shape():
    with pytest.raises(ValidationError):
        ChainComplex(ZZ, 0, [1, 2], {1: Matrix.from_rows(ZZ, [[1]])})


def test_modules_vanish_outside_range():
    C = two_torsion()
    assert C.dim(-3) == 0
    assert C.d(7).shape == (0, 0)
    assert C.euler_characteristic() == 0


def test_homology_of_multiplication_by_two():
    C = two_torsion()
    assert homology(C, 0).describe() == "Z/2"
    assert homology(C, 1).is_trivial


def test_homology_over_field():
    C = ChainComplex.from_maps(F3, 0, [Matrix.from_rows(F3, [[1, 0], [0, 0]])])
    assert homology(C, 0).free_rank == 1
    assert homology(C, 1).free_rank == 1


def test_homology_generators_orders_torsion_first():
    C = ChainComplex.from_maps(ZZ, 0, [Matrix.from_rows(ZZ, [[2], [0]])])
    gens = homology_generators(C, 0)
    assert [order for order, _ in gens] == [2, 0]
    for _, cycle in gens:
        assert len(cycle) == 2


def test_homology_needs_pid():
    C = ChainComplex.concentrated(RingSpec.mod(4), 0, 1)
    with pytest.raises(UnsupportedError):
        homology(C, 0)


def test_cone_of_identity_is_acyclic(rng):
    C = random_complex(rng, ZZ, width=3)
    assert is_acyclic(cone(ChainMap.identity(C)))
    assert ChainMap.identity(C).is_quasi_isomorphism()


def test_cone_and_fiber_of_zero_map():
    C = ChainComplex.concentrated(ZZ, 0, 1)
    D = ChainComplex.concentrated(ZZ, 0, 2)
    K = cone(ChainMap.zero(C, D))
    assert (K.dim(0), K.dim(1)) == (2, 1)
    F = fiber(ChainMap.zero(C, D))
    assert (F.dim(-1), F.dim(0)) == (2, 1)


def test_cone_differential_signs():
    C = two_torsion()
    K = cone(ChainMap.identity(C))
    assert K.d(1) == Matrix.from_rows(ZZ, [[2, 1]])
    assert K.d(2) == Matrix.from_rows(ZZ, [[1], [-2]])


def test_fiber_of_quasi_isomorphism_is_acyclic(rng):
    eq = random_automorphism(rng, random_complex(rng, ZZ))
    assert is_acyclic(fiber(eq.f))


def test_shift_moves_degrees_and_signs():
    C = two_torsion()
    S = shift(C, 1)
    assert (S.lo, S.hi) == (1, 2)
    assert S.d(2) == Matrix.from_rows(ZZ, [[-2]])
    assert homology(S, 1).describe() == "Z/2"


def test_dual_degrees_and_double_dual(rng):
    C = ChainComplex.concentrated(ZZ, 0, 3)
    D = dual(C, 2)
    assert D.support() == [2]
    E = random_complex(rng, ZZ, width=3)
    iso = dual_dual_iso(E, 1)
    assert iso.commutes()
    assert iso.is_quasi_isomorphism()


def test_dual_moves_torsion_down():
    D = dual(two_torsion(), 0)
    assert (D.lo, D.hi) == (-1, 0)
    assert homology(D, -1).describe() == "Z/2"


def test_weights():
    C = two_torsion()
    assert weight_connective(C, 0)
    assert not weight_coconnective(C, 0)
    assert not in_heart(C)
    P = ChainComplex.concentrated(ZZ, 0, 2)
    assert in_heart(P)
    Q = ChainComplex.concentrated(ZZ, 1, 1)
    assert not in_heart(Q, 0)
    assert in_heart(Q, 1)


def test_homotopy_contracting_unit_piece():
    C = unit_piece()
    h = Homotopy(ChainMap.identity(C), ChainMap.zero(C, C), {0: Matrix.from_rows(ZZ, [[1]])})
    assert h.verify()
    assert not Homotopy(ChainMap.identity(C), ChainMap.zero(C, C), {}).verify()


def test_chain_map_must_commute():
    C = unit_piece()
    with pytest.raises(ValidationError):
        ChainMap(C, C, {0: Matrix.from_rows(ZZ, [[1]]), 1: Matrix.from_rows(ZZ, [[2]])})


def test_random_chain_map_is_null_homotopic(rng):
    C = random_complex(rng, ZZ)
    D = random_complex(rng, ZZ)
    f = random_chain_map(rng, C, D)
    assert f.commutes()


def test_solve_homotopy_finds_contraction(rng):
    for _ in range(5):
        C = random_complex(rng, ZZ)
        D = random_complex(rng, ZZ)
        f = random_chain_map(rng, C, D)
        h = solve_homotopy(f, ChainMap.zero(C, D))
        assert h is not None
        assert h.verify()


def test_solve_homotopy_refuses_essential_maps():
    C = two_torsion()
    assert solve_homotopy(ChainMap.identity(C), ChainMap.zero(C, C)) is None
    assert solve_homotopy(ChainMap.identity(C), ChainMap.identity(C)).verify()
    U = unit_piece()
    assert solve_homotopy(ChainMap.identity(U), ChainMap.zero(U, U)) is not None


def test_equivalences_compose(rng):
    C = random_complex(rng, ZZ)
    first = random_automorphism(rng, C)
    second = random_automorphism(rng, first.target)
    assert first.then(second).verify()


def test_trim_removes_contractible_piece():
    T, eq = trim(unit_piece())
    assert T.total_rank() == 0
    assert eq.verify()


def test_trim_keeps_torsion_pair():
    C = direct_sum(two_torsion(), unit_piece())
    T, eq = trim(C)
    assert T.dims == (1, 1)
    assert eq.verify()


@pytest.mark.parametrize("ring", [ZZ, F3])
def test_trim_preserves_homology(rng, ring):
    for _ in range(5):
        C = random_complex(rng, ring, width=4)
        T, eq = trim(C)
        assert eq.verify()
        for k in C.degrees():
            assert homology(T, k).describe() == homology(C, k).describe()


def test_trim_over_field_leaves_zero_differentials(rng):
    C = random_complex(rng, F3, width=3)
    T, _ = trim(C)
    for k in range(T.lo + 1, T.hi + 1):
        assert T.d(k).is_zero()
    assert sum(T.dims) == sum(h.free_rank for h in homology_all(C).values())


def test_json_round_trip():
    C = direct_sum(two_torsion(), shift(unit_piece(), 1))
    assert ChainComplex.from_json(C.to_json()) == C
