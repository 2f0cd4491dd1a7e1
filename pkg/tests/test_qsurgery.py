#!/usr/bin/env python3
"""
Tests for quadratic Poincare complexes, surgery and normalization
"""

import pytest

from chaincx import ChainComplex, ChainMap, dual, homology, homology_generators, is_acyclic
from errors import CapExceededError, ObstructionError, UnsupportedError, ValidationError
from exactalg import Matrix, RingSpec, random_matrix
from formcore import FormParameter, e8, hyperbolic, make_form, signature
from qsurgery import (
    QuadraticComplex,
    SurgeryDatum,
    arf_of_complex,
    check_poincare,
    direct_sum,
    fatten,
    heart_form,
    hyperbolic_complex,
    improve_morphism,
    improve_through,
    normalize_to_heart,
    rational_signature,
    solve_nullhomotopy,
    surgery,
    trim_structure,
)

ZZ = RingSpec.integers()
F3 = RingSpec.mod(3)


def split_with_twist() -> QuadraticComplex:
    """H + H in degree 0 with psi_0 = [[A, I], [0, 0]] and A antisymmetric"""
    C = ChainComplex.concentrated(ZZ, 0, 4)
    psi0 = Matrix.from_rows(ZZ, [
        [0, 1, 1, 0],
        [-1, 0, 0, 1],
        [0, 0, 0, 0],
        [0, 0, 0, 0],
    ])
    return QuadraticComplex(C, 0, [{0: psi0}])


def inclusion(X: QuadraticComplex, columns) -> ChainMap:
    T = ChainComplex.concentrated(X.ring, 0, len(columns))
    return ChainMap(T, X.C, {0: Matrix.from_columns(X.ring, columns, X.C.dim(0))})


def lagrangian_surgery():
    X = hyperbolic_complex(ZZ, 0, 1)
    datum = SurgeryDatum.solve(X, inclusion(X, [(1, 0)]))
    return surgery(datum)


# Poincare duality


def test_hyperbolic_complex_is_poincare():
    ok, witness = check_poincare(hyperbolic_complex(ZZ, 0, 1))
    assert ok
    assert set(witness.values()) == {"0"}


def test_split_hyperbolic_complex_is_poincare():
    X = hyperbolic_complex(ZZ, -1, 2)
    assert (X.C.lo, X.C.hi) == (-1, 1)
    assert X.relations_hold()
    assert X.is_poincare()


def test_doubled_unit_is_not_poincare_over_z():
    X = QuadraticComplex(ChainComplex.concentrated(ZZ, 0, 1), 0, [{0: Matrix.from_rows(ZZ, [[1]])}])
    ok, witness = check_poincare(X)
    assert not ok
    assert witness[0] == "Z/2"


def test_from_form_over_f3_symmetric():
    param = FormParameter.symmetric(F3)
    X = QuadraticComplex.from_form(make_form(param, [[1, 0], [0, 2]]))
    assert X.is_poincare()


def test_from_form_rejects_symmetric_over_z():
    with pytest.raises(UnsupportedError):
        QuadraticComplex.from_form(make_form(FormParameter.symmetric(ZZ), [[1]]))


def test_direct_sum_of_poincare_complexes():
    X = direct_sum(hyperbolic_complex(ZZ, 0, 1), QuadraticComplex.from_form(e8(FormParameter.quadratic(ZZ))))
    assert X.is_poincare()
    assert rational_signature(X) == 8


def test_from_json_checks_structure_relations():
    data = {
        "ring": "Z",
        "lo": 0,
        "dims": [1, 1],
        "differentials": [[[1]]],
        "n": 0,
        "psi": [{"0": [[1]]}],
    }
    with pytest.raises(ValidationError):
        QuadraticComplex.from_json(data)


def test_json_round_trip_keeps_structure():
    X = split_with_twist()
    Y = QuadraticComplex.from_json(X.to_json())
    assert Y.to_json() == X.to_json()


def test_heart_form_and_arf():
    param = FormParameter.quadratic(ZZ, -1)
    A = make_form(param, [[0, 1], [-1, 0]], [1, 1])
    X = QuadraticComplex.from_form(A)
    assert heart_form(X) == A
    assert arf_of_complex(X) == 1


def test_heart_form_needs_degree_zero():
    with pytest.raises(ValidationError):
        heart_form(hyperbolic_complex(ZZ, -1, 1))


# Surgery


def test_nullhomotopy_for_isotropic_plane():
    X = split_with_twist()
    f = inclusion(X, [(1, 0, 0, 0), (0, 1, 0, 0)])
    nu = solve_nullhomotopy(X, f)
    assert nu is not None
    # T in degree 0 with n = 0 carries nu_0 and nu_1
    assert len(nu) == 2
    assert SurgeryDatum(X, f, nu).verify()


def test_structure_keeps_layers_up_to_twice_the_top_degree():
    C = ChainComplex.from_maps(ZZ, 0, [Matrix.from_rows(ZZ, [[1]])])
    top = {1: Matrix.from_rows(ZZ, [[1]])}
    X = QuadraticComplex(C, 0, [{}, {}, top])
    assert len(X.psi) == 3
    assert X.block(2, 1) == top[1]
    assert X.relations_hold()
    assert len(QuadraticComplex(C, 0, [{}, {}, top, {}]).psi) == 3


def test_no_nullhomotopy_off_a_lagrangian():
    X = split_with_twist()
    f = inclusion(X, [(1, 0, 1, 0)])
    assert solve_nullhomotopy(X, f) is None
    with pytest.raises(ObstructionError):
        SurgeryDatum.solve(X, f)


def test_surgery_on_lagrangian_is_acyclic():
    cob, result = lagrangian_surgery()
    assert is_acyclic(result.C)
    assert cob.lefschetz_checked


def test_surgery_on_twisted_plane_is_acyclic():
    X = split_with_twist()
    datum = SurgeryDatum.solve(X, inclusion(X, [(1, 0, 0, 0), (0, 1, 0, 0)]))
    _, result = surgery(datum)
    assert result.is_poincare()
    assert is_acyclic(result.C)


def test_reflected_cobordism_swaps_ends():
    cob, result = lagrangian_surgery()
    back = cob.reflected()
    assert back.left is result
    assert back.right is cob.left
    assert back.lefschetz_holds()


def negative_hyperbolics() -> QuadraticComplex:
    """Hyperbolic pieces in degrees -1 and -2 next to the even plane in degree 0"""
    return direct_sum(
        hyperbolic_complex(ZZ, -1, 1),
        hyperbolic_complex(ZZ, -2, 1),
        QuadraticComplex.from_form(hyperbolic(FormParameter.quadratic(ZZ), 1)),
    )


def random_datum(rng, X: QuadraticComplex, k: int) -> SurgeryDatum:
    C = X.C
    r = rng.randint(1, 2)
    Z = C.d(k).kernel_basis()
    T = ChainComplex.concentrated(ZZ, k, r)
    return SurgeryDatum.solve(X, ChainMap(T, C, {k: Z @ random_matrix(rng, ZZ, Z.cols, r, bound=2)}))


def assert_trace_is_connective(rng, trials: int):
    X = negative_hyperbolics()
    for _ in range(trials):
        k = rng.choice((-1, -2))
        cob, _ = surgery(random_datum(rng, X, k))
        F = cob.right_fiber()
        assert all(homology(F, j).is_trivial for j in F.degrees() if j < k)


def test_trace_to_result_is_connective(rng):
    assert_trace_is_connective(rng, 20)


@pytest.mark.slow
def test_trace_to_result_is_connective_many(rng):
    assert_trace_is_connective(rng, 200)


def test_surgery_below_middle_kills_lowest_homology(rng):
    for _ in range(5):
        X = trim_structure(fatten(negative_hyperbolics(), rng, surgeries=1))
        k = next(j for j in range(X.C.lo, 0) if not homology(X.C, j).is_trivial)
        gens = homology_generators(X.C, k)
        T = ChainComplex.concentrated(ZZ, k, len(gens))
        f = ChainMap(T, X.C, {k: Matrix.from_columns(ZZ, [cycle for _, cycle in gens], X.C.dim(k))})
        _, result = surgery(SurgeryDatum.solve(X, f))
        for j in range(min(X.C.lo, result.C.lo), k + 1):
            assert homology(result.C, j).is_trivial


def test_data_in_complementary_degrees_combine(rng):
    X = direct_sum(split_with_twist(), hyperbolic_complex(ZZ, -1, 1))
    T = ChainComplex(ZZ, -1, [1, 1])
    for _ in range(10):
        a, c = rng.choice([(1, 0), (0, 1), (1, 1), (2, -1), (-1, 3)])
        b = rng.randint(1, 3)
        f = ChainMap(T, X.C, {
            -1: Matrix.from_rows(ZZ, [[b]]),
            0: Matrix.from_columns(ZZ, [(a, c, 0, 0)], 4),
        })
        nu = solve_nullhomotopy(X, f)
        assert nu is not None
        datum = SurgeryDatum(X, f, nu)
        assert datum.verify()
        _, result = surgery(datum)
        assert result.is_poincare()


def nontrivial_homology(C: ChainComplex):
    return {k: homology(C, k).describe() for k in C.degrees() if not homology(C, k).is_trivial}


def test_lefschetz_pairs_fibers_one_below_the_dimension():
    cob, _ = lagrangian_surgery()
    left, right = cob.left_fiber(), cob.right_fiber()
    assert nontrivial_homology(left) == {-1: "Z"}
    assert nontrivial_homology(dual(right, cob.n - 1)) == {-1: "Z"}
    assert nontrivial_homology(dual(right, cob.n + 1)) == {1: "Z"}


def clears_through(W, m: int) -> bool:
    F = W.left_fiber()
    return all(homology(F, j).is_trivial for j in range(min(F.lo, m), m + 1))


def test_improve_morphism_kills_lowest_left_fiber_homology():
    cob, result = lagrangian_surgery()
    improved, log = improve_morphism(cob, -1)
    assert clears_through(improved, -1)
    assert improved.left is cob.left
    assert improved.lefschetz_checked
    trace = improved.zigzag[-1]
    assert trace.left is result
    assert trace.right is improved.right
    assert clears_through(trace, -1)
    assert any("reflected trace" in line for line in log)


def test_improve_morphism_leaves_connective_leg_alone():
    cob, _ = lagrangian_surgery()
    W, log = improve_morphism(cob, -2)
    assert W is cob
    assert any("vanishes" in line for line in log)


def test_improve_morphism_needs_room_above_the_middle():
    cob, _ = lagrangian_surgery()
    with pytest.raises(ObstructionError):
        improve_morphism(cob.reflected(), 0)


def assert_morphisms_improve(rng, trials: int):
    X = negative_hyperbolics()
    for _ in range(trials):
        k = rng.choice((-1, -2))
        W = surgery(random_datum(rng, X, k))[0].reflected()
        assert not homology(W.left_fiber(), k).is_trivial
        assert clears_through(W, k - 1)
        improved, _ = improve_morphism(W, k)
        assert clears_through(improved, k)
        assert improved.left is W.left
        assert rational_signature(improved.right) == rational_signature(W.right)


def test_improve_morphism_on_reflected_traces(rng):
    assert_morphisms_improve(rng, 10)


@pytest.mark.slow
def test_improve_morphism_on_reflected_traces_many(rng):
    assert_morphisms_improve(rng, 100)


def two_degree_reflected_trace(rng):
    X = negative_hyperbolics()
    T = ChainComplex(ZZ, -2, [1, 1])
    comps = {}
    for k in (-2, -1):
        Z = X.C.d(k).kernel_basis()
        comps[k] = Z @ random_matrix(rng, ZZ, Z.cols, 1, bound=2)
    cob, _ = surgery(SurgeryDatum.solve(X, ChainMap(T, X.C, comps)))
    return cob.reflected()


def test_improve_through_goes_degree_by_degree(rng):
    W = two_degree_reflected_trace(rng)
    improved, log = improve_through(W, -1)
    assert clears_through(improved, -1)
    assert improved.left is W.left
    assert len(improved.zigzag) == 2
    assert sum("datum 0 <- T -> T" in line for line in log) == 2
    assert rational_signature(improved.right) == rational_signature(W.right)


def test_improve_through_step_cap(rng):
    with pytest.raises(CapExceededError):
        improve_through(two_degree_reflected_trace(rng), -1, step_cap=1)


# Normalization


def test_normalize_split_hyperbolic_to_zero():
    result = normalize_to_heart(hyperbolic_complex(ZZ, -1, 1))
    assert result.form.rank == 0
    assert len(result.cobordisms) == 1
    assert result.steps[0]["k"] == -1


def test_normalize_heart_complex_is_identity():
    F = hyperbolic(FormParameter.quadratic(ZZ), 1)
    result = normalize_to_heart(QuadraticComplex.from_form(F))
    assert result.form == F
    assert result.cobordisms == []
    assert result.steps == []


def test_normalize_reports_steps():
    seen = []
    result = normalize_to_heart(hyperbolic_complex(ZZ, -2, 1), on_step=seen.append)
    assert seen == result.steps
    assert len(result.steps_jsonl().splitlines()) == len(seen)


def test_normalize_step_cap():
    with pytest.raises(CapExceededError):
        normalize_to_heart(hyperbolic_complex(ZZ, -1, 1), step_cap=0)


def test_normalize_rejects_bad_input():
    with pytest.raises(UnsupportedError):
        normalize_to_heart(hyperbolic_complex(ZZ, 0, 1, n=2))
    X = QuadraticComplex(ChainComplex.concentrated(ZZ, 0, 1), 0, [{0: Matrix.from_rows(ZZ, [[1]])}])
    with pytest.raises(ValidationError):
        normalize_to_heart(X)


def test_fattened_e8_normalizes_to_signature_eight(rng):
    X = QuadraticComplex.from_form(e8(FormParameter.quadratic(ZZ)))
    big = fatten(X, rng, surgeries=2)
    assert big.is_poincare()
    assert rational_signature(big) == 8
    result = normalize_to_heart(big)
    assert result.form.rank >= 8
    assert signature(result.form) == 8
    for cob in result.cobordisms:
        assert rational_signature(cob.left) == rational_signature(cob.right)


@pytest.mark.slow
def test_fattened_hyperbolic_normalizes_to_even_form(rng):
    base = QuadraticComplex.from_form(hyperbolic(FormParameter.quadratic(ZZ), 1))
    for _ in range(10):
        result = normalize_to_heart(fatten(base, rng, surgeries=2, pad=2))
        assert signature(result.form) == 0
        assert result.form.rank % 2 == 0
        assert arf_of_complex(result.heart) == 0
