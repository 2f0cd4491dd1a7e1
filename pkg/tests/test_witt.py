#!/usr/bin/env python3
"""
Tests for Lagrangians, isometry verdicts, GW0 and Witt groups
"""

import pytest

from errors import UnsupportedError, ValidationError
from exactalg import Matrix, RingSpec
from formcore import FormParameter, diagonal, e8, hyperbolic, make_form, orthogonal_sum, transform
from witt import (
    INDEFINITE_REASON,
    diagonal_lagrangian,
    find_lagrangian,
    gw0,
    is_hyperbolic_summand,
    is_isometric,
    is_lagrangian,
    witt_group,
)

ZZ = RingSpec.integers()
F2 = RingSpec.mod(2)
F3 = RingSpec.mod(3)
F5 = RingSpec.mod(5)


# Lagrangians


def test_find_lagrangian_hyperbolic_over_f3():
    H = hyperbolic(FormParameter.symmetric(F3), 2)
    L = find_lagrangian(H)
    assert L is not None
    assert is_lagrangian(H, L)


def test_find_lagrangian_none_for_anisotropic():
    assert find_lagrangian(diagonal(FormParameter.symmetric(F3), [1, 1])) is None
    assert find_lagrangian(diagonal(FormParameter.symmetric(ZZ), [1])) is None


def test_find_lagrangian_hyperbolic_over_z():
    H = hyperbolic(FormParameter.symmetric(ZZ), 1)
    L = find_lagrangian(H)
    assert L == Matrix.from_columns(ZZ, [(1, 0)], 2)


def test_find_lagrangian_modes():
    F = diagonal(FormParameter.symmetric(F3), [1, 2])
    with pytest.raises(ValidationError):
        find_lagrangian(F, mode="guess")
    with pytest.raises(UnsupportedError):
        find_lagrangian(F, mode="invariant")


def test_is_lagrangian_rejects_wrong_size_and_non_isotropic():
    H = hyperbolic(FormParameter.symmetric(ZZ), 1)
    assert not is_lagrangian(H, Matrix.from_columns(ZZ, [(1, 0), (0, 1)], 2))
    assert not is_lagrangian(H, Matrix.from_columns(ZZ, [(1, 1)], 2))
    # span(2 e1) is isotropic but not a summand
    assert not is_lagrangian(H, Matrix.from_columns(ZZ, [(2, 0)], 2))


def test_diagonal_lagrangian():
    F = orthogonal_sum(e8(FormParameter.symmetric(ZZ)), diagonal(FormParameter.symmetric(ZZ), [1]))
    total, L = diagonal_lagrangian(F)
    assert total.rank == 2 * F.rank
    assert is_lagrangian(total, L)


# Isometry


def test_isometric_over_f3_with_witness():
    param = FormParameter.symmetric(F3)
    verdict = is_isometric(diagonal(param, [1, 1]), diagonal(param, [2, 2]))
    assert verdict.verdict == "yes"
    assert verdict.isometry.verify()


def test_not_isometric_over_f3():
    param = FormParameter.symmetric(F3)
    verdict = is_isometric(diagonal(param, [1]), diagonal(param, [2]))
    assert verdict.verdict == "no"
    assert verdict.reason == "discriminant class"


def test_arf_separates_planes_over_f2():
    param = FormParameter.quadratic(F2)
    H = hyperbolic(param, 1)
    A = make_form(param, [[0, 1], [1, 0]], [1, 1])
    verdict = is_isometric(H, A)
    assert verdict.verdict == "no"
    assert verdict.reason == "Arf invariant"


def test_rank_mismatch():
    param = FormParameter.symmetric(ZZ)
    assert is_isometric(diagonal(param, [1]), diagonal(param, [1, 1])).reason == "rank"


@pytest.mark.parametrize("F,G,reason", [
    (diagonal(FormParameter.symmetric(ZZ), [1, -1]), hyperbolic(FormParameter.symmetric(ZZ), 1), "parity"),
    (diagonal(FormParameter.symmetric(ZZ), [1, 1]), hyperbolic(FormParameter.symmetric(ZZ), 1), "signature"),
    (diagonal(FormParameter.symmetric(ZZ), [1] * 8), e8(FormParameter.symmetric(ZZ)), "parity"),
])
def test_not_isometric_over_z(F, G, reason):
    verdict = is_isometric(F, G)
    assert verdict.verdict == "no"
    assert verdict.reason == reason


def test_definite_isometry_over_z():
    param = FormParameter.symmetric(ZZ)
    verdict = is_isometric(diagonal(param, [1, 1]), make_form(param, [[2, 1], [1, 1]]))
    assert verdict.verdict == "yes"
    assert verdict.isometry is not None


def test_indefinite_isometry_over_z_by_invariants():
    param = FormParameter.symmetric(ZZ)
    F = diagonal(param, [1, 1, -1])
    G = orthogonal_sum(diagonal(param, [1]), hyperbolic(param, 1))
    verdict = is_isometric(F, G)
    assert verdict.verdict == "yes"
    assert verdict.reason == INDEFINITE_REASON


def test_split_isometry_over_z_has_witness():
    param = FormParameter.symmetric(ZZ)
    F = orthogonal_sum(diagonal(param, [1, -1]), hyperbolic(param, 1))
    G = diagonal(param, [1, -1, -1, 1])
    verdict = is_isometric(F, G)
    assert verdict.verdict == "yes"
    assert verdict.isometry is not None


def test_alternating_forms_over_z():
    param = FormParameter.symmetric(ZZ, -1)
    H = hyperbolic(param, 2)
    U = Matrix.from_rows(ZZ, [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 2, 0, 1]])
    verdict = is_isometric(H, transform(H, U))
    assert verdict.verdict == "yes"
    assert verdict.isometry is not None


def test_is_isometric_rejects_mixed_parameters():
    with pytest.raises(ValidationError):
        is_isometric(diagonal(FormParameter.symmetric(F3), [1]), diagonal(FormParameter.symmetric(F5), [1]))


def test_hyperbolic_complement_over_f3():
    param = FormParameter.symmetric(F3)
    G = is_hyperbolic_summand(diagonal(param, [1]))
    assert G is not None
    assert is_isometric(orthogonal_sum(diagonal(param, [1]), G), hyperbolic(param, 1)).verdict == "yes"


# Groups


def test_gw0_f3():
    assert gw0(FormParameter.symmetric(F3), rank_cap=4).describe() == "Z (+) Z/2"


@pytest.mark.parametrize("ring,flavor,expected", [
    (F3, "symmetric", "Z/4"),
    (F5, "symmetric", "Z/2 (+) Z/2"),
    (F2, "symmetric", "Z/2"),
    (F2, "quadratic", "Z/2"),
])
def test_witt_groups_of_prime_fields(ring, flavor, expected):
    param = getattr(FormParameter, flavor)(ring)
    assert witt_group(param, rank_cap=4).describe() == expected


def test_witt_group_reports_class_counts():
    result = witt_group(FormParameter.symmetric(F3), rank_cap=2)
    assert result.to_json()["classes_by_rank"] == {"0": 1, "1": 2, "2": 2}


def test_hyperbolic_class_vanishes_in_witt_group():
    param = FormParameter.symmetric(F3)
    H = hyperbolic(param, 1)
    result = witt_group(param, rank_cap=4, generators=[("H", H)])
    assert dict(result.images)["H"] == (0,)


def test_gw0_symmetric_over_z():
    result = gw0(FormParameter.symmetric(ZZ))
    images = dict(result.images)
    assert images["<1>"] == (1, 1)
    assert images["<-1>"] == (-1, 0)
    assert result.describe().startswith("Z (+) Z")


def test_gw0_quadratic_over_z():
    result = gw0(FormParameter.quadratic(ZZ))
    assert "8Z (+) Z inside Z (+) Z" in result.describe()


def test_witt_group_symmetric_over_z():
    result = witt_group(FormParameter.symmetric(ZZ))
    assert result.describe().startswith("Z")
    assert dict(result.images)["<-1>"] == (-1,)


def test_witt_group_quadratic_alternating_over_z():
    result = witt_group(FormParameter.quadratic(ZZ, -1))
    assert result.group.describe() == "Z/2"
    assert dict(result.images)["A"] == (1,)


def test_groups_over_composite_modulus_unsupported():
    with pytest.raises(UnsupportedError):
        gw0(FormParameter.symmetric(RingSpec.mod(4)))
