#!/usr/bin/env python3
"""
Tests for canonical forms, class enumeration and Lagrangian listing over F_p
"""

import pytest

from errors import CapExceededError, UnsupportedError
from exactalg import Matrix, RingSpec, random_unimodular
from formcore import FormParameter, diagonal, hyperbolic, orthogonal_sum, transform
from formfinite import (
    canonical_form,
    enumerate_classes,
    find_lagrangian_exhaustive,
    isometry_matrix,
    list_lagrangians,
    rref_subspaces,
    witt_extension_holds,
)
from witt import is_lagrangian

F2 = RingSpec.mod(2)
F3 = RingSpec.mod(3)


def test_witt_extension_by_flavor():
    assert witt_extension_holds(FormParameter.symmetric(F3))
    assert witt_extension_holds(FormParameter.quadratic(F2))
    assert not witt_extension_holds(FormParameter.symmetric(F2))


def test_canonical_form_is_orbit_invariant(rng):
    param = FormParameter.symmetric(F3)
    F = orthogonal_sum(diagonal(param, [1, 2]), hyperbolic(param, 1))
    for _ in range(5):
        U = random_unimodular(rng, F3, F.rank)
        assert canonical_form(transform(F, U)).key == canonical_form(F).key


def test_canonical_basis_maps_into_input():
    param = FormParameter.quadratic(F2)
    F = hyperbolic(param, 2)
    c = canonical_form(F)
    assert transform(F, c.basis) == c.form


def test_squares_agree_over_f3():
    param = FormParameter.symmetric(F3)
    U = isometry_matrix(diagonal(param, [1, 1]), diagonal(param, [2, 2]))
    assert U is not None
    assert U.T @ diagonal(param, [2, 2]).gram @ U == diagonal(param, [1, 1]).gram


def test_non_isometric_rank_one_over_f3():
    param = FormParameter.symmetric(F3)
    assert isometry_matrix(diagonal(param, [1]), diagonal(param, [2])) is None


def test_enumerate_classes_f3():
    classes = enumerate_classes(FormParameter.symmetric(F3), 3)
    assert [len(classes[r]) for r in range(4)] == [1, 2, 2, 2]


def test_enumerate_classes_quadratic_f2():
    classes = enumerate_classes(FormParameter.quadratic(F2), 4)
    # nonsingular quadratic forms exist only in even rank; two per rank (Arf 0 and 1)
    assert len(classes[1]) == 0
    assert len(classes[2]) == 2
    assert len(classes[4]) == 2


def test_enumerate_classes_symmetric_f2_uses_orbit_cap():
    param = FormParameter.symmetric(F2)
    with pytest.raises(CapExceededError):
        enumerate_classes(param, 5)


def test_enumerate_rejects_composite_modulus():
    with pytest.raises(UnsupportedError):
        enumerate_classes(FormParameter.symmetric(RingSpec.mod(4)), 2)


def test_rref_subspaces_count():
    # Gaussian binomial [4 choose 2]_2 = 35
    assert sum(1 for _ in rref_subspaces(2, 4, 2)) == 35
    assert sum(1 for _ in rref_subspaces(3, 2, 1)) == 4


@pytest.mark.parametrize("ring,flavor,expected", [
    (F3, "symmetric", 8),
    (F2, "quadratic", 6),
])
def test_lagrangian_count_of_hyperbolic_rank_four(ring, flavor, expected):
    param = getattr(FormParameter, flavor)(ring)
    H = hyperbolic(param, 2)
    lagrangians = list_lagrangians(H)
    assert len(lagrangians) == expected
    assert all(is_lagrangian(H, L) for L in lagrangians)


def test_list_lagrangians_odd_and_empty():
    param = FormParameter.symmetric(F3)
    assert list_lagrangians(diagonal(param, [1])) == []
    assert list_lagrangians(diagonal(param, [])) == [Matrix.zeros(F3, 0, 0)]


def test_anisotropic_plane_has_no_lagrangian():
    param = FormParameter.symmetric(F3)
    assert find_lagrangian_exhaustive(diagonal(param, [1, 1])) is None
    assert find_lagrangian_exhaustive(diagonal(param, [1, 2])) is not None
