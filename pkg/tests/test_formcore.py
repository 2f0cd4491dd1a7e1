#!/usr/bin/env python3
"""
Tests for form parameters and unimodular forms
"""

import itertools

import pytest

from errors import UnsupportedError, ValidationError
from exactalg import Matrix, RingSpec
from formcore import (
    FormParameter,
    GeneralQData,
    UnimodularForm,
    arf,
    diagonal,
    discriminant_class,
    e8,
    eval_q,
    form_from_json,
    hyperbolic,
    make_form,
    negate,
    orthogonal_sum,
    parity,
    permute,
    signature,
    zero_form,
)
from formfinite import enumerate_classes

ZZ = RingSpec.integers()
F2 = RingSpec.mod(2)
F3 = RingSpec.mod(3)


def general_quadratic_f2() -> FormParameter:
    """The quadratic flavor over F2 spelled out as a general Q-module"""
    data = GeneralQData(
        generators=1,
        relations=((2,),),
        tau_one=(1,),
        rho=(0,),
        action=((0, ((0,),)), (1, ((1,),))),
    )
    return FormParameter(F2, 1, "general", data)


def test_eval_q_symmetric():
    F = diagonal(FormParameter.symmetric(ZZ), [1])
    assert eval_q(F, (3,)) == 9


def test_eval_q_quadratic_hyperbolic_f2():
    H = hyperbolic(FormParameter.quadratic(F2), 1)
    assert eval_q(H, (1, 1)) == 1
    assert eval_q(H, (0, 0)) == 0


def test_eval_q_zero_vector():
    F = e8(FormParameter.quadratic(ZZ))
    assert eval_q(F, (0,) * 8) == 0


def test_orthogonal_sum_unit_and_diagonal():
    param = FormParameter.symmetric(ZZ)
    F = diagonal(param, [1])
    assert orthogonal_sum(F, zero_form(param)) == F
    S = orthogonal_sum(F, diagonal(param, [-1]))
    assert S.gram.tolist() == [[1, 0], [0, -1]]


def test_orthogonal_sum_ranks_add(rng):
    param = FormParameter.symmetric(F3)
    classes = enumerate_classes(param, 2)
    forms = [c.form for r in classes for c in classes[r]]
    for _ in range(50):
        F, G = rng.choice(forms), rng.choice(forms)
        assert orthogonal_sum(F, G).rank == F.rank + G.rank


def test_orthogonal_sum_needs_same_parameter():
    with pytest.raises(ValidationError):
        orthogonal_sum(diagonal(FormParameter.symmetric(ZZ), [1]), hyperbolic(FormParameter.quadratic(ZZ), 1))


def test_hyperbolic_shapes():
    H = hyperbolic(FormParameter.symmetric(ZZ), 1)
    assert H.gram.tolist() == [[0, 1], [1, 0]]
    assert H.qvals == (0, 0)
    assert hyperbolic(FormParameter.symmetric(ZZ), 0).rank == 0
    assert hyperbolic(FormParameter.symmetric(ZZ, -1), 1).gram.tolist() == [[0, 1], [-1, 0]]


def test_negate():
    param = FormParameter.symmetric(ZZ)
    assert negate(diagonal(param, [1])) == diagonal(param, [-1])
    F = e8(param)
    assert negate(negate(F)) == F


def test_constructor_rejects_non_unimodular():
    with pytest.raises(ValidationError):
        make_form(FormParameter.symmetric(ZZ), [[2]])


def test_constructor_rejects_asymmetric():
    with pytest.raises(ValidationError):
        make_form(FormParameter.symmetric(ZZ), [[0, 1], [0, 0]], [0, 0])


def test_constructor_rejects_inconsistent_q():
    param = FormParameter.symmetric(ZZ)
    with pytest.raises(ValidationError):
        UnimodularForm(param, Matrix.from_rows(ZZ, [[1]]), (2,))


def test_quadratic_q_cannot_be_guessed_over_f2():
    with pytest.raises(ValidationError):
        make_form(FormParameter.quadratic(F2), [[0, 1], [1, 0]])


def test_signature_examples():
    param = FormParameter.symmetric(ZZ)
    assert signature(hyperbolic(param, 1)) == 0
    assert signature(e8(param)) == 8
    assert signature(diagonal(param, [1, -1])) == 0


def test_signature_needs_integers():
    with pytest.raises(UnsupportedError):
        signature(diagonal(FormParameter.symmetric(F3), [1]))


def test_parity_and_discriminant():
    param = FormParameter.symmetric(ZZ)
    assert parity(e8(param)) == "even"
    assert parity(diagonal(param, [1, -1])) == "odd"
    assert discriminant_class(diagonal(FormParameter.symmetric(F3), [1])) == "square"
    assert discriminant_class(diagonal(FormParameter.symmetric(F3), [2])) == "nonsquare"


def test_arf_examples():
    param = FormParameter.quadratic(F2)
    assert arf(hyperbolic(param, 2)) == 0
    assert arf(make_form(param, [[0, 1], [1, 0]], [1, 1])) == 1


def test_arf_is_additive():
    param = FormParameter.quadratic(F2)
    classes = enumerate_classes(param, 2)
    forms = [c.form for c in classes[2]]
    for F, G in itertools.product(forms, repeat=2):
        assert arf(orthogonal_sum(F, G)) == (arf(F) + arf(G)) % 2


def test_permuted_form_keeps_invariants():
    F = diagonal(FormParameter.symmetric(ZZ), [1, 1, -1])
    G = permute(F, [2, 0, 1])
    assert G.gram.tolist() == [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert signature(G) == signature(F)


@pytest.mark.parametrize("flavor", ["symmetric", "quadratic", "even"])
@pytest.mark.parametrize("ring", [ZZ, F2, F3])
@pytest.mark.parametrize("epsilon", [1, -1])
def test_canonical_parameters_satisfy_axioms(flavor, ring, epsilon):
    FormParameter(ring, epsilon, flavor).validate_axioms()


def test_general_parameter_axioms_and_forms():
    param = general_quadratic_f2()
    param.validate_axioms()
    H = hyperbolic(param, 1)
    assert eval_q(H, (1, 1)) == (1,)


def test_general_parameter_needs_full_action_table():
    data = GeneralQData(1, ((2,),), (1,), (0,), ((1, ((1,),)),))
    with pytest.raises(ValidationError):
        FormParameter(F2, 1, "general", data)


def test_form_json_round_trip_keeps_parameter():
    F = make_form(FormParameter.quadratic(F2), [[0, 1], [1, 0]], [1, 1])
    G = form_from_json(F.to_json())
    assert G == F
    assert G.param.flavor == "quadratic"
