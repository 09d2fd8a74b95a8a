import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitrace import algebra, dsl
from unitrace.algebra import AlgebraShape, Element
from unitrace.errors import DslError, ParseError, SingularError


def test_parse_simple_generators():
    assert dsl.parse_hom("id") == dsl.Id()
    assert dsl.parse_hom("bar") == dsl.Bar()
    assert dsl.parse_hom("det") == dsl.Det()
    assert dsl.parse_hom("power(-2)") == dsl.Power(-2)
    assert dsl.parse_hom("pad(3)") == dsl.Pad(3)
    assert dsl.parse_hom("proj2") == dsl.Proj(2)
    assert dsl.parse_hom("modtwist(0.5, -0.3)") == dsl.ModTwist(0.5, -0.3)


def test_parse_composition_both_spellings():
    e1 = dsl.parse_hom("det ∘ pad(1)")
    e2 = dsl.parse_hom("det . pad(1)")
    assert e1 == e2 == dsl.Compose((dsl.Det(), dsl.Pad(1)))


def test_parse_dsum_and_mult():
    e = dsl.parse_hom("mult(power(-1) . proj1, proj2)")
    assert isinstance(e, dsl.Mult)
    e = dsl.parse_hom("dsum(id, bar, power(2))")
    assert e == dsl.DirectSum((dsl.Id(), dsl.Bar(), dsl.Power(2)))


def test_parse_conj_matrix_literal():
    e = dsl.parse_hom("conj([[0, 1], [1, 0]])")
    assert isinstance(e, dsl.Conj)
    assert np.allclose(e.unitary.blocks[0], np.array([[0, 1], [1, 0]]))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as info:
        dsl.parse_hom("dsum(id,")
    assert info.value.line == 1
    with pytest.raises(ParseError):
        dsl.parse_hom("power(1.5)")
    with pytest.raises(ParseError):
        dsl.parse_hom("frobnicate")


def test_infer_target_examples():
    assert dsl.infer_target(dsl.Det(), AlgebraShape((3,))) == AlgebraShape((1,))
    assert dsl.infer_target(dsl.Pad(2), AlgebraShape((2,))) == AlgebraShape((4,))
    assert dsl.infer_target(dsl.Amplify(3), AlgebraShape((2,))) == AlgebraShape((6,))
    assert dsl.infer_target(dsl.Dup(2), AlgebraShape((2,))) == AlgebraShape((2, 2))
    assert dsl.infer_target(dsl.Embed(), AlgebraShape((2, 3))) == AlgebraShape((5,))
    assert dsl.infer_target(dsl.Proj(2), AlgebraShape((2, 3))) == AlgebraShape((3,))


def test_infer_target_rejects_shape_mismatches():
    with pytest.raises(DslError):
        dsl.validate(dsl.Power(2), AlgebraShape((2,)))
    with pytest.raises(DslError):
        dsl.validate(dsl.Proj(3), AlgebraShape((2, 3)))
    with pytest.raises(DslError):
        dsl.validate(dsl.DirectSum((dsl.Id(),)), AlgebraShape((2, 3)))
    with pytest.raises(DslError):
        dsl.validate(dsl.Mult((dsl.Id(), dsl.Id())), AlgebraShape((2,)))
    with pytest.raises(DslError):
        dsl.validate(dsl.ModTwist(0.1, 0.2), AlgebraShape((1,)))  # gl only


def test_apply_hom_preserves_unit_and_products():
    shape = AlgebraShape((2, 1))
    e = dsl.parse_hom("embed . dsum(bar, power(2))")
    one = algebra.identity(shape)
    assert algebra.operator_norm(dsl.apply_hom(e, one) - algebra.identity(dsl.infer_target(e, shape))) == 0.0
    assert dsl.homomorphism_check(e, shape, trials=20)


def test_apply_hom_det_is_determinant():
    shape = AlgebraShape((2,))
    rng = np.random.default_rng(0)
    u = algebra.random_unitary(shape, rng)
    v = dsl.apply_hom(dsl.Det(), u)
    assert abs(complex(v.blocks[0][0, 0]) - np.linalg.det(u.blocks[0])) < 1e-12


def test_apply_hom_mult_requires_abelian_target():
    shape = AlgebraShape((2, 2))
    with pytest.raises(DslError):
        dsl.validate(dsl.Mult((dsl.Proj(1), dsl.Proj(2))), shape)


def test_apply_gl_rejects_singular_input():
    shape = AlgebraShape((1,))
    g = Element(shape, [np.array([[0.0 + 0j]])])
    with pytest.raises(SingularError):
        dsl.apply_gl(dsl.Id(), g)


def test_modtwist_restricts_to_identity_on_circle():
    shape = AlgebraShape((1,))
    e = dsl.ModTwist(0.7, -0.4)
    for t in (0.1, 0.37, 0.81):
        z = Element(shape, [np.array([[np.exp(2j * np.pi * t)]])])
        w = dsl.apply_gl(e, z)
        assert abs(complex(w.blocks[0][0, 0]) - complex(z.blocks[0][0, 0])) < 1e-12


def test_modtwist_zero_is_identity():
    shape = AlgebraShape((1,))
    e = dsl.ModTwist(0.0, 0.0)
    z = Element(shape, [np.array([[1.7 - 0.3j]])])
    w = dsl.apply_gl(e, z)
    assert abs(complex(w.blocks[0][0, 0]) - (1.7 - 0.3j)) < 1e-12


def test_generator_gain_bounds():
    assert dsl.generator_gain(dsl.Power(-3), AlgebraShape((1,))) == 3.0
    assert dsl.generator_gain(dsl.Det(), AlgebraShape((4,))) == 4.0
    e = dsl.Compose((dsl.Det(), dsl.Amplify(2)))
    assert dsl.generator_gain(e, AlgebraShape((3,))) == 6.0


def test_print_parse_round_trip_fixed_cases():
    for text in (
        "id",
        "det ∘ pad(1)",
        "mult(power(-1) ∘ proj1, proj2, proj3)",
        "embed ∘ dsum(id, bar) ∘ dup(2)",
        "conj([[0, 1], [1, 0]]) ∘ amplify(2)",
    ):
        e = dsl.parse_hom(text)
        assert dsl.parse_hom(dsl.print_hom(e)) == e


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_print_parse_round_trip_random(seed):
    rng = np.random.default_rng(seed)
    shape = dsl.random_shape(rng)
    e = dsl.random_hom(rng, shape)
    assert dsl.parse_hom(dsl.print_hom(e)) == e


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_hom_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    shape = dsl.random_shape(rng)
    e = dsl.random_hom(rng, shape)
    assert dsl.homomorphism_check(e, shape, trials=10, seed=seed)
