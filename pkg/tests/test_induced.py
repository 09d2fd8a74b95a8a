import numpy as np
import pytest

from unitrace import algebra, dsl, induced, paths
from unitrace.algebra import AlgebraShape, Element, SelfAdjoint, TraceWeights
from unitrace.errors import InvariantViolation, NoDualError, WellDefinednessError


def _lam(text, source_text):
    source = AlgebraShape.parse(source_text)
    return induced.lambda_matrix(dsl.parse_hom(text), source)


class TestGoldenAffineMatrices:
    def test_scalar_power(self):
        for n in (-2, -1, 1, 2, 3):
            m = _lam(f"power({n})", "M1").as_array()
            assert np.max(np.abs(m - [[float(n)]])) < 1e-9

    def test_inverse_times_projections(self):
        m = _lam("mult(power(-1) . proj1, proj2, proj3)", "M1 (+) M1 (+) M1").as_array()
        assert np.max(np.abs(m - [[-1.0, 1.0, 1.0]])) < 1e-9

    def test_determinant(self):
        m = _lam("det", "M2").as_array()
        assert np.max(np.abs(m - [[2.0]])) < 1e-9

    def test_corner_padding(self):
        m = _lam("pad(1)", "M2").as_array()
        assert np.max(np.abs(m - [[2.0 / 3.0]])) < 1e-9

    def test_amplification(self):
        m = _lam("amplify(2)", "M1").as_array()
        assert np.max(np.abs(m - [[1.0]])) < 1e-9

    def test_conjugate_pair_is_zero_map(self):
        m = _lam("embed . dsum(id, bar) . dup(2)", "M1").as_array()
        assert np.max(np.abs(m)) < 1e-9


class TestGoldenVerdicts:
    def test_inverse_times_projections_unital_not_positive(self):
        lam = _lam("mult(power(-1) . proj1, proj2, proj3)", "M1 (+) M1 (+) M1")
        v = induced.positivity_report(lam)
        assert v.unital and not v.positive and v.sign is None

    def test_corner_padding_positive_not_unital(self):
        lam = _lam("pad(1)", "M2")
        v = induced.positivity_report(lam, dsl.parse_hom("pad(1)"))
        assert v.positive and v.sign == 1 and not v.unital
        # padding does not send scalars to scalars, so no circle degree
        assert v.circle_degree is None
        with pytest.raises(NoDualError):
            induced.trace_dual(lam, v)

    def test_amplification_unital_positive_with_dual(self):
        lam = _lam("amplify(2)", "M1")
        v = induced.positivity_report(lam)
        assert v.positive and v.unital and v.contractive_sup
        assert np.allclose(induced.trace_dual(lam, v), [[1.0]])

    def test_bar_gives_negative_sign(self):
        lam = _lam("bar", "M2")
        v = induced.positivity_report(lam, dsl.parse_hom("bar"))
        assert v.sign == -1 and v.unital  # -Lambda is the identity matrix
        assert v.circle_degree == -1
        assert np.allclose(induced.trace_dual(lam, v), [[1.0]])


def test_stone_generator_linear_map():
    shape = AlgebraShape.parse("M2 (+) M1")
    theta = dsl.parse_hom("dsum(id, power(2))")
    rng = np.random.default_rng(0)
    a = algebra.random_selfadjoint(shape, rng)
    s = induced.stone_generator(theta, a)
    assert algebra.operator_norm(s.single_block(0) - a.single_block(0)) < 1e-9
    assert algebra.operator_norm(s.single_block(1) - 2.0 * a.single_block(1)) < 1e-9


def test_stone_generator_defeats_aliasing():
    # z -> z^4 maps both e^{2 pi i} and e^{pi i} to 1; a naive probe at
    # t0 = 1 or 1/2 would read a zero generator
    shape = AlgebraShape((1,))
    theta = dsl.parse_hom("power(4)")
    e = algebra.block_unit(shape, 0)
    s = induced.stone_generator(theta, e)
    assert abs(float(s.blocks[0][0, 0].real) - 4.0) < 1e-9


def test_stone_exponential_consistency():
    shape = AlgebraShape.parse("M2 (+) M2")
    rng = np.random.default_rng(1)
    theta = dsl.random_hom(rng, shape)
    for _ in range(5):
        a = algebra.random_selfadjoint(shape, rng)
        s = induced.stone_generator(theta, a)
        for t in (0.2, 0.45):
            lhs = dsl.apply_hom(theta, algebra.exp_generator(a, t))
            rhs = algebra.exp_generator(s, t)
            assert algebra.operator_norm(lhs - rhs) < 1e-8


def test_k0_map_and_pairing_square():
    shape = AlgebraShape.parse("M2 (+) M3")
    theta = dsl.parse_hom("embed")
    k0 = induced.k0_map(theta, shape)
    assert k0.matrix == ((1, 1),)
    assert induced.pairing_residual(theta, shape) < 1e-9


def test_circle_degree_of_bar_and_amplify():
    assert induced.circle_degree(dsl.parse_hom("bar"), AlgebraShape((2,))) == -1
    assert induced.circle_degree(dsl.parse_hom("amplify(3)"), AlgebraShape((2,))) == 1
    assert induced.circle_degree(dsl.parse_hom("power(-2)"), AlgebraShape((1,))) == -2


def test_pushforward_respects_affine_map():
    shape = AlgebraShape.parse("M2 (+) M1")
    rng = np.random.default_rng(2)
    theta = dsl.random_hom(rng, shape)
    lam = induced.lambda_matrix(theta, shape).as_array()
    p = paths.random_path(shape, rng, segments=2, bound=0.5)
    lhs = paths.pre_determinant(induced.pushforward(theta, p)).as_array()
    rhs = lam @ paths.pre_determinant(p).as_array()
    assert np.max(np.abs(lhs - rhs)) < 1e-7


def test_ktu_report_for_embedding():
    shape = AlgebraShape.parse("M1 (+) M1")
    rep = induced.ktu_report(dsl.parse_hom("embed"), shape)
    assert rep.sign == 1
    assert rep.k1 == "0 -> 0"
    assert rep.k0.matrix == ((1, 1),)
    assert rep.unit_class_preserved
    assert rep.pairing_residual < 1e-9


def test_strict_order_check_preconditions():
    shape = AlgebraShape((2,))
    with pytest.raises(InvariantViolation):
        induced.strict_order_check(dsl.parse_hom("pad(1)"), shape)
    assert induced.strict_order_check(dsl.parse_hom("bar"), shape, trials=10)


def test_f_tau_dual_is_trace_of_stone_generator():
    shape = AlgebraShape.parse("M2 (+) M1")
    theta = dsl.parse_hom("dsum(det, power(2))")
    target = dsl.infer_target(theta, shape)
    tau = TraceWeights(target, (0.3, 0.7))
    coeffs = induced.f_tau_dual(theta, tau, shape)
    want = [
        tau.pair(algebra.universal_trace(induced.stone_generator(theta, algebra.block_unit(shape, i))))
        for i in range(shape.k)
    ]
    assert np.max(np.abs(coeffs - np.array(want))) < 1e-10


class TestGeneralLinear:
    def test_modulus_twist_matrix(self):
        theta = dsl.parse_hom("modtwist(0.5, -0.3) . power(1)")
        m = induced.g_real_matrix(theta)
        assert np.max(np.abs(m - np.array([[1.0, -0.5], [0.0, 1.3]]))) < 1e-8

    def test_modulus_twist_matrix_general_grid(self):
        for alpha in (-0.4, 0.0, 0.6):
            for beta in (-0.5, 0.0, 0.2):
                theta = dsl.ModTwist(alpha, beta)
                m = induced.g_real_matrix(theta)
                want = np.array([[1.0, -alpha], [0.0, 1.0 - beta]])
                assert np.max(np.abs(m - want)) < 1e-8

    def test_c_linearity_defect_iff_twisted(self):
        assert induced.c_linearity_defect(dsl.Id(), AlgebraShape((2,))) < 1e-10
        assert induced.c_linearity_defect(dsl.ModTwist(0.0, 0.0), AlgebraShape((1,))) < 1e-10
        assert induced.c_linearity_defect(dsl.ModTwist(0.5, -0.3), AlgebraShape((1,))) > 0.5

    def test_g_matches_stone_on_selfadjoints(self):
        shape = AlgebraShape.parse("M2 (+) M1")
        rng = np.random.default_rng(3)
        theta = dsl.random_hom(rng, shape)
        a = algebra.random_selfadjoint(shape, rng)
        g = induced.g_theta(theta, a, shape)
        s = induced.stone_generator(theta, a)
        assert algebra.operator_norm(g - s) < 1e-7

    def test_g_additive(self):
        shape = AlgebraShape((2,))
        rng = np.random.default_rng(4)
        theta = dsl.random_hom(rng, shape, gl=True)
        a = algebra.random_selfadjoint(shape, rng, bound=0.5)
        b = algebra.random_selfadjoint(shape, rng, bound=0.5)
        lhs = induced.g_theta(theta, a + b, shape)
        rhs = induced.g_theta(theta, a, shape) + induced.g_theta(theta, b, shape)
        assert algebra.operator_norm(lhs - rhs) < 1e-7
