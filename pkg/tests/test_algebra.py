import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from unitrace import algebra
from unitrace.algebra import AlgebraShape, Element, SelfAdjoint, TraceWeights, Unitary
from unitrace.errors import BranchCutError, InvariantViolation, ShapeError


def test_shape_parse_round_trip():
    s = AlgebraShape.parse("M2 (+) M3 (+) M1")
    assert s.blocks == (2, 3, 1)
    assert s.k == 3
    assert s.total_dim == 6
    assert AlgebraShape.parse(s.text()) == s


def test_shape_rejects_bad_text():
    for bad in ("", "M0", "M2 + M3", "N2", "M2 (+)"):
        with pytest.raises(InvariantViolation):
            AlgebraShape.parse(bad)


def test_shape_limits():
    with pytest.raises(InvariantViolation):
        AlgebraShape(tuple([1] * 9))
    with pytest.raises(InvariantViolation):
        AlgebraShape((17,))


def test_selfadjoint_rejects_non_hermitian():
    shape = AlgebraShape((2,))
    with pytest.raises(InvariantViolation):
        SelfAdjoint(shape, [np.array([[0.0, 1.0], [0.0, 0.0]])])


def test_unitary_rejects_non_unitary():
    shape = AlgebraShape((2,))
    with pytest.raises(InvariantViolation):
        Unitary(shape, [np.array([[1.0, 0.0], [0.0, 2.0]])])


def test_element_arithmetic_and_adjoint():
    shape = AlgebraShape((2, 1))
    rng = np.random.default_rng(0)
    x = algebra.random_selfadjoint(shape, rng)
    y = algebra.random_selfadjoint(shape, rng)
    z = x * y - y * x
    assert algebra.operator_norm(z.adjoint() + z) < 1e-12
    with pytest.raises(ShapeError):
        x + algebra.random_selfadjoint(AlgebraShape((3,)), rng)


def test_exp_generator_matches_scipy_expm():
    # independent oracle: scaling-and-squaring expm on the full block matrix
    shape = AlgebraShape((3, 2))
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = algebra.random_selfadjoint(shape, rng)
        t = float(rng.uniform(-2, 2))
        u = algebra.exp_generator(a, t)
        for ab, ub in zip(a.blocks, u.blocks):
            ref = scipy.linalg.expm(2j * np.pi * t * ab)
            assert np.linalg.norm(ub - ref, 2) < 1e-11


def test_log_unitary_round_trip():
    shape = AlgebraShape((2, 3))
    rng = np.random.default_rng(2)
    for _ in range(25):
        a = algebra.random_selfadjoint(shape, rng, bound=0.45)
        b = algebra.log_unitary(algebra.exp_generator(a))
        assert algebra.operator_norm(a - b) < 1e-9


def test_log_unitary_branch_cut():
    shape = AlgebraShape((2,))
    u = Unitary(shape, [np.diag([-1.0 + 0j, 1.0])])
    with pytest.raises(BranchCutError):
        algebra.log_unitary(u)


def test_sqrt_unitary_squares_back():
    shape = AlgebraShape((3,))
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = algebra.random_unitary(shape, rng)
        r = algebra.sqrt_unitary(u)
        assert algebra.operator_norm(r * r - u) < 1e-10


def test_universal_trace_values():
    shape = AlgebraShape((2, 1))
    a = SelfAdjoint(shape, [np.diag([1.0, 3.0]), np.array([[5.0]])])
    assert algebra.universal_trace(a).values == (2.0, 5.0)


def test_trace_weights_pairing_and_validation():
    shape = AlgebraShape((2, 1))
    tau = TraceWeights(shape, (0.25, 0.75))
    v = algebra.universal_trace(algebra.block_unit(shape, 0))
    assert tau.pair(v) == 0.25
    with pytest.raises(InvariantViolation):
        TraceWeights(shape, (0.5, 0.6))
    with pytest.raises(InvariantViolation):
        TraceWeights(shape, (-0.1, 1.1))


def test_pairing_matrix_is_reciprocal_block_sizes():
    shape = AlgebraShape((2, 3))
    assert np.allclose(algebra.pairing_matrix(shape), np.diag([0.5, 1.0 / 3.0]))


def test_pairing_rho_on_unit_class():
    shape = AlgebraShape((2, 3))
    assert algebra.pairing_rho(algebra.unit_class(shape)).values == (1.0, 1.0)


def test_random_unitary_is_unitary_and_deterministic():
    shape = AlgebraShape((3, 2))
    u1 = algebra.random_unitary(shape, 7)
    u2 = algebra.random_unitary(shape, 7)
    assert algebra.operator_norm(u1 - u2) == 0.0
    for n, b in zip(shape.blocks, u1.blocks):
        assert np.linalg.norm(b @ b.conj().T - np.eye(n), 2) < 1e-12


def test_is_in_A0():
    shape = AlgebraShape((2, 1))
    a = SelfAdjoint(shape, [np.diag([1.0, -1.0]), np.array([[0.0]])])
    assert algebra.is_in_A0(a)
    assert not algebra.is_in_A0(algebra.block_unit(shape, 0))


def test_element_lists_round_trip():
    shape = AlgebraShape((2, 1))
    rng = np.random.default_rng(4)
    x = algebra.random_selfadjoint(shape, rng)
    back = algebra.element_from_lists(shape, algebra.element_to_lists(x))
    assert algebra.operator_norm(x - back) < 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_trace_is_tracial(seed):
    shape = AlgebraShape((3, 2))
    rng = np.random.default_rng(seed)
    x = algebra.random_selfadjoint(shape, rng)
    y = algebra.random_selfadjoint(shape, rng)
    lhs = algebra.universal_trace(x * y).as_array()
    rhs = algebra.universal_trace(y * x).as_array()
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.floats(-1.5, 1.5))
def test_exp_is_one_parameter_group(seed, t):
    shape = AlgebraShape((2, 2))
    rng = np.random.default_rng(seed)
    a = algebra.random_selfadjoint(shape, rng)
    u = algebra.exp_generator(a, t)
    v = algebra.exp_generator(a, t / 2.0)
    assert algebra.operator_norm(v * v - u) < 1e-10
