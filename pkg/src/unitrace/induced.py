"""Maps induced by a unitary-group homomorphism.

From a DSL expression theta over a source algebra this module extracts the
Stone generator map S (theta(e^{2 pi i t a}) = e^{2 pi i t S(a)}), the induced
real-linear map between affine-function spaces, the induced integer matrix on
K-zero with its pairing check, positivity/unitality verdicts, the dual
simplex map, and the general-linear analogue G with its complex-linearity
defect.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.linalg

from . import algebra, dsl, paths
from .algebra import AlgebraShape, Element, SelfAdjoint, TraceWeights, Unitary
from .errors import (
    BranchCutError,
    ConvergenceError,
    InconsistencyError,
    InvariantViolation,
    NoDualError,
    NotCircleValuedError,
    NotALoopError,
    WellDefinednessError,
)


@dataclasses.dataclass(frozen=True)
class LambdaMatrix:
    """The induced map on affine functions, in the extremal-trace bases."""

    source: AlgebraShape
    target: AlgebraShape
    matrix: tuple  # rows, target.k x source.k

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @staticmethod
    def from_array(source, target, m) -> "LambdaMatrix":
        m = np.asarray(m, dtype=float)
        if m.shape != (target.k, source.k):
            raise InvariantViolation(f"lambda matrix shape {m.shape}")
        return LambdaMatrix(source, target, tuple(tuple(float(x) for x in row) for row in m))


@dataclasses.dataclass(frozen=True)
class K0Matrix:
    """The induced map on K-zero (integer entries, from loop windings)."""

    source: AlgebraShape
    target: AlgebraShape
    matrix: tuple  # rows, target.k x source.k

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=int)


@dataclasses.dataclass(frozen=True)
class PositivityVerdict:
    sign: int | None  # +1 / -1 when that sign of the matrix is positive
    unital: bool
    positive: bool
    contractive_sup: bool
    circle_degree: int | None


@dataclasses.dataclass(frozen=True)
class KTuMorphismReport:
    sign: int | None
    k0: K0Matrix  # sign-corrected
    k1: str  # zero groups in finite dimension; structural marker only
    lam: LambdaMatrix  # sign-corrected
    unit_class_preserved: bool
    pairing_residual: float


# ---------------------------------------------------------------------------
# Stone generator


def _safe_start(theta, norm: float, source: AlgebraShape, gl: bool = False) -> int:
    """First dyadic level m with 2^-m below the alias-free probe time.

    Probing blindly from t0 = 1 can alias: for z -> z^2 on the unit both 1
    and 1/2 land the image exactly at 1 and the principal log reads 0.  A
    structural gain bound on the expression rules this out.
    """
    gain = max(1.0, dsl.generator_gain(theta, source, gl))
    return max(0, math.ceil(math.log2(4.0 * gain * max(norm, 1e-12))))


def stone_generator(theta, a: SelfAdjoint, tol: float = 1e-9) -> SelfAdjoint:
    """The unique b with theta(e^{2 pi i t a}) = e^{2 pi i t b}.

    Computed at an adaptive t0 (halving from an alias-free starting level
    until the image sits well inside the log branch), then cross-checked at
    t0/2.
    """
    start = _safe_start(theta, algebra.operator_norm(a), a.shape)
    for m in range(start, start + 60):
        t0 = 2.0 ** (-m)
        u1 = dsl.apply_hom(theta, algebra.exp_generator(a, t0))
        if algebra.operator_norm(u1 - algebra.identity(u1.shape)) > 0.5:
            continue
        try:
            b1 = (1.0 / t0) * algebra.log_unitary(u1)
            u2 = dsl.apply_hom(theta, algebra.exp_generator(a, t0 / 2.0))
            b2 = (2.0 / t0) * algebra.log_unitary(u2)
        except BranchCutError:
            continue
        if algebra.operator_norm(b1 - b2) <= tol * max(1.0, algebra.operator_norm(b1)):
            return SelfAdjoint(b1.shape, b1.blocks, tol=1e-7)
    raise ConvergenceError("no t0 with a consistent Stone generator in 60 halvings")


def stone_norm_estimate(theta, source: AlgebraShape, trials: int = 20, seed=0) -> float:
    """Sampled lower estimate of the operator norm of the Stone map.

    Probes all sign combinations of block units (where the sup norm of the
    induced affine matrix is attained) plus random self-adjoints.
    """
    rng = np.random.default_rng(seed)
    probes = []
    units = [algebra.block_unit(source, i) for i in range(source.k)]
    for signs in range(2 ** source.k):
        a = algebra.zero(source)
        for i, e in enumerate(units):
            s = 1.0 if (signs >> i) & 1 else -1.0
            a = a + s * e
        probes.append(SelfAdjoint(source, a.blocks))
    for _ in range(trials):
        probes.append(algebra.random_selfadjoint(source, rng))
    best = 0.0
    for a in probes:
        na = algebra.operator_norm(a)
        if na < 1e-12:
            continue
        best = max(best, algebra.operator_norm(stone_generator(theta, a)) / na)
    return best


# ---------------------------------------------------------------------------
# The induced affine map


def lambda_matrix(theta, source: AlgebraShape, audit_trials: int = 20, seed=0) -> LambdaMatrix:
    """Column i is the target trace vector of S(unit of source block i).

    Well-definedness on the trace quotient is audited on random trace-zero
    elements; a failure means a non-homomorphism slipped past validation.
    """
    target = dsl.infer_target(theta, source)
    cols = []
    for i in range(source.k):
        s = stone_generator(theta, algebra.block_unit(source, i))
        cols.append(algebra.universal_trace(s).as_array())
    m = np.column_stack(cols)

    rng = np.random.default_rng(seed)
    for _ in range(audit_trials):
        a0 = algebra.random_trace_zero(source, rng)
        if not algebra.is_in_A0(stone_generator(theta, a0), tol=1e-6):
            raise WellDefinednessError("Stone map does not preserve the trace-zero subspace")
    return LambdaMatrix.from_array(source, target, m)


# ---------------------------------------------------------------------------
# Circle degree and the induced K-zero map


def _scalar_of(u: Unitary, tol: float = 1e-8) -> complex:
    lam = complex(u.blocks[0][0, 0])
    for n, b in zip(u.shape.blocks, u.blocks):
        if np.linalg.norm(b - lam * np.eye(n), 2) > tol:
            raise NotCircleValuedError("image of a scalar is not scalar")
    return lam


def circle_degree(theta, source: AlgebraShape) -> int:
    """Winding number n of the restriction z -> z^n to scalar unitaries."""
    target = dsl.infer_target(theta, source)
    unit = SelfAdjoint(source, [np.eye(n) for n in source.blocks])

    def image(t: float) -> Unitary:
        return dsl.apply_hom(theta, algebra.exp_generator(unit, t))

    ts = np.linspace(0.0, 1.0, 33)
    samples = []
    for t in ts:
        u = image(t)
        _scalar_of(u)  # raises if not scalar
        samples.append((t, u))
    loop = paths.discretize(paths.SampledPath(tuple(samples), sampler=image))
    cls = paths.loop_k0_class(loop)
    degrees = set()
    for n, c in zip(target.blocks, cls.ranks):
        if c % n != 0:
            raise InconsistencyError(f"winding {c} not a multiple of block size {n}")
        degrees.add(c // n)
    if len(degrees) != 1:
        raise InconsistencyError(f"blocks disagree on circle degree: {sorted(degrees)}")
    return degrees.pop()


def pushforward(theta, path: paths.PiecewisePath) -> paths.PiecewisePath:
    """The image path theta(xi(t)), rebuilt as piecewise-exponential."""

    def image(t: float) -> Unitary:
        return dsl.apply_hom(theta, path.at(t))

    k = len(path.segments)
    times = [0.0]
    for j, seg in enumerate(path.segments):
        m = max(16, math.ceil(32 * algebra.operator_norm(seg.generator)))
        for i in range(1, m + 1):
            times.append((j + i / m) / k)
    samples = tuple((t, image(t)) for t in times)
    return paths.discretize(paths.SampledPath(samples, sampler=image))


def k0_map(theta, source: AlgebraShape) -> K0Matrix:
    """Column i is the winding class of the pushed-forward rank-1 loop."""
    target = dsl.infer_target(theta, source)
    cols = []
    for i in range(source.k):
        loop = paths.projection_loop(algebra.rank_one_projection(source, i))
        cols.append(paths.loop_k0_class(pushforward(theta, loop)).ranks)
    m = np.column_stack(cols).astype(int)
    return K0Matrix(source, target, tuple(tuple(int(x) for x in row) for row in m))


def pairing_residual(theta, source: AlgebraShape, lam: LambdaMatrix | None = None, k0: K0Matrix | None = None) -> float:
    """Max-norm defect of the commuting square rho_B K0 = Lambda rho_A."""
    if lam is None:
        lam = lambda_matrix(theta, source)
    if k0 is None:
        k0 = k0_map(theta, source)
    rho_a = algebra.pairing_matrix(source)
    rho_b = algebra.pairing_matrix(lam.target)
    defect = rho_b @ k0.as_array() - lam.as_array() @ rho_a
    return float(np.max(np.abs(defect)))


# ---------------------------------------------------------------------------
# Order: positivity, unitality, the dual simplex map


_POS_SLACK = 1e-10


def positivity_report(lam: LambdaMatrix, theta=None) -> PositivityVerdict:
    m = lam.as_array()
    pos_plus = bool(np.all(m >= -_POS_SLACK))
    pos_minus = bool(np.all(-m >= -_POS_SLACK))
    if pos_plus:
        sign = 1
    elif pos_minus:
        sign = -1
    else:
        sign = None
    signed = m if sign is None else sign * m
    row_sums = signed.sum(axis=1)
    unital = bool(np.max(np.abs(row_sums - 1.0)) <= 1e-8) if lam.target.k else True
    contractive = bool(np.max(np.abs(m).sum(axis=1)) <= 1.0 + 1e-8)
    degree = None
    if theta is not None:
        try:
            degree = circle_degree(theta, lam.source)
        except (NotCircleValuedError, InconsistencyError, NotALoopError):
            degree = None
    return PositivityVerdict(
        sign=sign,
        unital=unital,
        positive=sign is not None,
        contractive_sup=contractive,
        circle_degree=degree,
    )


def trace_dual(lam: LambdaMatrix, verdict: PositivityVerdict | None = None) -> np.ndarray:
    """The affine map on trace simplices dual to the (sign-corrected) matrix.

    Exists only when some sign of the matrix is unital and positive; its rows
    are then probability vectors, so the transpose maps the target simplex
    into the source simplex.
    """
    if verdict is None:
        verdict = positivity_report(lam)
    if verdict.sign is None:
        raise NoDualError("neither sign of the affine map is positive")
    if not verdict.unital:
        raise NoDualError("the positive sign of the affine map is not unital")
    return (verdict.sign * lam.as_array()).T


def strict_order_check(theta, source: AlgebraShape, trials: int = 50, seed=0) -> bool:
    """Strictly positive trace vectors stay strictly positive under +/-Lambda.

    Only meaningful under the unital-positive and injective-circle
    hypotheses; violated preconditions raise InvariantViolation.
    """
    lam = lambda_matrix(theta, source)
    verdict = positivity_report(lam, theta)
    if verdict.sign is None or not verdict.unital:
        raise InvariantViolation("strict order check needs a unital positive sign")
    if verdict.circle_degree not in (1, -1):
        raise InvariantViolation("strict order check needs an injective circle restriction")
    signed = verdict.sign * lam.as_array()
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        a = algebra.random_selfadjoint(source, rng)
        tv = algebra.universal_trace(a).as_array()
        shift = max(0.0, 0.05 - float(np.min(tv)))
        tv = tv + shift  # trace vector of a + shift * unit
        if not np.all(signed @ tv > 0.0):
            return False
    return True


def ktu_report(theta, source: AlgebraShape, seed=0) -> KTuMorphismReport:
    lam = lambda_matrix(theta, source, seed=seed)
    k0 = k0_map(theta, source)
    verdict = positivity_report(lam, theta)
    residual = pairing_residual(theta, source, lam=lam, k0=k0)
    sign = verdict.sign
    s = 1 if sign is None else sign
    signed_k0 = K0Matrix(
        k0.source, k0.target, tuple(tuple(s * x for x in row) for row in k0.matrix)
    )
    signed_lam = LambdaMatrix.from_array(lam.source, lam.target, s * lam.as_array())
    unit_image = signed_k0.as_array() @ np.array(source.blocks)
    preserved = bool(np.array_equal(unit_image, np.array(lam.target.blocks)))
    return KTuMorphismReport(
        sign=sign,
        k0=signed_k0,
        k1="0 -> 0",
        lam=signed_lam,
        unit_class_preserved=preserved,
        pairing_residual=residual,
    )


# ---------------------------------------------------------------------------
# General-linear variant


def _series_log(m: np.ndarray, max_terms: int = 400) -> np.ndarray:
    """Principal log of a matrix within the unit ball around 1, by series."""
    x = m - np.eye(m.shape[0])
    term = x.copy()
    out = x.copy()
    for k in range(2, max_terms + 1):
        term = term @ x
        delta = ((-1) ** (k + 1)) * term / k
        out = out + delta
        if np.linalg.norm(delta, 2) < 1e-17:
            return out
    return out


def _exp_element(a: Element, scale: float) -> Element:
    """exp(2 pi i scale a) for an arbitrary (not necessarily normal) element."""
    return Element(a.shape, [scipy.linalg.expm(2j * np.pi * scale * b) for b in a.blocks])


def _log_near_one(x: Element) -> Element:
    return Element(x.shape, [_series_log(b) for b in x.blocks])


def g_theta(theta, a: Element, source: AlgebraShape | None = None, tol: float = 1e-8) -> Element:
    """The general-linear Stone analogue N/(2 pi i) log theta(e^{2 pi i a/N}).

    The value is eventually constant in N; computed at the first admissible N
    (doubling) and verified at 2N.
    """

    def value(n: int) -> Element | None:
        img = dsl.apply_gl(theta, _exp_element(a, 1.0 / n))
        gap = algebra.operator_norm(img - algebra.identity(img.shape))
        if gap >= 0.5:
            return None
        logm = _log_near_one(img)
        return (n / (2j * np.pi)) * logm

    if source is None:
        source = a.shape
    n = 2 ** _safe_start(theta, algebra.operator_norm(a), source, gl=True)
    for _ in range(60):
        g1 = value(n)
        if g1 is not None:
            g2 = value(2 * n)
            if g2 is None:
                n *= 2
                continue
            if algebra.operator_norm(g1 - g2) > tol:
                raise InconsistencyError("general-linear generator not constant in N")
            return g1
        n *= 2
    raise ConvergenceError("image never entered the log branch in 60 doublings")


def g_real_matrix(theta, tol: float = 1e-8) -> np.ndarray:
    """The real 2x2 matrix of G on a one-dimensional algebra (C as R^2)."""
    shape = AlgebraShape((1,))
    cols = []
    for z in (1.0, 1j):
        e = Element(shape, [np.array([[z]])])
        g = g_theta(theta, e, shape, tol=tol)
        w = complex(g.blocks[0][0, 0])
        cols.append([w.real, w.imag])
    return np.array(cols).T


def c_linearity_defect(theta, source: AlgebraShape) -> float:
    """Max over matrix units e of ||G(i e) - i G(e)||; zero iff C-linear."""
    worst = 0.0
    for bi, n in enumerate(source.blocks):
        for r in range(n):
            for c in range(n):
                blocks = [np.zeros((m, m)) for m in source.blocks]
                blocks[bi][r, c] = 1.0
                e = Element(source, blocks)
                ge = g_theta(theta, e, source)
                gie = g_theta(theta, 1j * e, source)
                worst = max(worst, algebra.operator_norm(gie - 1j * ge))
    return worst


# ---------------------------------------------------------------------------
# Dual construction from tracial functionals


def f_tau_dual(theta, tau: TraceWeights, source: AlgebraShape, tol: float = 1e-8) -> np.ndarray:
    """The pulled-back tracial functional, on the block-unit basis.

    Computed through the logarithmic limit and cross-checked against the
    trace of the Stone generator (the two constructions must agree).
    """
    target = dsl.infer_target(theta, source)
    if tau.shape != target:
        raise InvariantViolation(f"tau over {tau.shape.text()}, target is {target.text()}")
    coeffs = []
    via_stone = []
    for i in range(source.k):
        e = algebra.block_unit(source, i)

        def value(n: int):
            img = dsl.apply_hom(theta, algebra.exp_generator(e, 1.0 / n))
            if algebra.operator_norm(img - algebra.identity(img.shape)) >= 0.5:
                return None
            return n * algebra.log_unitary(img)

        n = 2 ** _safe_start(theta, algebra.operator_norm(e), source)
        g = None
        for _ in range(60):
            g = value(n)
            if g is not None:
                break
            n *= 2
        if g is None:
            raise ConvergenceError("image never entered the log branch")
        coeffs.append(tau.pair(algebra.universal_trace(g)))
        s = stone_generator(theta, e)
        via_stone.append(tau.pair(algebra.universal_trace(s)))
    coeffs = np.array(coeffs)
    defect = float(np.max(np.abs(coeffs - np.array(via_stone))))
    if defect > tol:
        raise InconsistencyError(f"dual functional disagrees with the Stone route by {defect:.3e}")
    return coeffs
