"""Piecewise-exponential paths in the unitary group and the pre-determinant.

A path is carried as a list of segments t -> base * exp(2*pi*i*t*a); on such
paths the pre-determinant is the finite sum of the traces of the segment
generators, which is exact.  A quadrature evaluation of the defining Riemann
integral (central-difference derivative, adaptive Simpson) is kept alongside
as an independent oracle.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from . import algebra
from .algebra import (
    AffVector,
    AlgebraShape,
    Element,
    SelfAdjoint,
    TraceWeights,
    K0Class,
    Unitary,
)
from .errors import (
    BranchCutError,
    InvariantViolation,
    NotALoopError,
    ResolutionError,
    ShapeError,
)

TOL_JOIN = 1e-8
TOL_INT = 1e-6

# Stay safely inside the open unit ball when taking principal logs of
# increments; at 1.0 exactly the branch condition is marginal.
_NORM_BUDGET = 0.999


class PathSegment:
    """One exponential arc t -> base * exp(2*pi*i*t*generator), t in [0, 1]."""

    __slots__ = ("base", "generator", "_eig")

    def __init__(self, base: Unitary, generator: SelfAdjoint):
        if base.shape != generator.shape:
            raise ShapeError(f"{base.shape.text()} vs {generator.shape.text()}")
        if not isinstance(base, Unitary):
            base = Unitary(base.shape, base.blocks)
        if not isinstance(generator, SelfAdjoint):
            generator = SelfAdjoint(generator.shape, generator.blocks)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "generator", generator)
        object.__setattr__(self, "_eig", None)

    def __setattr__(self, name, value):
        raise AttributeError("PathSegment is immutable")

    @property
    def shape(self) -> AlgebraShape:
        return self.base.shape

    def _eigensystem(self):
        eig = object.__getattribute__(self, "_eig")
        if eig is None:
            eig = [np.linalg.eigh(b) for b in self.generator.blocks]
            object.__setattr__(self, "_eig", eig)
        return eig

    def at(self, s: float) -> Unitary:
        """The segment at local time s (the formula extends beyond [0, 1])."""
        blocks = []
        for b, (w, v) in zip(self.base.blocks, self._eigensystem()):
            blocks.append(b @ ((v * np.exp(2j * np.pi * s * w)) @ v.conj().T))
        return Unitary(self.shape, blocks)

    @property
    def endpoint(self) -> Unitary:
        return self.at(1.0)

    def reversed(self) -> "PathSegment":
        return PathSegment(self.endpoint, -1.0 * self.generator)


class PiecewisePath:
    """A continuous concatenation of exponential segments on [0, 1]."""

    __slots__ = ("segments",)

    def __init__(self, segments):
        segments = tuple(segments)
        if not segments:
            raise InvariantViolation("a path needs at least one segment")
        shape = segments[0].shape
        for prev, nxt in zip(segments, segments[1:]):
            if nxt.shape != shape:
                raise ShapeError("segments over different algebras")
            gap = algebra.operator_norm(prev.endpoint - nxt.base)
            if gap > TOL_JOIN:
                raise InvariantViolation(f"discontinuous joint: gap {gap:.3e}")
        object.__setattr__(self, "segments", segments)

    def __setattr__(self, name, value):
        raise AttributeError("PiecewisePath is immutable")

    @property
    def shape(self) -> AlgebraShape:
        return self.segments[0].shape

    @property
    def start(self) -> Unitary:
        return self.segments[0].base

    @property
    def end(self) -> Unitary:
        return self.segments[-1].endpoint

    def at(self, t: float) -> Unitary:
        k = len(self.segments)
        j = min(int(t * k), k - 1)
        return self.segments[j].at(t * k - j)

    def is_loop(self, tol: float = TOL_JOIN) -> bool:
        return algebra.operator_norm(self.end - self.start) <= tol


@dataclasses.dataclass(frozen=True)
class SampledPath:
    """A raw continuous path known only at sample times.

    `sampler`, when provided, evaluates the underlying path at arbitrary
    times so discretization can refine below the given samples.
    """

    samples: tuple
    sampler: object = None

    def __post_init__(self):
        samples = tuple((float(t), u) for t, u in self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 2:
            raise InvariantViolation("need at least 2 samples")
        times = [t for t, _ in samples]
        if abs(times[0]) > 1e-12 or abs(times[-1] - 1.0) > 1e-12:
            raise InvariantViolation("samples must start at t=0 and end at t=1")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvariantViolation("sample times must be strictly increasing")
        shape = samples[0][1].shape
        for _, u in samples:
            if u.shape != shape:
                raise ShapeError("samples over different algebras")
            if not isinstance(u, Unitary):
                raise InvariantViolation("samples must be Unitary")

    @property
    def shape(self) -> AlgebraShape:
        return self.samples[0][1].shape


def sample_path(path: PiecewisePath, num: int, sampler: bool = True) -> SampledPath:
    ts = np.linspace(0.0, 1.0, num)
    samples = [(t, path.at(t)) for t in ts]
    return SampledPath(tuple(samples), sampler=path.at if sampler else None)


# ---------------------------------------------------------------------------
# Pre-determinant


def pre_determinant(path: PiecewisePath, trace: TraceWeights | None = None):
    """Exact pre-determinant: the sum of segment-generator traces.

    With trace=None (the universal trace) returns an AffVector; with
    TraceWeights returns the scalar pairing.
    """
    total = algebra.zero(path.shape)
    for seg in path.segments:
        total = SelfAdjoint(total.shape, (total + seg.generator).blocks)
    vec = algebra.universal_trace(total)
    if trace is None:
        return vec
    return trace.pair(vec)


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 24) -> np.ndarray:
    """Adaptive Simpson quadrature for a vector-valued integrand."""
    fa, fm, fb = f(a), f((a + b) / 2.0), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2.0
        lm, rm = (a + m) / 2.0, (m + b) / 2.0
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = np.max(np.abs(left + right - whole))
        if err < 15.0 * tol or depth >= max_depth:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2.0, depth + 1
        )

    return recurse(a, b, fa, fm, fb, whole, tol, 0)


_DIFF_H = 2e-6


def _segment_integrand(seg: PathSegment):
    """Trace vector of (1/2 pi i) xi'(s) xi(s)^{-1} via central differences."""

    def f(s: float) -> np.ndarray:
        up = seg.at(s + _DIFF_H)
        dn = seg.at(s - _DIFF_H)
        mid = seg.at(s)
        vals = []
        for n, bu, bd, bm in zip(seg.shape.blocks, up.blocks, dn.blocks, mid.blocks):
            deriv = (bu - bd) / (2.0 * _DIFF_H)
            m = deriv @ bm.conj().T / (2j * np.pi)
            m = (m + m.conj().T) / 2.0
            vals.append(np.trace(m).real / n)
        return np.array(vals)

    return f


def pre_determinant_numeric(path, trace: TraceWeights | None = None, tol: float = 1e-8):
    """Riemann-integral evaluation of the pre-determinant (the oracle).

    SampledPath input is first discretized; each exponential segment is then
    integrated by adaptive Simpson with a central-difference derivative.
    """
    if isinstance(path, SampledPath):
        path = discretize(path)
    k = len(path.segments)
    total = np.zeros(path.shape.k)
    for seg in path.segments:
        total = total + adaptive_simpson(_segment_integrand(seg), 0.0, 1.0, tol / k)
    vec = AffVector(path.shape, tuple(total))
    if trace is None:
        return vec
    return trace.pair(vec)


# ---------------------------------------------------------------------------
# Discretization and path algebra


def _increment(u: Unitary, v: Unitary) -> Unitary:
    return Unitary(u.shape, [a.conj().T @ b for a, b in zip(u.blocks, v.blocks)], tol=10 * algebra.TOL_U)


def discretize(xi: SampledPath, max_refine: int = 20) -> PiecewisePath:
    """Turn a sampled path into a piecewise-exponential one.

    Refines until every increment satisfies the norm bound needed for the
    principal log; refinement below the sample grid needs xi.sampler.
    """
    samples = list(xi.samples)
    for _ in range(max_refine):
        worst = 0.0
        refined = [samples[0]]
        changed = False
        for (t0, u0), (t1, u1) in zip(samples, samples[1:]):
            d = algebra.operator_norm(_increment(u0, u1) - algebra.identity(xi.shape))
            worst = max(worst, d)
            if d >= _NORM_BUDGET and xi.sampler is not None:
                tm = (t0 + t1) / 2.0
                refined.append((tm, xi.sampler(tm)))
                changed = True
            refined.append((t1, u1))
        samples = refined
        if not changed:
            if worst >= _NORM_BUDGET:
                raise ResolutionError(
                    f"increment norm {worst:.3f} >= 1 and no sampler to refine with"
                )
            break
    else:
        raise ResolutionError("refinement budget exhausted")

    segments = []
    for (_, u0), (_, u1) in zip(samples, samples[1:]):
        try:
            a = algebra.log_unitary(_increment(u0, u1))
        except BranchCutError as exc:  # norm bound should prevent this
            raise ResolutionError(f"increment log hit the branch cut: {exc}") from exc
        segments.append(PathSegment(u0, a))
    return PiecewisePath(segments)


def pointwise_product(p1: PiecewisePath, p2: PiecewisePath, samples_per_segment: int = 16) -> PiecewisePath:
    """The path t -> p1(t) * p2(t), rebuilt as a piecewise-exponential path."""
    if p1.shape != p2.shape:
        raise ShapeError(f"{p1.shape.text()} vs {p2.shape.text()}")

    def prod(t: float) -> Unitary:
        return Unitary(p1.shape, [a @ b for a, b in zip(p1.at(t).blocks, p2.at(t).blocks)])

    num = max(64, samples_per_segment * (len(p1.segments) + len(p2.segments)))
    ts = np.linspace(0.0, 1.0, num + 1)
    return discretize(SampledPath(tuple((t, prod(t)) for t in ts), sampler=prod))


def concat(p1: PiecewisePath, p2: PiecewisePath) -> PiecewisePath:
    if algebra.operator_norm(p1.end - p2.start) > TOL_JOIN:
        raise InvariantViolation("paths do not meet: p1(1) != p2(0)")
    return PiecewisePath(p1.segments + p2.segments)


def reverse(p: PiecewisePath) -> PiecewisePath:
    return PiecewisePath(tuple(seg.reversed() for seg in reversed(p.segments)))


def constant_path(u: Unitary) -> PiecewisePath:
    return PiecewisePath([PathSegment(u, algebra.zero(u.shape))])


def exponential_path(a: SelfAdjoint) -> PiecewisePath:
    """The one-segment path t -> exp(2 pi i t a) from the unit."""
    return PiecewisePath([PathSegment(algebra.identity(a.shape), a)])


def projection_loop(p: SelfAdjoint) -> PiecewisePath:
    """The loop t -> p e^{2 pi i t} + (1 - p) for a projection p."""
    defect = max(
        algebra.operator_norm(p * p - p),
        algebra.operator_norm(p - p.adjoint()),
    )
    if defect > 1e-9:
        raise InvariantViolation(f"not a projection: defect {defect:.3e}")
    return exponential_path(p)


def loop_k0_class(loop: PiecewisePath, tol_int: float = TOL_INT) -> K0Class:
    """Winding numbers of a loop against the unnormalized block traces."""
    if not loop.is_loop():
        raise NotALoopError("path endpoints differ: not a loop")
    total = np.zeros(loop.shape.k)
    for seg in loop.segments:
        total = total + algebra.unnormalized_block_trace(seg.generator)
    rounded = np.rint(total)
    drift = np.max(np.abs(total - rounded))
    if drift > tol_int:
        raise NotALoopError(f"winding number off an integer by {drift:.3e}")
    return K0Class(loop.shape, tuple(int(r) for r in rounded))


def conjugate_path(p: PiecewisePath, u: Unitary) -> PiecewisePath:
    """The path t -> u p(t) u*."""
    segs = []
    for seg in p.segments:
        base = Unitary(u.shape, [a @ b @ a.conj().T for a, b in zip(u.blocks, seg.base.blocks)])
        gen = algebra.SelfAdjoint(
            u.shape, [a @ b @ a.conj().T for a, b in zip(u.blocks, seg.generator.blocks)]
        )
        segs.append(PathSegment(base, gen))
    return PiecewisePath(segs)


def random_path(shape: AlgebraShape, seed, segments: int = 3, bound: float = 0.6, from_unit: bool = False) -> PiecewisePath:
    """A random piecewise-exponential path (property-test fodder)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    base = algebra.identity(shape) if from_unit else algebra.random_unitary(shape, rng)
    segs = []
    for _ in range(segments):
        gen = algebra.random_selfadjoint(shape, rng, bound)
        seg = PathSegment(base, gen)
        segs.append(seg)
        base = seg.endpoint
    return PiecewisePath(segs)


def random_loop(shape: AlgebraShape, seed, max_rank_per_block: bool = True) -> PiecewisePath:
    """A random loop at 1 with a known-interesting winding class."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    i = int(rng.integers(0, shape.k))
    n = shape.blocks[i]
    rank = int(rng.integers(0, n + 1))
    blocks = [np.zeros((m, m)) for m in shape.blocks]
    for r in range(rank):
        blocks[i][r, r] = 1.0
    p = algebra.SelfAdjoint(shape, blocks)
    loop = projection_loop(p)
    u = algebra.random_unitary(shape, rng)
    return conjugate_path(loop, u)


# ---------------------------------------------------------------------------
# Thomsen classes


@dataclasses.dataclass(frozen=True)
class ThomsenClass:
    """A pre-determinant value modulo the loop lattice diag(1/n_i) Z^k.

    The representative is reduced per coordinate into [0, 1/n_i).
    """

    shape: AlgebraShape
    representative: AffVector
    tol: float = 1e-8

    def distance_to_zero(self) -> float:
        d = 0.0
        for n, r in zip(self.shape.blocks, self.representative.values):
            period = 1.0 / n
            r = r % period
            d = max(d, min(r, period - r))
        return d

    def is_zero(self) -> bool:
        return self.distance_to_zero() < self.tol

    def __eq__(self, other) -> bool:
        if not isinstance(other, ThomsenClass) or self.shape != other.shape:
            return NotImplemented
        for n, a, b in zip(self.shape.blocks, self.representative.values, other.representative.values):
            period = 1.0 / n
            r = (a - b) % period
            if min(r, period - r) >= self.tol:
                return False
        return True

    def __hash__(self):
        return hash(self.shape)


def _reduce_mod_lattice(shape: AlgebraShape, vec: AffVector) -> AffVector:
    vals = []
    for n, v in zip(shape.blocks, vec.values):
        period = 1.0 / n
        vals.append(v % period)
    return AffVector(shape, tuple(vals))


def _log_rep(u: Unitary, depth: int = 0) -> AffVector:
    """Universal-trace pre-determinant of a log path 1 -> u.

    When the direct principal log is blocked by the branch cut, pass to the
    principal square root: the path for u is the pointwise square of the
    path for u^{1/2}, so the value doubles.
    """
    if depth > 40:
        raise InvariantViolation("square-root subdivision failed to converge")
    try:
        return algebra.universal_trace(algebra.log_unitary(u))
    except BranchCutError:
        return 2.0 * _log_rep(algebra.sqrt_unitary(u), depth + 1)


def thomsen_class(u: Unitary, tol: float = 1e-8) -> ThomsenClass:
    rep = _log_rep(u)
    return ThomsenClass(u.shape, _reduce_mod_lattice(u.shape, rep), tol=tol)


def cu_membership(u: Unitary, tol: float = 1e-8) -> bool:
    """Whether u lies in the closure of the commutator subgroup."""
    return thomsen_class(u, tol=tol).is_zero()
