"""Finite-dimensional C*-algebra arithmetic.

An algebra is a finite direct sum of complex matrix blocks.  Elements are
block-diagonal matrices stored block by block; the trace simplex of such an
algebra is the simplex spanned by the normalized traces of the blocks, so
real affine functions on it are plain real vectors with one coordinate per
block.
"""
from __future__ import annotations

import dataclasses
import re

import numpy as np
import scipy.linalg

from .errors import BranchCutError, InvariantViolation, ShapeError

TOL_SA = 1e-9
TOL_U = 1e-9
TOL_BRANCH = 1e-8

# Desk-scale guard rails; raise them if you really need bigger algebras.
MAX_BLOCK_SIZE = 16
MAX_BLOCK_COUNT = 8

_SHAPE_RE = re.compile(r"^M(\d+)$")


@dataclasses.dataclass(frozen=True)
class AlgebraShape:
    """A finite-dimensional C*-algebra as its tuple of block sizes."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(n) for n in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) < 1:
            raise InvariantViolation("an algebra needs at least one block")
        if len(blocks) > MAX_BLOCK_COUNT:
            raise InvariantViolation(f"too many blocks ({len(blocks)} > {MAX_BLOCK_COUNT})")
        for n in blocks:
            if n < 1:
                raise InvariantViolation(f"block size {n} < 1")
            if n > MAX_BLOCK_SIZE:
                raise InvariantViolation(f"block size {n} > {MAX_BLOCK_SIZE}")

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def total_dim(self) -> int:
        return sum(self.blocks)

    def text(self) -> str:
        return " (+) ".join(f"M{n}" for n in self.blocks)

    @staticmethod
    def parse(text: str) -> "AlgebraShape":
        parts = [p.strip() for p in text.replace(" ", "").split("(+)")]
        sizes = []
        for p in parts:
            m = _SHAPE_RE.match(p)
            if not m:
                raise InvariantViolation(f"bad shape component {p!r} in {text!r}")
            sizes.append(int(m.group(1)))
        return AlgebraShape(tuple(sizes))


def _freeze(block: np.ndarray) -> np.ndarray:
    out = np.array(block, dtype=complex)
    out.setflags(write=False)
    return out


class Element:
    """A block-diagonal complex matrix over an AlgebraShape.  Immutable."""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks):
        blocks = tuple(_freeze(b) for b in blocks)
        if len(blocks) != shape.k:
            raise InvariantViolation(f"expected {shape.k} blocks, got {len(blocks)}")
        for n, b in zip(shape.blocks, blocks):
            if b.shape != (n, n):
                raise InvariantViolation(f"block of shape {b.shape}, expected ({n}, {n})")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("Element values are immutable")

    def __repr__(self):
        return f"{type(self).__name__}({self.shape.text()})"

    # Blockwise arithmetic.  Products are matrix products.
    def _check_shape(self, other: "Element"):
        if self.shape != other.shape:
            raise ShapeError(f"{self.shape.text()} vs {other.shape.text()}")

    def __add__(self, other: "Element") -> "Element":
        self._check_shape(other)
        return Element(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "Element") -> "Element":
        self._check_shape(other)
        return Element(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "Element":
        return Element(self.shape, [-a for a in self.blocks])

    def __mul__(self, other):
        if isinstance(other, Element):
            self._check_shape(other)
            return Element(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])
        return Element(self.shape, [complex(other) * a for a in self.blocks])

    def __rmul__(self, scalar) -> "Element":
        return Element(self.shape, [complex(scalar) * a for a in self.blocks])

    def adjoint(self) -> "Element":
        return Element(self.shape, [a.conj().T for a in self.blocks])

    def conjugate(self) -> "Element":
        """Entrywise complex conjugate (no transpose)."""
        return Element(self.shape, [a.conj() for a in self.blocks])

    def block(self, i: int) -> np.ndarray:
        return self.blocks[i]

    def single_block(self, i: int) -> "Element":
        """This element's i-th block, as an element of the one-block algebra."""
        return Element(AlgebraShape((self.shape.blocks[i],)), [self.blocks[i]])


class SelfAdjoint(Element):
    """An Element with each block equal to its conjugate transpose."""

    __slots__ = ()

    def __init__(self, shape, blocks, tol: float = TOL_SA):
        super().__init__(shape, blocks)
        defect = max(np.linalg.norm(b - b.conj().T, 2) for b in self.blocks)
        if defect > tol:
            raise InvariantViolation(f"not self-adjoint: defect {defect:.3e} > {tol:.1e}")


class Unitary(Element):
    """An Element with u*u = 1 on each block."""

    __slots__ = ()

    def __init__(self, shape, blocks, tol: float = TOL_U):
        super().__init__(shape, blocks)
        defect = max(
            np.linalg.norm(b.conj().T @ b - np.eye(n), 2)
            for n, b in zip(shape.blocks, self.blocks)
        )
        if defect > tol:
            raise InvariantViolation(f"not unitary: defect {defect:.3e} > {tol:.1e}")


def identity(shape: AlgebraShape) -> Unitary:
    return Unitary(shape, [np.eye(n) for n in shape.blocks])


def zero(shape: AlgebraShape) -> SelfAdjoint:
    return SelfAdjoint(shape, [np.zeros((n, n)) for n in shape.blocks])


def block_unit(shape: AlgebraShape, i: int) -> SelfAdjoint:
    """The unit of block i, zero elsewhere."""
    blocks = [np.zeros((n, n)) for n in shape.blocks]
    blocks[i] = np.eye(shape.blocks[i])
    return SelfAdjoint(shape, blocks)


def rank_one_projection(shape: AlgebraShape, i: int) -> SelfAdjoint:
    """The e_11 matrix unit of block i, zero elsewhere."""
    blocks = [np.zeros((n, n)) for n in shape.blocks]
    blocks[i][0, 0] = 1.0
    return SelfAdjoint(shape, blocks)


@dataclasses.dataclass(frozen=True)
class AffVector:
    """A real affine function on the trace simplex, one value per block.

    The order unit is the all-ones vector and the partial order is
    coordinatewise.
    """

    shape: AlgebraShape
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.shape.k:
            raise InvariantViolation(f"expected {self.shape.k} coordinates, got {len(values)}")

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def __add__(self, other: "AffVector") -> "AffVector":
        if self.shape != other.shape:
            raise ShapeError(f"{self.shape.text()} vs {other.shape.text()}")
        return AffVector(self.shape, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "AffVector") -> "AffVector":
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> "AffVector":
        return AffVector(self.shape, tuple(float(scalar) * v for v in self.values))

    def __neg__(self) -> "AffVector":
        return (-1.0) * self


@dataclasses.dataclass(frozen=True)
class TraceWeights:
    """A tracial state: a convex combination of the normalized block traces."""

    shape: AlgebraShape
    weights: tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if len(weights) != self.shape.k:
            raise InvariantViolation(f"expected {self.shape.k} weights, got {len(weights)}")
        if min(weights) < -1e-12:
            raise InvariantViolation("trace weights must be nonnegative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise InvariantViolation(f"trace weights sum to {sum(weights)}, not 1")

    def pair(self, f: AffVector) -> float:
        if self.shape != f.shape:
            raise ShapeError(f"{self.shape.text()} vs {f.shape.text()}")
        return float(np.dot(self.weights, f.values))


def barycenter(shape: AlgebraShape) -> TraceWeights:
    return TraceWeights(shape, tuple(1.0 / shape.k for _ in range(shape.k)))


@dataclasses.dataclass(frozen=True)
class K0Class:
    """A K-zero class: a formal difference of projection ranks per block."""

    shape: AlgebraShape
    ranks: tuple[int, ...]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        object.__setattr__(self, "ranks", ranks)
        if len(ranks) != self.shape.k:
            raise InvariantViolation(f"expected {self.shape.k} ranks, got {len(ranks)}")

    def __add__(self, other: "K0Class") -> "K0Class":
        if self.shape != other.shape:
            raise ShapeError(f"{self.shape.text()} vs {other.shape.text()}")
        return K0Class(self.shape, tuple(a + b for a, b in zip(self.ranks, other.ranks)))


def unit_class(shape: AlgebraShape) -> K0Class:
    return K0Class(shape, shape.blocks)


# ---------------------------------------------------------------------------
# Operations


def exp_generator(a: SelfAdjoint, t: float = 1.0) -> Unitary:
    """exp(2*pi*i*t*a), computed blockwise by Hermitian eigendecomposition."""
    if not isinstance(a, SelfAdjoint):
        a = SelfAdjoint(a.shape, a.blocks)
    blocks = []
    for b in a.blocks:
        w, v = np.linalg.eigh(b)
        blocks.append((v * np.exp(2j * np.pi * t * w)) @ v.conj().T)
    return Unitary(a.shape, blocks)


def _unitary_eigensystem(block: np.ndarray):
    """Unitary diagonalization of a unitary block via complex Schur."""
    t, q = scipy.linalg.schur(block, output="complex")
    return np.diag(t), q


def log_unitary(u: Unitary, tol_branch: float = TOL_BRANCH) -> SelfAdjoint:
    """Principal branch a with u = exp(2*pi*i*a), eigenvalues in (-1/2, 1/2).

    Raises BranchCutError when an eigenvalue sits within tol_branch of -1;
    callers are expected to subdivide their path (or shrink t0) and retry.
    """
    blocks = []
    for b in u.blocks:
        eig, q = _unitary_eigensystem(b)
        if np.min(np.abs(eig + 1.0)) < tol_branch:
            raise BranchCutError("eigenvalue at the branch point -1")
        angles = np.angle(eig) / (2.0 * np.pi)
        a = (q * angles) @ q.conj().T
        blocks.append((a + a.conj().T) / 2.0)
    return SelfAdjoint(u.shape, blocks)


def sqrt_unitary(u: Unitary) -> Unitary:
    """Principal square root, halving each eigenvalue angle in (-pi, pi]."""
    blocks = []
    for b in u.blocks:
        eig, q = _unitary_eigensystem(b)
        half = np.exp(1j * np.angle(eig) / 2.0)
        blocks.append((q * half) @ q.conj().T)
    return Unitary(u.shape, blocks)


def universal_trace(a: Element) -> AffVector:
    """The function tau -> tau(a) on the trace simplex, in block coordinates."""
    vals = []
    for n, b in zip(a.shape.blocks, a.blocks):
        tr = np.trace(b) / n
        if abs(tr.imag) > 1e-7:
            raise InvariantViolation(f"trace has imaginary part {tr.imag:.3e}")
        vals.append(tr.real)
    return AffVector(a.shape, tuple(vals))


def unnormalized_block_trace(a: Element) -> np.ndarray:
    """Raw diagonal sums per block (used for integer winding extraction)."""
    return np.array([np.trace(b).real for b in a.blocks])


def pairing_matrix(shape: AlgebraShape) -> np.ndarray:
    """The pairing of K-zero with traces as a matrix: diag(1/n_i)."""
    return np.diag([1.0 / n for n in shape.blocks])


def pairing_rho(x: K0Class) -> AffVector:
    return AffVector(x.shape, tuple(r / n for r, n in zip(x.ranks, x.shape.blocks)))


def is_in_A0(a: SelfAdjoint, tol: float = 1e-8) -> bool:
    """Whether every tracial state kills a (all block traces vanish)."""
    return bool(np.max(np.abs(universal_trace(a).as_array())) < tol)


def operator_norm(a: Element) -> float:
    return max(np.linalg.norm(b, 2) for b in a.blocks)


def commutator(x: Element, y: Element) -> Element:
    return x * y - y * x


def random_unitary(shape: AlgebraShape, seed) -> Unitary:
    """Haar-ish unitary via QR of a complex Gaussian matrix; deterministic."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    blocks = []
    for n in shape.blocks:
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        blocks.append(q)
    return Unitary(shape, blocks)


def random_selfadjoint(shape: AlgebraShape, seed, bound: float = 1.0) -> SelfAdjoint:
    """Random self-adjoint element with operator norm at most bound."""
    if bound <= 0:
        raise InvariantViolation("bound must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    blocks = []
    for n in shape.blocks:
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = (g + g.conj().T) / 2.0
        nrm = np.linalg.norm(h, 2)
        if nrm > bound:
            h = h * (bound / nrm)
        blocks.append(h)
    return SelfAdjoint(shape, blocks)


def random_trace_zero(shape: AlgebraShape, seed, bound: float = 1.0) -> SelfAdjoint:
    """Random element of the trace-annihilated subspace (all block traces 0)."""
    a = random_selfadjoint(shape, seed, bound)
    blocks = []
    for n, b in zip(shape.blocks, a.blocks):
        blocks.append(b - (np.trace(b).real / n) * np.eye(n))
    return SelfAdjoint(shape, blocks)


# ---------------------------------------------------------------------------
# Serialization helpers (report format)


def matrix_to_lists(m: np.ndarray):
    """Row-major nested lists of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def element_to_lists(a: Element):
    return [matrix_to_lists(b) for b in a.blocks]


def element_from_lists(shape: AlgebraShape, data) -> Element:
    blocks = []
    for rows in data:
        blocks.append(np.array([[complex(re, im) for re, im in row] for row in rows]))
    return Element(shape, blocks)
