"""A compositional language for unitary-group homomorphisms.

Every generator below is a genuine continuous group homomorphism between
unitary groups of block-diagonal algebras (or their general-linear variants),
so any well-formed composition is one too.  The validator enforces the side
conditions (abelian targets for pointwise products, 1x1 sources for powers)
that make this true; `homomorphism_check` samples the multiplicativity law as
a defense in depth.

Concrete syntax:

    id | bar | det | embed | power(<int>) | pad(<int>) | amplify(<int>)
    | dup(<int>) | proj<i> | conj(<matrix>) | dsum(e1, ..., ek)
    | mult(e1, ..., ek) | modtwist(<float>, <float>)

composed with the infix operator `∘` (or `.`), e.g. `power(2) ∘ det`.
Matrix literals are row-major complex lists: `[[0,1],[1,0]]`,
`[[0.5+0.5i,...]]`.
"""
from __future__ import annotations

import dataclasses
import re

import numpy as np
import scipy.linalg

from . import algebra
from .algebra import AlgebraShape, Element, Unitary
from .errors import DslError, ParseError, ShapeError, SingularError

# ---------------------------------------------------------------------------
# AST


@dataclasses.dataclass(frozen=True)
class Id:
    pass


@dataclasses.dataclass(frozen=True)
class Bar:
    """Entrywise complex conjugation (a homomorphism on unitaries)."""


@dataclasses.dataclass(frozen=True)
class Det:
    pass


@dataclasses.dataclass(frozen=True)
class Embed:
    """Block-diagonal embedding of a multi-block algebra into one big block."""


@dataclasses.dataclass(frozen=True)
class Power:
    n: int


@dataclasses.dataclass(frozen=True)
class Pad:
    m: int


@dataclasses.dataclass(frozen=True)
class Amplify:
    m: int


@dataclasses.dataclass(frozen=True)
class Dup:
    """u -> (u, ..., u): duplicate a single block into m equal blocks."""

    m: int


@dataclasses.dataclass(frozen=True)
class Proj:
    i: int  # 1-based block index


@dataclasses.dataclass(frozen=True)
class Conj:
    """u -> v u v* for a fixed unitary v (stored as a tuple-of-tuples literal)."""

    matrix: tuple

    @property
    def unitary(self) -> Unitary:
        m = np.array([[complex(z) for z in row] for row in self.matrix])
        shape = AlgebraShape((m.shape[0],))
        return Unitary(shape, [m], tol=1e-8)

    @staticmethod
    def of(u: Unitary) -> "Conj":
        if u.shape.k != 1:
            raise DslError("conj literal must be a single block")
        return Conj(tuple(tuple(complex(z) for z in row) for row in u.blocks[0]))


@dataclasses.dataclass(frozen=True)
class DirectSum:
    parts: tuple


@dataclasses.dataclass(frozen=True)
class Mult:
    factors: tuple


@dataclasses.dataclass(frozen=True)
class Compose:
    """chain = (f, g, ...) means f after g after ..."""

    chain: tuple


@dataclasses.dataclass(frozen=True)
class ModTwist:
    """z -> |z|^(i(alpha + beta i)) z on nonzero scalars (general linear only).

    The exponent convention is fixed so that the induced real 2x2 matrix of
    the generator map is [[1, -alpha], [0, 1 - beta]].
    """

    alpha: float
    beta: float


HomExpr = object  # any of the node classes above


def contains_modtwist(e) -> bool:
    if isinstance(e, ModTwist):
        return True
    if isinstance(e, Compose):
        return any(contains_modtwist(p) for p in e.chain)
    if isinstance(e, DirectSum):
        return any(contains_modtwist(p) for p in e.parts)
    if isinstance(e, Mult):
        return any(contains_modtwist(p) for p in e.factors)
    return False


# ---------------------------------------------------------------------------
# Printing


def _fmt_complex(z: complex) -> str:
    re_, im = float(z.real), float(z.imag)
    if im == 0.0:
        return repr(re_)
    if re_ == 0.0:
        return f"{im!r}i"
    if im < 0:
        return f"{re_!r}-{-im!r}i"
    return f"{re_!r}+{im!r}i"


def print_hom(e) -> str:
    if isinstance(e, Id):
        return "id"
    if isinstance(e, Bar):
        return "bar"
    if isinstance(e, Det):
        return "det"
    if isinstance(e, Embed):
        return "embed"
    if isinstance(e, Power):
        return f"power({e.n})"
    if isinstance(e, Pad):
        return f"pad({e.m})"
    if isinstance(e, Amplify):
        return f"amplify({e.m})"
    if isinstance(e, Dup):
        return f"dup({e.m})"
    if isinstance(e, Proj):
        return f"proj{e.i}"
    if isinstance(e, Conj):
        rows = ",".join("[" + ",".join(_fmt_complex(z) for z in row) + "]" for row in e.matrix)
        return f"conj([{rows}])"
    if isinstance(e, DirectSum):
        return "dsum(" + ", ".join(print_hom(p) for p in e.parts) + ")"
    if isinstance(e, Mult):
        return "mult(" + ", ".join(print_hom(p) for p in e.factors) + ")"
    if isinstance(e, ModTwist):
        return f"modtwist({e.alpha!r}, {e.beta!r})"
    if isinstance(e, Compose):
        return " ∘ ".join(_print_atom(p) for p in e.chain)
    raise DslError(f"unknown node {e!r}")


def _print_atom(e) -> str:
    text = print_hom(e)
    if isinstance(e, Compose):
        return f"({text})"
    return text


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[a-zA-Z_][a-zA-Z_0-9]*)
  | (?P<compose>[∘.])
  | (?P<sym>[()\[\],+\-])
    """,
    re.VERBOSE,
)


@dataclasses.dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str):
    tokens = []
    line, col_base = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col_base)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, tok, line, m.start() - col_base))
        else:
            for i, ch in enumerate(tok):
                if ch == "\n":
                    line += 1
                    col_base = m.start() + i + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - col_base))
    return tokens


_PROJ_RE = re.compile(r"^proj(\d+)$")


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        shown = tok.text or "end of input"
        raise ParseError(f"{message}, got {shown!r}", tok.line, tok.column)

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            self.pos -= 1
            self.fail(f"expected {text!r}")
        return tok

    def parse(self):
        e = self.expression()
        if self.peek().kind != "eof":
            self.fail("trailing input")
        return e

    def expression(self):
        chain = [self.atom()]
        while self.peek().kind == "compose":
            self.next()
            chain.append(self.atom())
        if len(chain) == 1:
            return chain[0]
        return Compose(tuple(chain))

    def atom(self):
        tok = self.peek()
        if tok.text == "(":
            self.next()
            e = self.expression()
            self.expect(")")
            return e
        if tok.kind != "name":
            self.fail("expected a generator name")
        self.next()
        name = tok.text
        m = _PROJ_RE.match(name)
        if m:
            return Proj(int(m.group(1)))
        if name == "id":
            return Id()
        if name == "bar":
            return Bar()
        if name == "det":
            return Det()
        if name == "embed":
            return Embed()
        if name in ("power", "pad", "amplify", "dup"):
            self.expect("(")
            n = self.integer()
            self.expect(")")
            return {"power": Power, "pad": Pad, "amplify": Amplify, "dup": Dup}[name](n)
        if name == "conj":
            self.expect("(")
            matrix = self.matrix_literal()
            self.expect(")")
            return Conj(matrix)
        if name in ("dsum", "mult"):
            self.expect("(")
            parts = [self.expression()]
            while self.peek().text == ",":
                self.next()
                parts.append(self.expression())
            self.expect(")")
            if len(parts) < 2:
                self.fail(f"{name} needs at least 2 arguments")
            return DirectSum(tuple(parts)) if name == "dsum" else Mult(tuple(parts))
        if name == "modtwist":
            self.expect("(")
            alpha = self.real()
            self.expect(",")
            beta = self.real()
            self.expect(")")
            return ModTwist(alpha, beta)
        self.pos -= 1
        self.fail(f"unknown generator {name!r}")

    def integer(self) -> int:
        sign = 1
        if self.peek().text in "+-":
            sign = -1 if self.next().text == "-" else 1
        tok = self.next()
        if tok.kind != "number" or "." in tok.text or "e" in tok.text.lower():
            self.pos -= 1
            self.fail("expected an integer")
        return sign * int(tok.text)

    def real(self) -> float:
        sign = 1.0
        if self.peek().text in "+-":
            sign = -1.0 if self.next().text == "-" else 1.0
        tok = self.next()
        # the '.' in a float may have been split off as a compose token
        if tok.kind == "number" and "." not in tok.text and self.peek().kind == "compose":
            dot = self.next()
            frac = self.next()
            if frac.kind != "number":
                self.pos -= 1
                self.fail("expected digits after decimal point")
            return sign * float(f"{tok.text}.{frac.text}")
        if tok.kind != "number":
            self.pos -= 1
            self.fail("expected a number")
        return sign * float(tok.text)

    def complex_entry(self) -> complex:
        value = self.signed_term()
        while self.peek().text in "+-":
            sign = -1.0 if self.next().text == "-" else 1.0
            value += sign * self.term()
        return value

    def signed_term(self) -> complex:
        sign = 1.0
        if self.peek().text in "+-":
            sign = -1.0 if self.next().text == "-" else 1.0
        return sign * self.term()

    def term(self) -> complex:
        tok = self.next()
        if tok.kind == "name" and tok.text == "i":
            return 1j
        if tok.kind != "number":
            self.pos -= 1
            self.fail("expected a number")
        text = tok.text
        if "." not in text and self.peek().kind == "compose":
            # decimal point tokenized as compose; reassemble the float
            self.next()
            frac = self.next()
            if frac.kind != "number":
                self.pos -= 1
                self.fail("expected digits after decimal point")
            text = f"{text}.{frac.text}"
        if self.peek().kind == "name" and self.peek().text == "i":
            self.next()
            return float(text) * 1j
        return complex(float(text))

    def matrix_literal(self) -> tuple:
        self.expect("[")
        rows = []
        while True:
            self.expect("[")
            row = [self.complex_entry()]
            while self.peek().text == ",":
                self.next()
                row.append(self.complex_entry())
            self.expect("]")
            rows.append(tuple(row))
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect("]")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            self.fail("ragged matrix literal")
        return tuple(rows)


def parse_hom(text: str):
    """Parse the concrete syntax into an AST.  Raises ParseError."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Target inference and validation


def infer_target(e, source: AlgebraShape, gl: bool = False) -> AlgebraShape:
    """Deterministic target shape of e over source; raises DslError."""
    if isinstance(e, (Id, Bar)):
        return source
    if isinstance(e, Conj):
        v = e.unitary
        if v.shape != source:
            raise DslError(f"conj matrix over {v.shape.text()}, source is {source.text()}")
        return source
    if isinstance(e, Power):
        if source.blocks != (1,):
            raise DslError("power needs a 1x1 single-block source")
        return source
    if isinstance(e, ModTwist):
        if not gl:
            raise DslError("modtwist is only available in gl mode")
        if source.blocks != (1,):
            raise DslError("modtwist needs a 1x1 single-block source")
        return source
    if isinstance(e, Det):
        if source.k != 1:
            raise DslError("det needs a single-block source")
        return AlgebraShape((1,))
    if isinstance(e, Pad):
        if source.k != 1:
            raise DslError("pad needs a single-block source")
        if e.m < 1:
            raise DslError("pad size must be >= 1")
        return AlgebraShape((source.blocks[0] + e.m,))
    if isinstance(e, Amplify):
        if source.k != 1:
            raise DslError("amplify needs a single-block source")
        if e.m < 1:
            raise DslError("amplify multiplicity must be >= 1")
        return AlgebraShape((source.blocks[0] * e.m,))
    if isinstance(e, Dup):
        if source.k != 1:
            raise DslError("dup needs a single-block source")
        if e.m < 1:
            raise DslError("dup multiplicity must be >= 1")
        return AlgebraShape(source.blocks * e.m)
    if isinstance(e, Embed):
        return AlgebraShape((source.total_dim,))
    if isinstance(e, Proj):
        if not 1 <= e.i <= source.k:
            raise DslError(f"proj{e.i} out of range for {source.text()}")
        return AlgebraShape((source.blocks[e.i - 1],))
    if isinstance(e, DirectSum):
        if len(e.parts) != source.k:
            raise DslError(f"dsum arity {len(e.parts)} != block count {source.k}")
        blocks = []
        for part, n in zip(e.parts, source.blocks):
            blocks.extend(infer_target(part, AlgebraShape((n,)), gl).blocks)
        return AlgebraShape(tuple(blocks))
    if isinstance(e, Mult):
        targets = [infer_target(f, source, gl) for f in e.factors]
        first = targets[0]
        if any(t != first for t in targets):
            raise DslError("mult factors must share one target shape")
        if any(n != 1 for n in first.blocks):
            raise DslError("mult needs an abelian (all-1x1) target")
        return first
    if isinstance(e, Compose):
        shape = source
        for part in reversed(e.chain):
            shape = infer_target(part, shape, gl)
        return shape
    raise DslError(f"unknown node {e!r}")


def validate(e, source: AlgebraShape, gl: bool = False) -> AlgebraShape:
    """Full structural validation; returns the target shape."""
    return infer_target(e, source, gl)


def generator_gain(e, source: AlgebraShape, gl: bool = False) -> float:
    """Structural upper bound on how much e can scale a Stone generator.

    Used to pick probe times small enough that principal logarithms cannot
    alias (the image's eigenvalue angles stay inside (-pi/2, pi/2)).
    """
    if isinstance(e, (Id, Bar, Conj, Pad, Amplify, Dup, Embed, Proj)):
        return 1.0
    if isinstance(e, Power):
        return float(abs(e.n))
    if isinstance(e, ModTwist):
        return 1.0 + abs(e.alpha) + abs(e.beta)
    if isinstance(e, Det):
        return float(source.blocks[0])
    if isinstance(e, DirectSum):
        return max(
            generator_gain(p, AlgebraShape((n,)), gl) for p, n in zip(e.parts, source.blocks)
        )
    if isinstance(e, Mult):
        return sum(generator_gain(f, source, gl) for f in e.factors)
    if isinstance(e, Compose):
        gain = 1.0
        shape = source
        for part in reversed(e.chain):
            gain *= max(1.0, generator_gain(part, shape, gl))
            shape = infer_target(part, shape, gl)
        return gain
    raise DslError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# Evaluation


def _eval(e, x: Element, gl: bool) -> Element:
    if isinstance(e, Id):
        return x
    if isinstance(e, Bar):
        return x.conjugate()
    if isinstance(e, Conj):
        v = e.unitary
        if v.shape != x.shape:
            raise ShapeError(f"conj over {v.shape.text()}, input over {x.shape.text()}")
        return v * x * v.adjoint()
    if isinstance(e, Power):
        z = complex(x.blocks[0][0, 0])
        return Element(x.shape, [np.array([[z**e.n]])])
    if isinstance(e, ModTwist):
        z = complex(x.blocks[0][0, 0])
        w = np.exp(1j * (e.alpha + 1j * e.beta) * np.log(abs(z))) * z
        return Element(x.shape, [np.array([[w]])])
    if isinstance(e, Det):
        z = np.linalg.det(x.blocks[0])
        return Element(AlgebraShape((1,)), [np.array([[z]])])
    if isinstance(e, Pad):
        b = scipy.linalg.block_diag(x.blocks[0], np.eye(e.m))
        return Element(AlgebraShape((b.shape[0],)), [b])
    if isinstance(e, Amplify):
        b = scipy.linalg.block_diag(*([x.blocks[0]] * e.m))
        return Element(AlgebraShape((b.shape[0],)), [b])
    if isinstance(e, Dup):
        return Element(AlgebraShape(x.shape.blocks * e.m), list(x.blocks) * e.m)
    if isinstance(e, Embed):
        b = scipy.linalg.block_diag(*x.blocks)
        return Element(AlgebraShape((b.shape[0],)), [b])
    if isinstance(e, Proj):
        return x.single_block(e.i - 1)
    if isinstance(e, DirectSum):
        blocks = []
        for part, i in zip(e.parts, range(x.shape.k)):
            blocks.extend(_eval(part, x.single_block(i), gl).blocks)
        return Element(AlgebraShape(tuple(b.shape[0] for b in blocks)), blocks)
    if isinstance(e, Mult):
        images = [_eval(f, x, gl) for f in e.factors]
        out = images[0]
        for img in images[1:]:
            out = out * img
        return out
    if isinstance(e, Compose):
        for part in reversed(e.chain):
            x = _eval(part, x, gl)
        return x
    raise DslError(f"unknown node {e!r}")


def apply_hom(e, u: Unitary) -> Unitary:
    """Evaluate a unitary-mode expression on a unitary."""
    out = _eval(e, u, gl=False)
    return Unitary(out.shape, out.blocks, tol=1e-7)


def apply_gl(e, g: Element, tol_singular: float = 1e-10) -> Element:
    """Evaluate a general-linear expression on an invertible element."""
    smin = min(np.linalg.svd(b, compute_uv=False)[-1] for b in g.blocks)
    if smin <= tol_singular:
        raise SingularError(f"input smallest singular value {smin:.3e}")
    out = _eval(e, g, gl=True)
    smin_out = min(np.linalg.svd(b, compute_uv=False)[-1] for b in out.blocks)
    if smin_out <= tol_singular:
        raise SingularError("image is numerically singular")
    return out


def homomorphism_check(e, source: AlgebraShape, trials: int = 100, seed=0, tol: float = 1e-8) -> bool:
    """Sampled verification that e is multiplicative and adjoint-respecting.

    A verdict, not an exception: invalid combinations return False.
    """
    rng = np.random.default_rng(seed)
    try:
        for _ in range(trials):
            u = algebra.random_unitary(source, rng)
            v = algebra.random_unitary(source, rng)
            lhs = _eval(e, u * v, gl=False)
            rhs = _eval(e, u, gl=False) * _eval(e, v, gl=False)
            if algebra.operator_norm(lhs - rhs) >= tol:
                return False
            star = _eval(e, u.adjoint(), gl=False)
            if algebra.operator_norm(star - _eval(e, u, gl=False).adjoint()) >= tol:
                return False
    except (DslError, ShapeError):
        return False
    return True


# ---------------------------------------------------------------------------
# Random expression generation (for property sweeps)


def _random_single_block(rng, n: int, depth: int, gl: bool):
    choices = ["id", "bar", "conj", "det"]
    if n + 2 <= 6:
        choices.append("pad")
    if 3 * n <= 6:
        choices.append("amplify")
    if n == 1:
        choices += ["power", "dup"]
        if gl:
            choices.append("modtwist")
    kind = rng.choice(choices)
    shape = AlgebraShape((n,))
    if kind == "id":
        return Id()
    if kind == "bar":
        return Bar()
    if kind == "conj":
        return Conj.of(algebra.random_unitary(shape, rng))
    if kind == "pad":
        return Pad(int(rng.integers(1, 3)))
    if kind == "amplify":
        return Amplify(int(rng.integers(2, 4)))
    if kind == "det":
        return Det()
    if kind == "power":
        return Power(int(rng.integers(-3, 4)))
    if kind == "dup":
        return Dup(int(rng.integers(2, 4)))
    return ModTwist(float(np.round(rng.uniform(-1, 1), 3)), float(np.round(rng.uniform(-1, 1), 3)))


def random_hom(rng, source: AlgebraShape, depth: int = 3, gl: bool = False):
    """A random validated expression over source (a composition-depth bound)."""
    from .errors import InvariantViolation

    for _ in range(50):
        try:
            expr = _random_hom(rng, source, depth, gl)
            validate(expr, source, gl)
            return expr
        except (DslError, InvariantViolation):
            continue
    return Id()


def _random_hom(rng, source: AlgebraShape, depth: int, gl: bool):
    if source.k > 1:
        roll = rng.random()
        if roll < 0.3:
            inner = Embed()
        elif roll < 0.55 and all(n == 1 for n in source.blocks):
            factors = []
            for _ in range(2):
                i = int(rng.integers(1, source.k + 1))
                n_pow = int(rng.integers(-2, 3))
                factors.append(Compose((Power(n_pow), Proj(i))) if n_pow != 1 else Proj(i))
            inner = Mult(tuple(factors))
        elif roll < 0.75:
            inner = Proj(int(rng.integers(1, source.k + 1)))
        else:
            parts = tuple(
                _random_single_block(rng, n, depth - 1, gl) for n in source.blocks
            )
            inner = DirectSum(parts)
    else:
        inner = _random_single_block(rng, source.blocks[0], depth, gl)

    target = infer_target(inner, source, gl)
    if depth <= 1 or rng.random() < 0.35:
        return inner
    outer = random_hom(rng, target, depth - 1, gl)
    chain = (outer.chain if isinstance(outer, Compose) else (outer,)) + (
        inner.chain if isinstance(inner, Compose) else (inner,)
    )
    return Compose(chain)


def random_shape(rng, max_blocks: int = 3, max_size: int = 4) -> AlgebraShape:
    k = int(rng.integers(1, max_blocks + 1))
    return AlgebraShape(tuple(int(rng.integers(1, max_size + 1)) for _ in range(k)))
