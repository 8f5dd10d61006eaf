"""Sparse multivariate polynomial systems over complex scalars.

Polynomials are stored as ``{Monomial: complex}`` maps with exact-zero pruning
only, so symbolic manipulations (differentiation, directional shifts, the
deflation construction) keep their structure exactly.  Numerical evaluation
goes through a compiled ``(coefficients, exponent matrix)`` form cached on
each object.

Variables are 0-based internally.  The text format uses ``x1 .. xn``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, ParseError

__all__ = [
    "Monomial",
    "Polynomial",
    "PolySystem",
    "eval_system",
    "jacobian",
    "shift",
    "symbolic_deflate",
    "parse_polynomial",
    "parse_system",
    "format_polynomial",
]


@dataclass(frozen=True, order=False)
class Monomial:
    """Product of variables; ``exponents`` is a sorted tuple of ``(var, exp)`` with exp > 0."""

    exponents: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for var, exp in self.exponents:
            if exp <= 0:
                raise InputError(f"monomial exponent for x{var + 1} must be positive, got {exp}")
            if var < 0:
                raise InputError(f"negative variable index {var}")
        vars_ = [v for v, _ in self.exponents]
        if vars_ != sorted(set(vars_)):
            raise InputError("monomial exponents must be sorted by variable without repeats")

    @classmethod
    def from_map(cls, exps: Mapping[int, int]) -> "Monomial":
        return cls(tuple(sorted((v, e) for v, e in exps.items() if e != 0)))

    @classmethod
    def var(cls, index: int, power: int = 1) -> "Monomial":
        return cls(((index, power),)) if power else cls()

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exponents)

    @property
    def max_var(self) -> int:
        return self.exponents[-1][0] if self.exponents else -1

    def as_dict(self) -> dict[int, int]:
        return dict(self.exponents)

    def __mul__(self, other: "Monomial") -> "Monomial":
        out = dict(self.exponents)
        for v, e in other.exponents:
            out[v] = out.get(v, 0) + e
        return Monomial.from_map(out)

    def derivative(self, var: int) -> tuple[int, "Monomial"]:
        """Return ``(multiplier, monomial)`` for d/dx_var; multiplier 0 if var is absent."""
        exps = dict(self.exponents)
        e = exps.get(var, 0)
        if e == 0:
            return 0, Monomial()
        if e == 1:
            del exps[var]
        else:
            exps[var] = e - 1
        return e, Monomial.from_map(exps)

    def dense(self, n: int) -> tuple[int, ...]:
        out = [0] * n
        for v, e in self.exponents:
            out[v] = e
        return tuple(out)


def _order_key(mono: Monomial, n: int):
    # graded lex: higher total degree first, then larger exponent of x1, x2, ...
    return (-mono.degree, tuple(-e for e in mono.dense(n)))


@dataclass(frozen=True, eq=False)
class Polynomial:
    """A polynomial in ``ambient_dim`` variables with complex coefficients."""

    terms: Mapping[Monomial, complex]
    ambient_dim: int

    def __post_init__(self):
        clean = {}
        for mono, coef in self.terms.items():
            c = complex(coef)
            if c != 0:
                if mono.max_var >= self.ambient_dim:
                    raise InputError(
                        f"monomial uses x{mono.max_var + 1} but ambient dimension is {self.ambient_dim}"
                    )
                clean[mono] = c
        ordered = dict(sorted(clean.items(), key=lambda kv: _order_key(kv[0], self.ambient_dim)))
        object.__setattr__(self, "terms", ordered)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls({}, n)

    @classmethod
    def constant(cls, c: complex, n: int) -> "Polynomial":
        return cls({Monomial(): c}, n)

    @classmethod
    def variable(cls, index: int, n: int) -> "Polynomial":
        if not 0 <= index < n:
            raise InputError(f"variable index {index} out of range for {n} variables")
        return cls({Monomial.var(index): 1.0}, n)

    @classmethod
    def linear(cls, coeffs: Sequence[complex], constant: complex = 0, offset: int = 0,
               n: int | None = None) -> "Polynomial":
        """``sum_j coeffs[j] * x_{offset+j} + constant``."""
        n = offset + len(coeffs) if n is None else n
        terms = {Monomial.var(offset + j): c for j, c in enumerate(coeffs)}
        terms[Monomial()] = constant
        return cls(terms, n)

    # -- structure ----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.terms == other.terms

    __hash__ = None

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def lift(self, n: int, offset: int = 0) -> "Polynomial":
        """Re-embed into ``n`` variables, renaming x_j to x_{j+offset}."""
        if offset == 0:
            return Polynomial(self.terms, n)
        terms = {Monomial(tuple((v + offset, e) for v, e in m.exponents)): c
                 for m, c in self.terms.items()}
        return Polynomial(terms, n)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if self.ambient_dim != other.ambient_dim:
            raise InputError(f"ambient dimensions differ: {self.ambient_dim} vs {other.ambient_dim}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(other, self.ambient_dim)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out, self.ambient_dim)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()}, self.ambient_dim)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, a: complex) -> "Polynomial":
        return Polynomial({m: a * c for m, c in self.terms.items()}, self.ambient_dim)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, complex] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 * m2
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(out, self.ambient_dim)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise InputError("only nonnegative integer powers are supported")
        out = Polynomial.constant(1, self.ambient_dim)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus -----------------------------------------------------------

    def derivative(self, var: int) -> "Polynomial":
        out: dict[Monomial, complex] = {}
        for m, c in self.terms.items():
            k, dm = m.derivative(var)
            if k:
                out[dm] = out.get(dm, 0) + k * c
        return Polynomial(out, self.ambient_dim)

    def shift(self, u: Sequence[complex]) -> "Polynomial":
        """Directional derivative ``sum_j u_j d/dx_j``."""
        u = np.asarray(u, dtype=complex)
        if u.shape != (self.ambient_dim,):
            raise InputError(f"direction has length {u.size}, expected {self.ambient_dim}")
        out: dict[Monomial, complex] = {}
        for m, c in self.terms.items():
            for var, _ in m.exponents:
                if u[var] == 0:
                    continue
                k, dm = m.derivative(var)
                out[dm] = out.get(dm, 0) + k * c * u[var]
        return Polynomial(out, self.ambient_dim)

    # -- numerics -----------------------------------------------------------

    @cached_property
    def _compiled(self):
        n = self.ambient_dim
        coeffs = np.array(list(self.terms.values()), dtype=complex)
        exps = np.array([m.dense(n) for m in self.terms], dtype=np.int64).reshape(len(self.terms), n)
        return coeffs, exps

    def __call__(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.ambient_dim,):
            raise InputError(f"point has length {x.size}, expected {self.ambient_dim}")
        coeffs, exps = self._compiled
        if coeffs.size == 0:
            return 0j
        return complex(coeffs @ np.prod(np.power(x, exps), axis=1))

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)!r}, n={self.ambient_dim})"


class _StackedTerms:
    """All terms of a grid of polynomials, evaluated in one vectorised pass."""

    def __init__(self, polys: Iterable[tuple[int, Polynomial]], size: int, n: int):
        rows, coeffs, exps = [], [], []
        for slot, p in polys:
            c, e = p._compiled
            rows.append(np.full(c.size, slot, dtype=np.int64))
            coeffs.append(c)
            exps.append(e)
        self.size = size
        self.rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        self.coeffs = np.concatenate(coeffs) if coeffs else np.zeros(0, dtype=complex)
        self.exps = np.concatenate(exps) if exps else np.zeros((0, n), dtype=np.int64)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.size, dtype=complex)
        if self.coeffs.size:
            vals = self.coeffs * np.prod(np.power(x, self.exps), axis=1)
            np.add.at(out, self.rows, vals)
        return out


@dataclass(frozen=True, eq=False)
class PolySystem:
    """An ordered list of polynomials sharing one ambient dimension."""

    polys: tuple[Polynomial, ...]
    n_vars: int
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        for i, p in enumerate(self.polys):
            if p.ambient_dim != self.n_vars:
                raise InputError(f"polynomial {i} has ambient dimension {p.ambient_dim}, expected {self.n_vars}")

    @property
    def n_eqs(self) -> int:
        return len(self.polys)

    def degree(self) -> int:
        return max((p.degree() for p in self.polys), default=0)

    def __eq__(self, other):
        if not isinstance(other, PolySystem):
            return NotImplemented
        return self.n_vars == other.n_vars and self.polys == other.polys

    __hash__ = None

    def __len__(self):
        return len(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    @cached_property
    def partials(self) -> tuple[tuple[Polynomial, ...], ...]:
        return tuple(tuple(p.derivative(j) for j in range(self.n_vars)) for p in self.polys)

    @cached_property
    def _eval_terms(self):
        return _StackedTerms(enumerate(self.polys), self.n_eqs, self.n_vars)

    @cached_property
    def _jac_terms(self):
        n = self.n_vars
        grid = ((i * n + j, d) for i, row in enumerate(self.partials) for j, d in enumerate(row))
        return _StackedTerms(grid, self.n_eqs * n, n)

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.n_vars,):
            raise InputError(f"point has shape {x.shape}, expected ({self.n_vars},)")
        return x

    def __call__(self, x) -> np.ndarray:
        return self._eval_terms(self._point(x))

    def jacobian(self, x) -> np.ndarray:
        return self._jac_terms(self._point(x)).reshape(self.n_eqs, self.n_vars)

    def shift(self, u) -> "PolySystem":
        u = np.asarray(u, dtype=complex)
        if u.shape != (self.n_vars,):
            raise InputError(f"direction has shape {u.shape}, expected ({self.n_vars},)")
        return PolySystem(tuple(p.shift(u) for p in self.polys), self.n_vars)

    def lift(self, n: int, offset: int = 0) -> "PolySystem":
        return PolySystem(tuple(p.lift(n, offset) for p in self.polys), n)

    def __repr__(self):
        body = "; ".join(format_polynomial(p) for p in self.polys)
        return f"PolySystem([{body}], n_vars={self.n_vars})"


def eval_system(sys: PolySystem, x) -> np.ndarray:
    """Evaluate every polynomial of ``sys`` at ``x``."""
    return sys(x)


def jacobian(sys: PolySystem, x) -> np.ndarray:
    """Jacobian ``m x n`` from the symbolically differentiated terms."""
    return sys.jacobian(x)


def shift(sys: PolySystem, u) -> PolySystem:
    """The system ``x -> J(x) u``, built term by term."""
    return sys.shift(u)


def symbolic_deflate(sys: PolySystem, R, d) -> PolySystem:
    """One deflation step carried out symbolically.

    Returns the system in ``2n`` variables ``(x1, x2)``::

        [ F(x1) ; J(x1) x2 ; R x2 - d ]

    Iterating this is slow but exact in structure; it is the reference the
    structured path is checked against.
    """
    R = np.atleast_2d(np.asarray(R, dtype=complex))
    d = np.atleast_1d(np.asarray(d, dtype=complex))
    n = sys.n_vars
    if R.shape[1] != n:
        raise InputError(f"R has {R.shape[1]} columns, system has {n} variables")
    if R.shape[0] != d.shape[0]:
        raise InputError(f"R has {R.shape[0]} rows but d has length {d.shape[0]}")
    N = 2 * n
    top = [p.lift(N) for p in sys.polys]
    middle = []
    for row in sys.partials:
        acc: dict[Monomial, complex] = {}
        for j, dp in enumerate(row):
            y = Monomial.var(n + j)
            for m, c in dp.terms.items():
                key = m * y
                acc[key] = acc.get(key, 0) + c
        middle.append(Polynomial(acc, N))
    bottom = [Polynomial.linear(R[k], -d[k], offset=n, n=N) for k in range(R.shape[0])]
    return PolySystem(tuple(top + middle + bottom), N)


# -- text format ------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>x(?P<idx>\d+))"
    r"|(?P<imag>i)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str, line: int):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"line {line}, column {pos + 1}: unexpected character {text[pos:pos + 1]!r}")
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("var") is not None:
            idx = int(m.group("idx"))
            if idx < 1:
                raise ParseError(f"line {line}: variables are numbered from x1")
            out.append(("var", idx - 1))
        elif m.group("imag") is not None:
            out.append(("imag", None))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    return out


class _Parser:
    # expr   := ['+'|'-'] term (('+'|'-') term)*
    # term   := power (['*'] power)*
    # power  := atom ['^' integer]
    # atom   := number ['i'] | 'i' | x<k> | '(' expr ')'

    def __init__(self, tokens, n: int, line: int):
        self.toks, self.pos, self.n, self.line = tokens, 0, n, line

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, msg):
        raise ParseError(f"line {self.line}, token {self.pos + 1}: {msg}")

    def expr(self) -> Polynomial:
        sign = 1
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term().scale(sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def _starts_atom(self, tok):
        kind, val = tok
        return kind in ("num", "var", "imag") or tok == ("op", "(")

    def term(self) -> Polynomial:
        acc = self.power()
        while True:
            tok = self.peek()
            if tok == ("op", "*"):
                self.take()
                acc = acc * self.power()
            elif tok[0] is not None and self._starts_atom(tok):
                acc = acc * self.power()
            else:
                return acc

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or val != int(val):
                self.fail("exponent must be a nonnegative integer")
            base = base ** int(val)
        return base

    def atom(self) -> Polynomial:
        kind, val = self.take()
        if kind == "num":
            if self.peek()[0] == "imag":
                self.take()
                return Polynomial.constant(1j * val, self.n)
            return Polynomial.constant(val, self.n)
        if kind == "imag":
            return Polynomial.constant(1j, self.n)
        if kind == "var":
            if val >= self.n:
                self.fail(f"x{val + 1} exceeds the declared {self.n} variables")
            return Polynomial.variable(val, self.n)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                self.fail("missing ')'")
            return inner
        self.fail(f"unexpected token {val!r}" if kind else "unexpected end of input")


def parse_polynomial(text: str, n_vars: int, line: int = 1) -> Polynomial:
    toks = _tokenize(text, line)
    if not toks:
        raise ParseError(f"line {line}: empty polynomial")
    parser = _Parser(toks, n_vars, line)
    poly = parser.expr()
    if parser.pos != len(toks):
        parser.fail(f"trailing input {toks[parser.pos][1]!r}")
    return poly


def parse_system(text: str, n_vars: int | None = None) -> PolySystem:
    """Parse one polynomial per line.  ``#`` starts a comment; blank lines are skipped.

    Without ``n_vars`` the ambient dimension is the largest variable index used.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body))
    if not lines:
        raise ParseError("no polynomials found")
    if n_vars is None:
        used = [tok[1] for ln, body in lines for tok in _tokenize(body, ln) if tok[0] == "var"]
        n_vars = max(used, default=-1) + 1
        if n_vars == 0:
            n_vars = 1
    return PolySystem(tuple(parse_polynomial(body, n_vars, ln) for ln, body in lines), n_vars)


def _format_coef(c: complex) -> str:
    def real(v):
        return repr(int(v)) if float(v).is_integer() and abs(v) < 2**53 else repr(float(v))

    if c.imag == 0:
        return real(c.real)
    if c.real == 0:
        return f"{real(c.imag)}i"
    return f"({real(c.real)}{'+' if c.imag >= 0 else '-'}{real(abs(c.imag))}i)"


def format_polynomial(p: Polynomial) -> str:
    """Render in the text grammar accepted by :func:`parse_polynomial`."""
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in p.terms.items():
        vars_ = "*".join(f"x{v + 1}" + (f"^{e}" if e > 1 else "") for v, e in mono.exponents)
        if not vars_:
            parts.append(_format_coef(c))
        elif c == 1:
            parts.append(vars_)
        elif c == -1:
            parts.append(f"-{vars_}")
        else:
            parts.append(f"{_format_coef(c)}*{vars_}")
    out = parts[0]
    for s in parts[1:]:
        out += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
    return out
