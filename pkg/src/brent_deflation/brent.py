"""Brent equations B(m,n,p|r) for rank-r decompositions of the matrix multiplication tensor.

Unknowns are ``r`` triples ``(alpha_t, beta_t, gamma_t)`` of shapes
``m x n``, ``n x p``, ``p x m``.  Equation ``(i1,i2,j1,j2,k1,k2)`` reads::

    sum_t alpha_t[i1,i2] beta_t[j1,j2] gamma_t[k1,k2] = [i2==j1][j2==k1][k2==i1]

Flattening order of a point: all alpha entries, then all beta, then all gamma;
inside each block the term index is outermost and matrix entries are
row-major.  Equations are ordered row-major over ``(i1,i2,j1,j2,k1,k2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import InputError
from .polysys import Monomial, Polynomial, PolySystem
from .systems import DeflatableSystem

__all__ = [
    "BrentShape",
    "BilinearScheme",
    "MMTensor",
    "BrentSystem",
    "mm_tensor",
    "brent_system",
    "brent_polysystem",
    "residual",
    "natural_algorithm",
    "strassen_scheme",
    "orbit_lower_bound",
    "underdetermined_bound",
    "scheme_tensor",
]


@dataclass(frozen=True)
class BrentShape:
    m: int
    n: int
    p: int
    r: int

    def __post_init__(self):
        for name in ("m", "n", "p", "r"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise InputError(f"{name} must be a positive integer, got {v!r}")

    @property
    def n_vars(self) -> int:
        return (self.m * self.n + self.n * self.p + self.p * self.m) * self.r

    @property
    def n_eqs(self) -> int:
        return (self.m * self.n * self.p) ** 2

    @property
    def factor_shapes(self) -> dict[str, tuple[int, int, int]]:
        m, n, p, r = self.m, self.n, self.p, self.r
        return {"alpha": (r, m, n), "beta": (r, n, p), "gamma": (r, p, m)}

    @classmethod
    def parse(cls, text: str) -> "BrentShape":
        """Parse ``MxNxP:R`` (e.g. ``2x2x2:7``)."""
        try:
            dims, r = text.strip().split(":")
            m, n, p = (int(s) for s in dims.lower().split("x"))
            return cls(m, n, p, int(r))
        except (ValueError, TypeError) as exc:
            raise InputError(f"malformed shape {text!r}; expected MxNxP:R such as 2x2x2:7") from exc

    def __str__(self):
        return f"{self.m}x{self.n}x{self.p}:{self.r}"


@dataclass(frozen=True, eq=False)
class BilinearScheme:
    shape: BrentShape
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        for name, expected in self.shape.factor_shapes.items():
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != expected:
                raise InputError(f"{name} has shape {arr.shape}, expected {expected} for {self.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.alpha.ravel(), self.beta.ravel(), self.gamma.ravel()])

    @classmethod
    def from_vector(cls, shape: BrentShape, x) -> "BilinearScheme":
        x = np.asarray(x, dtype=complex)
        if x.shape != (shape.n_vars,):
            raise InputError(f"vector has shape {x.shape}, expected ({shape.n_vars},)")
        return cls(shape, *_split(shape, x))

    def __eq__(self, other):
        if not isinstance(other, BilinearScheme):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.flatten(), other.flatten())

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MMTensor:
    m: int
    n: int
    p: int
    entries: np.ndarray  # (mn) x (np) x (pm), 0/1

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.entries))


def _split(shape: BrentShape, x: np.ndarray):
    m, n, p, r = shape.m, shape.n, shape.p, shape.r
    a = r * m * n
    b = a + r * n * p
    return (x[:a].reshape(r, m, n), x[a:b].reshape(r, n, p), x[b:].reshape(r, p, m))


def mm_tensor(m: int, n: int, p: int) -> MMTensor:
    """``<m,n,p> = sum_{i,j,k} e_ij (x) e_jk (x) e_ki`` as a dense 0/1 array."""
    BrentShape(m, n, p, 1)
    T = np.zeros((m, n, n, p, p, m))
    for i, j, k in product(range(m), range(n), range(p)):
        T[i, j, j, k, k, i] = 1.0
    return MMTensor(m, n, p, T.reshape(m * n, n * p, p * m))


def scheme_tensor(scheme: BilinearScheme) -> np.ndarray:
    """Contract a scheme's rank-one terms into an ``(mn) x (np) x (pm)`` array."""
    s = scheme.shape
    T = np.einsum("tab,tcd,tef->abcdef", scheme.alpha, scheme.beta, scheme.gamma)
    return T.reshape(s.m * s.n, s.n * s.p, s.p * s.m)


class BrentSystem(DeflatableSystem):
    """Closed-form evaluation of B(m,n,p|r) and its derivative actions.

    The system is trilinear, so ``t3`` is constant in ``x`` and ``t4`` vanishes.
    """

    degree_bound = 3

    def __init__(self, shape: BrentShape):
        self.shape = shape
        self.n_vars = shape.n_vars
        self.n_eqs = shape.n_eqs
        s = shape
        self._rhs = mm_tensor(s.m, s.n, s.p).entries.reshape(s.m, s.n, s.n, s.p, s.p, s.m)

    def split(self, x):
        return _split(self.shape, self._vec(x))

    def eval(self, x):
        A, B, C = self.split(x)
        F = np.einsum("tab,tcd,tef->abcdef", A, B, C) - self._rhs
        return F.reshape(-1)

    def _assemble(self, Wa, Wb, Wc) -> np.ndarray:
        """Jacobian of a form linear in each block, given the coefficient of each variable.

        ``Wa[t,c,d,e,f]`` multiplies ``alpha[t,a,b]`` in equation ``(a,b,c,d,e,f)``;
        ``Wb[t,a,b,e,f]`` multiplies ``beta[t,c,d]``; ``Wc[t,a,b,c,d]`` multiplies
        ``gamma[t,e,f]``.
        """
        m, n, p, r = self.shape.m, self.shape.n, self.shape.p, self.shape.r
        Ja = np.zeros((m, n, n, p, p, m, r, m, n), dtype=complex)
        Jb = np.zeros((m, n, n, p, p, m, r, n, p), dtype=complex)
        Jc = np.zeros((m, n, n, p, p, m, r, p, m), dtype=complex)
        Wa = np.moveaxis(Wa, 0, -1)
        Wb = np.moveaxis(Wb, 0, -1)
        Wc = np.moveaxis(Wc, 0, -1)
        for a, b in product(range(m), range(n)):
            Ja[a, b, :, :, :, :, :, a, b] = Wa
        for c, d in product(range(n), range(p)):
            Jb[:, :, c, d, :, :, :, c, d] = Wb
        for e, f in product(range(p), range(m)):
            Jc[:, :, :, :, e, f, :, e, f] = Wc
        M = self.n_eqs
        return np.hstack([Ja.reshape(M, -1), Jb.reshape(M, -1), Jc.reshape(M, -1)])

    def jac(self, x):
        A, B, C = self.split(x)
        return self._assemble(
            np.einsum("tcd,tef->tcdef", B, C),
            np.einsum("tab,tef->tabef", A, C),
            np.einsum("tab,tcd->tabcd", A, B),
        )

    def djvp(self, x, y):
        A, B, C = self.split(x)
        yA, yB, yC = self.split(y)
        pair = lambda P, Q, R, S: np.einsum("tij,tkl->tijkl", P, Q) + np.einsum("tij,tkl->tijkl", R, S)
        return self._assemble(pair(yB, C, B, yC), pair(yA, C, A, yC), pair(yA, B, A, yB))

    def t3(self, x, y, u):
        self._vec(x)
        yA, yB, yC = self.split(y)
        uA, uB, uC = self.split(u)
        pair = lambda P, Q, R, S: np.einsum("tij,tkl->tijkl", P, Q) + np.einsum("tij,tkl->tijkl", R, S)
        return self._assemble(pair(yB, uC, uB, yC), pair(yA, uC, uA, yC), pair(yA, uB, uA, yB))

    def __repr__(self):
        return f"BrentSystem({self.shape})"


def brent_system(shape: BrentShape) -> BrentSystem:
    return BrentSystem(shape)


def brent_polysystem(shape: BrentShape) -> PolySystem:
    """The same equations expanded into a :class:`PolySystem` (slow; small shapes only)."""
    m, n, p, r = shape.m, shape.n, shape.p, shape.r
    N = shape.n_vars
    idx = np.arange(N)
    ia, ib, ic = _split(shape, idx)
    polys = []
    for i1, i2, j1, j2, k1, k2 in product(range(m), range(n), range(n), range(p), range(p), range(m)):
        terms = {}
        for t in range(r):
            mono = Monomial.from_map({int(ia[t, i1, i2]): 1, int(ib[t, j1, j2]): 1, int(ic[t, k1, k2]): 1})
            terms[mono] = terms.get(mono, 0) + 1.0
        rhs = float(i2 == j1 and j2 == k1 and k2 == i1)
        terms[Monomial()] = -rhs
        polys.append(Polynomial(terms, N))
    return PolySystem(tuple(polys), N)


def residual(scheme: BilinearScheme) -> float:
    """``||F(x)||_inf`` of the Brent system at the scheme."""
    F = BrentSystem(scheme.shape).eval(scheme.flatten())
    return float(np.max(np.abs(F)))


def natural_algorithm(m: int, n: int, p: int) -> BilinearScheme:
    """The ``mnp``-term scheme read off the tensor's definition, terms ordered i -> j -> k."""
    shape = BrentShape(m, n, p, m * n * p)
    A = np.zeros(shape.factor_shapes["alpha"])
    B = np.zeros(shape.factor_shapes["beta"])
    C = np.zeros(shape.factor_shapes["gamma"])
    for t, (i, j, k) in enumerate(product(range(m), range(n), range(p))):
        A[t, i, j] = B[t, j, k] = C[t, k, i] = 1.0
    return BilinearScheme(shape, A, B, C)


# Strassen (1969), products M1..M7 and the combination into C = A B:
#   M1 = (A11 + A22)(B11 + B22)   M5 = (A11 + A12) B22
#   M2 = (A21 + A22) B11          M6 = (A21 - A11)(B11 + B12)
#   M3 = A11 (B12 - B22)          M7 = (A12 - A22)(B21 + B22)
#   M4 = A22 (B21 - B11)
#   C11 = M1 + M4 - M5 + M7   C12 = M3 + M5   C21 = M2 + M4   C22 = M1 - M2 + M3 + M6
# gamma_t[k, i] is the coefficient of M_t in C[i, k].
_STRASSEN_A = [
    [[1, 0], [0, 1]], [[0, 0], [1, 1]], [[1, 0], [0, 0]], [[0, 0], [0, 1]],
    [[1, 1], [0, 0]], [[-1, 0], [1, 0]], [[0, 1], [0, -1]],
]
_STRASSEN_B = [
    [[1, 0], [0, 1]], [[1, 0], [0, 0]], [[0, 1], [0, -1]], [[-1, 0], [1, 0]],
    [[0, 0], [0, 1]], [[1, 1], [0, 0]], [[0, 0], [1, 1]],
]
_STRASSEN_C = [  # as C[i, k]
    [[1, 0], [0, 1]], [[0, 0], [1, -1]], [[0, 1], [0, 1]], [[1, 0], [1, 0]],
    [[-1, 1], [0, 0]], [[0, 0], [0, 1]], [[1, 0], [0, 0]],
]


def strassen_scheme() -> BilinearScheme:
    A = np.array(_STRASSEN_A, dtype=complex)
    B = np.array(_STRASSEN_B, dtype=complex)
    C = np.array(_STRASSEN_C, dtype=complex).transpose(0, 2, 1)
    return BilinearScheme(BrentShape(2, 2, 2, 7), A, B, C)


def orbit_lower_bound(shape: BrentShape) -> int:
    """``m^2 + n^2 + p^2 + 2r - 3``: orbit dimension of the symmetry group.

    A lower bound on the local dimension only when the stabilizer of the point
    is finite; that is not checked.
    """
    return shape.m ** 2 + shape.n ** 2 + shape.p ** 2 + 2 * shape.r - 3


def underdetermined_bound(shape: BrentShape) -> int:
    return max(shape.n_vars - shape.n_eqs, 0)
