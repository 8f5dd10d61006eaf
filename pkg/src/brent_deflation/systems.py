"""The common interface consumed by the deflation engine.

Every implementation exposes the value, the Jacobian and the Jacobians of
the first few directional derivatives::

    jac(x)          J(x)
    djvp(x, y)      d/dx [J(x) y]             = J(grad_y F, x)
    t3(x, y, u)     d/dx [grad_y grad_u F]    = J(grad_y grad_u F, x)
    t4(x, y, u, v)  d/dx [grad_y grad_u grad_v F]

Each of these is an ``n_eqs x n_vars`` matrix.  Directional derivatives
commute, so ``djvp(x, y) @ u == djvp(x, u) @ y`` and similarly for ``t3``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import InputError, UnsupportedDegreeError
from .polysys import PolySystem


class DeflatableSystem(ABC):
    n_vars: int
    n_eqs: int
    degree_bound: float

    @abstractmethod
    def eval(self, x) -> np.ndarray: ...

    @abstractmethod
    def jac(self, x) -> np.ndarray: ...

    @abstractmethod
    def djvp(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def t3(self, x, y, u) -> np.ndarray: ...

    def t4(self, x, y, u, v) -> np.ndarray:
        if self.degree_bound <= 3:
            return np.zeros((self.n_eqs, self.n_vars), dtype=complex)
        raise UnsupportedDegreeError(
            f"fourth derivative action not available for degree {self.degree_bound}; "
            "use the symbolic path"
        )

    def _vec(self, v, name="point") -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.n_vars,):
            raise InputError(f"{name} has shape {v.shape}, expected ({self.n_vars},)")
        return v

    def residual(self, x) -> float:
        """Infinity norm of ``eval(x)``."""
        f = self.eval(x)
        return float(np.max(np.abs(f))) if f.size else 0.0


class SymbolicSystem(DeflatableSystem):
    """Adapter exposing a :class:`PolySystem` through the derivative-action interface.

    Higher actions are obtained by symbolic directional shifts, so they are
    available at every degree (at the cost of speed).
    """

    def __init__(self, poly: PolySystem):
        self.poly = poly
        self.n_vars = poly.n_vars
        self.n_eqs = poly.n_eqs
        self.degree_bound = poly.degree()

    def eval(self, x):
        return self.poly(self._vec(x))

    def jac(self, x):
        return self.poly.jacobian(self._vec(x))

    def djvp(self, x, y):
        if self.degree_bound <= 1:
            return np.zeros((self.n_eqs, self.n_vars), dtype=complex)
        return self.poly.shift(self._vec(y, "direction")).jacobian(self._vec(x))

    def t3(self, x, y, u):
        if self.degree_bound <= 2:
            return np.zeros((self.n_eqs, self.n_vars), dtype=complex)
        shifted = self.poly.shift(self._vec(y, "direction")).shift(self._vec(u, "direction"))
        return shifted.jacobian(self._vec(x))

    def t4(self, x, y, u, v):
        if self.degree_bound <= 3:
            return np.zeros((self.n_eqs, self.n_vars), dtype=complex)
        shifted = self.poly
        for w in (y, u, v):
            shifted = shifted.shift(self._vec(w, "direction"))
        return shifted.jacobian(self._vec(x))

    def __repr__(self):
        return f"SymbolicSystem(n_vars={self.n_vars}, n_eqs={self.n_eqs}, degree={self.degree_bound})"

