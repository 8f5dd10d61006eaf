"""Deflation sequences via recursively assembled block Jacobians.

One deflation step turns a system ``F`` in ``N`` unknowns into::

    F'(X, Y) = [ F(X) ; J(X) Y ; R Y - d ]

whose Jacobian is assembled from the child's derivative actions::

    J'(X, Y) = [ J(X)        0    ]
               [ djvp(X, Y)  J(X) ]
               [ 0           R    ]

Stacking steps only ever needs ``jac``, ``djvp``, ``t3`` and ``t4`` of the
child, and ``t4`` vanishes when the base system has degree <= 3.  Degree is
preserved by deflation, so the recursion closes on cubic systems like the
Brent equations.  Higher-degree polynomial systems are deflated symbolically
instead.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateInputError,
    DeflationError,
    InputError,
    NotASolutionError,
    NumericalError,
    UnsupportedDegreeError,
)
from .polysys import PolySystem, symbolic_deflate
from .systems import DeflatableSystem, SymbolicSystem

log = logging.getLogger(__name__)

__all__ = [
    "DeflationConfig",
    "RankResult",
    "DeflatedSystem",
    "DeflationStep",
    "DeflationReport",
    "numerical_rank",
    "draw_border",
    "solve_bordered",
    "deflate_once",
    "jac_of_deflated",
    "djvp_of_deflated",
    "t3_of_deflated",
    "deflation_sequence",
    "first_columns_nullity_check",
    "projected_columns_nullity",
    "as_deflatable",
]


@dataclass(frozen=True)
class DeflationConfig:
    max_steps: int = 3
    rng_seed: int = 0
    rank_rel_tol: float = 1e-12
    rank_abs_tol: float = 1e-12
    bordered_residual_tol: float = 1e-8
    max_border_retries: int = 3
    solution_tol: float = 1e-6
    borderline_gap: float = 1e3
    early_stop: bool = False
    check_first_columns: bool = False

    def __post_init__(self):
        if self.max_steps < 0:
            raise InputError("max_steps must be >= 0")
        for name in ("rank_rel_tol", "bordered_residual_tol", "solution_tol", "borderline_gap"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if not self.rank_abs_tol >= 0:
            raise InputError("rank_abs_tol must be nonnegative")
        if self.max_border_retries < 0:
            raise InputError("max_border_retries must be >= 0")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise InputError("rng_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: np.ndarray
    gap_ratio: float
    tolerance_used: float
    shape: tuple[int, int]

    @property
    def nullity(self) -> int:
        return self.shape[1] - self.rank

    def borderline(self, threshold: float = 1e3) -> bool:
        return self.gap_ratio < threshold


def numerical_rank(A, cfg: DeflationConfig | None = None, rel_tol: float | None = None,
                   abs_tol: float | None = None) -> RankResult:
    """Rank as the count of singular values above ``max(rel_tol * s_max * max(shape), abs_tol)``.

    The absolute floor keeps a Jacobian that is zero up to roundoff from
    being read as having full rank relative to its own tiny scale.
    """
    cfg = cfg or DeflationConfig()
    rel_tol = cfg.rank_rel_tol if rel_tol is None else rel_tol
    abs_tol = cfg.rank_abs_tol if abs_tol is None else abs_tol
    A = np.asarray(A)
    if A.ndim != 2 or A.size == 0:
        if A.ndim == 2 and A.shape[1] > 0:
            return RankResult(0, np.zeros(0), math.inf, 0.0, A.shape)
        raise InputError(f"numerical_rank needs a nonempty matrix, got shape {A.shape}")
    try:
        s = scipy.linalg.svd(A, compute_uv=False, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"SVD failed on a {A.shape[0]}x{A.shape[1]} matrix: {exc}") from exc
    smax = s[0] if s.size else 0.0
    tol = max(rel_tol * smax * max(A.shape), abs_tol)
    rank = int(np.count_nonzero(s > tol)) if smax > 0 else 0
    if rank == 0 or rank == s.size or s[rank] == 0:
        gap = math.inf
    else:
        gap = float(s[rank - 1] / s[rank])
    return RankResult(rank, s, gap, float(tol), A.shape)


def draw_border(rng: np.random.Generator, rows: int, cols: int, J, cfg: DeflationConfig | None = None):
    """Draw complex Gaussian ``R`` (rows x cols) and ``d`` such that ``[J; R]`` has full column rank.

    Returns ``(R, d, attempts)``.
    """
    cfg = cfg or DeflationConfig()
    J = np.asarray(J, dtype=complex).reshape(-1, cols)
    for attempt in range(1, cfg.max_border_retries + 2):
        R = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        d = rng.standard_normal(rows) + 1j * rng.standard_normal(rows)
        stacked = np.vstack([J, R])
        if stacked.shape[0] >= cols and numerical_rank(stacked, cfg).rank == cols:
            return R, d, attempt
        log.debug("border attempt %d rank deficient", attempt)
    raise DegenerateInputError(
        f"[J; R] stayed rank deficient after {cfg.max_border_retries + 1} draws "
        f"(J is {J.shape[0]}x{cols}, {rows} border rows); the nullity estimate is probably wrong"
    )


def solve_bordered(J, R, d, tol: float = 1e-8):
    """Least-squares solution of ``[J; R] x = [0; d]`` via QR.

    Returns ``(x, residual)``; raises :class:`NumericalError` when the residual
    exceeds ``tol * (1 + ||d||)``.
    """
    R = np.atleast_2d(np.asarray(R, dtype=complex))
    d = np.asarray(d, dtype=complex).reshape(-1)
    cols = R.shape[1]
    J = np.asarray(J, dtype=complex).reshape(-1, cols)
    A = np.vstack([J, R])
    rhs = np.concatenate([np.zeros(J.shape[0], dtype=complex), d])
    Q, T = np.linalg.qr(A, mode="reduced")
    if A.shape[0] < cols:
        raise NumericalError(f"bordered matrix {A.shape} cannot have full column rank")
    try:
        x = scipy.linalg.solve_triangular(T, Q.conj().T @ rhs, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"bordered solve failed: {exc}") from exc
    res = float(np.linalg.norm(A @ x - rhs))
    if not np.isfinite(res) or res > tol * (1 + np.linalg.norm(d)):
        raise NumericalError(f"bordered solve residual {res:.3e} exceeds tolerance")
    return x, res


class DeflatedSystem(DeflatableSystem):
    """``[F(X); J(X) Y; R Y - d]`` built on top of any :class:`DeflatableSystem`."""

    def __init__(self, child: DeflatableSystem, R, d, level: int | None = None):
        R = np.atleast_2d(np.asarray(R, dtype=complex))
        d = np.asarray(d, dtype=complex).reshape(-1)
        if R.shape[1] != child.n_vars:
            raise InputError(f"R has {R.shape[1]} columns, child has {child.n_vars} unknowns")
        if R.shape[0] != d.size:
            raise InputError(f"R has {R.shape[0]} rows, d has {d.size} entries")
        self.child, self.R, self.d = child, R, d
        self.level = level if level is not None else getattr(child, "level", 0) + 1
        self.n_vars = 2 * child.n_vars
        self.n_eqs = 2 * child.n_eqs + R.shape[0]
        self.degree_bound = child.degree_bound
        self.base_vars = getattr(child, "base_vars", child.n_vars)

    def _halves(self, z, name="point"):
        z = self._vec(z, name)
        k = self.child.n_vars
        return z[:k], z[k:]

    def eval(self, z):
        X, Y = self._halves(z)
        c = self.child
        return np.concatenate([c.eval(X), c.jac(X) @ Y, self.R @ Y - self.d])

    def jac(self, z):
        X, Y = self._halves(z)
        c = self.child
        Jc = c.jac(X)
        M, N = Jc.shape
        out = np.zeros((self.n_eqs, self.n_vars), dtype=complex)
        out[:M, :N] = Jc
        out[M:2 * M, :N] = c.djvp(X, Y)
        out[M:2 * M, N:] = Jc
        out[2 * M:, N:] = self.R
        return out

    def djvp(self, z, w):
        X, Y = self._halves(z)
        U, V = self._halves(w, "direction")
        c = self.child
        M, N = c.n_eqs, c.n_vars
        dU = c.djvp(X, U)
        out = np.zeros((self.n_eqs, self.n_vars), dtype=complex)
        out[:M, :N] = dU
        out[M:2 * M, :N] = c.t3(X, Y, U) + c.djvp(X, V)
        out[M:2 * M, N:] = dU
        return out

    def t3(self, z, w, q):
        if self.degree_bound > 3:
            raise UnsupportedDegreeError(
                f"structured t3 needs a base of degree <= 3 (got {self.degree_bound}); "
                "deflate symbolically instead"
            )
        X, Y = self._halves(z)
        U, V = self._halves(w, "direction")
        P, Q = self._halves(q, "direction")
        c = self.child
        M, N = c.n_eqs, c.n_vars
        tUP = c.t3(X, U, P)
        out = np.zeros((self.n_eqs, self.n_vars), dtype=complex)
        out[:M, :N] = tUP
        out[M:2 * M, :N] = c.t4(X, Y, U, P) + c.t3(X, V, P) + c.t3(X, U, Q)
        out[M:2 * M, N:] = tUP
        return out

    def __repr__(self):
        return f"DeflatedSystem(level={self.level}, n_vars={self.n_vars}, n_eqs={self.n_eqs})"


def jac_of_deflated(ds: DeflatedSystem, point) -> np.ndarray:
    return ds.jac(point)


def djvp_of_deflated(ds: DeflatedSystem, point, direction) -> np.ndarray:
    return ds.djvp(point, direction)


def t3_of_deflated(ds: DeflatedSystem, point, dir1, dir2) -> np.ndarray:
    return ds.t3(point, dir1, dir2)


def as_deflatable(sys) -> DeflatableSystem:
    if isinstance(sys, DeflatableSystem):
        return sys
    if isinstance(sys, PolySystem):
        return SymbolicSystem(sys)
    raise InputError(f"cannot deflate object of type {type(sys).__name__}")


def _wrap(sys: DeflatableSystem, R, d) -> DeflatableSystem:
    # symbolic systems above degree 3 stay symbolic: the structured t3 would need t5 and up
    if isinstance(sys, SymbolicSystem) and sys.degree_bound > 3:
        out = SymbolicSystem(symbolic_deflate(sys.poly, R, d))
        out.level = getattr(sys, "level", 0) + 1
        out.base_vars = getattr(sys, "base_vars", sys.n_vars)
        return out
    return DeflatedSystem(sys, R, d)


@dataclass
class DeflationStep:
    """Outcome of one step.  Unpacks as ``(system, point, nullity)``."""

    system: DeflatableSystem
    point: np.ndarray
    nullity: int
    rank: RankResult
    parent_rank: RankResult
    bordered_residual: float
    border_attempts: int
    jacobian: np.ndarray = field(repr=False)

    def __iter__(self) -> Iterator:
        return iter((self.system, self.point, self.nullity))


def deflate_once(sys, x, cfg: DeflationConfig | None = None, rng: np.random.Generator | None = None,
                 *, parent_jac=None, parent_rank: RankResult | None = None) -> DeflationStep:
    """Deflate ``sys`` once at ``x``; returns the new system, the doubled point and its nullity."""
    cfg = cfg or DeflationConfig()
    sys = as_deflatable(sys)
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    x = sys._vec(x)
    res = sys.residual(x)
    if not res <= cfg.solution_tol:
        raise NotASolutionError(f"residual {res:.3e} exceeds {cfg.solution_tol:.1e}", residual=res)
    J = sys.jac(x) if parent_jac is None else parent_jac
    pr = parent_rank or numerical_rank(J, cfg)
    if pr.nullity == 0:
        # nothing to border; the step adds no equations and the nullity stays 0
        R = np.zeros((0, sys.n_vars), dtype=complex)
        d = np.zeros(0, dtype=complex)
        Y, bres, attempts = np.zeros(sys.n_vars, dtype=complex), 0.0, 0
    else:
        last_exc = None
        for _ in range(cfg.max_border_retries + 1):
            R, d, attempts = draw_border(rng, pr.nullity, sys.n_vars, J, cfg)
            try:
                Y, bres = solve_bordered(J, R, d, cfg.bordered_residual_tol)
                break
            except NumericalError as exc:
                last_exc = exc
        else:
            raise last_exc
    ds = _wrap(sys, R, d)
    z = np.concatenate([x, Y])
    Jn = ds.jac(z)
    rr = numerical_rank(Jn, cfg)
    return DeflationStep(ds, z, rr.nullity, rr, pr, bres, attempts, Jn)


def first_columns_nullity_check(ds: DeflatableSystem, point, cfg: DeflationConfig | None = None,
                                base_vars: int | None = None, jac=None) -> bool:
    """Compare ``n - rank(first n columns of J_i)`` with the full nullity of ``J_i``."""
    cfg = cfg or DeflationConfig()
    n = base_vars or getattr(ds, "base_vars", ds.n_vars)
    J = ds.jac(point) if jac is None else jac
    full = numerical_rank(J, cfg).nullity
    sub = n - numerical_rank(J[:, :n], cfg).rank
    return full == sub


def projected_columns_nullity(J, split: int, cfg: DeflationConfig | None = None) -> int:
    """Nullity of ``J`` computed from its leading ``split`` columns.

    When the trailing columns ``J[:, split:]`` have full column rank, the
    nullity of ``J`` equals ``split - rank(P J[:, :split])`` where ``P``
    projects onto the orthogonal complement of the trailing columns' range.
    For a level-i deflated Jacobian the trailing half ``[0; J_{i-1}; R_i]``
    has full column rank by the choice of border, so ``split = N_i / 2``.
    """
    cfg = cfg or DeflationConfig()
    J = np.asarray(J)
    lead, trail = J[:, :split], J[:, split:]
    if trail.shape[1] == 0:
        return split - numerical_rank(lead, cfg).rank
    Q, _ = np.linalg.qr(trail, mode="reduced")
    projected = lead - Q @ (Q.conj().T @ lead)
    return split - numerical_rank(projected, cfg, rel_tol=cfg.rank_rel_tol).rank


@dataclass
class DeflationReport:
    sequence: list[int] = field(default_factory=list)
    ranks: list[int] = field(default_factory=list)
    spectra: list[np.ndarray] = field(default_factory=list, repr=False)
    gap_ratios: list[float] = field(default_factory=list)
    borderline: list[bool] = field(default_factory=list)
    tolerances: list[float] = field(default_factory=list)
    bordered_residuals: list[float] = field(default_factory=list)
    shapes: list[tuple[int, int]] = field(default_factory=list)
    border_attempts: list[int] = field(default_factory=list)
    wall_times: list[float] = field(default_factory=list)
    first_columns_ok: list[bool] = field(default_factory=list)
    seed: int = 0
    point_residual: float = 0.0
    n_base: int = 0
    complete: bool = False
    stopped_early: bool = False
    error: str | None = None

    @property
    def steps(self) -> int:
        return max(len(self.sequence) - 1, 0)

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.sequence, self.sequence[1:]))

    def violations(self) -> list[int]:
        """Levels ``i`` with ``n_{i+1} > n_i``."""
        return [i for i, (a, b) in enumerate(zip(self.sequence, self.sequence[1:])) if b > a]

    def bookkeeping_ok(self) -> bool:
        if not self.shapes:
            return True
        ok = all(N == 2 ** i * self.n_base for i, (_, N) in enumerate(self.shapes))
        for i in range(len(self.shapes) - 1):
            ok &= self.shapes[i + 1][0] == 2 * self.shapes[i][0] + self.sequence[i]
        return ok

    @property
    def any_borderline(self) -> bool:
        return any(self.borderline)


def deflation_sequence(sys, x, cfg: DeflationConfig | None = None,
                       progress: Callable[[int, RankResult], None] | None = None) -> DeflationReport:
    """Run up to ``cfg.max_steps`` deflation steps and record the nullities ``(n_0, ..., n_s)``.

    Not-a-solution and input errors raise.  Failures at a later level return
    the partial report with ``complete=False`` and the message in ``error``.
    """
    cfg = cfg or DeflationConfig()
    sys = as_deflatable(sys)
    x = sys._vec(x)
    rng = np.random.default_rng(cfg.rng_seed)
    report = DeflationReport(seed=int(cfg.rng_seed), n_base=sys.n_vars)
    report.point_residual = sys.residual(x)
    if not report.point_residual <= cfg.solution_tol:
        raise NotASolutionError(
            f"residual {report.point_residual:.3e} exceeds {cfg.solution_tol:.1e}",
            residual=report.point_residual,
        )

    def record(rr: RankResult, seconds: float, J, system, point):
        report.sequence.append(rr.nullity)
        report.ranks.append(rr.rank)
        report.spectra.append(rr.singular_values)
        report.gap_ratios.append(rr.gap_ratio)
        report.borderline.append(rr.borderline(cfg.borderline_gap))
        report.tolerances.append(rr.tolerance_used)
        report.shapes.append(tuple(J.shape))
        report.wall_times.append(seconds)
        if cfg.check_first_columns:
            report.first_columns_ok.append(
                first_columns_nullity_check(system, point, cfg, base_vars=report.n_base, jac=J))
        if progress:
            progress(len(report.sequence) - 1, rr)

    t0 = time.perf_counter()
    J = sys.jac(x)
    rr = numerical_rank(J, cfg)
    record(rr, time.perf_counter() - t0, J, sys, x)
    current, point = sys, x
    try:
        for _ in range(cfg.max_steps):
            t0 = time.perf_counter()
            step = deflate_once(current, point, cfg, rng, parent_jac=J, parent_rank=rr)
            report.bordered_residuals.append(step.bordered_residual)
            report.border_attempts.append(step.border_attempts)
            current, point, J, rr = step.system, step.point, step.jacobian, step.rank
            record(rr, time.perf_counter() - t0, J, current, point)
            seq = report.sequence
            if cfg.early_stop and len(seq) >= 3 and seq[-1] == seq[-2] == seq[-3]:
                report.stopped_early = True
                break
        report.complete = True
    except (NotASolutionError, InputError):
        raise
    except (DeflationError, np.linalg.LinAlgError, MemoryError) as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        log.warning("deflation stopped at level %d: %s", len(report.sequence), exc)
    if report.violations():
        log.warning("nullity increased at levels %s (gap ratios %s)", report.violations(), report.gap_ratios)
    return report
