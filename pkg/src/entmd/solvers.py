"""Iterative multiplicative-update solvers behind one uniform interface.

Schemes
-------
* ``md_polyak``        exponential update x * exp(-a g) with the adaptive
                       stepsize a = min(f / ||g||^2_x, 1.79 / ||g||_inf)
* ``hd_plus_polyak``   polynomial update x * (1 - a g + a^2 g^2), same stepsize,
                       same convergence guarantees, no exponentiation
* ``hd_polyak``        squared update x * (1 - a g)^2 (heuristic, may diverge)
* ``eg_pm``            positive/negative split u - v for general (signed)
                       systems, exponential updates with opposite signs
* ``md_constant``      exponential update with a fixed stepsize
* ``md_backtracking``  exponential update, stepsize halved until the local
                       curvature test a * D_f < D_h accepts

Every solve records a per-iteration trace (objective, stepsize, l1 norm and
optionally the Bregman divergence to a reference point) and reports one of
three terminal statuses.  When a reference solution is supplied, the Polyak
schemes verify the per-iteration divergence descent inequality and flag any
numerical violation as a breakdown instead of silently continuing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bregman import EXP_QUAD_BOUND, _dh_core, bregman_divergence, weighted_norm_sq
from .errors import (
    BreakdownError,
    ConvergenceError,
    DimensionMismatch,
    DomainError,
    InfiniteDivergence,
)
from .linalg import as_matrix, as_vector

__all__ = [
    "Status",
    "Method",
    "ProblemInstance",
    "SolveConfig",
    "TraceRecord",
    "SolveResult",
    "ConvexObjective",
    "objective",
    "gradient",
    "polyak_stepsize",
    "md_step",
    "hd_plus_step",
    "hd_step",
    "egpm_step",
    "backtracking_stepsize",
    "solve",
    "solve_convex",
]


class Status(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    NUMERICAL_BREAKDOWN = "NumericalBreakdown"


_KINDS = (
    "md_polyak",
    "hd_plus_polyak",
    "hd_polyak",
    "eg_pm",
    "md_constant",
    "md_backtracking",
    # resolved to a concrete md_constant by the experiment driver's grid search
    "md_constant_grid",
)


@dataclass(frozen=True)
class Method:
    """Algorithm selector plus stepsize-rule parameters.

    Use the classmethod constructors; they validate the parameters.
    For ``md_backtracking``, ``alpha0=None`` means "pick 1.79 / ||grad f(x0)||_inf
    at the start of the solve".
    """

    kind: str
    alpha: float | None = None
    alpha0: float | None = None
    shrink: float = 0.5

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown method kind {self.kind!r}")

    @classmethod
    def md_polyak(cls) -> "Method":
        return cls("md_polyak")

    @classmethod
    def hd_plus_polyak(cls) -> "Method":
        return cls("hd_plus_polyak")

    @classmethod
    def hd_polyak(cls) -> "Method":
        return cls("hd_polyak")

    @classmethod
    def eg_pm(cls) -> "Method":
        return cls("eg_pm")

    @classmethod
    def md_constant(cls, alpha: float) -> "Method":
        alpha = float(alpha)
        if not (alpha > 0.0 and np.isfinite(alpha)):
            raise DomainError("md_constant needs a finite positive stepsize")
        return cls("md_constant", alpha=alpha)

    @classmethod
    def md_constant_grid(cls) -> "Method":
        """Placeholder resolved by the experiment driver: the best constant
        stepsize from a log grid.  Not directly solvable."""
        return cls("md_constant_grid")

    @classmethod
    def md_backtracking(cls, alpha0: float | None = None, shrink: float = 0.5) -> "Method":
        if alpha0 is not None:
            alpha0 = float(alpha0)
            if not (alpha0 > 0.0 and np.isfinite(alpha0)):
                raise DomainError("md_backtracking needs a finite positive alpha0")
        shrink = float(shrink)
        if not (0.0 < shrink < 1.0):
            raise DomainError("md_backtracking shrink factor must lie strictly inside (0, 1)")
        return cls("md_backtracking", alpha0=alpha0, shrink=shrink)

    @property
    def label(self) -> str:
        if self.kind == "md_constant":
            return f"md_constant_{self.alpha:g}"
        return self.kind


@dataclass(eq=False)
class ProblemInstance:
    """A linear system A x = b, optionally with a known nonnegative solution."""

    a: np.ndarray
    b: np.ndarray
    planted: np.ndarray | None = None

    def __post_init__(self):
        self.a = as_matrix(self.a)
        self.b = as_vector(self.b)
        if self.b.shape[0] != self.a.shape[0]:
            raise DimensionMismatch("right-hand side length must equal the number of rows")
        if self.planted is not None:
            z = as_vector(self.planted)
            if z.shape[0] != self.a.shape[1]:
                raise DimensionMismatch("planted solution length must equal the number of columns")
            if np.any(z < 0):
                raise DomainError("planted solution must be nonnegative")
            resid = float(np.linalg.norm(self.a @ z - self.b))
            if resid > 1e-10 * (1.0 + float(np.linalg.norm(self.b))):
                raise DomainError(f"planted vector is not a solution (residual {resid:g})")
            self.planted = z

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]


@dataclass(eq=False)
class SolveConfig:
    """Everything a solve needs besides the problem itself.

    ``x0`` must be strictly positive; for ``eg_pm`` it has length 2n and is
    read as the concatenation (u0, v0).  If ``trace_reference`` is set, every
    trace record carries the Bregman divergence from the reference to the
    iterate, and for the certified Polyak schemes the per-iteration descent
    inequality is checked (disable via ``check_descent`` when the reference
    is only an estimate rather than an exact solution).
    """

    method: Method
    x0: np.ndarray
    max_iters: int = 20_000
    f_tol: float = 1e-20
    trace_reference: np.ndarray | None = None
    check_descent: bool = True

    def __post_init__(self):
        self.x0 = as_vector(self.x0)
        if np.any(self.x0 <= 0):
            raise DomainError("x0 must be strictly positive componentwise")
        self.max_iters = int(self.max_iters)
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")
        self.f_tol = float(self.f_tol)
        if not (self.f_tol >= 0.0):
            raise DomainError("f_tol must be nonnegative")
        if self.trace_reference is not None:
            ref = as_vector(self.trace_reference)
            if np.any(ref < 0):
                raise DomainError("trace_reference must be nonnegative")
            self.trace_reference = ref


@dataclass(slots=True)
class TraceRecord:
    """State of one iteration: the iterate's statistics and the step taken from it."""

    iter: int
    f_value: float
    stepsize: float
    l1_norm: float
    d_h_to_ref: float | None = None


@dataclass(eq=False)
class SolveResult:
    x_final: np.ndarray
    status: Status
    iters_run: int
    trace: list[TraceRecord] = field(default_factory=list)
    # eg_pm only: the final concatenated pair (u, v); x_final is u - v.
    w_final: np.ndarray | None = None
    # set for schemes without a convergence guarantee (hd_polyak)
    heuristic: bool = False


@dataclass(eq=False)
class ConvexObjective:
    """A convex function with known optimal value, for the generic solver.

    ``l_smooth`` is the gradient Lipschitz constant when known; it is carried
    as metadata (the stepsize rule does not need it).
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    f_star: float
    l_smooth: float | None = None


def objective(p: ProblemInstance, x) -> float:
    """f(x) = 0.5 ||A x - b||^2."""
    x = as_vector(x)
    if x.shape[0] != p.n:
        raise DimensionMismatch("objective: vector length must equal the number of columns")
    r = p.a @ x - p.b
    return 0.5 * float(r @ r)


def gradient(p: ProblemInstance, x) -> np.ndarray:
    """grad f(x) = A^T (A x - b)."""
    x = as_vector(x)
    if x.shape[0] != p.n:
        raise DimensionMismatch("gradient: vector length must equal the number of columns")
    return p.a.T @ (p.a @ x - p.b)


def polyak_stepsize(x, g, f_gap: float, convex_mode: bool = False) -> float:
    """Adaptive stepsize min(f_gap / (c ||g||^2_x), 1.79 / ||g||_inf).

    ``c`` is 1 for the quadratic objective (``f_gap`` is f(x)) and 2 in
    ``convex_mode`` (``f_gap`` is f(x) - f*).  Returns 0 when the gap is 0.
    When the weighted norm vanishes on the boundary while the gradient does
    not, the cap term is returned.

    Raises
    ------
    DomainError
        If ``x`` has a negative entry, the gap is negative, or the gradient
        is identically zero while the gap is positive.
    """
    x = as_vector(x)
    g = as_vector(g)
    if np.any(x < 0):
        raise DomainError("polyak_stepsize: weights must be nonnegative")
    f_gap = float(f_gap)
    if f_gap < 0.0:
        raise DomainError("polyak_stepsize: the objective gap must be nonnegative")
    if f_gap == 0.0:
        return 0.0
    g_inf = float(np.max(np.abs(g)))
    if g_inf == 0.0:
        raise DomainError("polyak_stepsize: zero gradient with a positive gap")
    cap = EXP_QUAD_BOUND / g_inf
    wn = weighted_norm_sq(x, g)
    if wn == 0.0:
        return cap
    c = 2.0 if convex_mode else 1.0
    return min(f_gap / (c * wn), cap)


def _finite_or_breakdown(out: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(out)):
        raise BreakdownError(f"non-finite iterate produced by {what}")
    return out


def md_step(x, g, alpha: float) -> np.ndarray:
    """Exponential multiplicative update x * exp(-alpha g).

    Coordinates that have underflowed to exact zero stay at zero.

    Raises
    ------
    BreakdownError
        If the update overflows.
    """
    x = as_vector(x)
    g = as_vector(g)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        out = x * np.exp(-alpha * g)
    out = np.where(x == 0.0, 0.0, out)
    return _finite_or_breakdown(out, "md_step")


def hd_plus_step(x, g, alpha: float) -> np.ndarray:
    """Polynomial update x * (1 - alpha g + alpha^2 g^2).

    Requires ``alpha * ||g||_inf <= 1.79``; under that cap the multiplier is
    positive, so nonnegativity is preserved.
    """
    x = as_vector(x)
    g = as_vector(g)
    if alpha * float(np.max(np.abs(g))) > EXP_QUAD_BOUND * (1.0 + 1e-12):
        raise DomainError("hd_plus_step requires alpha * ||g||_inf <= 1.79")
    t = alpha * g
    out = x * (1.0 - t + t * t)
    return _finite_or_breakdown(out, "hd_plus_step")


def hd_step(x, g, alpha: float) -> np.ndarray:
    """Squared multiplicative update x * (1 - alpha g)^2 (heuristic scheme).

    A coordinate where alpha * g_i = 1 lands exactly on zero.
    """
    x = as_vector(x)
    g = as_vector(g)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        mult = 1.0 - alpha * g
        out = x * mult * mult
    out = np.where(x == 0.0, 0.0, out)
    return _finite_or_breakdown(out, "hd_step")


def egpm_step(u, v, g, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """One update of the positive/negative split scheme.

    ``g`` is the gradient of f at u - v; the two halves move with opposite
    exponents: u * exp(-alpha g) and v * exp(+alpha g).
    """
    u = as_vector(u)
    v = as_vector(v)
    g = as_vector(g)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        u_next = u * np.exp(-alpha * g)
        v_next = v * np.exp(alpha * g)
    u_next = np.where(u == 0.0, 0.0, u_next)
    v_next = np.where(v == 0.0, 0.0, v_next)
    _finite_or_breakdown(u_next, "egpm_step")
    _finite_or_breakdown(v_next, "egpm_step")
    return u_next, v_next


def backtracking_stepsize(p: ProblemInstance, x, g, alpha0: float, shrink: float = 0.5) -> float:
    """Largest alpha in {alpha0 * shrink^j} passing the curvature test.

    Accepts the first alpha with ``alpha * D_f(x, x+) < D_h(x, x+)`` where
    ``x+ = md_step(x, g, alpha)`` and ``D_f(x, y) = 0.5 ||A (x - y)||^2``.
    At a stationary point both sides are zero and alpha0 is accepted.

    Raises
    ------
    ConvergenceError
        If no admissible stepsize is found within 200 halvings.
    """
    x = as_vector(x)
    g = as_vector(g)
    alpha = float(alpha0)
    if not (alpha > 0.0 and np.isfinite(alpha)):
        raise DomainError("backtracking needs a finite positive alpha0")
    if not (0.0 < shrink < 1.0):
        raise DomainError("shrink factor must lie strictly inside (0, 1)")
    for _ in range(201):
        try:
            x_plus = md_step(x, g, alpha)
            d_h = bregman_divergence(x, x_plus)
        except (BreakdownError, InfiniteDivergence):
            # overflow or a coordinate driven to zero: not an admissible step
            alpha *= shrink
            continue
        dvec = p.a @ (x - x_plus)
        d_f = 0.5 * float(dvec @ dvec)
        if alpha * d_f < d_h or (d_f == 0.0 and d_h == 0.0):
            return alpha
        alpha *= shrink
    raise ConvergenceError("backtracking found no admissible stepsize within 200 halvings")


# Descent-certificate tolerance: D_h(z, x+) - D_h(z, x) <= -a f + TOL * (1 + D_h(z, x))
_DESCENT_TOL = 1e-9


def solve(p: ProblemInstance, cfg: SolveConfig) -> SolveResult:
    """Run the configured scheme on ``p`` until f <= f_tol or max_iters.

    For ``md_polyak`` and ``hd_plus_polyak`` with a ``trace_reference`` in the
    solution set and ``check_descent`` enabled, each iteration must satisfy
    the certified divergence descent; a violation terminates with status
    ``NUMERICAL_BREAKDOWN``.
    """
    if cfg.method.kind == "md_constant_grid":
        raise DomainError("md_constant_grid must be resolved by the experiment driver")
    if cfg.method.kind == "eg_pm":
        return _solve_egpm(p, cfg)
    return _solve_orthant(p, cfg)


def _solve_orthant(p: ProblemInstance, cfg: SolveConfig) -> SolveResult:
    kind = cfg.method.kind
    if cfg.x0.shape[0] != p.n:
        raise DimensionMismatch("x0 length must equal the number of columns")
    a = p.a
    at = np.ascontiguousarray(p.a.T)
    b = p.b
    x = cfg.x0.copy()

    z = cfg.trace_reference
    if z is not None and z.shape[0] != p.n:
        raise DimensionMismatch("trace_reference length must equal the number of columns")
    certified = kind in ("md_polyak", "hd_plus_polyak")
    checking = certified and cfg.check_descent and z is not None
    d_prev = _dh_core(z, x) if z is not None else None

    polyak = kind in ("md_polyak", "hd_plus_polyak", "hd_polyak")
    if kind == "md_backtracking":
        alpha0 = cfg.method.alpha0
        if alpha0 is None:
            g0 = at @ (a @ x - b)
            g0_inf = float(np.max(np.abs(g0)))
            alpha0 = EXP_QUAD_BOUND / g0_inf if g0_inf > 0 else 1.0

    trace: list[TraceRecord] = []
    status = Status.MAX_ITERS
    iters_run = cfg.max_iters

    # overflow in f, g, or the multiplicative update on a divergent run is
    # expected and handled; suppress the warnings for the whole loop
    err_state = np.seterr(over="ignore", invalid="ignore", under="ignore")
    try:
        for k in range(cfg.max_iters):
            r = a @ x - b
            f = 0.5 * float(r @ r)
            if not np.isfinite(f):
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                break
            if f <= cfg.f_tol:
                status, iters_run = Status.CONVERGED, k
                break
            g = at @ r
            if not np.all(np.isfinite(g)):
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                break

            if polyak:
                # same arithmetic as polyak_stepsize, inlined for the hot loop
                g_inf = float(np.max(np.abs(g)))
                if g_inf == 0.0:
                    status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                    break
                cap = EXP_QUAD_BOUND / g_inf
                wn = float(np.sum(x * g * g))
                alpha = cap if wn == 0.0 else min(f / wn, cap)
            elif kind == "md_constant":
                alpha = cfg.method.alpha
            else:
                try:
                    alpha = backtracking_stepsize(p, x, g, alpha0, cfg.method.shrink)
                except (ConvergenceError, DomainError):
                    status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                    break

            trace.append(TraceRecord(k, f, alpha, float(np.sum(x)), d_prev))

            if kind == "hd_plus_polyak":
                t = alpha * g
                x_next = x * (1.0 - t + t * t)
            elif kind == "hd_polyak":
                mult = 1.0 - alpha * g
                x_next = x * mult * mult
                x_next = np.where(x == 0.0, 0.0, x_next)
            else:
                x_next = x * np.exp(-alpha * g)
                x_next = np.where(x == 0.0, 0.0, x_next)
            if not np.all(np.isfinite(x_next)):
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                break

            if z is not None:
                try:
                    d_next = _dh_core(z, x_next)
                except InfiniteDivergence:
                    x = x_next
                    status, iters_run = Status.NUMERICAL_BREAKDOWN, k + 1
                    break
                if checking and d_next - d_prev > -alpha * f + _DESCENT_TOL * (1.0 + d_prev):
                    x = x_next
                    status, iters_run = Status.NUMERICAL_BREAKDOWN, k + 1
                    break
                d_prev = d_next
            x = x_next
    finally:
        np.seterr(**err_state)

    return SolveResult(x, status, iters_run, trace, heuristic=(kind == "hd_polyak"))


def _solve_egpm(p: ProblemInstance, cfg: SolveConfig) -> SolveResult:
    n = p.n
    if cfg.x0.shape[0] != 2 * n:
        raise DimensionMismatch("eg_pm needs x0 of length 2 n, the concatenation (u0, v0)")
    a = p.a
    at = np.ascontiguousarray(p.a.T)
    b = p.b
    u = cfg.x0[:n].copy()
    v = cfg.x0[n:].copy()

    z = cfg.trace_reference
    if z is not None and z.shape[0] != 2 * n:
        raise DimensionMismatch("eg_pm trace_reference must have length 2 n")

    trace: list[TraceRecord] = []
    status = Status.MAX_ITERS
    iters_run = cfg.max_iters

    err_state = np.seterr(over="ignore", invalid="ignore", under="ignore")
    try:
        for k in range(cfg.max_iters):
            r = a @ (u - v) - b
            f = 0.5 * float(r @ r)
            if not np.isfinite(f):
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                break
            if f <= cfg.f_tol:
                status, iters_run = Status.CONVERGED, k
                break
            g = at @ r
            if not np.all(np.isfinite(g)):
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                break
            g_inf = float(np.max(np.abs(g)))
            if g_inf == 0.0:
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                break
            cap = EXP_QUAD_BOUND / g_inf
            pair = u + v
            wn = float(np.sum(pair * g * g))
            alpha = cap if wn == 0.0 else min(f / wn, cap)

            d_h = _dh_core(z, np.concatenate([u, v])) if z is not None else None
            trace.append(TraceRecord(k, f, alpha, float(np.sum(pair)), d_h))

            u_next = u * np.exp(-alpha * g)
            v_next = v * np.exp(alpha * g)
            u_next = np.where(u == 0.0, 0.0, u_next)
            v_next = np.where(v == 0.0, 0.0, v_next)
            if not (np.all(np.isfinite(u_next)) and np.all(np.isfinite(v_next))):
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k
                break
            u, v = u_next, v_next
    finally:
        np.seterr(**err_state)

    return SolveResult(u - v, status, iters_run, trace, w_final=np.concatenate([u, v]))


def solve_convex(obj: ConvexObjective, cfg: SolveConfig) -> SolveResult:
    """Minimize a convex function with known optimum over the orthant.

    Same trace and stopping contract as :func:`solve`, with the objective
    gap f(x) - f* playing the role of f.  Only the two certified schemes are
    supported (``md_polyak`` and ``hd_plus_polyak``).

    Raises
    ------
    DomainError
        If an observed value drops more than 1e-9 below ``f_star`` (the
        declared optimum is wrong) or the method is unsupported.
    """
    kind = cfg.method.kind
    if kind not in ("md_polyak", "hd_plus_polyak"):
        raise DomainError("solve_convex supports only md_polyak and hd_plus_polyak")
    f_star = float(obj.f_star)
    if not np.isfinite(f_star):
        raise DomainError("f_star must be finite")

    x = cfg.x0.copy()
    z = cfg.trace_reference
    if z is not None and z.shape[0] != x.shape[0]:
        raise DimensionMismatch("trace_reference length must match x0")
    checking = cfg.check_descent and z is not None
    d_prev = bregman_divergence(z, x) if z is not None else None

    trace: list[TraceRecord] = []
    status = Status.MAX_ITERS
    iters_run = cfg.max_iters

    for k in range(cfg.max_iters):
        gap = float(obj.value(x)) - f_star
        if gap < -1e-9:
            raise DomainError(f"observed value {gap + f_star!r} below the declared optimum")
        gap = max(gap, 0.0)
        if not np.isfinite(gap):
            status, iters_run = Status.NUMERICAL_BREAKDOWN, k
            break
        if gap <= cfg.f_tol:
            status, iters_run = Status.CONVERGED, k
            break
        g = as_vector(obj.gradient(x))
        try:
            alpha = polyak_stepsize(x, g, gap, convex_mode=True)
        except DomainError:
            status, iters_run = Status.NUMERICAL_BREAKDOWN, k
            break

        trace.append(TraceRecord(k, gap, alpha, float(np.sum(x)), d_prev))

        try:
            if kind == "hd_plus_polyak":
                x_next = hd_plus_step(x, g, alpha)
            else:
                x_next = md_step(x, g, alpha)
        except BreakdownError:
            status, iters_run = Status.NUMERICAL_BREAKDOWN, k
            break

        if z is not None:
            try:
                d_next = bregman_divergence(z, x_next)
            except InfiniteDivergence:
                x = x_next
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k + 1
                break
            # convex-mode certified descent carries the extra factor 1/2
            if checking and d_next - d_prev > -0.5 * alpha * gap + _DESCENT_TOL * (1.0 + d_prev):
                x = x_next
                status, iters_run = Status.NUMERICAL_BREAKDOWN, k + 1
                break
            d_prev = d_next
        x = x_next

    return SolveResult(x, status, iters_run, trace)
