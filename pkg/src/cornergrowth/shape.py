"""Limit shape functions of the inhomogeneous corner growth models.

The shape function is the infimum over an interval of linear functions

    exponential:  g(s, t) = inf_{z in [-ubar(alpha), ubar(beta)]}  s A(z) + t B(z),
                  A(z) = E[1/(a+z)],         B(z) = E[1/(b-z)],
    geometric:    g(s, t) = inf_{z in [bar(alpha), 1/bar(beta)]}  s A(z) + t B(z),
                  A(z) = E[(a/z)/(1-a/z)],   B(z) = E[bz/(1-bz)].

In both cases A is decreasing and convex, B increasing and convex, so the
z-derivative s A'(z) + t B'(z) is increasing.  Its sign at the two
endpoints decides whether the infimum is attained at an endpoint (the
linear sectors next to the axes) or at the unique interior root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DomainError, Marginal, MomentTransform, geometric_transforms, moment
from .lpp import EXPONENTIAL, GEOMETRIC, MODELS

__all__ = [
    "ShapeProblem",
    "ConeReport",
    "LevelSet",
    "ConeBoundaryError",
    "DegenerateProblemError",
    "g_z_value",
    "shape_value",
    "solve",
    "boundary_values",
    "critical_cone",
    "minimizer",
    "gradient",
    "closed_form_uniform",
    "closed_form_geometric_reciprocal",
    "homogeneous_exponential",
    "homogeneous_geometric",
    "level_set",
]

BISECTION_WIDTH = 1e-12
NEWTON_STEPS = 5

LOW, INTERIOR, HIGH, DEGENERATE = -1, 0, 1, 2


class ConeBoundaryError(ValueError):
    """The direction lies in one of the linear sectors, not strictly inside the cone."""


class DegenerateProblemError(ValueError):
    """The admissible interval is a single point."""


@dataclass(frozen=True)
class ShapeProblem:
    alpha: Marginal
    beta: Marginal
    model: str = EXPONENTIAL

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.model == GEOMETRIC:
            for name, mu in (("alpha", self.alpha), ("beta", self.beta)):
                if not (0 < mu.left_endpoint and mu.right_endpoint <= 1):
                    raise ValueError(f"geometric {name} must be supported in (0, 1]")
            if self.alpha.right_endpoint * self.beta.right_endpoint > 1:
                raise ValueError("geometric model needs bar(alpha) * bar(beta) <= 1")

    @property
    def interval(self) -> tuple[float, float]:
        if self.model == EXPONENTIAL:
            return -self.alpha.left_endpoint, self.beta.left_endpoint
        return self.alpha.right_endpoint, 1.0 / self.beta.right_endpoint

    @property
    def degenerate(self) -> bool:
        lo, hi = self.interval
        if self.model == GEOMETRIC:
            return self.alpha.right_endpoint * self.beta.right_endpoint == 1.0
        return lo == hi

    def swapped(self) -> "ShapeProblem":
        return ShapeProblem(self.beta, self.alpha, self.model)

    def check_z(self, z):
        lo, hi = self.interval
        zz = np.asarray(z, dtype=float)
        if self.degenerate:
            ok = np.all(zz == lo)
        else:
            ok = np.all((zz >= lo) & (zz <= hi))
        if not ok:
            raise DomainError(f"z must lie in [{lo}, {hi}]")

    # A, -A', A''/2 and B, B', B''/2
    def A(self, z, order=1):
        if self.model == EXPONENTIAL:
            return moment(MomentTransform(self.alpha, "plus"), z, order)
        return geometric_transforms(self.alpha, z, order, "plus")

    def B(self, z, order=1):
        if self.model == EXPONENTIAL:
            return moment(MomentTransform(self.beta, "minus"), z, order)
        return geometric_transforms(self.beta, z, order, "minus")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha.to_dict(), "beta": self.beta.to_dict(), "model": self.model}


def _lin(s, t, A, B):
    """s*A + t*B with 0*inf = 0."""
    with np.errstate(invalid="ignore"):
        sa = np.where(s == 0, 0.0, s * A)
        tb = np.where(t == 0, 0.0, t * B)
    return sa + tb


def _scalar_or_array(x, like):
    return float(x.reshape(-1)[0]) if all(np.ndim(v) == 0 for v in like) else x


def g_z_value(problem: ShapeProblem, z: float, s, t):
    """The linear function s A(z) + t B(z); ``inf`` if a needed transform diverges."""
    problem.check_z(z)
    s_arr, t_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise DomainError("s and t must be nonnegative")
    A = problem.A(float(z))
    B = problem.B(float(z))
    return _scalar_or_array(_lin(s_arr, t_arr, A, B), (s, t))


def _dderiv(problem, z, s, t):
    """s A'(z) + t B'(z)."""
    A2 = problem.A(z, 2)
    B2 = problem.B(z, 2)
    with np.errstate(invalid="ignore"):
        return -s * A2 + t * B2


def solve(problem: ShapeProblem, s, t):
    """Solve the variational problem for arrays of directions.

    Returns
    -------
    value, z_star, regime : arrays of the broadcast shape of ``s`` and ``t``.
        ``regime`` is -1 (linear sector s/t <= c1), 0 (interior root),
        1 (linear sector s/t >= c2) or 2 (degenerate interval).
    """
    s_arr, t_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    shape = s_arr.shape
    s_arr = s_arr.reshape(-1).copy()
    t_arr = t_arr.reshape(-1).copy()
    if np.any(~(s_arr > 0)) or np.any(~(t_arr > 0)):
        raise DomainError("shape_value needs s > 0 and t > 0; use boundary_values on the axes")
    zL, zR = problem.interval
    size = s_arr.size
    value = np.empty(size)
    zstar = np.empty(size)
    regime = np.empty(size, dtype=int)

    if problem.degenerate:
        zstar[:] = zL
        regime[:] = DEGENERATE
        value[:] = _lin(s_arr, t_arr, problem.A(zL), problem.B(zL))
        return value.reshape(shape), zstar.reshape(shape), regime.reshape(shape)

    # endpoint second moments first; inf short-circuits the sign test
    A2L, B2L = problem.A(zL, 2), problem.B(zL, 2)
    A2R, B2R = problem.A(zR, 2), problem.B(zR, 2)
    dL = -s_arr * A2L + t_arr * B2L
    dR = -s_arr * A2R + t_arr * B2R
    low = dL >= 0
    high = (dR <= 0) & ~low
    inner = ~(low | high)

    if low.any():
        regime[low] = LOW
        zstar[low] = zL
        value[low] = _lin(s_arr[low], t_arr[low], problem.A(zL), problem.B(zL))
    if high.any():
        regime[high] = HIGH
        zstar[high] = zR
        value[high] = _lin(s_arr[high], t_arr[high], problem.A(zR), problem.B(zR))
    if inner.any():
        si, ti = s_arr[inner], t_arr[inner]
        lo = np.full(si.shape, zL)
        hi = np.full(si.shape, zR)
        steps = max(1, math.ceil(math.log2((zR - zL) / BISECTION_WIDTH)))
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            neg = _dderiv(problem, mid, si, ti) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
        z = 0.5 * (lo + hi)
        for _ in range(NEWTON_STEPS):
            d = _dderiv(problem, z, si, ti)
            d2 = 2.0 * (si * problem.A(z, 3) + ti * problem.B(z, 3))
            with np.errstate(invalid="ignore", divide="ignore"):
                step = np.where(d2 > 0, d / d2, 0.0)
            z = np.clip(z - step, lo, hi)
        regime[inner] = INTERIOR
        zstar[inner] = z
        value[inner] = si * problem.A(z) + ti * problem.B(z)
    return value.reshape(shape), zstar.reshape(shape), regime.reshape(shape)


def shape_value(problem: ShapeProblem, s, t):
    """g(s, t) for s, t > 0 (scalars or broadcastable arrays)."""
    value, _, _ = solve(problem, s, t)
    return _scalar_or_array(value, (s, t))


def boundary_values(problem: ShapeProblem) -> tuple[float, float]:
    """(g(1, 0), g(0, 1)): A at the right endpoint and B at the left endpoint."""
    zL, zR = problem.interval
    if problem.degenerate:
        return float(problem.A(zL)), float(problem.B(zL))
    return float(problem.A(zR)), float(problem.B(zL))


def _ext_ratio(num, den):
    if math.isinf(den):
        return 0.0
    if math.isinf(num):
        return math.inf
    return num / den if den > 0 else math.inf


@dataclass(frozen=True)
class ConeReport:
    c1: float
    c2: float
    linear_low_slope: tuple[float, float]
    linear_high_slope: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "linear_low_slope": list(self.linear_low_slope),
            "linear_high_slope": list(self.linear_high_slope),
        }


def critical_cone(problem: ShapeProblem) -> ConeReport:
    """Critical slopes c1 < c2 bounding the strictly concave sector."""
    if problem.degenerate:
        raise DegenerateProblemError(
            "admissible interval is a single point: g is linear, s E[..a..] + t E[..b..], and has no critical cone"
        )
    zL, zR = problem.interval
    c1 = _ext_ratio(float(problem.B(zL, 2)), float(problem.A(zL, 2)))
    c2 = _ext_ratio(float(problem.B(zR, 2)), float(problem.A(zR, 2)))
    return ConeReport(
        c1=c1,
        c2=c2,
        linear_low_slope=(float(problem.A(zL)), float(problem.B(zL))),
        linear_high_slope=(float(problem.A(zR)), float(problem.B(zR))),
    )


def minimizer(problem: ShapeProblem, s: float, t: float) -> float:
    """Interior minimiser z* solving -B'(z)/A'(z) = s/t.

    Raises :class:`ConeBoundaryError` when s/t is outside the open cone.
    For a degenerate interval the single admissible point is returned.
    """
    _, z, regime = solve(problem, s, t)
    r = int(regime)
    if r == LOW:
        raise ConeBoundaryError(f"s/t = {s / t} <= c1: g is linear there with slope pair at z = {problem.interval[0] + 0.0}")
    if r == HIGH:
        raise ConeBoundaryError(f"s/t = {s / t} >= c2: g is linear there with slope pair at z = {problem.interval[1]}")
    return float(z)


def gradient(problem: ShapeProblem, s, t):
    """(dg/ds, dg/dt) = (A(z*), B(z*)), z* the solver's minimiser (endpoint in the linear sectors)."""
    _, z, _ = solve(problem, s, t)
    gs = problem.A(z)
    gt = problem.B(z)
    if np.ndim(s) == 0 and np.ndim(t) == 0:
        return float(np.asarray(gs).reshape(-1)[0]), float(np.asarray(gt).reshape(-1)[0])
    return gs, gt


# -- closed forms ----------------------------------------------------------------


def _p_plus_root(p, prod):
    """p + sqrt(p**2 + prod) for prod >= 0, without cancellation when p < 0."""
    root = np.sqrt(p * p + prod)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p >= 0, p + root, prod / (root - p))


def homogeneous_exponential(lam, s, t):
    """(sqrt(s) + sqrt(t))**2 / lam, the i.i.d. exponential(lam) shape."""
    return (np.sqrt(s) + np.sqrt(t)) ** 2 / lam


def homogeneous_geometric(q, s, t):
    """q/(1-q) (s+t) + 2 sqrt(q)/(1-q) sqrt(st), the i.i.d. geometric(q) shape."""
    return q / (1 - q) * (s + t) + 2 * np.sqrt(q) / (1 - q) * np.sqrt(s * t)


def _uniform_one_zero(lam, m, s, t):
    # alpha a point mass at lam/2, beta uniform on [lam/2, lam/2 + m]
    R = np.sqrt((m * s) ** 2 + 4 * s * t * lam * (lam + m))
    first = (2 * s * lam + m * s + R) / (2 * lam * (lam + m))
    second = t / m * np.log1p(m / lam + m / lam * (m * s + R) / (2 * t * lam))
    return first + second


def closed_form_uniform(lam, l, m, s, t):
    """Explicit g for alpha uniform on [lam/2, lam/2 + l], beta uniform on [lam/2, lam/2 + m].

    ``l == 0`` (or ``m == 0``) means a point mass at lam/2.
    """
    if lam <= 0 or l < 0 or m < 0:
        raise DomainError("closed_form_uniform needs lam > 0 and l, m >= 0")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if l == 0 and m == 0:
        out = homogeneous_exponential(lam, s, t)
    elif l == 0:
        out = _uniform_one_zero(lam, m, s, t)
    elif m == 0:
        out = _uniform_one_zero(lam, l, t, s)
    else:
        prod = 4 * s * t * (lam + l) * (lam + m)
        p = l * t - m * s
        first = s / l * np.log1p(l / lam + l / lam * _p_plus_root(p, prod) / (2 * s * (lam + m)))
        second = t / m * np.log1p(m / lam + m / lam * _p_plus_root(-p, prod) / (2 * t * (lam + l)))
        out = first + second
    return float(out) if out.ndim == 0 else out


def closed_form_geometric_reciprocal(q, l, m, s, t):
    """Explicit geometric-model g for densities proportional to 1/x on [sqrt(q)-l, sqrt(q)] and [sqrt(q)-m, sqrt(q)]."""
    rq = math.sqrt(q)
    if not (0 < q < 1 and 0 < l < rq and 0 < m < rq):
        raise DomainError("closed_form_geometric_reciprocal needs 0 < q < 1 and 0 < l, m < sqrt(q)")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    L = math.log(rq / (rq - l))
    M = math.log(rq / (rq - m))
    x = s * l * M
    y = t * m * L
    P = 1 + m * rq - q
    Q = 1 + l * rq - q
    prod = 4 * x * y * P * Q
    p = l * y - m * x
    first = s / L * np.log1p(l * rq / (1 - q) + l / (1 - q) * _p_plus_root(p, prod) / (2 * x * P))
    second = t / M * np.log1p(m * rq / (1 - q) + m / (1 - q) * _p_plus_root(-p, prod) / (2 * y * Q))
    out = first + second
    return float(out) if out.ndim == 0 else out


# -- level sets --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LevelSet:
    """Points r(theta) (cos theta, sin theta) of {g = level}, with the cone rays."""

    level: float
    theta: np.ndarray
    s: np.ndarray
    t: np.ndarray
    g: np.ndarray
    cone: ConeReport | None

    @property
    def rays(self) -> list[float]:
        """Finite, nonzero critical slopes s/t to annotate."""
        if self.cone is None:
            return []
        return [c for c in (self.cone.c1, self.cone.c2) if 0 < c < math.inf]


def level_set(problem: ShapeProblem, level: float, count: int) -> LevelSet:
    """``count`` points of the level set g = ``level`` at equally spaced interior angles."""
    if not level > 0:
        raise DomainError("level must be positive")
    if count < 2:
        raise DomainError("count must be at least 2")
    theta = np.arange(1, count + 1) * (0.5 * math.pi / (count + 1))
    g_dir = shape_value(problem, np.cos(theta), np.sin(theta))
    g_dir = np.asarray(g_dir)
    if not np.all(np.isfinite(g_dir)):
        raise DomainError("shape function is infinite; its level sets are empty")
    r = level / g_dir
    s = r * np.cos(theta)
    t = r * np.sin(theta)
    g = np.asarray(shape_value(problem, s, t))
    cone = None if problem.degenerate else critical_cone(problem)
    return LevelSet(level=float(level), theta=theta, s=s, t=t, g=g, cone=cone)
