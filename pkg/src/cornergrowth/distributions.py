"""Marginal laws of the parameter sequences and their moment transforms.

Every marginal is compactly supported.  The central primitives are the
inverse-power expectations

    E[(X + w)^(-n)]   with X + w >= 0 on the support,
    E[(c - X)^(-n)]   with c - X >= 0 on the support,

from which both the exponential transforms E[(a+z)^-k], E[(b-z)^-k] and the
geometric transforms E[a/(z-a)^k], E[b^(k-1)/(1-bz)^k] are assembled.
Divergent expectations are returned as ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Literal

import numpy as np

from .quadrature import adaptive_gauss_legendre

__all__ = [
    "DomainError",
    "Marginal",
    "PointMass",
    "Uniform",
    "ShiftedPower",
    "Reciprocal",
    "TabulatedDensity",
    "MomentTransform",
    "moment",
    "geometric_transforms",
    "sample",
    "marginal_from_dict",
]

_SERIES_TERMS = 90
_NORM_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the admissible interval of an operation."""


def _as_array(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _ret(out, like):
    if np.ndim(like) == 0:
        return float(out[0])
    return out.reshape(np.shape(like))


def _primitive(y, p):
    """Antiderivative of y**p, with log for p == -1."""
    if p == -1:
        return np.log(y)
    return y ** (p + 1) / (p + 1)


class Marginal:
    """A compactly supported probability law on (0, inf)."""

    kind: str = ""

    @property
    def left_endpoint(self) -> float:
        raise NotImplementedError

    @property
    def right_endpoint(self) -> float:
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        """Quantile function on the closed interval [0, 1]."""
        raise NotImplementedError

    def mean(self) -> float:
        return self._reflected_power(np.array([0.0]), -1)[0] * -1.0

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- inverse-power expectations, vectorised over the shift ----------------

    def _shifted_power(self, w: np.ndarray, n: int) -> np.ndarray:
        """E[(X + w)^(-n)] for an array of shifts w >= -left_endpoint."""
        raise NotImplementedError

    def _reflected_power(self, c: np.ndarray, n: int) -> np.ndarray:
        """E[(c - X)^(-n)] for an array of centres c >= right_endpoint.

        Negative ``n`` gives positive powers; only ``n == -1`` with ``c == 0``
        is used (for the mean).
        """
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(Marginal):
    value: float
    kind: str = field(default="point", init=False, repr=False)

    def __post_init__(self):
        if not self.value > 0 or not math.isfinite(self.value):
            raise ValueError(f"point mass location must be positive and finite, got {self.value}")

    @property
    def left_endpoint(self):
        return float(self.value)

    @property
    def right_endpoint(self):
        return float(self.value)

    def pdf(self, x):
        raise TypeError("a point mass has no density")

    def cdf(self, x):
        return np.where(np.asarray(x) >= self.value, 1.0, 0.0)

    def ppf(self, u):
        return np.full(np.shape(u), float(self.value)) if np.ndim(u) else float(self.value)

    def mean(self):
        return float(self.value)

    def to_dict(self):
        return {"kind": "point", "value": self.value}

    def _shifted_power(self, w, n):
        y = self.value + w
        with np.errstate(divide="ignore"):
            return np.where(y > 0, y ** (-float(n)), math.inf) if n > 0 else y ** (-float(n))

    def _reflected_power(self, c, n):
        y = c - self.value
        if n <= 0:
            return y ** (-float(n))
        with np.errstate(divide="ignore"):
            return np.where(y > 0, y ** (-float(n)), math.inf)


def _uniform_inv_power(p, d, n):
    """(1/d) * integral_p^{p+d} y^(-n) dy for p >= 0 (inf where divergent)."""
    out = np.empty_like(p)
    zero = p <= 0
    out[zero] = math.inf
    q = p[~zero]
    if n == 1:
        out[~zero] = np.log1p(d / q) / d
    else:
        # p^(1-n) (1 - (p/(p+d))^(n-1)) / ((n-1) d), without cancellation
        out[~zero] = q ** (1.0 - n) * -np.expm1(-(n - 1) * np.log1p(d / q)) / ((n - 1) * d)
    return out


@dataclass(frozen=True)
class Uniform(Marginal):
    lo: float
    hi: float
    kind: str = field(default="uniform", init=False, repr=False)

    def __post_init__(self):
        if not (0 <= self.lo < self.hi < math.inf):
            raise ValueError(f"uniform needs 0 <= lo < hi < inf, got [{self.lo}, {self.hi}]")

    @property
    def left_endpoint(self):
        return float(self.lo)

    @property
    def right_endpoint(self):
        return float(self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def ppf(self, u):
        return self.lo + np.asarray(u, dtype=float) * (self.hi - self.lo)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def to_dict(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}

    def _shifted_power(self, w, n):
        if n == 0:
            return np.ones_like(w)
        return _uniform_inv_power(self.lo + w, self.hi - self.lo, n)

    def _reflected_power(self, c, n):
        if n == 0:
            return np.ones_like(c)
        return _uniform_inv_power(c - self.hi, self.hi - self.lo, n)


@dataclass(frozen=True)
class ShiftedPower(Marginal):
    """Density proportional to (x - x0)^k on [lo, hi], integer k >= 0, x0 <= lo."""

    x0: float
    k: int
    lo: float
    hi: float
    kind: str = field(default="shifted_power", init=False, repr=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"exponent k must be a nonnegative integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if not (0 <= self.lo < self.hi < math.inf) or self.x0 > self.lo:
            raise ValueError("shifted power needs x0 <= lo < hi < inf and lo >= 0")
        total = self._norm * (self._u1 ** (self.k + 1) - self._u0 ** (self.k + 1)) / (self.k + 1)
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError("density does not normalise")

    @property
    def _u0(self):
        return float(self.lo - self.x0)

    @property
    def _u1(self):
        return float(self.hi - self.x0)

    @property
    def _norm(self):
        k = self.k
        return (k + 1) / (self._u1 ** (k + 1) - self._u0 ** (k + 1))

    @property
    def left_endpoint(self):
        return float(self.lo)

    @property
    def right_endpoint(self):
        return float(self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self._norm * np.clip(x - self.x0, 0, None) ** self.k, 0.0)

    def cdf(self, x):
        u = np.clip(np.asarray(x, dtype=float), self.lo, self.hi) - self.x0
        k1 = self.k + 1
        return (u**k1 - self._u0**k1) / (self._u1**k1 - self._u0**k1)

    def ppf(self, u):
        k1 = self.k + 1
        u = np.asarray(u, dtype=float)
        inner = self._u0**k1 + u * (self._u1**k1 - self._u0**k1)
        return np.clip(self.x0 + inner ** (1.0 / k1), self.lo, self.hi)

    def to_dict(self):
        return {"kind": "shifted_power", "x0": self.x0, "k": self.k, "lo": self.lo, "hi": self.hi}

    def _power_integral(self, p):
        """integral_{u0}^{u1} u^p du."""
        if p == -1:
            return math.inf if self._u0 == 0 else math.log(self._u1 / self._u0)
        if p < -1 and self._u0 == 0:
            return math.inf
        return (self._u1 ** (p + 1) - self._u0 ** (p + 1)) / (p + 1)

    def _shifted_power(self, w, n):
        k, u0, u1 = self.k, self._u0, self._u1
        big_w = w + self.x0  # X + w = u + big_w
        out = np.empty_like(big_w)
        if n == 0:
            out[:] = 1.0
            return out
        at_zero = big_w == 0
        out[at_zero] = self._norm * self._power_integral(k - n)
        endpoint = (big_w + u0 == 0) & ~at_zero
        out[endpoint] = math.inf
        far = (big_w > 2 * u1) & ~at_zero
        if far.any():
            W = big_w[far]
            acc = np.zeros_like(W)
            for i in range(_SERIES_TERMS):
                coef = (-1) ** i * comb(n + i - 1, i) * self._power_integral(k + i)
                acc += coef * (1.0 / W) ** (i + n)
            out[far] = self._norm * acc
        rest = ~(at_zero | endpoint | far)
        if rest.any():
            W = big_w[rest]
            acc = np.zeros_like(W)
            for j in range(k + 1):
                p = j - n
                acc += comb(k, j) * (-W) ** (k - j) * (_primitive(u1 + W, p) - _primitive(u0 + W, p))
            out[rest] = self._norm * acc
        return out

    def _reflected_power(self, c, n):
        k, u0, u1 = self.k, self._u0, self._u1
        C = c - self.x0  # c - X = C - u
        out = np.empty_like(C)
        if n == -1:
            # E[c - X], used only for the mean
            out[:] = C - self._norm * self._power_integral(k + 1)
            return out
        if n == 0:
            out[:] = 1.0
            return out
        endpoint = C == u1
        out[endpoint] = math.inf
        far = C > 2 * u1
        if far.any():
            Cf = C[far]
            acc = np.zeros_like(Cf)
            for i in range(_SERIES_TERMS):
                acc += comb(n + i - 1, i) * self._power_integral(k + i) * (1.0 / Cf) ** (i + n)
            out[far] = self._norm * acc
        rest = ~(endpoint | far)
        if rest.any():
            Cr = C[rest]
            acc = np.zeros_like(Cr)
            for j in range(k + 1):
                p = j - n
                acc += comb(k, j) * Cr ** (k - j) * (-1) ** j * (_primitive(Cr - u0, p) - _primitive(Cr - u1, p))
            out[rest] = self._norm * acc
        return out


@dataclass(frozen=True)
class Reciprocal(Marginal):
    """Density proportional to 1/x on [lo, hi]."""

    lo: float
    hi: float
    kind: str = field(default="reciprocal", init=False, repr=False)

    def __post_init__(self):
        if not (0 < self.lo < self.hi < math.inf):
            raise ValueError(f"reciprocal needs 0 < lo < hi < inf, got [{self.lo}, {self.hi}]")

    @property
    def _L(self):
        return math.log(self.hi / self.lo)

    @property
    def left_endpoint(self):
        return float(self.lo)

    @property
    def right_endpoint(self):
        return float(self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (np.where(inside, x, 1.0) * self._L), 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return np.log(x / self.lo) / self._L

    def ppf(self, u):
        return self.lo * (self.hi / self.lo) ** np.asarray(u, dtype=float)

    def mean(self):
        return (self.hi - self.lo) / self._L

    def to_dict(self):
        return {"kind": "reciprocal", "lo": self.lo, "hi": self.hi}

    def _shifted_power(self, w, n):
        lo, hi, L = self.lo, self.hi, self._L
        out = np.empty_like(w)
        if n == 0:
            out[:] = 1.0
            return out
        endpoint = lo + w == 0
        out[endpoint] = math.inf
        near = np.abs(w) <= 0.5 * lo
        if near.any():
            # expand (x + w)^-n in powers of w/x
            r = w[near] / lo
            acc = np.zeros_like(r)
            for i in range(_SERIES_TERMS):
                m = n + i
                acc += (-1) ** i * comb(n + i - 1, i) * r**i * (-math.expm1(m * math.log(lo / hi))) / m
            out[near] = acc * lo ** (-float(n)) / L
        rest = ~(endpoint | near)
        if rest.any():
            wr = w[rest]
            acc = wr ** (-float(n)) * L
            for j in range(1, n + 1):
                if j == 1:
                    G = np.log((hi + wr) / (lo + wr))
                else:
                    G = ((lo + wr) ** (1.0 - j) - (hi + wr) ** (1.0 - j)) / (j - 1)
                acc = acc - wr ** (j - n - 1.0) * G
            out[rest] = acc / L
        return out

    def _reflected_power(self, c, n):
        lo, hi, L = self.lo, self.hi, self._L
        out = np.empty_like(c)
        if n == -1:
            out[:] = c - self.mean()
            return out
        if n == 0:
            out[:] = 1.0
            return out
        endpoint = c == hi
        out[endpoint] = math.inf
        cr = c[~endpoint]
        acc = cr ** (-float(n)) * L
        for j in range(1, n + 1):
            if j == 1:
                H = np.log((cr - lo) / (cr - hi))
            else:
                H = ((cr - hi) ** (1.0 - j) - (cr - lo) ** (1.0 - j)) / (j - 1)
            acc = acc + cr ** (j - n - 1.0) * H
        out[~endpoint] = acc / L
        return out


class TabulatedDensity(Marginal):
    """Piecewise-linear density through the points (x_k, f_k).

    The table is renormalised to unit trapezoidal mass, and leading or
    trailing zero-density panels are trimmed so that the endpoints are those
    of the support.
    """

    kind = "tabulated"

    def __init__(self, x, density):
        x = np.asarray(x, dtype=float)
        f = np.asarray(density, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or len(x) < 2:
            raise ValueError("x and density must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x grid must be strictly increasing")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise ValueError("density must be finite and nonnegative")
        if x[0] < 0:
            raise ValueError("support must lie in [0, inf)")
        pos = np.flatnonzero(f > 0)
        if len(pos) == 0:
            raise ValueError("density has zero mass")
        first = max(pos[0] - 1, 0)
        last = min(pos[-1] + 1, len(x) - 1)
        x, f = x[first:last + 1], f[first:last + 1]
        mass = np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x))
        if not mass > 0:
            raise ValueError("density has zero mass")
        f = f / mass
        self.x = x
        self.density = f
        self._cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))])
        if abs(self._cum[-1] - 1.0) > _NORM_TOL:
            raise ValueError("density does not normalise")
        self._cum[-1] = 1.0

    def __repr__(self):
        return f"TabulatedDensity(n={len(self.x)}, support=[{self.x[0]}, {self.x[-1]}])"

    def __eq__(self, other):
        return (
            isinstance(other, TabulatedDensity)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.density, other.density)
        )

    __hash__ = None

    @property
    def left_endpoint(self):
        return float(self.x[0])

    @property
    def right_endpoint(self):
        return float(self.x[-1])

    def pdf(self, x):
        return np.interp(x, self.x, self.density, left=0.0, right=0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self.x[0], self.x[-1])
        k = np.clip(np.searchsorted(self.x, xc, side="right") - 1, 0, len(self.x) - 2)
        h = xc - self.x[k]
        f0 = self.density[k]
        slope = (self.density[k + 1] - f0) / (self.x[k + 1] - self.x[k])
        return np.clip(self._cum[k] + f0 * h + 0.5 * slope * h * h, 0.0, 1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        k = np.clip(np.searchsorted(self._cum, u, side="right") - 1, 0, len(self.x) - 2)
        r = u - self._cum[k]
        f0 = self.density[k]
        slope = (self.density[k + 1] - f0) / (self.x[k + 1] - self.x[k])
        disc = np.sqrt(np.maximum(f0 * f0 + 2.0 * slope * r, 0.0))
        denom = f0 + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            h = np.where(denom > 0, 2.0 * r / denom, 0.0)
        return np.clip(self.x[k] + h, self.x[k], self.x[k + 1])

    def to_dict(self):
        return {"kind": "tabulated", "x": self.x.tolist(), "density": self.density.tolist()}

    def _integrate(self, g, breaks):
        return adaptive_gauss_legendre(lambda t: self.pdf(t) * g(t), breaks)[0]

    def _breaks(self, split_left=False, split_right=False):
        xs = [self.x]
        if split_left and self.x[0] + 1e-6 < self.x[1]:
            xs.append([self.x[0] + 1e-6])
        if split_right and self.x[-1] - 1e-6 > self.x[-2]:
            xs.append([self.x[-1] - 1e-6])
        return np.unique(np.concatenate(xs))

    def _edge_diverges(self, f_edge, f_next, n):
        if f_edge > 0:
            return n >= 1
        return f_next > 0 and n >= 2

    def _shifted_power(self, w, n):
        out = np.empty_like(w)
        for idx, wi in enumerate(w):
            if n == 0:
                out[idx] = 1.0
                continue
            if self.x[0] + wi == 0 and self._edge_diverges(self.density[0], self.density[1], n):
                out[idx] = math.inf
                continue
            near = self.x[0] + wi < 1e-3 * (self.x[-1] - self.x[0])
            out[idx] = self._integrate(lambda t, wi=wi: (t + wi) ** (-float(n)), self._breaks(split_left=near))
        return out

    def _reflected_power(self, c, n):
        out = np.empty_like(c)
        for idx, ci in enumerate(c):
            if n == -1:
                out[idx] = self._integrate(lambda t, ci=ci: ci - t, self._breaks())
                continue
            if n == 0:
                out[idx] = 1.0
                continue
            if ci - self.x[-1] == 0 and self._edge_diverges(self.density[-1], self.density[-2], n):
                out[idx] = math.inf
                continue
            near = ci - self.x[-1] < 1e-3 * (self.x[-1] - self.x[0])
            out[idx] = self._integrate(lambda t, ci=ci: (ci - t) ** (-float(n)), self._breaks(split_right=near))
        return out


@dataclass(frozen=True)
class MomentTransform:
    """E[(X + z)^-k] for sign ``"plus"`` (A-type), E[(X - z)^-k] for ``"minus"``."""

    marginal: Marginal
    sign: Literal["plus", "minus"] = "plus"

    def __post_init__(self):
        if self.sign not in ("plus", "minus"):
            raise ValueError(f"sign must be 'plus' or 'minus', got {self.sign!r}")


def _check_order(order):
    if int(order) != order or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    return int(order)


def moment(transform: MomentTransform, z, order: int = 1):
    """Inverse-power moment E[(X +- z)^(-order)] of the transform's marginal.

    ``z`` may be a scalar or an array.  For the A-type transform the
    admissible interval is [-left_endpoint, inf), for the B-type it is
    (-inf, left_endpoint]; the endpoint itself is allowed and the result
    there may be ``inf``.
    """
    order = _check_order(order)
    zz = _as_array(z)
    lo = transform.marginal.left_endpoint
    if transform.sign == "plus":
        if np.any(zz < -lo) or np.any(np.isnan(zz)):
            raise DomainError(f"z must lie in [{-lo}, inf) for the A-type transform")
        out = transform.marginal._shifted_power(zz.copy(), order)
    else:
        if np.any(zz > lo) or np.any(np.isnan(zz)):
            raise DomainError(f"z must lie in (-inf, {lo}] for the B-type transform")
        out = transform.marginal._shifted_power(-zz, order)
    return _ret(out, z)


def geometric_transforms(marginal: Marginal, z, order: int = 1, sign: Literal["plus", "minus"] = "plus"):
    """Geometric-model transforms and their derivative family.

    A-type (``sign="plus"``), z in [right_endpoint, inf):
        order k -> E[a / (z - a)^k]; order 1 is E[(a/z) / (1 - a/z)].
    B-type (``sign="minus"``), z in (0, 1/right_endpoint]:
        order 1 -> E[bz / (1 - bz)], order k >= 2 -> E[b^(k-1) / (1 - bz)^k].

    With these conventions d/dz of order k is -k times order k+1 (A-type)
    and k times order k+1 (B-type, k >= 2; order 1 differentiates to order 2).
    """
    order = _check_order(order)
    zz = _as_array(z)
    hi = marginal.right_endpoint
    if sign == "plus":
        if np.any(zz < hi) or np.any(np.isnan(zz)):
            raise DomainError(f"z must lie in [{hi}, inf) for the geometric A-type transform")
        top = marginal._reflected_power(zz.copy(), order)
        below = marginal._reflected_power(zz.copy(), order - 1)
        with np.errstate(invalid="ignore"):
            out = np.where(np.isinf(top), math.inf, zz * top - below)
    elif sign == "minus":
        if np.any(zz <= 0) or np.any(zz > 1.0 / hi) or np.any(np.isnan(zz)):
            raise DomainError(f"z must lie in (0, {1.0 / hi}] for the geometric B-type transform")
        c = 1.0 / zz
        # 1/z can round just below the right endpoint
        c = np.where(zz == 1.0 / hi, hi, np.maximum(c, hi))
        if order == 1:
            top = marginal._reflected_power(c, 1)
            with np.errstate(invalid="ignore"):
                out = np.where(np.isinf(top), math.inf, c * top - 1.0)
        else:
            k = order
            # the top power decides divergence; lower ones are then finite or irrelevant
            top = marginal._reflected_power(c, k)
            acc = np.zeros_like(c)
            with np.errstate(invalid="ignore"):
                for j in range(k):
                    term = comb(k - 1, j) * c ** (k - 1 - j) * (-1) ** j
                    acc = acc + term * marginal._reflected_power(c, k - j)
                out = np.where(np.isinf(top), math.inf, acc * zz ** (-float(k)))
    else:
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return _ret(out, z)


def sample(marginal: Marginal, u):
    """The u-quantile of ``marginal`` for u in the open interval (0, 1)."""
    uu = np.asarray(u, dtype=float)
    if np.any(~((uu > 0) & (uu < 1))):
        raise DomainError("u must lie in the open interval (0, 1)")
    out = marginal.ppf(uu)
    return float(out) if np.ndim(u) == 0 else np.asarray(out, dtype=float)


def marginal_from_dict(spec: dict) -> Marginal:
    """Build a marginal from a tagged record such as ``{"kind": "uniform", "lo": 0.5, "hi": 1.5}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    builders = {
        "point": (PointMass, {"value"}),
        "uniform": (Uniform, {"lo", "hi"}),
        "shifted_power": (ShiftedPower, {"x0", "k", "lo", "hi"}),
        "reciprocal": (Reciprocal, {"lo", "hi"}),
        "tabulated": (TabulatedDensity, {"x", "density"}),
    }
    if kind not in builders:
        raise ValueError(f"unknown marginal kind {kind!r}; expected one of {sorted(builders)}")
    cls, fields = builders[kind]
    if set(spec) != fields:
        raise ValueError(f"marginal {kind!r} needs fields {sorted(fields)}, got {sorted(spec)}")
    return cls(**spec)
