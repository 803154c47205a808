"""Statistical and exact checks of the structural facts behind the shape theorem.

Every check is a pure function of its arguments and seed.  Composite checks
combine several sub-tests; each sub-test gets a normalised score
``observed / cutoff`` and the report statistic is the largest score, so a
report passes exactly when ``statistic <= threshold = 1``.  Goodness-of-fit
cutoffs are Bonferroni-corrected so that each report has family-wise
level ``level``; the reported ``p_value`` is the Bonferroni-adjusted
smallest sub-test p-value.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import stats

from . import lpp
from .lpp import EXPONENTIAL, GEOMETRIC, apply_F
from .parallel import indexed_map
from .rng import seed_derive, uniforms
from .sequences import SequenceModel, generate
from .shape import ShapeProblem, boundary_values, shape_value

__all__ = [
    "TestReport",
    "MCEstimate",
    "check_F_pushforward",
    "check_increment_stationarity",
    "check_duality",
    "mc_shape_estimate",
    "check_stationary_mean",
    "format_table",
    "CORRELATION_CUTOFF",
    "DEFAULT_LEVEL",
]

DEFAULT_LEVEL = 0.01
CORRELATION_CUTOFF = 3.3
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TestReport:
    """Outcome of one verification check."""

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    threshold: float
    p_value: float | None
    passed: bool
    sample_size: int
    seed: int | None
    level: float = DEFAULT_LEVEL
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)


def format_table(reports) -> str:
    """Fixed-width table, one line per report."""
    reports = list(reports)
    w = max([4] + [len(r.name) for r in reports])
    head = f"{'name':<{w}} {'statistic':>12} {'threshold':>10} {'p_value':>10} {'n':>9}  result"
    lines = [head, "-" * len(head)]
    for r in reports:
        p = "-" if r.p_value is None else f"{r.p_value:.4g}"
        lines.append(
            f"{r.name:<{w}} {r.statistic:>12.6g} {r.threshold:>10.4g} {p:>10} {r.sample_size:>9}  "
            + ("PASS" if r.passed else "FAIL")
        )
    return "\n".join(lines)


class _SubTests:
    """Collects (label, score, p) triples for a composite report."""

    def __init__(self, count: int, level: float):
        self.alpha = level / count
        self.count = count
        self.items = []

    def ks_uniform(self, label, u):
        res = stats.kstest(u, "uniform")
        crit = stats.kstwo.ppf(1.0 - self.alpha, len(u))
        self.items.append({"test": label, "kind": "ks", "value": float(res.statistic), "cutoff": float(crit), "p": float(res.pvalue)})

    def chisquare(self, label, observed, expected):
        res = stats.chisquare(observed, expected)
        crit = stats.chi2.ppf(1.0 - self.alpha, len(observed) - 1)
        self.items.append({"test": label, "kind": "chisquare", "value": float(res.statistic), "cutoff": float(crit), "p": float(res.pvalue)})

    def correlation(self, label, u, v):
        rho = float(np.corrcoef(u, v)[0, 1])
        score = abs(rho) * math.sqrt(len(u))
        p = float(2.0 * stats.norm.sf(score))
        self.items.append({"test": label, "kind": "correlation", "value": score, "cutoff": CORRELATION_CUTOFF, "p": p, "rho": rho})

    def report(self, name, sample_size, seed, level, **details) -> TestReport:
        score = max(it["value"] / it["cutoff"] for it in self.items)
        p = min(1.0, self.count * min(it["p"] for it in self.items))
        return TestReport(
            name=name,
            statistic=float(score),
            threshold=1.0,
            p_value=float(p),
            passed=bool(score <= 1.0),
            sample_size=int(sample_size),
            seed=None if seed is None else int(seed),
            level=level,
            details={"subtests": self.items, **details},
        )


# -- involution pushforward ------------------------------------------------------


def _geometric_chisquare_bins(x, q, n):
    """Counts on {0}, {1}, ..., {K-1}, {>= K} with every expected count >= 5."""
    probs = []
    k = 0
    while n * (1 - q) * q**k >= 5 and n * q ** (k + 1) >= 5:
        probs.append((1 - q) * q**k)
        k += 1
    probs.append(q**k)
    xi = np.minimum(x.astype(np.int64), k)
    observed = np.bincount(xi, minlength=k + 1)
    return observed, n * np.asarray(probs)


def _pit(x, model, param, v=None):
    """CDF transform; randomised by ``v`` for the geometric law P(X >= k) = param**k."""
    if model == EXPONENTIAL:
        return -np.expm1(-param * x)
    tail = param**x
    return 1.0 - tail + v * tail * (1.0 - param)


def check_F_pushforward(a: float, b: float, model: str, n_samples: int, seed: int, mode: str = "F", level: float = DEFAULT_LEVEL) -> TestReport:
    """Test that the involution maps the product law to itself.

    Inputs are independent with rates a, b, a+b (exponential) or parameters
    a, b, ab (geometric).  ``mode="identity"`` skips the map and
    ``mode="drop_w"`` applies a corrupted map without the ``+w`` term; the
    latter is a negative control and must fail.
    """
    if model == EXPONENTIAL:
        if not (a > 0 and b > 0):
            raise ValueError("exponential pushforward needs a, b > 0")
        params = (a, b, a + b)
    elif model == GEOMETRIC:
        if not (0 < a < 1 and 0 < b < 1):
            raise ValueError("geometric pushforward needs a, b in (0, 1)")
        params = (a, b, a * b)
    else:
        raise ValueError(f"unknown model {model!r}")
    if mode not in ("F", "identity", "drop_w"):
        raise ValueError(f"mode must be 'F', 'identity' or 'drop_w', got {mode!r}")
    n = int(n_samples)
    if n < 10:
        raise ValueError("n_samples must be at least 10")

    draws = []
    for label, p in zip("xyw", params):
        u = uniforms(seed_derive(seed, f"verify/F/{label}"), n)
        draws.append(-np.log(u) / p if model == EXPONENTIAL else np.floor(np.log(u) / math.log(p)))
    x, y, w = draws
    if mode == "F":
        out = apply_F(x, y, w)
    elif mode == "drop_w":
        mn = np.minimum(x, y)
        out = (x - mn, y - mn, mn)
    else:
        out = (x, y, w)

    sub = _SubTests(6, level)
    pits = []
    for k, (label, vals, p) in enumerate(zip(("x", "y", "w"), out, params)):
        if model == EXPONENTIAL:
            u = _pit(vals, model, p)
            sub.ks_uniform(f"marginal {label}", u)
        else:
            observed, expected = _geometric_chisquare_bins(vals, p, n)
            sub.chisquare(f"marginal {label}", observed, expected)
            u = _pit(vals, model, p, uniforms(seed_derive(seed, f"verify/F/pit/{k}"), n))
        pits.append(u)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        sub.correlation(f"corr {'xyw'[i]}{'xyw'[j]}", pits[i], pits[j])
    return sub.report(f"F-pushforward[{model},{mode}]", n, seed, level, a=a, b=b, model=model, mode=mode)


# -- increment stationarity ------------------------------------------------------


def _sequences(problem, models):
    if models is None:
        return SequenceModel(problem.alpha), SequenceModel(problem.beta)
    return models


def check_increment_stationarity(
    problem: ShapeProblem,
    z: float,
    n: int,
    probe_rows,
    seed: int,
    cdf_shift: float = 0.0,
    level: float = DEFAULT_LEVEL,
    models=None,
) -> TestReport:
    """PIT test that I(., l) has the boundary law, independently across sites.

    For each probe row l the increments I(i, l), i = 1..n, are mapped
    through the CDF of the boundary weight W(i, 0) (randomised for the
    geometric model) and tested for uniformity (KS) and for lag-1
    correlation.  ``cdf_shift`` moves z in the CDF only; a nonzero shift is
    a negative control.
    """
    rows = sorted(set(int(r) for r in probe_rows))
    if not rows or rows[0] < 0:
        raise ValueError("probe_rows must be nonempty and nonnegative")
    n = int(n)
    ma, mb = _sequences(problem, models)
    params = generate(ma, mb, n, max(rows[-1], 1), seed)
    inc = lpp.boundary_increment_rows(params, z, problem.model, seed, rows)
    zc = z + cdf_shift
    sub = _SubTests(2 * len(rows), level)
    for l in rows:
        I = inc[l]
        if problem.model == EXPONENTIAL:
            u = _pit(I, EXPONENTIAL, params.a + zc)
        else:
            v = uniforms(seed_derive(seed, f"verify/stationarity/pit/{l}"), n)
            u = _pit(I, GEOMETRIC, params.a / zc, v)
        sub.ks_uniform(f"row {l} uniformity", u)
        sub.correlation(f"row {l} lag-1", u[:-1], u[1:])
    return sub.report(
        f"increment-stationarity[z={z:g}{', shift=' + format(cdf_shift, 'g') if cdf_shift else ''}]",
        n,
        seed,
        level,
        z=z,
        rows=rows,
        cdf_shift=cdf_shift,
    )


# -- duality ---------------------------------------------------------------------


def _branches(problem, z, t):
    """The two candidate functions of the exit fraction t in [0, 1]."""
    Az, Bz = float(problem.A(z)), float(problem.B(z))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    g10, g01 = boundary_values(problem)
    inner = t > 0
    g_t1 = np.full(t.shape, g01)
    g_1t = np.full(t.shape, g10)
    if inner.any():
        g_t1[inner] = shape_value(problem, t[inner], np.ones(inner.sum()))
        g_1t[inner] = shape_value(problem, np.ones(inner.sum()), t[inner])
    # boundary share of a zero-length stretch is zero even if A or B is infinite
    with np.errstate(invalid="ignore"):
        h1 = np.where(t == 1, 0.0, (1 - t) * Az) + g_t1
        h2 = np.where(t == 1, 0.0, (1 - t) * Bz) + g_1t
    return h1, h2


def _golden_max(f, lo, hi, tol=1e-13, max_iter=200):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return max(fc, fd)


def check_duality(problem: ShapeProblem, z_grid, t_resolution: int, threshold: float = 1e-6) -> TestReport:
    """Compare g_z(1, 1) with the sup over exit fractions of boundary plus bulk.

    The right-hand side is maximised on a uniform t-grid of
    ``t_resolution`` intervals and then refined by golden-section search on
    the two grid cells next to the best grid point of each branch.
    """
    z_vals = [float(z) for z in z_grid]
    for z in z_vals:
        problem.check_z(z)
    res = int(t_resolution)
    if res < 2:
        raise ValueError("t_resolution must be at least 2")
    t = np.linspace(0.0, 1.0, res + 1)
    rows = []
    for z in z_vals:
        lhs = float(problem.A(z) + problem.B(z))
        h1, h2 = _branches(problem, z, t)
        best = -math.inf
        t_star = None
        for branch, h in ((0, h1), (1, h2)):
            k = int(np.argmax(h))
            cand = float(h[k])
            lo, hi = t[max(k - 1, 0)], t[min(k + 1, res)]
            refined = _golden_max(lambda x, branch=branch: float(_branches(problem, z, x)[branch][0]), lo, hi)
            cand = max(cand, refined)
            if cand > best:
                best, t_star = cand, float(t[k])
        rows.append({"z": z, "lhs": lhs, "rhs": best, "gap": abs(lhs - best), "t_star_grid": t_star})
    gap = max(r["gap"] for r in rows)
    return TestReport(
        name="duality",
        statistic=float(gap),
        threshold=float(threshold),
        p_value=None,
        passed=bool(gap <= threshold),
        sample_size=res,
        seed=None,
        details={"per_z": rows},
    )


# -- Monte Carlo -----------------------------------------------------------------


class MCEstimate(NamedTuple):
    mean: float
    stderr: float
    values: np.ndarray


def _replica_seed(seed, r):
    return seed_derive(seed, f"replica/{r}")


def _summary(values):
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.nan
    return mean, stderr


def mc_shape_estimate(problem: ShapeProblem, s: float, t: float, n: int, replicas: int, seed: int, threads: int | None = 1, models=None) -> MCEstimate:
    """Replica mean of G(floor(ns), floor(nt)) / n with the memory-lean recursion."""
    if n < 1 or replicas < 1:
        raise ValueError("n and replicas must be at least 1")
    M, N = math.floor(n * s), math.floor(n * t)
    if M < 1 or N < 1:
        raise ValueError("floor(n s) and floor(n t) must be at least 1")
    lpp._check_stream_size(M, N)
    ma, mb = _sequences(problem, models)

    def one(r):
        rs = _replica_seed(seed, r)
        params = generate(ma, mb, M, N, rs)
        return lpp.last_passage_row(params, problem.model, rs)[-1] / n

    values = np.array(indexed_map(one, replicas, threads))
    mean, stderr = _summary(values)
    return MCEstimate(mean, stderr, values)


def _conditional_mean(params, z, model):
    if model == EXPONENTIAL:
        return float(np.sum(1.0 / (params.a + z)) + np.sum(1.0 / (params.b - z)))
    p, q = params.a / z, params.b * z
    return float(np.sum(p / (1 - p)) + np.sum(q / (1 - q)))


def check_stationary_mean(
    problem: ShapeProblem,
    z: float,
    n: int,
    replicas: int,
    seed: int,
    omit_boundary: bool = False,
    threads: int | None = 1,
    sigmas: float = 4.0,
    models=None,
) -> TestReport:
    """Replica mean of Ĝ(n, n)/n minus its exact conditional mean, in standard errors.

    ``omit_boundary=True`` drops the boundary weights (plain G) and is a
    negative control.
    """
    problem.check_z(z)
    if replicas < 2:
        raise ValueError("need at least two replicas for a standard error")
    ma, mb = _sequences(problem, models)

    def one(r):
        rs = _replica_seed(seed, r)
        params = generate(ma, mb, n, n, rs)
        if omit_boundary:
            g = lpp.last_passage_row(params, problem.model, rs)[-1]
        else:
            g = lpp.boundary_last_passage_row(params, z, problem.model, rs)[-1]
        return g / n, _conditional_mean(params, z, problem.model) / n

    out = np.array(indexed_map(one, replicas, threads))
    diff = out[:, 0] - out[:, 1]
    mean, stderr = _summary(diff)
    score = abs(mean) / stderr if stderr > 0 else (0.0 if mean == 0 else math.inf)
    return TestReport(
        name=f"stationary-mean[z={z:g}{', no boundary' if omit_boundary else ''}]",
        statistic=float(score),
        threshold=float(sigmas),
        p_value=None,
        passed=bool(score <= sigmas),
        sample_size=int(replicas),
        seed=int(seed),
        details={
            "n": n,
            "z": z,
            "mean_G_over_n": float(np.mean(out[:, 0])),
            "mean_exact_over_n": float(np.mean(out[:, 1])),
            "mean_difference": mean,
            "stderr": stderr,
            "g_z_11": float(problem.A(z) + problem.B(z)),
        },
    )
