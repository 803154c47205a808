"""Experiment configuration, deterministic orchestration and output emission.

A run is described by one JSON document::

    {
      "problem": {"alpha": {...}, "beta": {...}, "model": "exponential",
                  "dependence": {"alpha": {"dependence": "iid"}, "beta": {"dependence": "iid"}}},
      "task": "shape-eval",
      "parameters": {"s": 1.0, "t": 1.0},
      "master_seed": null,
      "output": {"format": "json", "path": null}
    }

Parsing fills every omitted default in explicitly, so the echoed config in
a report shows everything the run used.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, lpp
from .distributions import DomainError, marginal_from_dict
from .figures import level_set_svg
from .parallel import indexed_map
from .rng import seed_derive
from .sequences import SequenceModel, generate
from .shape import (
    DegenerateProblemError,
    ShapeProblem,
    boundary_values,
    critical_cone,
    level_set,
    solve,
)
from . import verify

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunReport",
    "TASKS",
    "STOCHASTIC_TASKS",
    "run",
    "render",
    "write_output",
    "seed_derive",
]

_REAL, _INT, _REALS, _INTS, _OPT_REAL, _OPT_REALS, _TEXT = "real", "int", "reals", "ints", "opt_real", "opt_reals", "text"

# task -> parameter -> (kind, default)
TASKS = {
    "shape-eval": {"s": (_REALS, 1.0), "t": (_REALS, 1.0)},
    "level-set": {"level": (_REAL, 1.0), "count": (_INT, 200)},
    "cone": {},
    "simulate": {"s": (_REAL, 1.0), "t": (_REAL, 1.0), "n": (_INT, 100), "replicas": (_INT, 1), "z": (_OPT_REAL, None)},
    "verify-measure": {"a": (_REAL, 1.0), "b": (_REAL, 1.0), "n_samples": (_INT, 100_000), "mode": (_TEXT, "F")},
    "verify-stationarity": {
        "z": (_REAL, 0.0),
        "n": (_INT, 10_000),
        "probe_rows": (_INTS, [1, 10, 100]),
        "cdf_shift": (_REAL, 0.0),
    },
    "verify-duality": {"z_grid": (_OPT_REALS, None), "resolution": (_INT, 10_000), "threshold": (_REAL, 1e-6)},
    "convergence-study": {
        "s": (_REAL, 1.0),
        "t": (_REAL, 1.0),
        "n_min": (_INT, 100),
        "n_max": (_INT, 1600),
        "factor": (_INT, 4),
        "replicas": (_INT, 20),
    },
}
STOCHASTIC_TASKS = frozenset({"simulate", "verify-measure", "verify-stationarity", "convergence-study"})
FORMATS = ("json", "csv", "svg")

PROVENANCE = {
    "shape-eval": "variational formula: g(s,t) as the infimum over z of s A(z) + t B(z)",
    "level-set": "level curves of g and the critical cone separating linear and strictly concave sectors",
    "cone": "critical slopes c1, c2 from second inverse moments at the interval endpoints",
    "simulate": "last-passage recursion G = max(G_left, G_below) + W, optionally with the stationary boundary",
    "verify-measure": "the involution F preserves the product exponential/geometric law",
    "verify-stationarity": "increments of the boundary model have the boundary law, independently along a row",
    "verify-duality": "g_z(1,1) equals the sup over exit points of boundary cost plus bulk shape function",
    "convergence-study": "G(ns,nt)/n converges to g(s,t); superadditivity makes the mean increase with n",
}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists (field, message) pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config: " + "; ".join(f"{f}: {m}" for f, m in self.problems))


def _is_real(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _check_param(kind, value):
    if kind == _REAL:
        return _is_real(value)
    if kind == _INT:
        return _is_int(value)
    if kind == _TEXT:
        return isinstance(value, str)
    if kind == _REALS:
        return _is_real(value) or (isinstance(value, list) and len(value) > 0 and all(_is_real(v) for v in value))
    if kind == _INTS:
        return isinstance(value, list) and len(value) > 0 and all(_is_int(v) for v in value)
    if kind == _OPT_REAL:
        return value is None or _is_real(value)
    if kind == _OPT_REALS:
        return value is None or (isinstance(value, list) and len(value) > 0 and all(_is_real(v) for v in value))
    raise AssertionError(kind)


def _normalise(kind, value):
    """Reals become floats so that 1 and 1.0 serialise alike."""
    if value is None:
        return None
    if kind in (_REAL, _OPT_REAL):
        return float(value)
    if kind in (_REALS, _OPT_REALS):
        return [float(v) for v in value] if isinstance(value, list) else float(value)
    if kind == _INTS:
        return [int(v) for v in value]
    return value


_PROBLEM_FIELDS = {"alpha", "beta", "model", "dependence"}
_TOP_FIELDS = {"problem", "task", "parameters", "master_seed", "output"}


def _parse_problem(raw, problems):
    if not isinstance(raw, dict):
        problems.append(("problem", "must be an object"))
        return None
    for k in sorted(set(raw) - _PROBLEM_FIELDS):
        problems.append((f"problem.{k}", "unknown field"))
    out = {"model": raw.get("model", lpp.EXPONENTIAL)}
    if out["model"] not in lpp.MODELS:
        problems.append(("problem.model", f"must be one of {list(lpp.MODELS)}"))
    for name in ("alpha", "beta"):
        spec = raw.get(name)
        if spec is None:
            out[name] = None
            continue
        try:
            out[name] = marginal_from_dict(spec).to_dict()
        except (TypeError, ValueError) as exc:
            problems.append((f"problem.{name}", str(exc)))
    dep = raw.get("dependence", {})
    if not isinstance(dep, dict):
        problems.append(("problem.dependence", "must be an object"))
        dep = {}
    for k in sorted(set(dep) - {"alpha", "beta"}):
        problems.append((f"problem.dependence.{k}", "unknown field"))
    out["dependence"] = {}
    for name in ("alpha", "beta"):
        d = dict(dep.get(name, {"dependence": "iid"}))
        unknown = set(d) - {"dependence", "rho"}
        if unknown:
            problems.append((f"problem.dependence.{name}", f"unknown fields {sorted(unknown)}"))
        kind = d.get("dependence", "iid")
        rho = d.get("rho", 0.0 if kind == "iid" else None)
        if not _is_real(rho):
            problems.append((f"problem.dependence.{name}.rho", "must be a real number"))
            continue
        out["dependence"][name] = {"dependence": kind} if kind == "iid" else {"dependence": kind, "rho": float(rho)}
        if kind not in ("iid", "ar1") or (kind == "ar1" and not -1 < rho < 1) or (kind == "iid" and rho != 0):
            problems.append((f"problem.dependence.{name}", "dependence must be 'iid' or 'ar1' with -1 < rho < 1"))
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, default-complete description of one run."""

    problem: dict
    task: str
    parameters: dict
    master_seed: int | None = None
    output: dict = field(default_factory=lambda: {"format": "json", "path": None})

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        problems = []
        if not isinstance(raw, dict):
            raise ConfigError([("<root>", "config must be a JSON object")])
        for k in sorted(set(raw) - _TOP_FIELDS):
            problems.append((k, "unknown field"))
        task = raw.get("task")
        if task not in TASKS:
            problems.append(("task", f"must be one of {sorted(TASKS)}"))
        problem = _parse_problem(raw.get("problem", {}), problems)

        params_raw = raw.get("parameters", {})
        params = {}
        if not isinstance(params_raw, dict):
            problems.append(("parameters", "must be an object"))
            params_raw = {}
        if task in TASKS:
            schema = TASKS[task]
            for k in sorted(set(params_raw) - set(schema)):
                problems.append((f"parameters.{k}", f"unknown parameter for task {task!r}"))
            for k, (kind, default) in schema.items():
                v = params_raw.get(k, default)
                if not _check_param(kind, v):
                    problems.append((f"parameters.{k}", f"expected {kind}, got {v!r}"))
                else:
                    params[k] = _normalise(kind, v)

        seed = raw.get("master_seed")
        if seed is not None and not (_is_int(seed) and 0 <= seed < 2**64):
            problems.append(("master_seed", "must be an integer in [0, 2**64)"))
        if task in STOCHASTIC_TASKS and seed is None:
            problems.append(("master_seed", f"task {task!r} is stochastic and needs an explicit seed"))

        output_raw = raw.get("output", {})
        if not isinstance(output_raw, dict):
            problems.append(("output", "must be an object"))
            output_raw = {}
        for k in sorted(set(output_raw) - {"format", "path"}):
            problems.append((f"output.{k}", "unknown field"))
        output = {"format": output_raw.get("format", "json"), "path": output_raw.get("path")}
        if output["format"] not in FORMATS:
            problems.append(("output.format", f"must be one of {list(FORMATS)}"))
        if output["format"] == "svg" and task != "level-set":
            problems.append(("output.format", "svg output is only available for level-set"))
        if output["path"] is not None and not isinstance(output["path"], str):
            problems.append(("output.path", "must be a string or null"))

        if task in TASKS and task != "verify-measure" and problem is not None:
            for name in ("alpha", "beta"):
                if problem.get(name) is None and f"problem.{name}" not in dict(problems):
                    problems.append((f"problem.{name}", f"task {task!r} needs a marginal"))
        if problems:
            raise ConfigError(problems)
        cfg = cls(problem=problem, task=task, parameters=params, master_seed=seed, output=output)
        if task != "verify-measure":
            try:
                cfg.shape_problem()
            except ValueError as exc:
                raise ConfigError([("problem", str(exc))]) from None
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([("<root>", f"not valid JSON: {exc}")]) from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "problem": json.loads(json.dumps(self.problem)),
            "task": self.task,
            "parameters": json.loads(json.dumps(self.parameters)),
            "master_seed": self.master_seed,
            "output": dict(self.output),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def shape_problem(self) -> ShapeProblem:
        p = self.problem
        return ShapeProblem(marginal_from_dict(p["alpha"]), marginal_from_dict(p["beta"]), p["model"])

    def sequence_models(self):
        alpha = marginal_from_dict(self.problem["alpha"])
        beta = marginal_from_dict(self.problem["beta"])
        dep = self.problem["dependence"]
        return (
            SequenceModel(alpha, dep["alpha"]["dependence"], dep["alpha"].get("rho", 0.0)),
            SequenceModel(beta, dep["beta"]["dependence"], dep["beta"].get("rho", 0.0)),
        )


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return x


@dataclass(frozen=True)
class RunReport:
    config: dict
    results: dict
    wall_clock: float
    version: str
    provenance: str
    passed: bool = True

    def numeric_payload(self) -> str:
        """Canonical JSON of the results; everything except timing."""
        return json.dumps(_jsonable(self.results), sort_keys=True)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "config": self.config,
                "results": self.results,
                "wall_clock_seconds": self.wall_clock,
                "version": self.version,
                "provenance": self.provenance,
                "passed": self.passed,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- tasks -----------------------------------------------------------------------


def _shape_eval(cfg, threads):
    p = cfg.parameters
    problem = cfg.shape_problem()
    value, z, regime = solve(problem, p["s"], p["t"])
    names = {-1: "linear-low", 0: "interior", 1: "linear-high", 2: "degenerate"}
    return {
        "s": np.broadcast_to(np.asarray(p["s"]), value.shape),
        "t": np.broadcast_to(np.asarray(p["t"]), value.shape),
        "g": value,
        "z_star": z,
        "regime": np.vectorize(names.get, otypes=[object])(regime) if value.ndim else names[int(regime)],
    }, True


def _level_set(cfg, threads):
    problem = cfg.shape_problem()
    ls = level_set(problem, cfg.parameters["level"], cfg.parameters["count"])
    g10, g01 = boundary_values(problem)
    level = cfg.parameters["level"]
    return {
        "level": ls.level,
        "theta": ls.theta,
        "s": ls.s,
        "t": ls.t,
        "g": ls.g,
        "cone": None if ls.cone is None else ls.cone.to_dict(),
        "axis_intercepts": [level / g10 if g10 > 0 else math.inf, level / g01 if g01 > 0 else math.inf],
    }, True


def _cone(cfg, threads):
    problem = cfg.shape_problem()
    return critical_cone(problem).to_dict(), True


def _simulate(cfg, threads):
    p = cfg.parameters
    problem = cfg.shape_problem()
    ma, mb = cfg.sequence_models()
    n, z = p["n"], p["z"]
    M, N = math.floor(n * p["s"]), math.floor(n * p["t"])
    if n < 1 or p["replicas"] < 1 or M < 1 or N < 1:
        raise ConfigError([("parameters", "need n, replicas >= 1 and floor(n s), floor(n t) >= 1")])
    if z is not None:
        problem.check_z(z)

    def one(r):
        rs = seed_derive(cfg.master_seed, f"replica/{r}")
        params = generate(ma, mb, M, N, rs)
        if z is None:
            return lpp.last_passage_row(params, problem.model, rs)[-1]
        return lpp.boundary_last_passage_row(params, z, problem.model, rs)[-1]

    values = np.array(indexed_map(one, p["replicas"], threads))
    scaled = values / n
    out = {
        "rows": N,
        "cols": M,
        "corner_values": values,
        "scaled_values": scaled,
        "mean": float(np.mean(scaled)),
        "stderr": float(np.std(scaled, ddof=1) / math.sqrt(len(scaled))) if len(scaled) > 1 else math.nan,
    }
    if z is None:
        out["g_target"] = float(solve(problem, p["s"], p["t"])[0])
    else:
        out["g_z_target"] = float(p["s"] * problem.A(z) + p["t"] * problem.B(z))
    return out, True


def _verify_measure(cfg, threads):
    p = cfg.parameters
    rep = verify.check_F_pushforward(p["a"], p["b"], cfg.problem["model"], p["n_samples"], cfg.master_seed, mode=p["mode"])
    return rep.to_dict(), rep.passed


def _verify_stationarity(cfg, threads):
    p = cfg.parameters
    rep = verify.check_increment_stationarity(
        cfg.shape_problem(), p["z"], p["n"], p["probe_rows"], cfg.master_seed, cdf_shift=p["cdf_shift"], models=cfg.sequence_models()
    )
    return rep.to_dict(), rep.passed


def _verify_duality(cfg, threads):
    p = cfg.parameters
    problem = cfg.shape_problem()
    grid = p["z_grid"]
    if grid is None:
        lo, hi = problem.interval
        grid = np.linspace(lo, hi, 11)[1:-1].tolist()
    rep = verify.check_duality(problem, grid, p["resolution"], threshold=p["threshold"])
    out = rep.to_dict()
    out["z_grid"] = grid
    return out, rep.passed


def _schedule(n_min, n_max, factor):
    if n_min < 1 or n_max < n_min or factor < 2:
        raise ConfigError([("parameters", "need 1 <= n_min <= n_max and factor >= 2")])
    out = []
    n = n_min
    while n <= n_max:
        out.append(n)
        n *= factor
    return out


def _convergence(cfg, threads):
    p = cfg.parameters
    problem = cfg.shape_problem()
    target = float(solve(problem, p["s"], p["t"])[0])
    rows = []
    for n in _schedule(p["n_min"], p["n_max"], p["factor"]):
        est = verify.mc_shape_estimate(
            problem,
            p["s"],
            p["t"],
            n,
            p["replicas"],
            seed_derive(cfg.master_seed, f"convergence/n={n}"),
            threads=threads,
            models=cfg.sequence_models(),
        )
        rows.append({"n": n, "mean": est.mean, "stderr": est.stderr, "g_target": target, "gap": target - est.mean})
    means = [r["mean"] for r in rows]
    return {"table": rows, "monotone": bool(all(x < y for x, y in zip(means, means[1:])))}, True


_DISPATCH = {
    "shape-eval": _shape_eval,
    "level-set": _level_set,
    "cone": _cone,
    "simulate": _simulate,
    "verify-measure": _verify_measure,
    "verify-stationarity": _verify_stationarity,
    "verify-duality": _verify_duality,
    "convergence-study": _convergence,
}


def run(config: ExperimentConfig, threads: int | None = None) -> RunReport:
    """Execute ``config``; numeric results do not depend on ``threads``.

    Domain failures (inadmissible z, a degenerate problem asked for its
    cone, ...) surface as :class:`ConfigError`.
    """
    start = time.perf_counter()
    try:
        results, passed = _DISPATCH[config.task](config, threads)
    except (DomainError, DegenerateProblemError, lpp.GridSizeError, lpp.InvalidParameterError) as exc:
        raise ConfigError([("parameters", str(exc))]) from None
    return RunReport(
        config=config.to_dict(),
        results=_jsonable(results),
        wall_clock=time.perf_counter() - start,
        version=__version__,
        provenance=PROVENANCE[config.task],
        passed=bool(passed),
    )


# -- output ----------------------------------------------------------------------


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _report_rows(res):
    return [[res["name"], res["statistic"], res["threshold"], res["p_value"], res["pass"], res["sample_size"], res["seed"]]]


def render(report: RunReport, fmt: str) -> str:
    """Text of ``report`` in ``fmt`` (json, csv or svg)."""
    task = report.config["task"]
    res = report.results
    if fmt == "json":
        return report.to_json()
    if fmt == "svg":
        if task != "level-set":
            raise ConfigError([("output.format", "svg output is only available for level-set")])
        from .shape import ConeReport, LevelSet

        cone = None if res["cone"] is None else ConeReport(
            c1=float(res["cone"]["c1"]),
            c2=float(res["cone"]["c2"]),
            linear_low_slope=tuple(float(v) for v in res["cone"]["linear_low_slope"]),
            linear_high_slope=tuple(float(v) for v in res["cone"]["linear_high_slope"]),
        )
        ls = LevelSet(
            level=res["level"],
            theta=np.asarray(res["theta"], dtype=float),
            s=np.asarray(res["s"], dtype=float),
            t=np.asarray(res["t"], dtype=float),
            g=np.asarray(res["g"], dtype=float),
            cone=cone,
        )
        return level_set_svg(ls, tuple(float(v) for v in res["axis_intercepts"]))
    if fmt != "csv":
        raise ConfigError([("output.format", f"must be one of {list(FORMATS)}")])
    if task == "shape-eval":
        cols = [np.atleast_1d(np.asarray(res[k], dtype=object)).ravel() for k in ("s", "t", "g", "z_star", "regime")]
        return _csv(zip(*[[_csv_value(v) for v in c] for c in cols]), ["s", "t", "g", "z_star", "regime"])
    if task == "level-set":
        return _csv(zip(res["theta"], res["s"], res["t"], res["g"]), ["theta", "s", "t", "g"])
    if task == "cone":
        return _csv([[res["c1"], res["c2"]]], ["c1", "c2"])
    if task == "simulate":
        return _csv(enumerate(res["scaled_values"]), ["replica", "value"])
    if task == "convergence-study":
        return _csv(([r[k] for k in ("n", "mean", "stderr", "g_target", "gap")] for r in res["table"]), ["n", "mean", "stderr", "g_target", "gap"])
    return _csv(_report_rows(res), ["name", "statistic", "threshold", "p_value", "pass", "sample_size", "seed"])


def _csv_value(v):
    return float(v) if isinstance(v, (np.floating,)) else v


def write_output(report: RunReport, fmt: str, path) -> None:
    data = render(report, fmt)
    # newline="" keeps the CRLF row terminators of the CSV writer intact
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
