"""Command line entry point; verbs mirror the harness tasks.

Exit status: 0 on success, 1 on a validation error, 2 when a verification
check fails.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import STOCHASTIC_TASKS, TASKS, ConfigError, ExperimentConfig, render, run, write_output

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


def _floats(text):
    vals = [float(v) for v in text.split(",") if v.strip()]
    return vals[0] if len(vals) == 1 else vals


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


# flag -> (parameter name, argparse type)
_FLAGS = {
    "s": (None, float),
    "t": (None, float),
    "level": (None, float),
    "count": (None, int),
    "n": (None, int),
    "replicas": (None, int),
    "z": (None, float),
    "a": (None, float),
    "b": (None, float),
    "n_samples": (None, int),
    "mode": (None, str),
    "probe_rows": (None, _int_list),
    "cdf_shift": (None, float),
    "z_grid": (None, _float_list),
    "resolution": (None, int),
    "threshold": (None, float),
    "n_min": (None, int),
    "n_max": (None, int),
    "factor": (None, int),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cornergrowth", description="Shape functions and simulations of inhomogeneous corner growth models.")
    sub = parser.add_subparsers(dest="task", required=True, parser_class=_Parser)
    for task, schema in TASKS.items():
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", metavar="FILE", help="JSON experiment config; flags override its fields")
        p.add_argument("--model", choices=["exponential", "geometric"])
        p.add_argument("--alpha", metavar="JSON", help='marginal of a, e.g. \'{"kind": "uniform", "lo": 0.5, "hi": 1.5}\'')
        p.add_argument("--beta", metavar="JSON", help="marginal of b")
        p.add_argument("--seed", type=int, help="64-bit master seed" + (" (required)" if task in STOCHASTIC_TASKS else ""))
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
        p.add_argument("--format", choices=["json", "csv", "svg"])
        p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
        for name in schema:
            kind = _FLAGS[name][1]
            if task == "shape-eval" and name in ("s", "t"):
                kind = _floats
            p.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=None)
    return parser


def _raw_config(args) -> dict:
    raw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([("--config", str(exc))]) from None
        if not isinstance(raw, dict):
            raise ConfigError([("--config", "config must be a JSON object")])
        if raw.get("task", args.task) != args.task:
            raise ConfigError([("task", f"config is for {raw['task']!r} but the verb is {args.task!r}")])
    raw["task"] = args.task
    problem = dict(raw.get("problem", {}))
    if args.model:
        problem["model"] = args.model
    for name in ("alpha", "beta"):
        text = getattr(args, name)
        if text:
            try:
                problem[name] = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError([(f"--{name}", str(exc))]) from None
    raw["problem"] = problem
    params = dict(raw.get("parameters", {}))
    for name in TASKS[args.task]:
        v = getattr(args, name)
        if v is not None:
            params[name] = v
    raw["parameters"] = params
    if args.seed is not None:
        raw["master_seed"] = args.seed
    output = dict(raw.get("output", {}))
    if args.format:
        output["format"] = args.format
    if args.output:
        output["path"] = args.output
    raw["output"] = output
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_dict(_raw_config(args))
        report = run(cfg, threads=args.threads)
        fmt, path = cfg.output["format"], cfg.output["path"]
        if path is None:
            sys.stdout.write(render(report, fmt))
        else:
            write_output(report, fmt, path)
    except ConfigError as exc:
        print(f"cornergrowth: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
