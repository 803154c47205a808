"""Write the level curve g = 1 of the power-law environment as an SVG.

The two dashed rays bound the cone of strict concavity; outside it the
curve is a straight segment.  Pass an output path, default level_set.svg.
"""

import sys

from cornergrowth.harness import ExperimentConfig, run, write_output


def main(path: str = "level_set.svg") -> None:
    cfg = ExperimentConfig.from_dict(
        {
            "problem": {
                "alpha": {"kind": "shifted_power", "x0": 0.0, "k": 2, "lo": 0.0, "hi": 1.0},
                "beta": {"kind": "shifted_power", "x0": 1.0, "k": 3, "lo": 1.0, "hi": 2.0},
            },
            "task": "level-set",
            "parameters": {"level": 1.0, "count": 400},
            "output": {"format": "svg", "path": path},
        }
    )
    report = run(cfg)
    write_output(report, "svg", path)
    s0, t0 = report.results["axis_intercepts"]
    print(f"wrote {path}: {len(report.results['s'])} points, axis crossings s = {s0:.6f}, t = {t0:.6f}")


if __name__ == "__main__":
    main(*sys.argv[1:2])
