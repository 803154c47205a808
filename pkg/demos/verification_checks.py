"""Run the structural checks together with their negative controls.

Each check should pass, and each deliberately broken variant should fail.
"""

import numpy as np

from cornergrowth import ShapeProblem, Uniform
from cornergrowth.verify import (
    check_duality,
    check_F_pushforward,
    check_increment_stationarity,
    check_stationary_mean,
    format_table,
)


def main() -> None:
    uni = ShapeProblem(Uniform(0.5, 1.5), Uniform(0.5, 1.5))
    geo = ShapeProblem(Uniform(0.3, 0.6), Uniform(0.2, 0.9), "geometric")
    reports = [
        check_F_pushforward(0.5, 2.0, "exponential", 100_000, seed=1),
        check_F_pushforward(0.5, 2.0, "exponential", 100_000, seed=1, mode="drop_w"),
        check_F_pushforward(0.3, 0.5, "geometric", 100_000, seed=2),
        check_increment_stationarity(uni, 0.3, 10_000, [1, 10, 100], seed=3),
        check_increment_stationarity(uni, 0.3, 10_000, [1, 10, 100], seed=3, cdf_shift=0.2),
        check_duality(uni, np.linspace(-0.4, 0.4, 5), 2_000),
        check_stationary_mean(uni, 0.2, 500, 20, seed=4),
        check_stationary_mean(uni, 0.2, 500, 20, seed=4, omit_boundary=True),
        check_stationary_mean(geo, 0.85, 500, 20, seed=5),
    ]
    print(format_table(reports))


if __name__ == "__main__":
    main()
