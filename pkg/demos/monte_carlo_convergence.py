"""Simulated G(n, n)/n approaching the limit 2 ln 3 for uniform rates.

Each system size gets its own derived seed, so any row can be rerun alone.
"""

import math

from cornergrowth import ShapeProblem, Uniform, seed_derive
from cornergrowth.verify import mc_shape_estimate

MASTER_SEED = 2024


def main() -> None:
    problem = ShapeProblem(Uniform(0.5, 1.5), Uniform(0.5, 1.5))
    target = 2 * math.log(3)
    print(f"{'n':>6} {'mean':>10} {'stderr':>9} {'gap %':>8}")
    for n in (50, 100, 200, 400, 800, 1600):
        est = mc_shape_estimate(problem, 1.0, 1.0, n, 20, seed_derive(MASTER_SEED, f"convergence/n={n}"))
        print(f"{n:>6} {est.mean:>10.5f} {est.stderr:>9.5f} {100 * (est.mean - target) / target:>8.3f}")
    print(f"limit  {target:>10.5f}")


if __name__ == "__main__":
    main()
