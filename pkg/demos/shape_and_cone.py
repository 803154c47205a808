"""Shape function for two uniform and two power-law environments.

Evaluates g along a few directions, compares the uniform case with its
closed form, and prints the critical cone where g is strictly concave.
"""

import math

import numpy as np

from cornergrowth.shape import solve
from cornergrowth import ShapeProblem, ShiftedPower, Uniform, closed_form_uniform, critical_cone, shape_value


def main() -> None:
    uni = ShapeProblem(Uniform(0.5, 1.5), Uniform(0.5, 1.5))
    print("uniform(1/2, 3/2) rates on both axes")
    for s, t in [(1, 1), (1, 3), (4, 0.5)]:
        g = shape_value(uni, s, t)
        print(f"  g({s}, {t}) = {g:.12f}   closed form {closed_form_uniform(1, 1, 1, s, t):.12f}")
    print(f"  2 ln 3 = {2 * math.log(3):.12f}")

    # a has density 3x^2 on [0, 1], b has density 4(x-1)^3 on [1, 2]
    power = ShapeProblem(ShiftedPower(0.0, 2, 0.0, 1.0), ShiftedPower(1.0, 3, 1.0, 2.0))
    cone = critical_cone(power)
    print("\npower-law rates")
    print(f"  critical cone: c1 = {cone.c1:.6f}, c2 = {cone.c2:.6f}")
    labels = {-1: "linear (low)", 0: "strictly concave", 1: "linear (high)"}
    for ratio in np.geomspace(0.02, 30, 7):
        value, z, regime = solve(power, ratio, 1.0)
        print(f"  s/t = {ratio:8.4f}  g = {float(value):.8f}  minimiser {float(z) + 0.0:.6f}  {labels[int(regime)]}")

if __name__ == "__main__":
    main()
