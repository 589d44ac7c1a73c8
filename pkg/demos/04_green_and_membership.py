"""The Green function, the exterior potential and Mandelbrot membership.

Run: python demos/04_green_and_membership.py
"""

import math

import numpy as np

from cdyn import QuadMap, cardioid_contains, green, hyperbolic_period, mandelbrot_member
from cdyn.parameter import exterior_potential

print("G_0(2) =", green(QuadMap(0), 2).value, " log 2 =", math.log(2))

m = QuadMap(-0.5 + 0.6j)
z = 4 - 1j
print("G(p(z)) - 2 G(z) =", green(m, m(z)).value - 2 * green(m, z).value)

for c in (0, -1, -2, 1j, 0.25, 0.5, 1, 0.3 + 0.6j):
    r = mandelbrot_member(c)
    tag = "bounded" if r.bounded else f"escaped at {r.escape_index}, H = {r.potential:.6f}"
    print(f"c = {c!s:>10}: {tag}; cardioid {cardioid_contains(c)}; period {hyperbolic_period(c)}")

# H(c) level sets: equipotentials around M
for c in np.linspace(0.3, 2.0, 5):
    print(f"H({c:.3f}) = {exterior_potential(c):.6f}")
