"""Koenig and Boettcher coordinates.

Near an attracting fixed point the Koenig coordinate phi turns the map into
multiplication by lambda; near a superattracting one the Boettcher
coordinate turns it into w -> w^k. Both are checked by their residuals.

Run: python demos/03_linearising_coordinates.py
"""

import cmath

from cdyn import Poly, QuadMap, boettcher, fixed_points, koenig

for c in (0.25j, 0.1, -0.2 + 0.1j):
    m = QuadMap(c)
    zb = fixed_points(m)[1].points[0]
    z = zb + 0.005 * cmath.exp(1j)
    print(f"c = {c}:")
    for n in (5, 20, 60):
        phi, res = koenig(m, zb, z, n)
        print(f"  n = {n:2d}  phi = {phi:.12f}  residual = {res:.1e}")

# c = 0 is already in normal form
print("Boettcher, c = 0:", boettcher(QuadMap(0), 0, 0.04 + 0.02j, 8))

# the second iterate of z^2 - 1 has a superattracting fixed point at 0
s = Poly([-1, 0, 1]).compose(Poly([-1, 0, 1]))
phi, res = boettcher(s, 0, 0.03 - 0.02j, 8)
print(f"Boettcher for z^4 - 2z^2: phi = {phi:.12f}, residual = {res:.1e}")
