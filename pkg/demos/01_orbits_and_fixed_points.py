"""Orbits of z^2 + c and the two fixed points.

Run: python demos/01_orbits_and_fixed_points.py
"""

from cdyn import QuadMap, fixed_points, iterate

# c = -1: the critical point falls onto a 2-cycle straight away
orb = iterate(QuadMap(-1), 0, 6)
print("c = -1, orbit of 0:", [z.real for z in orb.points])

# c = 0, z0 = 2 escapes; the orbit stops at the first point beyond R(c) = 2
orb = iterate(QuadMap(0), 2, 10)
print("c = 0, orbit of 2:", orb.points, "escaped at index", orb.escape_index)

# c = i/4 has an attracting fixed point; any nearby orbit settles onto it
m = QuadMap(0.25j)
z_star, z_bullet = fixed_points(m)
print(f"z_* = {z_star.points[0]:.6f}  |lambda| = {abs(z_star.multiplier):.4f}  {z_star.stability.value}")
print(f"z_b = {z_bullet.points[0]:.6f}  |lambda| = {abs(z_bullet.multiplier):.5f}  {z_bullet.stability.value}")
orb = iterate(m, 1j, 30)
print("orbit of i after 30 steps:", f"{orb.points[-1]:.6f}")

# the parabolic parameter c = 1/4: both fixed points meet with multiplier 1
for cy in fixed_points(QuadMap(0.25)):
    print("c = 1/4:", cy.points[0], cy.multiplier, cy.stability.value)
