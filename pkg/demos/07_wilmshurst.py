"""Solutions of p(z) = conj(q(z)).

With q(z) = z the count is at most 3n - 2; z = conj(z^2) attains it.

Run: python demos/07_wilmshurst.py
"""

import numpy as np

from cdyn import Poly, wilmshurst_solve

roots, counts = wilmshurst_solve(Poly([0, 0, 1]), Poly([0, 1]))
print("z = conj(z^2):", [f"{r.z:.6f} ({r.sense.value})" for r in roots])
print("count", counts.total, "bound", counts.bound_3n2)

rng = np.random.default_rng(1)
for n in range(2, 7):
    best = 0
    for _ in range(30):
        p = Poly(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
        best = max(best, wilmshurst_solve(p, Poly([0, 1]))[1].total)
    print(f"degree {n}: most solutions seen {best}, bound {3 * n - 2}")

# a general q: the conjectured bound 2m(n-1) + n is reported, not enforced
roots, counts = wilmshurst_solve(Poly([0.1, 0, 0, 1]), Poly([0, 0.5, 0.3]))
print(f"deg p = 3, deg q = 2: {counts.total} solutions, conjectured bound {counts.lll_bound}")
