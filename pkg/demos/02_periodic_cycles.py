"""Finding every periodic cycle up to a given period.

For each m <= P the solver locates all 2^m solutions of p^m(z) = z by
functional Newton (no coefficient expansion), groups them into cycles and
reports multipliers.

Run: python demos/02_periodic_cycles.py
"""

import numpy as np

from cdyn import QuadMap, cycles_up_to

# a generic parameter: the number of primitive cycles of each period
c = 0.3 + 0.5j
cycles = cycles_up_to(QuadMap(c), 8)
counts = {}
for cy in cycles:
    counts[cy.period] = counts.get(cy.period, 0) + 1
print("primitive cycles by period:", counts)
print("points accounted for at period 8:", sum(cy.period for cy in cycles if 8 % cy.period == 0))

# the 2-cycle multiplier is 4 + 4c
(two,) = [cy for cy in cycles if cy.period == 2]
print("2-cycle multiplier", two.multiplier, "vs 4 + 4c =", 4 + 4 * c)

# c solving c^3 + 2c^2 + c + 1 = 0 makes 0 periodic of period 3
c3 = complex(min(np.roots([1, 2, 1, 1]), key=lambda r: abs(r - (-0.12 + 0.74j))))
for cy in cycles_up_to(QuadMap(c3), 3):
    if cy.period == 3:
        print(f"period 3: |lambda| = {abs(cy.multiplier):.3g}  {cy.stability.value}")

# c = 0: two 3-cycles on the unit circle, each with |lambda| = 8
for cy in cycles_up_to(QuadMap(0), 3):
    if cy.period == 3:
        print("c = 0 3-cycle:", np.round(cy.points, 4), "|lambda| =", round(abs(cy.multiplier), 10))
