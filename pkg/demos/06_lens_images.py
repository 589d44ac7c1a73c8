"""Images of a point source behind point-mass lenses.

Every image is classified as sense preserving (|r'| < 1) or reversing, and
the count is audited against the winding number of the lens map.

Run: python demos/06_lens_images.py
"""

import numpy as np

from cdyn import LensConfig, audit, normalize_physical, polygon_config, scan_two_mass, solve_images


def show(cfg, label):
    imgs = solve_images(cfg)
    rep = audit(cfg, imgs)
    print(f"{label}: {rep.total} images, m+ = {rep.m_plus}, m- = {rep.m_minus}, "
          f"winding {rep.winding}, identity {rep.identity_ok}, bound {rep.bound_ok}")
    for im in imgs:
        print(f"    {im.z:.10f}  |r'| = {im.deflection_derivative_mag:.4f}  {im.sense.value}")


show(LensConfig([(1, 1.0)]), "one mass at 1")
show(LensConfig([(-0.5, 0.5), (0.5, 0.5)]), "two masses at +-0.5")
show(LensConfig([(-1.5, 0.5), (1.5, 0.5)]), "two masses at +-1.5")

# how the two-mass count depends on separation
scan = scan_two_mass(np.linspace(0.2, 3.0, 8))
print("two-mass scan:", [(round(r["separation"], 2), r["count"]) for r in scan.rows])

# a triangle with a light central mass reaches 5n - 5 for n = 4
cfg = polygon_config(3, 0.5, 1 / 3, center_mass=1e-4)
print("triangle + centre:", audit(cfg, solve_images(cfg)))

# physical units: a solar mass halfway to a source 8 kpc away
kpc = 3.0857e19
print("sigma for 1 solar mass:", normalize_physical([1.989e30], 4 * kpc, 8 * kpc, 4 * kpc))
