"""Holomorphic dynamics and point-lens image counting.

Submodules: ``numerics`` (polynomial roots, planar Newton), ``dynamics``
(orbits, cycles, linearising coordinates, Green function), ``parameter``
(Mandelbrot set queries), ``raster`` (image rendering), ``lensing``
(lens-equation images and Wilmshurst counts) and ``cli``.
"""

from .dynamics import (
    Cycle, GreenValue, Orbit, QuadMap, Stability, boettcher, classify, cycles_up_to,
    escape_radius, fixed_points, green, iterate, koenig, period2_points,
)
from .errors import *  # noqa: F401,F403
from .lensing import (
    AuditReport, LensConfig, LensImage, Sense, audit, normalize_physical, polygon_config,
    scan_polygon, scan_two_mass, solve_images, wilmshurst_solve,
)
from .numerics import Poly, RootSet, newton2d, poly_eval, poly_roots, polar_mul_pow
from .parameter import cardioid_contains, hyperbolic_period, mandelbrot_member, period2_disk_contains
from .raster import ImageSpec, RasterBuffer, render, write_ppm

__version__ = "0.1.0"
