"""Parameter-plane queries for the family z^2 + c."""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .dynamics import MAX_ITER, QuadMap, green

MEMBER_RADIUS = 2.0
RETURN_TOL = 1e-6


@dataclass
class MemberResult:
    """Outcome of iterating the critical orbit; ``bounded`` is budget-relative."""

    c: complex
    bounded: bool
    escape_index: int | None
    potential: float  # H(c) = G_c(c); 0 when bounded


def mandelbrot_member(c: complex, max_iter: int = MAX_ITER) -> MemberResult:
    """Iterate 0 -> c -> c^2 + c ... and report escape past |z| = 2."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    c = complex(c)
    z = 0j
    for n in range(1, max_iter + 1):
        z = z * z + c
        if abs(z) > MEMBER_RADIUS:
            # a few extra steps past 1e8 are always enough once |z| > 2
            h = green(QuadMap(c), c, max_iter + 64)
            return MemberResult(c, False, n, h.value)
    return MemberResult(c, True, None, 0.0)


def exterior_potential(c: complex, max_iter: int = MAX_ITER) -> float:
    """H(c) = G_c(c), zero on M at this budget."""
    return green(QuadMap(c), c, max_iter).value


def cardioid_contains(c: complex) -> bool:
    """c lies inside the main cardioid: |1 - sqrt(1-4c)| < 1."""
    return abs(1 - cmath.sqrt(1 - 4 * complex(c))) < 1


def period2_disk_contains(c: complex) -> bool:
    return abs(complex(c) + 1) < 0.25


def hyperbolic_period(c: complex, max_period: int = 64, max_iter: int = MAX_ITER) -> int | None:
    """Period of the attracting cycle that captures the critical orbit.

    After ``max_iter`` steps, the smallest m <= max_period with
    |z_{n+m} - z_n| < 1e-6; None if the orbit escapes or never returns.
    """
    if not 1 <= max_period <= 64:
        raise ValueError("max_period must be in 1..64")
    c = complex(c)
    z = 0j
    for _ in range(max_iter):
        z = z * z + c
        if abs(z) > MEMBER_RADIUS:
            return None
    w = z
    for m in range(1, max_period + 1):
        w = w * w + c
        if abs(w - z) < RETURN_TOL:
            return m
    return None
