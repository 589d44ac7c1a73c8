"""Iteration of p_c(z) = z^2 + c: orbits, periodic cycles, linearising
coordinates and the Green function of the filled Julia set.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from .errors import BranchAmbiguity, CountMismatch, NotAttracting, OutOfBasin, OutOfDisc
from .numerics import EPS, Poly, aberth, cluster_points, poly_eval, poly_roots

INDIFFERENT_BAND = 1e-6
TOL_CYCLE = 1e-9
DEDUPE_TOL = 1e-8
MULTISTART_GRID = 64
R_BIG = 1e8
MAX_ITER = 1000
DISC_MAX = 0.1
NEWTON_CYCLE_ITERS = 200

# loose merge radius for near-multiple (parabolic) periodic points
_MULTIPLE_TOL = 1e-4
_MULTIPLE_DERIV = 1e-2


@dataclass(frozen=True)
class QuadMap:
    """The quadratic map z -> z^2 + c."""

    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))
        if not cmath.isfinite(self.c):
            raise ValueError("c must be finite")

    def __call__(self, z):
        return z * z + self.c

    def derivative(self, z):
        return 2 * z

    def as_poly(self) -> Poly:
        return Poly([self.c, 0, 1])


Map = Union[QuadMap, Poly]


def _as_poly(m: Map) -> Poly:
    return m.as_poly() if isinstance(m, QuadMap) else m


def _deriv(m: Map, z):
    if isinstance(m, QuadMap):
        return 2 * z
    return poly_eval(m, z)[1]


class Stability(str, Enum):
    SUPERATTRACTING = "superattracting"
    ATTRACTING = "attracting"
    INDIFFERENT = "indifferent"
    REPELLING = "repelling"


def classify(multiplier: complex, band: float = INDIFFERENT_BAND) -> Stability:
    a = abs(multiplier)
    if a == 0.0:
        return Stability.SUPERATTRACTING
    if abs(a - 1.0) <= band:
        return Stability.INDIFFERENT
    if a < 1.0:
        return Stability.ATTRACTING
    return Stability.REPELLING


@dataclass
class Orbit:
    z0: complex
    points: list[complex]
    escaped: bool = False
    escape_index: int | None = None


@dataclass
class Cycle:
    """A periodic orbit, its multiplier and stability class."""

    points: list[complex]
    multiplier: complex
    stability: Stability
    multiplicity: int = 1

    @property
    def period(self) -> int:
        return len(self.points)

    @classmethod
    def from_points(cls, m: Map, points, multiplicity: int = 1) -> Cycle:
        lam = complex(np.prod([_deriv(m, complex(z)) for z in points]))
        return cls([complex(z) for z in points], lam, classify(lam), multiplicity)


@dataclass
class GreenValue:
    value: float
    iterations_used: int
    converged: bool


def escape_radius(m: Map) -> float:
    """Radius beyond which every orbit of ``m`` escapes monotonically.

    For a quadratic map this is max(2, |c|). A general polynomial of degree
    d >= 2 gets max(1, (1 + sum_{j<d}|a_j|)/|a_d|); affine maps never escape
    in this sense and report infinity.
    """
    if isinstance(m, QuadMap):
        return max(2.0, abs(m.c))
    if m.degree < 2:
        return math.inf
    a = np.abs(m.coeffs)
    return max(1.0, (1.0 + float(np.sum(a[:-1]))) / float(a[-1]))


def iterate(m: Map, z0: complex, n: int) -> Orbit:
    """Orbit z_0..z_n, cut short at the first point beyond the escape radius."""
    if n < 0:
        raise ValueError("n must be non-negative")
    R = escape_radius(m)
    z = complex(z0)
    pts = [z]
    if abs(z) > R:
        return Orbit(complex(z0), pts, True, 0)
    for k in range(1, n + 1):
        z = complex(m(z))
        pts.append(z)
        if abs(z) > R:
            return Orbit(complex(z0), pts, True, k)
    return Orbit(complex(z0), pts)


def fixed_points(m: QuadMap) -> tuple[Cycle, Cycle]:
    """The fixed points (z_*, z_bullet) = 1/2 +- sqrt(1-4c)/2.

    Multipliers are 1 +- sqrt(1-4c) from the closed form.
    """
    s = cmath.sqrt(1 - 4 * m.c)
    out = []
    for sign in (1, -1):
        lam = 1 + sign * s
        out.append(Cycle([0.5 + sign * s / 2], lam, classify(lam)))
    return out[0], out[1]


def period2_points(m: QuadMap) -> Cycle | None:
    """The 2-cycle -1/2 +- sqrt(-3-4c)/2 with multiplier 4+4c, or None at c = -3/4."""
    s = cmath.sqrt(-3 - 4 * m.c)
    if abs(s) == 0.0:
        return None
    lam = 4 + 4 * m.c
    return Cycle([-0.5 + s / 2, -0.5 - s / 2], lam, classify(lam))


# -- periodic points of all periods up to P ----------------------------------


def _iterate_with_derivative(c: complex, z: np.ndarray, m: int):
    """p_c^m(z) and its derivative by forward iteration (chain rule)."""
    w = z.copy()
    d = np.ones_like(z)
    for _ in range(m):
        d = 2 * w * d
        w = w * w + c
    return w, d


def _period_eq(c: complex, m: int):
    def f(z):
        w, d = _iterate_with_derivative(c, z, m)
        return w - z, d - 1

    return f


def _divisors(m: int) -> list[int]:
    return [d for d in range(1, m) if m % d == 0]


def _multistart(c: complex, m: int, R: float) -> np.ndarray:
    """Distinct roots of p^m(z) = z reached by Newton from a grid on |z| <= R."""
    g = _period_eq(c, m)
    x = np.linspace(-R, R, MULTISTART_GRID)
    zz = (x[None, :] + 1j * x[:, None]).ravel()
    z = zz[np.abs(zz) <= R]
    done = np.zeros(z.size, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(NEWTON_CYCLE_ITERS):
            val, der = g(z)
            step = val / der
            bad = ~np.isfinite(step) | (np.abs(z) > 1e6)
            z = np.where(bad, np.nan, z - step)
            done = np.abs(step) <= 4 * EPS * (1 + np.abs(z))
            if np.all(done | np.isnan(z)):
                break
    return _dedupe(c, m, z[done & np.isfinite(z)])


def _polish(c: complex, m: int, z: np.ndarray, steps: int = 3) -> np.ndarray:
    g = _period_eq(c, m)
    with np.errstate(all="ignore"):
        for _ in range(steps):
            val, der = g(z)
            step = val / der
            z = np.where(np.isfinite(step) & (np.abs(step) < 1e-6 * (1 + np.abs(z))), z - step, z)
    return z


def _accepted(c: complex, m: int, z: np.ndarray) -> np.ndarray:
    val, der = _period_eq(c, m)(z)
    with np.errstate(all="ignore"):
        near = np.abs(val) <= 1e2 * m * EPS * (1 + np.abs(z)) * (1 + np.abs(der))
        step_ok = np.abs(val / der) <= TOL_CYCLE * (1 + np.abs(z))
    return near | step_ok


def _dedupe(c: complex, m: int, z: np.ndarray) -> np.ndarray:
    """Distinct roots among many Newton hits, best residual kept per root."""
    if z.size == 0:
        return z
    val, der = _period_eq(c, m)(z)
    order = np.argsort(np.abs(val))
    z, loose = z[order], (np.abs(der) < _MULTIPLE_DERIV)[order]
    reps: list[complex] = []
    rep_loose: list[bool] = []
    for zi, li in zip(z, loose):
        if reps:
            r = np.asarray(reps)
            tol = np.where(np.asarray(rep_loose) & li, _MULTIPLE_TOL, DEDUPE_TOL) * (1 + abs(zi))
            if np.any(np.abs(r - zi) < tol):
                continue
        reps.append(zi)
        rep_loose.append(bool(li))
    return np.array(reps, dtype=np.complex128)


def _merge(points: np.ndarray, near_multiple: np.ndarray) -> list[list[int]]:
    """Cluster points: tight radius always, loose radius for near-multiple roots."""
    groups = cluster_points(points, DEDUPE_TOL)
    # fold groups whose representatives are near-multiple and close together
    reps = np.array([points[g[0]] for g in groups])
    flag = np.array([bool(np.any(near_multiple[g])) for g in groups])
    idx = np.flatnonzero(flag)
    if idx.size > 1:
        sub = cluster_points(reps[idx], _MULTIPLE_TOL)
        merged = []
        used = set()
        for s in sub:
            merged.append([i for k in s for i in groups[idx[k]]])
            used.update(idx[k] for k in s)
        groups = [g for j, g in enumerate(groups) if j not in used] + merged
    return groups


def _periodic_points(c: complex, m: int, lower: np.ndarray, R: float):
    """All 2^m roots of p^m(z) = z with multiplicity.

    Returns (points, multiplicities, is_lower) with one entry per distinct root.
    """
    target = 2**m
    found = _multistart(c, m, R)
    # close orbits: images of periodic points are periodic points
    if found.size:
        orb = [found]
        w = found
        for _ in range(m - 1):
            w = w * w + c
            orb.append(w)
        found = _polish(c, m, np.concatenate(orb))
    pool = np.concatenate([lower, found]) if lower.size else found
    pool = pool[_accepted(c, m, pool)] if pool.size else pool
    pool = _dedupe(c, m, pool)

    missing = target - pool.size
    extra = np.zeros(0, dtype=np.complex128)
    if missing < 0:
        raise CountMismatch(f"period {m}: {pool.size} distinct roots exceed degree {target}")
    if missing > 0:
        g = _period_eq(c, m)
        angles = 2 * np.pi * np.arange(missing) / missing + 0.4
        seeds = R * np.exp(1j * angles)

        def noise(z):
            _, der = g(z)
            return 8 * m * EPS * (1 + np.abs(z)) * (1 + np.abs(der))

        extra, settled = aberth(g, seeds, fixed=pool, noise=noise)
        if not np.all(settled & np.isfinite(extra)) or not np.all(_accepted(c, m, extra)):
            raise CountMismatch(
                f"period {m}: found {pool.size} roots, {missing} more did not converge"
            )

    allpts = np.concatenate([pool, extra])
    origin = np.concatenate([np.zeros(pool.size, bool), np.ones(extra.size, bool)])
    _, der = _period_eq(c, m)(allpts)
    near_mult = np.abs(der) < _MULTIPLE_DERIV
    groups = _merge(allpts, near_mult)

    pts, mults, is_lower = [], [], []
    lower_set = lower
    for grp in groups:
        # prefer a Newton-polished member as representative
        fixed_members = [i for i in grp if not origin[i]]
        if len(grp) > 1 and not np.all(near_mult[grp]):
            raise CountMismatch(f"period {m}: a simple root was found twice near {allpts[grp[0]]}")
        rep = allpts[fixed_members[0]] if fixed_members else complex(np.mean(allpts[grp]))
        tol = _MULTIPLE_TOL if near_mult[grp[0]] else DEDUPE_TOL
        low = bool(lower_set.size) and bool(
            np.min(np.abs(lower_set - rep)) < tol * (1 + abs(rep))
        )
        pts.append(complex(rep))
        mults.append(len(grp))
        is_lower.append(low)
    if sum(mults) != target:
        raise CountMismatch(f"period {m}: {sum(mults)} periodic points, expected {target}")
    return np.array(pts), np.array(mults), np.array(is_lower, dtype=bool)


def _coefficient_crosscheck(c: complex, m: int, pts: np.ndarray) -> None:
    p = QuadMap(c).as_poly()
    comp = Poly([0, 1])
    for _ in range(m):
        comp = p.compose(comp)
    rs = poly_roots(comp - Poly([0, 1]))
    ref = np.array(rs.distinct)
    for z in pts:
        if np.min(np.abs(ref - z)) > 1e-5 * (1 + abs(z)):
            raise CountMismatch(f"period {m}: {z} not confirmed by coefficient root finding")
    for z in ref:
        if np.min(np.abs(pts - z)) > 1e-5 * (1 + abs(z)):
            raise CountMismatch(f"period {m}: coefficient root {z} missed by functional search")


def cycles_up_to(m: QuadMap, max_period: int) -> list[Cycle]:
    """Every periodic cycle of period 1..max_period, sorted by period.

    Periodic points for each period come from multistart Newton on
    p^m(z) - z evaluated by forward iteration; points not reached from the
    grid are completed by Aberth iteration deflated by the known ones. For
    m <= 4 the set is cross-checked against roots of the expanded
    polynomial.

    Raises:
        CountMismatch: the points dividing some period m do not add up to
            2^m with multiplicity.
    """
    if not 1 <= max_period <= 8:
        raise ValueError("max_period must be in 1..8")
    c = m.c
    R = escape_radius(m)
    per_level: dict[int, np.ndarray] = {}
    cycles: list[Cycle] = []
    for per in range(1, max_period + 1):
        lower = [per_level[d] for d in _divisors(per)]
        lower_pts = np.concatenate(lower) if lower else np.zeros(0, complex)
        pts, mults, is_lower = _periodic_points(c, per, lower_pts, R)
        if per <= 4:
            _coefficient_crosscheck(c, per, pts)
        per_level[per] = pts
        exact = pts[~is_lower]
        exact_mult = mults[~is_lower]
        cycles.extend(_group_cycles(m, per, exact, exact_mult))
    return cycles


def _group_cycles(m: QuadMap, per: int, pts: np.ndarray, mults: np.ndarray) -> list[Cycle]:
    remaining = list(range(pts.size))
    out = []
    seen = set()
    while remaining:
        i = remaining.pop(0)
        chain = [i]
        z = pts[i]
        for _ in range(per - 1):
            z = m(z)
            cand = [j for j in remaining]
            if not cand:
                raise CountMismatch(f"period {per}: orbit of {pts[i]} leaves the periodic set")
            dist = np.abs(pts[cand] - z)
            k = int(np.argmin(dist))
            tol = _MULTIPLE_TOL if mults[cand[k]] > 1 else 1e-6
            if dist[k] > tol * (1 + abs(z)):
                raise CountMismatch(f"period {per}: orbit of {pts[i]} leaves the periodic set")
            chain.append(cand[k])
            remaining.remove(cand[k])
            z = pts[cand[k]]
        ring = [complex(pts[j]) for j in chain]
        start = min(range(per), key=lambda j: (ring[j].real, ring[j].imag))
        ring = ring[start:] + ring[:start]
        key = (round(ring[0].real, 8), round(ring[0].imag, 8))
        if key in seen:
            continue
        seen.add(key)
        cy = Cycle.from_points(m, ring, int(min(mults[j] for j in chain)))
        if any(abs(z) <= TOL_CYCLE for z in ring):
            # passes through the critical point 0: the product is rounding noise
            cy = Cycle(ring, 0j, Stability.SUPERATTRACTING, cy.multiplicity)
        out.append(cy)
    out.sort(key=lambda cy: (cy.points[0].real, cy.points[0].imag))
    return out


# -- linearising coordinates ---------------------------------------------------


def _shifted(m: Map, fixed: complex) -> np.ndarray:
    """Taylor coefficients of u -> m(u + fixed) - fixed, constant term dropped."""
    p = _as_poly(m)
    a = p.taylor_shift(fixed).coeffs.copy()
    a[0] -= fixed
    scale = float(np.max(np.abs(p.coeffs))) * (1 + abs(fixed)) ** p.degree
    if abs(a[0]) > 1e-9 * scale:
        raise ValueError(f"{fixed} is not a fixed point (residual {abs(a[0]):.3g})")
    a[0] = 0
    return a


def _horner(a: np.ndarray, u: complex) -> complex:
    out = complex(a[-1])
    for coef in a[-2::-1]:
        out = out * u + coef
    return out


def _contracts(step, r: float, samples: int = 20, steps: int = 100) -> bool:
    for j in range(samples):
        u = cmath.rect(r, 2 * math.pi * j / samples)
        prev = abs(u)
        for _ in range(steps):
            u = step(u)
            if u == 0:
                break
            if not abs(u) < prev:
                return False
            prev = abs(u)
    return True


def _adaptive_radius(step, extra=lambda r: True) -> float:
    r = DISC_MAX
    for _ in range(60):
        if _contracts(step, r) and extra(r):
            return r
        r /= 2
    return 0.0


def koenig_radius(m: Map, fixed: complex) -> float:
    """Largest radius <= 0.1 (halving) on which 20 sample orbits contract."""
    a = _shifted(m, fixed)
    return _adaptive_radius(lambda u: _horner(a, u))


def koenig(m: Map, fixed: complex, z: complex, n: int, radius: float | None = None):
    """Koenig coordinate phi_n(z) = (m^n(z) - fixed) / lambda^n.

    Evaluated in the shifted coordinate u = z - fixed as the product
    u_0 * prod_k q(u_k)/(lambda u_k), which keeps full relative precision
    even after |u_n| has dropped below rounding level.

    Returns ``(phi, residual)`` with residual = |phi_n(m(z)) - lambda phi_n(z)|.
    """
    a = _shifted(m, fixed)
    lam = complex(a[1]) if a.size > 1 else 0j
    if not 0 < abs(lam) < 1:
        raise NotAttracting(f"|lambda| = {abs(lam):.6g} is not in (0, 1)")
    if radius is None:
        radius = koenig_radius(m, fixed)
    h = a[1:] / lam  # q(u) / (lambda u)

    def q(u):
        return u * _horner(a[1:], u)

    u0 = complex(z) - fixed
    u = u0
    steps = 0
    while not abs(u) <= radius and steps < max(10 * n, 1) and abs(u) < R_BIG:
        u = q(u)
        steps += 1
    if not abs(u) <= radius:
        raise OutOfBasin(f"orbit of {z} does not reach the linearisation disc in {10 * n} steps")

    def phi(u):
        out = u
        for _ in range(n):
            out *= _horner(h, u)
            u = q(u)
        return out

    val = phi(u0)
    return complex(val), float(abs(phi(q(u0)) - lam * val))


def _local_degree(a: np.ndarray) -> int:
    scale = float(np.max(np.abs(a)))
    for k in range(1, a.size):
        if abs(a[k]) > 1e-12 * scale:
            return k
    raise ValueError("map is constant near the fixed point")


def boettcher_radius(m: Map, fixed: complex) -> float:
    a = _shifted(m, fixed)
    k = _local_degree(a)
    g = a[k:] / a[k]
    return _adaptive_radius(
        lambda u: _horner(a, u),
        lambda r: all(abs(_horner(g, cmath.rect(r, t)) - 1) < 0.5 for t in np.linspace(0, 2 * np.pi, 20)),
    )


def boettcher(m: Map, fixed: complex, z: complex, n: int, radius: float | None = None):
    """Boettcher coordinate near a superattracting fixed point.

    With q(u) = a u^k g(u), g(0) = 1, the coordinate is normalised by
    alpha^(k-1) = a so the model map is w -> w^k, and
    phi_n(u) = alpha u prod_{j<n} g(u_j)^(1/k^(j+1)), i.e. the k^n-th root
    of alpha q^n(u) taken on the branch nearest phi_{n-1}.

    Returns ``(phi, residual)`` with residual = |phi_n(m(z)) - phi_n(z)^k|.
    """
    a = _shifted(m, fixed)
    k = _local_degree(a)
    if k < 2:
        raise NotAttracting("fixed point is not superattracting")
    if radius is None:
        radius = boettcher_radius(m, fixed)
    u0 = complex(z) - fixed
    if abs(u0) >= radius:
        raise OutOfDisc(f"|z - fixed| = {abs(u0):.3g} >= {radius:.3g}")
    lead = complex(a[k])
    alpha = lead ** (1 / (k - 1)) if k > 2 else lead
    g = a[k:] / lead

    def phi(u):
        out = alpha * u
        for j in range(1, n + 1):
            spacing = abs(out) * 2 * math.sin(math.pi / k**j)
            if out != 0 and spacing < 1e-9:
                raise BranchAmbiguity(f"k^n-th root branches {spacing:.2g} apart at n = {j}")
            gu = _horner(g, u)
            if gu != 1:
                out *= cmath.exp(cmath.log(gu) / k**j)
            u = _horner(a, u)
        return out

    val = phi(u0)
    return complex(val), float(abs(phi(_horner(a, u0)) - val**k))


# -- Green function ------------------------------------------------------------


def green(m: QuadMap, z: complex, max_iter: int = MAX_ITER) -> GreenValue:
    """Escape rate G_c(z) = lim 2^-n log|z_n|.

    Iterates until |z_n| > 1e8 and returns the one-term tail 2^-n log|z_n|.
    Orbits still bounded after ``max_iter`` steps give 0 (not converged).
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    c = m.c
    z = complex(z)
    for n in range(max_iter + 1):
        a = abs(z)
        if a > R_BIG:
            return GreenValue(math.ldexp(math.log(a), -n), n, True)
        if n < max_iter:
            z = z * z + c
    return GreenValue(0.0, max_iter, False)
