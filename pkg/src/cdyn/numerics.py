"""Complex scalars, dense polynomials, simultaneous root finding and the
Wirtinger Newton kernel used by the orbit and lens solvers.

Complex numbers are plain Python ``complex`` (or numpy ``complex128`` arrays);
there is no wrapper type.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import Diverged, MaxIters, NonConvergence, SingularJacobian

EPS = float(np.finfo(float).eps)

TOL_ROOT = 1e-13
MAX_ROOT_ITERS = 1000
CLUSTER_TOL = 1e-7
ABERTH_ANGLE_OFFSET = 0.4

NEWTON_MAX_ITERS = 50
NEWTON_TOL_RES = 1e-12
NEWTON_TOL_STEP = 1e-10
NEWTON_DIVERGE = 1e12
SINGULAR_DET = 1e-14


def polar_mul_pow(z: complex, w: complex, n: int) -> tuple[complex, complex]:
    """Product ``z*w`` and power ``z**n`` computed in polar form.

    Moduli multiply and arguments add; ``0**0`` is 1.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    r, theta = abs(z), cmath.phase(z)
    s, phi = abs(w), cmath.phase(w)
    product = cmath.rect(r * s, theta + phi)
    if n == 0:
        power = 1 + 0j
    elif r == 0.0:
        power = 0j
    else:
        power = cmath.rect(r**n, n * theta)
    return product, power


@dataclass(frozen=True)
class Poly:
    """Dense polynomial with coefficients ordered constant term first."""

    coeffs: np.ndarray = field(repr=False)

    def __init__(self, coeffs: Sequence[complex] | np.ndarray):
        a = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128)).copy()
        if a.size == 0:
            raise ValueError("polynomial needs at least one coefficient")
        nz = np.flatnonzero(a)
        a = a[: nz[-1] + 1] if nz.size else a[:1]
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> Poly:
        # np.poly is highest-degree first
        return cls(lead * np.poly(np.asarray(roots, dtype=np.complex128))[::-1])

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    def __call__(self, z):
        return poly_eval(self, z)[0]

    def __repr__(self) -> str:
        return f"Poly({self.coeffs.tolist()!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self) -> int:
        return hash(self.coeffs.tobytes())

    def derivative(self) -> Poly:
        if self.degree == 0:
            return Poly([0])
        return Poly(self.coeffs[1:] * np.arange(1, self.degree + 1))

    def __add__(self, other: Poly) -> Poly:
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=np.complex128)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return Poly(out)

    def __neg__(self) -> Poly:
        return Poly(-self.coeffs)

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly | complex) -> Poly:
        if isinstance(other, Poly):
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return Poly(self.coeffs * other)

    __rmul__ = __mul__

    def compose(self, inner: Poly) -> Poly:
        """Return ``self(inner(z))`` by Horner's rule on polynomials."""
        out = Poly([self.coeffs[-1]])
        for a in self.coeffs[-2::-1]:
            out = out * inner + Poly([a])
        return out

    def taylor_shift(self, center: complex) -> Poly:
        """Coefficients of ``self(u + center)`` in powers of ``u``."""
        return self.compose(Poly([center, 1]))


def poly_eval(p: Poly, z):
    """Value and first derivative of ``p`` at ``z`` from one Horner pass.

    ``z`` may be a scalar or a numpy array.
    """
    a = p.coeffs
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=np.complex128)
    val = np.full(z.shape, a[-1], dtype=np.complex128)
    der = np.zeros(z.shape, dtype=np.complex128)
    for coef in a[-2::-1]:
        der = der * z + val
        val = val * z + coef
    if scalar:
        return complex(val), complex(der)
    return val, der


def _abs_horner(p: Poly, r: np.ndarray) -> np.ndarray:
    """sum_j |a_j| r^j, the scale of rounding error in Horner evaluation."""
    absa = np.abs(p.coeffs)
    out = np.full(r.shape, absa[-1])
    for coef in absa[-2::-1]:
        out = out * r + coef
    return out


@dataclass
class RootSet:
    """All ``degree`` roots of a polynomial, repeated by multiplicity."""

    roots: np.ndarray
    residuals: np.ndarray
    multiplicities: list[tuple[complex, int]]

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def distinct(self) -> list[complex]:
        return [r for r, _ in self.multiplicities]


def cluster_points(points: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of points lying within ``tol*(1+|z|)`` of each other.

    Grouping is transitive (union-find), so chains of close points merge.
    """
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = np.lexsort((points.imag, points.real))
    for a_pos, i in enumerate(order):
        for j in order[a_pos + 1 :]:
            if points[j].real - points[i].real > tol * (1 + abs(points[i])) + 1e-300:
                break
            if abs(points[i] - points[j]) < tol * (1 + max(abs(points[i]), abs(points[j]))):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in order:
        groups.setdefault(find(i), []).append(int(i))
    return list(groups.values())


def aberth(
    f: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    z: np.ndarray,
    *,
    fixed: np.ndarray | None = None,
    max_iters: int = MAX_ROOT_ITERS,
    noise: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simultaneous Aberth-Ehrlich iteration on the approximations ``z``.

    ``f`` returns value and derivative arrays. ``fixed`` holds already-known
    roots that stay put and act as deflation terms. ``noise`` gives the
    rounding-error floor of ``|f|``; a root stops moving once its value is
    below that floor or its correction is at the rounding level.

    Returns the approximations and a boolean mask of which ones settled.
    """
    z = np.array(z, dtype=np.complex128)
    fixed = np.zeros(0, complex) if fixed is None else np.asarray(fixed, complex)
    active = np.ones(z.size, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iters):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            zi = z[idx]
            val, der = f(zi)
            ratio = val / der
            diff = zi[:, None] - z[None, :]
            diff[np.arange(idx.size), idx] = np.inf
            s = np.sum(1.0 / diff, axis=1)
            if fixed.size:
                s = s + np.sum(1.0 / (zi[:, None] - fixed[None, :]), axis=1)
            step = ratio / (1.0 - ratio * s)
            step = np.where(der == 0, val / (-val * s), step)
            small = np.abs(step) <= 4 * EPS * np.abs(zi)
            if noise is not None:
                small |= np.abs(val) <= noise(zi)
            small |= val == 0
            ok = np.isfinite(step)
            z[idx] = np.where(ok & ~small, zi - step, zi)
            active[idx[small]] = False
    return z, ~active


def poly_roots(p: Poly, *, tol_root: float = TOL_ROOT, max_iters: int = MAX_ROOT_ITERS) -> RootSet:
    """All roots of ``p`` with multiplicity, by Aberth-Ehrlich iteration.

    Seeds sit on the Cauchy-bound circle, angularly offset to break
    symmetry; every root gets one Newton polish. Roots closer than
    ``1e-7*(1+|r|)`` are merged into one root of higher multiplicity.
    """
    d = p.degree
    if d < 1:
        raise ValueError("poly_roots needs degree >= 1")
    a = p.coeffs
    scale = float(np.max(np.abs(a)))
    radius = 1.0 + float(np.max(np.abs(a[:-1] / a[-1])))
    angles = 2 * np.pi * np.arange(d) / d + ABERTH_ANGLE_OFFSET
    seeds = radius * np.exp(1j * angles)

    def f(z):
        return poly_eval(p, z)

    def noise(z):
        return 2 * d * EPS * _abs_horner(p, np.abs(z))

    z, _ = aberth(f, seeds, max_iters=max_iters, noise=noise)

    # one Newton polish, kept only where it lowers the residual
    with np.errstate(all="ignore"):
        val, der = poly_eval(p, z)
        polished = z - val / der
        pval = np.abs(poly_eval(p, polished)[0])
        better = np.isfinite(polished) & (pval < np.abs(val))
        z = np.where(better, polished, z)

    groups = cluster_points(z, CLUSTER_TOL)
    roots = []
    mults = []
    for g in sorted(groups, key=lambda g: (np.mean(z[g]).real, np.mean(z[g]).imag)):
        centre = complex(np.mean(z[g]))
        mults.append((centre, len(g)))
        roots.extend([centre] * len(g))
    roots = np.array(roots, dtype=np.complex128)
    residuals = np.abs(poly_eval(p, roots)[0])
    # |r|**d blows the residual up outside the unit disc, so it is measured
    # against the Horner rounding scale there
    limit = tol_root * np.maximum(scale, _abs_horner(p, np.abs(roots)))
    if not np.all(residuals <= limit):
        worst = float(np.max(residuals / limit) * tol_root)
        raise NonConvergence(
            f"root residual {worst:.3g} (relative) exceeds {tol_root:g} after {max_iters} sweeps"
        )
    return RootSet(roots=roots, residuals=residuals, multiplicities=mults)


# -- Newton on C viewed as R^2 ------------------------------------------------

WirtingerFn = Callable[[complex], tuple[complex, complex, complex]]


def wirtinger_step(F, dz, dzbar):
    """Newton correction for ``F`` given its Wirtinger derivatives.

    Solves the real 2x2 system for ``F + dz*h + dzbar*conj(h) = 0``.
    Works elementwise on arrays. Returns ``(h, det)``.
    """
    s = dz + dzbar
    t = dz - dzbar
    # rows: d(Re F), d(Im F) against (dx, dy)
    j11, j12 = s.real, -t.imag
    j21, j22 = s.imag, t.real
    det = j11 * j22 - j12 * j21
    rx, ry = -np.real(F), -np.imag(F)
    with np.errstate(all="ignore"):
        hx = np.divide(rx * j22 - j12 * ry, det)
        hy = np.divide(j11 * ry - j21 * rx, det)
    return hx + 1j * hy, det


def newton2d(
    func: WirtingerFn,
    seed: complex,
    *,
    tol_res: float = NEWTON_TOL_RES,
    tol_step: float = NEWTON_TOL_STEP,
    max_iters: int = NEWTON_MAX_ITERS,
) -> complex:
    """Find a zero of a (not necessarily holomorphic) map ``F: C -> C``.

    ``func(z)`` returns ``(F, dF/dz, dF/dzbar)``. Tolerances are relative to
    ``1 + |z|``.

    Raises:
        SingularJacobian: the real Jacobian determinant is numerically zero.
        MaxIters: no convergence within ``max_iters`` steps.
        Diverged: the iterate left the disc ``|z| <= 1e12``.
    """
    z = complex(seed)
    if not cmath.isfinite(z):
        raise ValueError("seed must be finite")
    for _ in range(max_iters):
        F, a, b = func(z)
        h, det = wirtinger_step(F, a, b)
        if abs(det) < SINGULAR_DET * (abs(a) ** 2 + abs(b) ** 2) or not math.isfinite(det):
            # a root on a critical curve: no usable step, but nothing left to do
            if abs(F) <= tol_res * (1 + abs(z)):
                return z
            raise SingularJacobian(f"|det J| = {abs(det):.3g} at z = {z}")
        z = z + complex(h)
        if not cmath.isfinite(z) or abs(z) > NEWTON_DIVERGE:
            raise Diverged(f"iterate left |z| <= {NEWTON_DIVERGE:g}")
        scale = 1 + abs(z)
        if abs(h) <= tol_step * scale:
            if abs(func(z)[0]) <= tol_res * scale:
                return z
    raise MaxIters(f"no convergence in {max_iters} steps from seed {seed}")


def newton2d_batch(
    func: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]],
    seeds: np.ndarray,
    *,
    tol_res: float = NEWTON_TOL_RES,
    tol_step: float = NEWTON_TOL_STEP,
    max_iters: int = NEWTON_MAX_ITERS,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`newton2d` over many seeds.

    Returns final iterates and a mask of seeds that met both tolerances.
    Failed seeds (singular, diverged, out of iterations) are simply
    reported as not converged.
    """
    z = np.array(seeds, dtype=np.complex128).ravel()
    alive = np.isfinite(z)
    done = np.zeros(z.size, dtype=bool)
    for _ in range(max_iters):
        idx = np.flatnonzero(alive & ~done)
        if idx.size == 0:
            break
        with np.errstate(all="ignore"):
            F, a, b = func(z[idx])
            h, det = wirtinger_step(F, a, b)
            bad = ~np.isfinite(det) | (np.abs(det) < SINGULAR_DET * (np.abs(a) ** 2 + np.abs(b) ** 2))
            znew = z[idx] + h
            bad |= ~np.isfinite(znew) | (np.abs(znew) > NEWTON_DIVERGE)
        z[idx] = np.where(bad, z[idx], znew)
        alive[idx[bad]] = False
        good = idx[~bad]
        small = np.abs(h[~bad]) <= tol_step * (1 + np.abs(z[good]))
        cand = good[small]
        if cand.size:
            with np.errstate(all="ignore"):
                res = np.abs(func(z[cand])[0])
            done[cand[res <= tol_res * (1 + np.abs(z[cand]))]] = True
    return z, done
