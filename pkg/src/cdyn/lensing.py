"""Point-mass gravitational lensing and Wilmshurst harmonic polynomials.

The lens equation for masses sigma_j at z_j and a source at w is

    z = w + sum_j sigma_j / (conj(z) - conj(z_j)),

solved here as the zero set of F(z) = z - w - conj(r(z)) with
r(z) = sum_j sigma_j / (z - z_j). Images are found by multistart Newton in
the real plane and audited with the argument principle
(m_plus - m_minus) + n = winding of F on a large circle.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ArgumentJump,
    CdynError,
    DegenerateRing,
    EqualDegrees,
    InvalidConfig,
    NearCriticalImage,
    NonPositiveInput,
    PoleProximity,
)
from .numerics import Poly, newton2d, newton2d_batch, poly_eval, poly_roots

GRID = 48
POLE_SEEDS = 16
POLE_RINGS = 4
DEDUPE = 1e-8
POLE_REJECT = 1e-10
TOL_RES = 1e-12
CRITICAL_BAND = 1e-6
AUDIT_SAMPLES = 4096
AUDIT_MAX_SAMPLES = 2**20
MIN_SEPARATION = 1e-9

G_SI = 6.67430e-11
C_SI = 299792458.0


class Sense(str, Enum):
    PRESERVING = "preserving"
    REVERSING = "reversing"


@dataclass
class LensConfig:
    """Point masses ``(position, sigma)`` and a source position."""

    masses: list[tuple[complex, float]]
    source: complex = 0j

    def __post_init__(self):
        self.masses = [(complex(z), float(s)) for z, s in self.masses]
        self.source = complex(self.source)
        if not self.masses:
            raise InvalidConfig("need at least one mass")
        for z, s in self.masses:
            if not s > 0 or not math.isfinite(s):
                raise InvalidConfig(f"sigma must be positive, got {s}")
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise InvalidConfig("mass positions must be finite")
        pos = self.positions
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                if abs(pos[i] - pos[j]) <= MIN_SEPARATION:
                    raise InvalidConfig(f"masses {i} and {j} coincide")

    @property
    def n(self) -> int:
        return len(self.masses)

    @property
    def positions(self) -> np.ndarray:
        return np.array([z for z, _ in self.masses], dtype=np.complex128)

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([s for _, s in self.masses], dtype=float)

    def seed_radius(self) -> float:
        """Radius about the source containing every image (plus margin 1)."""
        return float(np.max(np.abs(self.positions - self.source))) + 1.0 + math.sqrt(self.sigmas.sum())


@dataclass
class LensImage:
    z: complex
    sense: Sense
    deflection_derivative_mag: float  # |r'(z)|
    residual: float


@dataclass
class AuditReport:
    n: int
    m_plus: int
    m_minus: int
    winding: int
    identity_ok: bool
    bound_ok: bool

    @property
    def total(self) -> int:
        return self.m_plus + self.m_minus


def _lens_eval(pos: np.ndarray, sig: np.ndarray, u):
    """F, dF/dz, dF/dzbar for the source-centred problem (w = 0)."""
    d = np.asarray(u)[..., None] - pos
    F = u - np.sum(sig / np.conj(d), axis=-1)
    rprime = -np.sum(sig / d**2, axis=-1)
    return F, np.ones_like(F), -np.conj(rprime)


def lens_residual(cfg: LensConfig, z: complex):
    """F(z) and its Wirtinger pair (dF/dz, dF/dzbar) = (1, -conj(r'(z)))."""
    z = complex(z)
    pos = cfg.positions
    if np.min(np.abs(z - pos)) < POLE_REJECT:
        raise PoleProximity(f"{z} is within {POLE_REJECT:g} of a mass")
    F, a, b = _lens_eval(pos - cfg.source, cfg.sigmas, z - cfg.source)
    return complex(F), (complex(a), complex(b))


def deflection_derivative(cfg: LensConfig, z: complex) -> complex:
    """r'(z) = -sum sigma_j / (z - z_j)^2."""
    return complex(-np.sum(cfg.sigmas / (complex(z) - cfg.positions) ** 2))


def einstein_ring_check(cfg: LensConfig) -> float | None:
    """Ring radius sqrt(sigma) for a single mass exactly at the source, else None."""
    if cfg.n == 1 and cfg.masses[0][0] == cfg.source:
        return math.sqrt(cfg.masses[0][1])
    return None


def _dedupe_sorted(z: np.ndarray, tol: float) -> np.ndarray:
    # collapse exact repeats cheaply before the greedy pass
    _, first = np.unique(np.round(z.real, 12) + 1j * np.round(z.imag, 12), return_index=True)
    z = z[first]
    z = z[np.lexsort((z.imag, z.real))]
    keep: list[complex] = []
    for zi in z:
        if keep and np.min(np.abs(np.asarray(keep) - zi)) < tol * (1 + abs(zi)):
            continue
        keep.append(zi)
    return np.array(keep, dtype=np.complex128)


def _grid_seeds(radius: float, grid: int) -> np.ndarray:
    x = np.linspace(-radius, radius, grid)
    zz = (x[None, :] + 1j * x[:, None]).ravel()
    return zz[np.abs(zz) <= radius]


def _pole_seeds(pos: np.ndarray, sig: np.ndarray) -> np.ndarray:
    seeds = []
    ang = 2 * np.pi * (np.arange(POLE_SEEDS) + 0.5) / POLE_SEEDS
    total = math.sqrt(sig.sum())
    for j, zj in enumerate(pos):
        others = np.abs(np.delete(pos, j) - zj)
        scale = min(total, abs(zj) if abs(zj) > 0 else total)
        if others.size:
            scale = min(scale, 0.5 * float(others.min()))
        for k in range(1, POLE_RINGS + 1):
            seeds.append(zj + scale * 10.0**-k * np.exp(1j * ang))
    return np.concatenate(seeds)


def _check_stalled(cfg: LensConfig, z: np.ndarray) -> None:
    """Newton crawls towards degenerate zeros; flag those it stalled near."""
    z = z[np.isfinite(z)]
    if z.size == 0:
        return
    pos = cfg.positions
    d = z[:, None] - pos[None, :]
    F = z - cfg.source - np.sum(cfg.sigmas / np.conj(d), axis=1)
    rp = np.abs(np.sum(cfg.sigmas / d**2, axis=1))
    hit = (np.abs(F) < 1e-6 * (1 + np.abs(z))) & (np.abs(rp - 1) < 1e-3)
    if np.any(hit):
        zc = complex(z[np.flatnonzero(hit)[0]])
        raise NearCriticalImage(f"degenerate image near {zc}: |r'| = {rp[hit][0]:.6f}")


def solve_images(cfg: LensConfig, grid: int = GRID) -> list[LensImage]:
    """All images of the source, sorted by (re, im).

    Seeds: a ``grid`` x ``grid`` lattice on the disc of radius
    max|z_j - w| + 1 + sqrt(sum sigma) about w, plus 16 seeds on each of four
    shrinking rings around every mass.

    Raises:
        DegenerateRing: single mass on the line of sight (circle of images).
        NearCriticalImage: an image has ||r'| - 1| < 1e-6.
    """
    if einstein_ring_check(cfg) is not None:
        raise DegenerateRing("single mass at the source position: Einstein ring")
    w = cfg.source
    pos = cfg.positions - w
    sig = cfg.sigmas

    def f(u):
        return _lens_eval(pos, sig, u)

    seeds = np.concatenate([_grid_seeds(cfg.seed_radius(), grid), _pole_seeds(pos, sig)])
    z, ok = newton2d_batch(f, seeds)
    _check_stalled(cfg, z[~ok] + w)
    z = z[ok]
    if z.size:
        near_pole = np.min(np.abs(z[:, None] - pos[None, :]), axis=1) < POLE_REJECT
        z = z[~near_pole]
    z = _dedupe_sorted(z, DEDUPE) if z.size else z

    images = []
    for u in z:
        F = complex(f(u)[0])
        if abs(F) > TOL_RES * (1 + abs(u)):
            try:
                u = newton2d(lambda v: tuple(complex(x) for x in f(v)), u)
            except CdynError:
                continue
            F = complex(f(u)[0])
            if abs(F) > TOL_RES * (1 + abs(u)):
                continue
        zimg = complex(u + w)
        rp = abs(deflection_derivative(cfg, zimg))
        if abs(rp - 1) < CRITICAL_BAND:
            raise NearCriticalImage(f"image at {zimg} has |r'| = {rp:.9f}")
        sense = Sense.PRESERVING if rp < 1 else Sense.REVERSING
        images.append(LensImage(zimg, sense, rp, abs(F)))
    images.sort(key=lambda im: (im.z.real, im.z.imag))
    return images


def winding_number(func, radius: float, samples: int = AUDIT_SAMPLES, center: complex = 0j) -> int:
    """Winding of ``func`` around 0 along |z - center| = radius.

    The sampling doubles until every step in argument is below pi.

    Raises:
        ArgumentJump: steps of pi or more persist at 2**20 samples.
    """
    n = samples
    while n <= AUDIT_MAX_SAMPLES:
        t = 2 * np.pi * np.arange(n + 1) / n
        vals = func(center + radius * np.exp(1j * t))
        vals[-1] = vals[0]
        steps = np.angle(vals[1:] / vals[:-1])
        if np.all(np.isfinite(steps)) and np.max(np.abs(steps)) < np.pi:
            return int(round(float(np.sum(steps)) / (2 * np.pi)))
        n *= 2
    raise ArgumentJump(f"argument step >= pi persists at {AUDIT_MAX_SAMPLES} samples")


def audit(cfg: LensConfig, images: Sequence[LensImage]) -> AuditReport:
    """Check (m_plus - m_minus) + n against the winding of F and the image bound.

    The bound is 5n - 5 for n >= 2 and the two images of a single mass for n = 1.
    """
    for im in images:
        if abs(im.deflection_derivative_mag - 1) < CRITICAL_BAND:
            raise NearCriticalImage(f"image at {im.z} is not simple")
    n = cfg.n
    m_plus = sum(im.sense is Sense.PRESERVING for im in images)
    m_minus = len(images) - m_plus
    pos = cfg.positions - cfg.source
    radius = 4 * cfg.seed_radius()
    wind = winding_number(lambda u: _lens_eval(pos, cfg.sigmas, u)[0], radius)
    bound = 5 * n - 5 if n >= 2 else 2
    return AuditReport(
        n=n,
        m_plus=m_plus,
        m_minus=m_minus,
        winding=wind,
        identity_ok=(m_plus - m_minus) + n == wind,
        bound_ok=m_plus + m_minus <= bound,
    )


def polygon_config(n: int, radius: float, sigma_each: float, center_mass: float | None = None,
                   source: complex = 0j) -> LensConfig:
    """n equal masses on a regular polygon, optionally with a central mass.

    With a central mass all strengths are rescaled to sum to 1.
    """
    if n < 2 or not radius > 0:
        raise ValueError("need n >= 2 and radius > 0")
    pos = radius * np.exp(2j * np.pi * np.arange(n) / n)
    masses = [(complex(z), float(sigma_each)) for z in pos]
    if center_mass is not None:
        masses.append((0j, float(center_mass)))
        total = sum(s for _, s in masses)
        masses = [(z, s / total) for z, s in masses]
    return LensConfig(masses, source)


def normalize_physical(masses_kg: Iterable[float], D_L: float, D_S: float, D_LS: float,
                       G: float = G_SI, c_light: float = C_SI) -> list[float]:
    """Dimensionless lens strengths sigma_j = D_LS/(D_S D_L) * 4 G M_j / c^2."""
    masses_kg = list(masses_kg)
    if min(D_L, D_S, D_LS) <= 0 or G <= 0 or c_light <= 0:
        raise NonPositiveInput("distances and constants must be positive")
    if D_LS > D_S:
        raise NonPositiveInput("D_LS cannot exceed D_S")
    if any(not m > 0 for m in masses_kg):
        raise NonPositiveInput("masses must be positive")
    k = D_LS / (D_S * D_L) * 4 * G / c_light**2
    return [k * m for m in masses_kg]


# -- parameter scans -------------------------------------------------------------


@dataclass
class ScanResult:
    best_count: int
    best_params: dict
    bound: int
    rows: list[dict] = field(default_factory=list)


def _count(cfg: LensConfig) -> int | None:
    try:
        return len(solve_images(cfg))
    except (NearCriticalImage, DegenerateRing):
        return None


def scan_two_mass(separations: Iterable[float], mass_ratios: Iterable[float] = (0.5,),
                  sources: Iterable[complex] = (0j,)) -> ScanResult:
    """Image counts for two masses at +-a/2 with total strength 1."""
    rows = []
    for a in separations:
        for q in mass_ratios:
            for w in sources:
                cfg = LensConfig([(a / 2, q), (-a / 2, 1 - q)], w)
                rows.append({"separation": float(a), "ratio": float(q), "source": complex(w), "count": _count(cfg)})
    return _best(rows, 5)


def scan_polygon(n: int, radii: Iterable[float] = tuple(np.linspace(0.5, 1.5, 11)),
                 center_masses: Iterable[float] = tuple(np.logspace(-4, -1, 7)),
                 source: complex = 0j) -> ScanResult:
    """Best image count over regular n-gons with a small central mass."""
    rows = []
    for r in radii:
        for eps in center_masses:
            cfg = polygon_config(n, float(r), 1.0 / n, float(eps), source)
            rows.append({"radius": float(r), "center_mass": float(eps), "count": _count(cfg)})
    return _best(rows, 5 * (n + 1) - 5)


def _best(rows: list[dict], bound: int) -> ScanResult:
    valid = [r for r in rows if r["count"] is not None]
    if not valid:
        return ScanResult(0, {}, bound, rows)
    top = max(valid, key=lambda r: r["count"])
    params = {k: v for k, v in top.items() if k != "count"}
    return ScanResult(top["count"], params, bound, rows)


# -- Wilmshurst: p(z) = conj(q(z)) ------------------------------------------------


@dataclass
class WilmshurstRoot:
    z: complex
    sense: Sense
    ratio: float  # |q'(z) / p'(z)|
    residual: float
    multiplicity: int = 1


@dataclass
class WilmshurstCounts:
    n: int
    m: int
    total: int
    m_plus: int
    m_minus: int
    bound_3n2: int | None  # only for q(z) = z, i.e. z = conj(p(z))
    lll_bound: int  # 2m(n-1) + n, a conjecture: reported only
    within_3n2: bool | None
    within_lll: bool


def _is_identity(q: Poly) -> bool:
    return q.degree == 1 and q.coeffs[0] == 0 and q.coeffs[1] == 1


def wilmshurst_solve(p: Poly, q: Poly, grid: int = GRID) -> tuple[list[WilmshurstRoot], WilmshurstCounts]:
    """Solutions of p(z) = conj(q(z)) for deg p = n > deg q = m.

    Raises:
        EqualDegrees: deg p == deg q (the solution set may be a continuum).
    """
    n = p.degree
    m = 0 if q.is_zero() else q.degree
    if n == m and not q.is_zero():
        raise EqualDegrees("deg p == deg q: possibly infinitely many solutions")
    if n < m:
        raise ValueError("need deg p > deg q; swap and conjugate the equation")
    if n < 1:
        raise ValueError("p must be non-constant")

    roots: list[WilmshurstRoot] = []
    if q.is_zero():
        # holomorphic case: zeros of p with multiplicity
        rs = poly_roots(p)
        for z, mult in rs.multiplicities:
            roots.append(WilmshurstRoot(complex(z), Sense.PRESERVING, 0.0, abs(p(z)), mult))
    else:
        dp, dq = p.derivative(), q.derivative()

        def f(z):
            pv, pd = poly_eval(p, z)
            qv, qd = poly_eval(q, z)
            return pv - np.conj(qv), pd, -np.conj(qd)

        lead = abs(p.coeffs[-1])
        radius = 1.0 + (np.sum(np.abs(p.coeffs[:-1])) + np.sum(np.abs(q.coeffs))) / lead
        z, ok = newton2d_batch(f, _grid_seeds(radius, grid))
        z = _dedupe_sorted(z[ok], DEDUPE) if np.any(ok) else np.zeros(0, complex)
        for zi in z:
            F = abs(complex(f(zi)[0]))
            pd = abs(complex(dp(zi)))
            qd = abs(complex(dq(zi)))
            ratio = math.inf if pd == 0 else qd / pd
            sense = Sense.PRESERVING if ratio < 1 else Sense.REVERSING
            roots.append(WilmshurstRoot(complex(zi), sense, ratio, F))
    roots.sort(key=lambda r: (r.z.real, r.z.imag))
    total = len(roots)
    m_plus = sum(r.sense is Sense.PRESERVING for r in roots)
    b3 = 3 * n - 2 if _is_identity(q) else None
    lll = 2 * m * (n - 1) + n
    counts = WilmshurstCounts(
        n=n, m=m, total=total, m_plus=m_plus, m_minus=total - m_plus,
        bound_3n2=b3, lll_bound=lll,
        within_3n2=None if b3 is None else total <= b3,
        within_lll=total <= lll,
    )
    return roots, counts


# -- solution CSV ------------------------------------------------------------------

CSV_HEADER = ["re", "im", "sense", "abs_rprime", "residual"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def solution_csv(images: Sequence[LensImage]) -> str:
    """CSV text: header re,im,sense,abs_rprime,residual, rows sorted by (re, im)."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for im in sorted(images, key=lambda im: (im.z.real, im.z.imag)):
        wr.writerow([_fmt(im.z.real), _fmt(im.z.imag), im.sense.value,
                     _fmt(im.deflection_derivative_mag), _fmt(im.residual)])
    return buf.getvalue()


def write_solution_csv(images: Sequence[LensImage], sink) -> int:
    text = solution_csv(images)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", newline="") as fh:
            fh.write(text)
    else:
        sink.write(text)
    return len(text)


def read_solution_csv(source) -> list[LensImage]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("not a lens solution CSV")
    return [
        LensImage(complex(float(r[0]), float(r[1])), Sense(r[2]), float(r[3]), float(r[4]))
        for r in rows[1:]
    ]
