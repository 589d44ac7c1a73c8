"""Tile-parallel rendering of Julia sets, the Mandelbrot set and basins of
attraction, with a binary PPM writer.

Every pixel is computed independently by the same compiled kernel, so the
output bytes do not depend on how tiles are scheduled across threads.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import BinaryIO, Union

import numba
import numpy as np

from .dynamics import R_BIG, QuadMap, Stability, cycles_up_to
from .errors import NoAttractor

TILE = 64
BASIN_TOL = 1e-6
MODES = ("julia", "mandelbrot", "basins")

# distinct saturated colours for basin labels, cycled if there are more points
BASIN_COLORS = np.array(
    [
        (230, 25, 75),
        (60, 180, 75),
        (255, 225, 25),
        (0, 130, 200),
        (245, 130, 48),
        (145, 30, 180),
        (70, 240, 240),
        (240, 50, 230),
        (210, 245, 60),
        (250, 190, 190),
        (0, 128, 128),
        (170, 110, 40),
    ],
    dtype=np.uint8,
)


@dataclass(frozen=True)
class ImageSpec:
    """A rendering request.

    Pixel (i, j) sits at center + scale*((i - (width-1)/2) - 1j*(j - (height-1)/2)):
    x grows with Re, rows run downward with decreasing Im.
    """

    width: int
    height: int
    center: complex
    scale: float
    max_iter: int = 1000
    mode: str = "mandelbrot"
    c: complex = 0j
    basin_period: int = 8

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "c", complex(self.c))
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def pixel_point(self, i: int, j: int) -> complex:
        x = self.center.real + self.scale * (i - (self.width - 1) / 2)
        y = self.center.imag - self.scale * (j - (self.height - 1) / 2)
        return complex(x, y)


@dataclass
class RasterBuffer:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8, top row first

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __getitem__(self, ij):
        i, j = ij
        return tuple(int(v) for v in self.pixels[j, i])


# -- compiled kernels ----------------------------------------------------------

R_BIG_NB = R_BIG


@numba.njit(cache=True, nogil=True)
def _palette(v):
    r = math.floor(127.5 * (1.0 + math.cos(0.15 * v)))
    g = math.floor(127.5 * (1.0 + math.cos(0.15 * v + 2.094)))
    b = math.floor(127.5 * (1.0 + math.cos(0.15 * v + 4.188)))
    return r, g, b


@numba.njit(cache=True, nogil=True)
def _escape(zr, zi, cr, ci, max_iter, rbig2, log_rbig):
    """Return (escaped, n, nu) for the orbit of z under z^2 + c."""
    for n in range(max_iter + 1):
        m2 = zr * zr + zi * zi
        if m2 > rbig2:
            nu = n + 1.0 - math.log2(0.5 * math.log(m2) / log_rbig)
            return True, n, nu
        if n == max_iter:
            break
        zr, zi = zr * zr - zi * zi + cr, 2.0 * zr * zi + ci
    return False, max_iter, 0.0


@numba.njit(cache=True, nogil=True)
def _render_tile(out, i0, i1, j0, j1, width, height, cx, cy, scale, mode, cr, ci, max_iter,
                 pts_r, pts_i, offsets, periods, phases, basin_colors, tol2):
    rbig2 = R_BIG_NB * R_BIG_NB
    log_rbig = math.log(R_BIG_NB)
    half_w = (width - 1) / 2.0
    half_h = (height - 1) / 2.0
    ncol = basin_colors.shape[0]
    for j in range(j0, j1):
        y = cy - scale * (j - half_h)
        for i in range(i0, i1):
            x = cx + scale * (i - half_w)
            if mode == 1:
                escaped, n, nu = _escape(0.0, 0.0, x, y, max_iter, rbig2, log_rbig)
            elif mode == 0:
                escaped, n, nu = _escape(x, y, cr, ci, max_iter, rbig2, log_rbig)
            else:
                zr, zi = x, y
                label = -1
                escaped = False
                nu = 0.0
                for t in range(max_iter + 1):
                    m2 = zr * zr + zi * zi
                    if m2 > rbig2:
                        escaped = True
                        nu = t + 1.0 - math.log2(0.5 * math.log(m2) / log_rbig)
                        break
                    for k in range(pts_r.shape[0]):
                        dr = zr - pts_r[k]
                        di = zi - pts_i[k]
                        if dr * dr + di * di < tol2:
                            label = offsets[k] + (phases[k] - t) % periods[k]
                            break
                    if label >= 0:
                        break
                    zr, zi = zr * zr - zi * zi + cr, 2.0 * zr * zi + ci
                if label >= 0:
                    col = label % ncol
                    out[j, i, 0] = basin_colors[col, 0]
                    out[j, i, 1] = basin_colors[col, 1]
                    out[j, i, 2] = basin_colors[col, 2]
                    continue
            if escaped:
                r, g, b = _palette(nu)
                out[j, i, 0] = r
                out[j, i, 1] = g
                out[j, i, 2] = b
            else:
                out[j, i, 0] = 0
                out[j, i, 1] = 0
                out[j, i, 2] = 0



def palette(v: float) -> tuple[int, int, int]:
    """Sinusoidal colour map used for escaped points."""
    if v < 0:
        raise ValueError("v must be non-negative")
    r, g, b = _palette(float(v))
    return int(r), int(g), int(b)


def smooth_value(z0: complex, c: complex, max_iter: int = 1000) -> tuple[bool, int, float]:
    """(escaped, escape index, nu) for the orbit of z0 under z^2 + c.

    nu = n + 1 - log2(ln|z_n| / ln 1e8) at the first n with |z_n| > 1e8.
    """
    z0, c = complex(z0), complex(c)
    esc, n, nu = _escape(z0.real, z0.imag, c.real, c.imag, max_iter, R_BIG * R_BIG, math.log(R_BIG))
    return bool(esc), int(n), float(nu)


def _attractors(c: complex, max_period: int):
    cycles = [
        cy
        for cy in cycles_up_to(QuadMap(c), max_period)
        if cy.stability in (Stability.ATTRACTING, Stability.SUPERATTRACTING)
    ]
    if not cycles:
        raise NoAttractor(f"no attracting cycle of period <= {max_period} for c = {c}")
    pts, offsets, periods, phases = [], [], [], []
    base = 0
    for cy in cycles:
        for phase, z in enumerate(cy.points):
            pts.append(z)
            offsets.append(base)
            periods.append(cy.period)
            phases.append(phase)
        base += cy.period
    return (
        np.array([z.real for z in pts]),
        np.array([z.imag for z in pts]),
        np.array(offsets, dtype=np.int64),
        np.array(periods, dtype=np.int64),
        np.array(phases, dtype=np.int64),
        cycles,
    )


def default_threads() -> int:
    env = os.environ.get("CDYN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def render(spec: ImageSpec, threads: int | None = None) -> RasterBuffer:
    """Render ``spec`` into an RGB buffer using 64x64 tiles.

    Escaped points are coloured by :func:`palette` of the smooth escape
    value; bounded points are black. In basins mode a pixel whose orbit
    lands within 1e-6 of attracting-cycle point k gets basin colour k, where
    k is the cycle point its orbit converges to under the period-m iterate.

    Raises:
        NoAttractor: basins mode and no attracting cycle was found.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    out = np.zeros((spec.height, spec.width, 3), dtype=np.uint8)
    mode = MODES.index(spec.mode)
    c = complex(spec.c)
    if spec.mode == "basins":
        pr, pi, offsets, periods, phases, _ = _attractors(c, spec.basin_period)
    else:
        pr = pi = np.zeros(0)
        offsets = periods = phases = np.zeros(0, dtype=np.int64)
    tiles = [
        (i0, min(i0 + TILE, spec.width), j0, min(j0 + TILE, spec.height))
        for j0 in range(0, spec.height, TILE)
        for i0 in range(0, spec.width, TILE)
    ]
    center = complex(spec.center)

    def work(tile):
        i0, i1, j0, j1 = tile
        _render_tile(out, i0, i1, j0, j1, spec.width, spec.height, center.real, center.imag,
                     float(spec.scale), mode, c.real, c.imag, int(spec.max_iter),
                     pr, pi, offsets, periods, phases, BASIN_COLORS, BASIN_TOL**2)

    if threads == 1:
        for t in tiles:
            work(t)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, tiles))
    return RasterBuffer(spec.width, spec.height, out)


# -- PPM -------------------------------------------------------------------------

Sink = Union[str, os.PathLike, BinaryIO]


def ppm_bytes(buf: RasterBuffer) -> bytes:
    if buf.pixels.shape != (buf.height, buf.width, 3):
        raise ValueError("pixel array does not match width/height")
    header = f"P6\n{buf.width} {buf.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(buf.pixels, dtype=np.uint8).tobytes()


def write_ppm(buf: RasterBuffer, sink: Sink) -> int:
    """Write a binary P6 image; returns the number of bytes written."""
    data = ppm_bytes(buf)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
    return len(data)


def read_ppm(source: Sink | bytes) -> RasterBuffer:
    """Parse a P6 file with maxval 255 (the format :func:`write_ppm` emits)."""
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    stream = io.BytesIO(data)
    fields = []
    while len(fields) < 4:
        tok = b""
        ch = stream.read(1)
        while ch.isspace():
            ch = stream.read(1)
        if ch == b"#":
            stream.readline()
            continue
        while ch and not ch.isspace():
            tok += ch
            ch = stream.read(1)
        if not tok:
            raise ValueError("truncated PPM header")
        fields.append(tok)
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError("only binary P6 with maxval 255 is supported")
    w, h = int(fields[1]), int(fields[2])
    raw = stream.read(3 * w * h)
    if len(raw) != 3 * w * h:
        raise ValueError("truncated PPM pixel data")
    return RasterBuffer(w, h, np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy())
