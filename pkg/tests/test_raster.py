import io
import math

import numpy as np
import pytest

from cdyn.dynamics import QuadMap, cycles_up_to
from cdyn.errors import NoAttractor
from cdyn.raster import (
    BASIN_COLORS,
    BASIN_TOL,
    ImageSpec,
    RasterBuffer,
    _attractors,
    palette,
    ppm_bytes,
    read_ppm,
    render,
    smooth_value,
    write_ppm,
)


def test_palette_at_zero():
    assert palette(0) == (255, 63, 63)


def test_palette_formula_and_period():
    for v in np.linspace(0, 200, 97):
        want = tuple(math.floor(127.5 * (1 + math.cos(0.15 * v + ph))) for ph in (0, 2.094, 4.188))
        assert palette(v) == want
    period = 2 * math.pi / 0.15
    for v in (1.0, 7.3, 30.0):
        a, b = palette(v), palette(v + period)
        assert max(abs(x - y) for x, y in zip(a, b)) <= 1


def test_palette_rejects_negative():
    with pytest.raises(ValueError):
        palette(-1)


def test_pixel_convention():
    spec = ImageSpec(3, 3, 0, 2.0, mode="julia")
    assert spec.pixel_point(0, 0) == -2 + 2j
    assert spec.pixel_point(1, 1) == 0
    assert spec.pixel_point(2, 2) == 2 - 2j


def test_spec_validation():
    with pytest.raises(ValueError):
        ImageSpec(0, 3, 0, 1.0)
    with pytest.raises(ValueError):
        ImageSpec(3, 3, 0, 0.0)
    with pytest.raises(ValueError):
        ImageSpec(3, 3, 0, 1.0, mode="other")


def test_julia_c0_3x3():
    buf = render(ImageSpec(3, 3, 0, 2.0, mode="julia", c=0), threads=1)
    assert buf[1, 1] == (0, 0, 0)
    for ij in [(0, 0), (0, 2), (2, 0), (2, 2)]:
        assert buf[ij] != (0, 0, 0)
    assert len(buf.tobytes()) == 27


def test_mandelbrot_frame():
    # 341 x 321 pixels over [-2.4, 1] x [-1.6, 1.6]
    spec = ImageSpec(341, 321, -0.7, 0.01, max_iter=200)
    buf = render(spec, threads=2)
    i0, j0 = 240, 160  # c = 0
    assert abs(spec.pixel_point(i0, j0)) < 1e-12
    assert buf[i0, j0] == (0, 0, 0)
    i1 = 340  # c = 1
    assert abs(spec.pixel_point(i1, j0) - 1) < 1e-12
    assert buf[i1, j0] != (0, 0, 0)


def test_render_matches_scalar_oracle():
    spec = ImageSpec(37, 29, -0.5 + 0.1j, 0.07, max_iter=300)
    buf = render(spec, threads=3)
    for j in range(spec.height):
        for i in range(spec.width):
            esc, _, nu = smooth_value(0, spec.pixel_point(i, j), 300)
            want = palette(nu) if esc else (0, 0, 0)
            assert buf[i, j] == want


def test_smooth_value_continuity():
    # locate 100 places where the escape count steps by one, then compare two
    # points 1e-12 apart straddling each step (close enough that the gradient
    # of nu near the boundary of M does not matter)
    rng = np.random.default_rng(8)
    jumps = []
    while len(jumps) < 100:
        a = complex(rng.uniform(-2.2, 0.8), rng.uniform(-1.3, 1.3))
        b = a + 0.05 * np.exp(2j * np.pi * rng.random())
        ea, na, _ = smooth_value(0, a, 500)
        eb, nb, _ = smooth_value(0, b, 500)
        if not (ea and eb) or na == nb:
            continue
        while abs(b - a) > 1e-12:
            mid = (a + b) / 2
            em, nm, _ = smooth_value(0, mid, 500)
            if not em:
                break
            if nm == na:
                a = mid
            else:
                b, nb = mid, nm
        else:
            ea, na, va = smooth_value(0, a, 500)
            eb, nb, vb = smooth_value(0, b, 500)
            if abs(na - nb) == 1:
                jumps.append(abs(va - vb))
    assert max(jumps) < 0.02


@pytest.mark.parametrize("mode,c", [("mandelbrot", 0), ("julia", -0.8 + 0.156j), ("basins", -1)])
def test_thread_determinism(mode, c):
    spec = ImageSpec(150, 130, 0, 0.02, max_iter=300, mode=mode, c=c)
    base = ppm_bytes(render(spec, threads=1))
    for t in (2, 5):
        assert ppm_bytes(render(spec, threads=t)) == base


def test_threads_env(monkeypatch):
    spec = ImageSpec(70, 70, 0, 0.04, max_iter=100)
    monkeypatch.setenv("CDYN_THREADS", "3")
    a = render(spec).tobytes()
    monkeypatch.setenv("CDYN_THREADS", "1")
    assert render(spec).tobytes() == a


def test_basins_c_minus_one():
    spec = ImageSpec(5, 1, -0.5, 0.5, mode="basins", c=-1)
    buf = render(spec, threads=1)
    at0, at_m1 = buf[3, 0], buf[1, 0]
    colors = {tuple(int(x) for x in col) for col in BASIN_COLORS}
    assert at0 in colors and at_m1 in colors and at0 != at_m1


def test_basin_labels_converge():
    c = -0.12256116687665 + 0.74486176661974j  # superattracting 3-cycle
    spec = ImageSpec(60, 60, 0, 0.03, max_iter=500, mode="basins", c=c)
    buf = render(spec, threads=2)
    pr, pi, offsets, periods, phases, cycles = _attractors(c, 8)
    pts = pr + 1j * pi
    color_of = {tuple(int(x) for x in BASIN_COLORS[k % len(BASIN_COLORS)]): k for k in range(len(pts))}
    m = QuadMap(c)
    labelled = 0
    for j in range(spec.height):
        for i in range(spec.width):
            col = buf[i, j]
            if col not in color_of:
                continue
            k = color_of[col]
            # label k is the cycle point the orbit approaches under p^m
            target = pts[k]
            period = int(periods[k])
            z = spec.pixel_point(i, j)
            steps = 0
            while steps < 2000 and min(abs(z - p) for p in pts) >= BASIN_TOL:
                z = m(z)
                steps += 1
            # realign to a multiple of the period, then iterate 200 more cycles
            while steps % period:
                z = m(z)
                steps += 1
            for _ in range(200):
                for _ in range(period):
                    z = m(z)
            assert abs(z - target) < 1e-6
            labelled += 1
    assert labelled > 100


def test_no_attractor():
    with pytest.raises(NoAttractor):
        render(ImageSpec(4, 4, 0, 0.1, mode="basins", c=1j), threads=1)


# -- PPM ------------------------------------------------------------------------


def test_ppm_white_pixel():
    buf = RasterBuffer(1, 1, np.full((1, 1, 3), 255, np.uint8))
    assert ppm_bytes(buf) == b"P6\n1 1\n255\n\xff\xff\xff"


def test_ppm_black_red():
    px = np.array([[[0, 0, 0], [255, 0, 0]]], np.uint8)
    sink = io.BytesIO()
    n = write_ppm(RasterBuffer(2, 1, px), sink)
    assert sink.getvalue() == b"P6\n2 1\n255\n\x00\x00\x00\xff\x00\x00"
    assert n == len(sink.getvalue())


def test_ppm_round_trip(tmp_path):
    buf = render(ImageSpec(33, 17, -0.5, 0.1, max_iter=100), threads=1)
    path = tmp_path / "a.ppm"
    write_ppm(buf, path)
    again = read_ppm(path)
    assert again.width == 33 and again.height == 17
    assert ppm_bytes(again) == path.read_bytes()


def test_read_ppm_rejects_other_formats():
    with pytest.raises(ValueError):
        read_ppm(b"P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(ValueError):
        read_ppm(b"P6\n2 2\n255\n\x00")
