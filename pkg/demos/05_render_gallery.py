"""Render a few PPM images: the Mandelbrot set, a Julia set and a basin picture.

Run: python demos/05_render_gallery.py [output_dir]
"""

import sys
import time
from pathlib import Path

from cdyn import ImageSpec, render, write_ppm

out = Path(sys.argv[1] if len(sys.argv) > 1 else "gallery")
out.mkdir(exist_ok=True)

jobs = {
    "mandelbrot.ppm": ImageSpec(800, 800, -0.7, 0.004),
    "julia_dendrite.ppm": ImageSpec(600, 600, 0, 0.0055, mode="julia", c=1j),
    "julia_rabbit.ppm": ImageSpec(600, 600, 0, 0.0055, mode="julia", c=-0.1226 + 0.7449j),
    "basins_c-1.ppm": ImageSpec(600, 400, 0, 0.006, mode="basins", c=-1),
    "basins_rabbit.ppm": ImageSpec(600, 600, 0, 0.0055, mode="basins", c=-0.1226 + 0.7449j),
}

render(ImageSpec(4, 4, 0, 0.1))  # first call compiles the kernels
for name, spec in jobs.items():
    t0 = time.perf_counter()
    buf = render(spec)
    n = write_ppm(buf, out / name)
    print(f"{name:22s} {spec.width}x{spec.height}  {time.perf_counter() - t0:.2f} s  {n} bytes")
