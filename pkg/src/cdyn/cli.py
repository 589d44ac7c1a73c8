"""Command-line front end: ``cdyn <subcommand> [options]``.

Complex values are written ``re,im``. Exit status is 0 on success, 2 on a
usage error and 1 when a solver raises.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import Sequence

from . import dynamics, lensing, parameter, raster
from .errors import CdynError, InvalidConfig, ParseError
from .lensing import LensConfig
from .numerics import Poly

DEFAULTS = {
    "max_iter": dynamics.MAX_ITER,
    "lens_grid": lensing.GRID,
    "audit_samples": lensing.AUDIT_SAMPLES,
    "escape_radius_big": dynamics.R_BIG,
    "cycles_max_period": 4,
    "koenig_n": 60,
    "render_width": 800,
    "render_height": 800,
    "render_scale": 0.004,
    "render_center": "-0.7,0",
    "basin_period": 8,
    "threads": "CDYN_THREADS or cpu count",
}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")


def parse_coeffs(text: str) -> Poly:
    """Polynomial from ``a0;a1;...`` with each entry ``re`` or ``re,im``."""
    return Poly([parse_complex(t) for t in text.split(";")])


def load_lens_config(path) -> LensConfig:
    """Read a lens scene: {"masses": [{"re", "im", "sigma"}, ...], "source": {"re", "im"}}."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return lens_config_from_dict(doc)


def lens_config_from_dict(doc) -> LensConfig:
    if not isinstance(doc, dict) or not isinstance(doc.get("masses"), list):
        raise ParseError('scene needs a "masses" array')
    masses = []
    try:
        for m in doc["masses"]:
            masses.append((complex(float(m["re"]), float(m["im"])), float(m["sigma"])))
        src = doc.get("source", {"re": 0, "im": 0})
        source = complex(float(src["re"]), float(src["im"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed scene entry: {exc!r}") from exc
    return LensConfig(masses, source)


# -- subcommands ---------------------------------------------------------------


def _out(args):
    return open(args.out, "w", newline="") if getattr(args, "out", None) else sys.stdout


def cmd_orbit(args) -> int:
    orb = dynamics.iterate(dynamics.QuadMap(args.c), args.z0, args.n)
    fh = _out(args)
    for z in orb.points:
        fh.write(f"{fmt(z.real)},{fmt(z.imag)}\n")
    if orb.escaped:
        print(f"escaped at index {orb.escape_index}", file=sys.stderr)
    return 0


def cmd_member(args) -> int:
    res = parameter.mandelbrot_member(args.c, args.max_iter)
    print("bounded" if res.bounded else f"escaped,{res.escape_index}")
    return 0


def cmd_green(args) -> int:
    g = dynamics.green(dynamics.QuadMap(args.c), args.z, args.max_iter)
    print("value,iterations,converged")
    print(f"{fmt(g.value)},{g.iterations_used},{str(g.converged).lower()}")
    return 0


def cmd_cycles(args) -> int:
    cycles = dynamics.cycles_up_to(dynamics.QuadMap(args.c), args.max_period)
    fh = _out(args)
    fh.write("cycle,period,re,im,multiplier_re,multiplier_im,stability\n")
    for k, cy in enumerate(cycles):
        for z in cy.points:
            fh.write(
                f"{k},{cy.period},{fmt(z.real)},{fmt(z.imag)},"
                f"{fmt(cy.multiplier.real)},{fmt(cy.multiplier.imag)},{cy.stability.value}\n"
            )
    return 0


def cmd_koenig(args) -> int:
    m = dynamics.QuadMap(args.c)
    fixed = args.fixed if args.fixed is not None else dynamics.fixed_points(m)[1].points[0]
    phi, res = dynamics.koenig(m, fixed, args.z, args.n)
    print("phi_re,phi_im,residual")
    print(f"{fmt(phi.real)},{fmt(phi.imag)},{fmt(res)}")
    return 0


def cmd_render(args) -> int:
    spec = raster.ImageSpec(
        width=args.width, height=args.height, center=args.center, scale=args.scale,
        max_iter=args.max_iter, mode=args.mode, c=args.c, basin_period=args.basin_period,
    )
    buf = raster.render(spec, threads=args.threads)
    if args.out:
        raster.write_ppm(buf, args.out)
    else:
        raster.write_ppm(buf, sys.stdout.buffer)
    return 0


def cmd_lens_solve(args) -> int:
    cfg = load_lens_config(args.scene)
    images = lensing.solve_images(cfg, grid=args.grid)
    fh = _out(args)
    fh.write(lensing.solution_csv(images))
    return 0


def cmd_lens_audit(args) -> int:
    cfg = load_lens_config(args.scene)
    rep = lensing.audit(cfg, lensing.solve_images(cfg, grid=args.grid))
    print("n,m_plus,m_minus,winding,identity_ok,bound_ok")
    print(f"{rep.n},{rep.m_plus},{rep.m_minus},{rep.winding},"
          f"{str(rep.identity_ok).lower()},{str(rep.bound_ok).lower()}")
    return 0 if rep.identity_ok else 1


def cmd_lens_normalize(args) -> int:
    sig = lensing.normalize_physical(args.masses, args.dl, args.ds, args.dls, args.G, args.c_light)
    print("sigma")
    for s in sig:
        print(fmt(s))
    return 0


def cmd_wilmshurst(args) -> int:
    roots, counts = lensing.wilmshurst_solve(args.p, args.q, grid=args.grid)
    fh = _out(args)
    fh.write("re,im,sense,ratio,residual,multiplicity\n")
    for r in roots:
        fh.write(f"{fmt(r.z.real)},{fmt(r.z.imag)},{r.sense.value},{fmt(r.ratio)},"
                 f"{fmt(r.residual)},{r.multiplicity}\n")
    print(
        f"total={counts.total} m_plus={counts.m_plus} m_minus={counts.m_minus} "
        f"bound_3n-2={counts.bound_3n2} lll_bound={counts.lll_bound}",
        file=sys.stderr,
    )
    return 0


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cdyn", description=__doc__.splitlines()[0])
    ap.add_argument("--show-defaults", action="store_true", help="print default parameters as JSON")
    sub = ap.add_subparsers(dest="command")

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        return p

    p = add("orbit", cmd_orbit, "iterate z^2 + c")
    p.add_argument("--c", type=parse_complex, required=True)
    p.add_argument("--z0", type=parse_complex, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")

    p = add("member", cmd_member, "Mandelbrot membership of c")
    p.add_argument("--c", type=parse_complex, required=True)
    p.add_argument("--max-iter", type=_positive_int, default=dynamics.MAX_ITER)

    p = add("green", cmd_green, "Green function G_c(z)")
    p.add_argument("--c", type=parse_complex, required=True)
    p.add_argument("--z", type=parse_complex, required=True)
    p.add_argument("--max-iter", type=_positive_int, default=dynamics.MAX_ITER)

    p = add("cycles", cmd_cycles, "periodic cycles up to a period")
    p.add_argument("--c", type=parse_complex, required=True)
    p.add_argument("--max-period", type=int, default=DEFAULTS["cycles_max_period"])
    p.add_argument("--out")

    p = add("koenig", cmd_koenig, "Koenig coordinate near the attracting fixed point")
    p.add_argument("--c", type=parse_complex, required=True)
    p.add_argument("--z", type=parse_complex, required=True)
    p.add_argument("--n", type=int, default=DEFAULTS["koenig_n"])
    p.add_argument("--fixed", type=parse_complex)

    p = add("render", cmd_render, "render a PPM image")
    p.add_argument("--mode", choices=raster.MODES, default="mandelbrot")
    p.add_argument("--width", type=_positive_int, default=DEFAULTS["render_width"])
    p.add_argument("--height", type=_positive_int, default=DEFAULTS["render_height"])
    p.add_argument("--center", type=parse_complex, default=parse_complex(DEFAULTS["render_center"]))
    p.add_argument("--scale", type=float, default=DEFAULTS["render_scale"])
    p.add_argument("--max-iter", type=_positive_int, default=dynamics.MAX_ITER)
    p.add_argument("--c", type=parse_complex, default=0j)
    p.add_argument("--basin-period", type=int, default=DEFAULTS["basin_period"])
    p.add_argument("--threads", type=_positive_int)
    p.add_argument("--out")

    for name, func, help in [
        ("lens-solve", cmd_lens_solve, "solve the lens equation for a JSON scene"),
        ("lens-audit", cmd_lens_audit, "argument-principle audit of a scene"),
    ]:
        p = add(name, func, help)
        p.add_argument("--scene", required=True)
        p.add_argument("--grid", type=_positive_int, default=lensing.GRID)
        p.add_argument("--threads", type=_positive_int)
        if name == "lens-solve":
            p.add_argument("--out")

    p = add("lens-normalize", cmd_lens_normalize, "physical masses to lens strengths")
    p.add_argument("--masses", type=_float_list, required=True, help="kg, comma separated")
    p.add_argument("--dl", type=float, required=True)
    p.add_argument("--ds", type=float, required=True)
    p.add_argument("--dls", type=float, required=True)
    p.add_argument("--G", type=float, default=lensing.G_SI)
    p.add_argument("--c-light", type=float, default=lensing.C_SI)

    p = add("wilmshurst", cmd_wilmshurst, "solve p(z) = conj(q(z))")
    p.add_argument("--p", type=parse_coeffs, required=True, help="a0;a1;... each re or re,im")
    p.add_argument("--q", type=parse_coeffs, required=True)
    p.add_argument("--grid", type=_positive_int, default=lensing.GRID)
    p.add_argument("--out")
    return ap


_NEG_VALUE = re.compile(r"^-[\d.]")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--c -1,0`` into ``--c=-1,0`` so argparse does not see a flag."""
    out: list[str] = []
    it = iter(range(len(argv)))
    skip = False
    for i in it:
        if skip:
            skip = False
            continue
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEG_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.show_defaults:
        print(json.dumps(DEFAULTS, indent=2))
        return 0
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        print("cdyn: error: a subcommand is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (InvalidConfig, ParseError) as exc:
        print(f"cdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except CdynError as exc:
        print(f"cdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"cdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
