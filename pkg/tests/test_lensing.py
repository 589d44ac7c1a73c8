import cmath
import io
import math

import numpy as np
import pytest

from cdyn.errors import (
    DegenerateRing,
    EqualDegrees,
    InvalidConfig,
    NearCriticalImage,
    NonPositiveInput,
    PoleProximity,
)
from cdyn.lensing import (
    C_SI,
    G_SI,
    LensConfig,
    Sense,
    audit,
    deflection_derivative,
    einstein_ring_check,
    lens_residual,
    normalize_physical,
    polygon_config,
    read_solution_csv,
    scan_polygon,
    scan_two_mass,
    solution_csv,
    solve_images,
    wilmshurst_solve,
    winding_number,
)
from cdyn.numerics import Poly

PHI = (1 + 5**0.5) / 2


def random_config(rng, n):
    while True:
        pos = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
        if n == 1 or np.min(np.abs(pos[:, None] - pos[None, :]) + np.eye(n)) > 1e-3:
            break
    sig = rng.uniform(0.05, 1.0, n)
    w = complex(*rng.uniform(-0.5, 0.5, 2))
    return LensConfig(list(zip(pos, sig)), w)


# -- configuration ----------------------------------------------------------------


def test_config_validation():
    with pytest.raises(InvalidConfig):
        LensConfig([(0, 0.0)])
    with pytest.raises(InvalidConfig):
        LensConfig([(0, 1.0), (0, 2.0)])
    with pytest.raises(InvalidConfig):
        LensConfig([])


# -- residual -----------------------------------------------------------------------


def test_residual_examples():
    cfg = LensConfig([(0, 1.0)])
    F, (dz, dzb) = lens_residual(cfg, 1)
    assert F == 0 and dz == 1
    F, _ = lens_residual(cfg, 2)
    assert F == 1.5
    F, _ = lens_residual(LensConfig([(1, 1.0)]), PHI)
    assert abs(F) < 1e-15


def test_residual_wirtinger_pair():
    rng = np.random.default_rng(0)
    cfg = random_config(rng, 3)
    z = 0.3 - 1.1j
    F, (dz, dzb) = lens_residual(cfg, z)
    assert dz == 1
    assert abs(dzb + np.conj(deflection_derivative(cfg, z))) < 1e-14
    # finite differences in x and y recover the Wirtinger pair
    h = 1e-7
    fx = (lens_residual(cfg, z + h)[0] - lens_residual(cfg, z - h)[0]) / (2 * h)
    fy = (lens_residual(cfg, z + 1j * h)[0] - lens_residual(cfg, z - 1j * h)[0]) / (2 * h)
    assert abs((fx - 1j * fy) / 2 - dz) < 1e-6
    assert abs((fx + 1j * fy) / 2 - dzb) < 1e-6


def test_pole_proximity():
    with pytest.raises(PoleProximity):
        lens_residual(LensConfig([(0.5, 1.0)]), 0.5 + 1e-12)


# -- images ---------------------------------------------------------------------


def test_single_mass_closed_form():
    cfg = LensConfig([(1, 1.0)])
    imgs = solve_images(cfg)
    assert len(imgs) == 2
    lo, hi = imgs
    assert abs(lo.z - (1 - 5**0.5) / 2) < 1e-10
    assert abs(hi.z - PHI) < 1e-10
    # classification by |r'| against 1
    assert lo.sense is Sense.PRESERVING and abs(lo.deflection_derivative_mag - 1 / PHI**2) < 1e-12
    assert hi.sense is Sense.REVERSING and abs(hi.deflection_derivative_mag - PHI**2) < 1e-12
    for im in imgs:
        assert im.residual <= 1e-12 * (1 + abs(im.z))


@pytest.mark.parametrize("z1,sigma", [(1, 4.0), (0.3 + 0.4j, 0.7), (-2j, 0.01)])
def test_single_mass_quadratic(z1, sigma):
    # images lie on the line through the mass: z = t z1/|z1| with t^2 - |z1| t - sigma = 0
    cfg = LensConfig([(z1, sigma)])
    imgs = solve_images(cfg)
    u = z1 / abs(z1)
    t = np.roots([1, -abs(z1), -sigma])
    assert len(imgs) == 2
    for w in t * u:
        assert min(abs(im.z - w) for im in imgs) < 1e-10
    rep = audit(cfg, imgs)
    assert (rep.m_plus, rep.m_minus, rep.winding) == (1, 1, 1) and rep.identity_ok


def test_einstein_ring():
    assert einstein_ring_check(LensConfig([(0, 1.0)])) == 1
    assert einstein_ring_check(LensConfig([(0, 4.0)])) == 2
    assert einstein_ring_check(LensConfig([(0.1, 1.0)])) is None
    assert einstein_ring_check(LensConfig([(0.5j, 1.0)], source=0.5j)) == 1
    with pytest.raises(DegenerateRing):
        solve_images(LensConfig([(0, 1.0)]))


def test_two_mass_five_images():
    cfg = LensConfig([(-0.5, 0.5), (0.5, 0.5)])
    imgs = solve_images(cfg)
    rep = audit(cfg, imgs)
    assert rep.total == 5
    assert (rep.m_plus, rep.m_minus) == (2, 3)
    assert rep.identity_ok and rep.bound_ok


def test_two_mass_three_images():
    cfg = LensConfig([(-1.5, 0.5), (1.5, 0.5)])
    rep = audit(cfg, solve_images(cfg))
    assert rep.total == 3 and rep.identity_ok


def test_critical_image_detected():
    # equal masses 1/2 at +-1: the image at 0 has |r'| = 1 exactly
    cfg = LensConfig([(-1, 0.5), (1, 0.5)])
    with pytest.raises(NearCriticalImage):
        solve_images(cfg)


def test_random_configs_identity_and_bound():
    rng = np.random.default_rng(10)
    for k in range(60):
        cfg = random_config(rng, 2 + k % 3)
        rep = audit(cfg, solve_images(cfg))
        assert rep.identity_ok and rep.bound_ok and rep.winding == 1


def test_grid_doubling_stable():
    rng = np.random.default_rng(11)
    for k in range(8):
        cfg = random_config(rng, 2 + k % 3)
        a = [im.z for im in solve_images(cfg, grid=48)]
        b = [im.z for im in solve_images(cfg, grid=96)]
        assert len(a) == len(b)
        assert np.allclose(a, b, atol=1e-8)


def test_rotational_equivariance():
    rng = np.random.default_rng(12)
    for k in range(8):
        cfg = random_config(rng, 2 + k % 3)
        theta = rng.uniform(0, 2 * np.pi)
        e = cmath.exp(1j * theta)
        rot = LensConfig([(z * e, s) for z, s in cfg.masses], cfg.source * e)
        a = [im.z * e for im in solve_images(cfg)]
        b = [im.z for im in solve_images(rot)]
        assert len(a) == len(b)
        for z in a:
            assert min(abs(z - w) for w in b) < 1e-9


def test_source_translation():
    cfg = LensConfig([(1, 1.0)])
    shifted = LensConfig([(1 + 2j, 1.0)], source=2j)
    a = [im.z + 2j for im in solve_images(cfg)]
    b = [im.z for im in solve_images(shifted)]
    assert np.allclose(a, b, atol=1e-12)


# -- winding ----------------------------------------------------------------------


def test_winding_number_of_powers():
    for k in range(-3, 4):
        assert winding_number(lambda z, k=k: z**k, 1.0) == k
    assert winding_number(lambda z: z - 2, 1.0) == 0
    assert winding_number(lambda z: np.conj(z), 1.0) == -1


# -- constructions ----------------------------------------------------------------


def test_polygon_config():
    cfg = polygon_config(3, 1.0, 1 / 3)
    assert cfg.n == 3
    assert np.allclose(np.abs(cfg.positions), 1)
    assert np.allclose(cfg.sigmas, 1 / 3)
    cfg = polygon_config(3, 1.0, 1 / 3, center_mass=1e-3)
    assert cfg.n == 4
    assert abs(cfg.sigmas.sum() - 1) < 1e-14
    assert 0 in cfg.positions
    rep = audit(cfg, solve_images(cfg))
    assert rep.identity_ok and rep.total <= 15


def test_normalize_physical():
    DL, DS, DLS = 1e20, 3e20, 2e20
    M1 = C_SI**2 * DS * DL / (4 * G_SI * DLS)
    (s,) = normalize_physical([M1], DL, DS, DLS)
    assert abs(s - 1) < 1e-14
    a, b, c = normalize_physical([M1, 2 * M1, M1], DL, DS, DLS)
    assert abs(b - 2 * a) < 1e-14 and a == c
    with pytest.raises(NonPositiveInput):
        normalize_physical([M1], -1, DS, DLS)
    with pytest.raises(NonPositiveInput):
        normalize_physical([M1], DL, DS, 4e20)


def test_two_mass_scan_finds_five():
    res = scan_two_mass(np.linspace(0.4, 3.0, 14))
    assert res.best_count == 5
    assert res.bound == 5
    assert all(r["count"] is None or r["count"] in (3, 5) for r in res.rows)


def test_polygon_scan_respects_bound():
    res = scan_polygon(3, radii=[0.8, 1.0, 1.2], center_masses=[1e-3, 1e-2])
    assert res.bound == 15
    assert 0 < res.best_count <= 15


# -- Wilmshurst -------------------------------------------------------------------


def test_wilmshurst_z_conj_z2():
    roots, counts = wilmshurst_solve(Poly([0, 0, 1]), Poly([0, 1]))
    want = [0, 1, cmath.exp(2j * math.pi / 3), cmath.exp(-2j * math.pi / 3)]
    assert counts.total == 4 == counts.bound_3n2
    for w in want:
        assert min(abs(r.z - w) for r in roots) < 1e-10
    for r in roots:
        assert abs(r.z**2 - r.z.conjugate()) < 1e-12


def test_wilmshurst_holomorphic():
    roots, counts = wilmshurst_solve(Poly([0, 0, 0, 1]), Poly([0]))
    assert len(roots) == 1 and roots[0].multiplicity == 3 and abs(roots[0].z) < 1e-6


def test_wilmshurst_equal_degrees():
    with pytest.raises(EqualDegrees):
        wilmshurst_solve(Poly([0, 0, 1]), Poly([1, 0, 1]))


def test_wilmshurst_random_bound():
    rng = np.random.default_rng(13)
    for n in range(2, 7):
        for _ in range(6):
            p = Poly(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
            roots, counts = wilmshurst_solve(p, Poly([0, 1]))
            assert counts.total <= 3 * n - 2
            for r in roots:
                assert abs(p(r.z) - r.z.conjugate()) <= 1e-10 * (1 + abs(r.z)) ** n


def test_wilmshurst_lll_reported():
    p = Poly([0.1, 0, 0, 1])
    q = Poly([0, 0.5, 0.3])
    roots, counts = wilmshurst_solve(p, q)
    assert counts.lll_bound == 2 * 2 * 2 + 3
    assert counts.bound_3n2 is None
    assert counts.within_lll == (counts.total <= counts.lll_bound)


# -- CSV ------------------------------------------------------------------------


def test_solution_csv_round_trip():
    cfg = LensConfig([(-0.5, 0.5), (0.5 + 0.1j, 0.3)], source=0.05j)
    imgs = solve_images(cfg)
    text = solution_csv(imgs)
    assert text.splitlines()[0] == "re,im,sense,abs_rprime,residual"
    back = read_solution_csv(io.StringIO(text))
    assert len(back) == len(imgs)
    for a, b in zip(imgs, back):
        assert a.z == b.z and a.sense == b.sense
        assert a.deflection_derivative_mag == b.deflection_derivative_mag
        assert a.residual == b.residual
    keys = [(im.z.real, im.z.imag) for im in back]
    assert keys == sorted(keys)
