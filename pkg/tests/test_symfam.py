import math

import numpy as np
import pytest

from tanglekit import symfam as sf
from tanglekit.bipartite import huber_concurrence_bound, negativity
from tanglekit.core import DensityMatrix, StateError, named_state, random_density_matrix

SQ3 = math.sqrt(3)


def psi_d_corner(d):
    return math.sqrt((d - 1) / d), math.sqrt(d - 1) / d


# ------------------------------------------------------------ construction

def test_werner_p1():
    assert np.allclose(sf.family_state("werner", p=1).matrix, named_state("phi+").density().matrix)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_axi_corner_is_psi_d(d):
    x, y = psi_d_corner(d)
    rho = sf.family_state("axi", x=x, y=y, d=d)
    assert np.allclose(rho.matrix, named_state("psi_d", d=d).density().matrix, atol=1e-12)


def test_ghzsym_origin():
    assert np.allclose(sf.family_state("ghzsym", x=0, y=0).matrix, np.eye(8) / 8)


def test_nonphysical_rejected():
    with pytest.raises(StateError):
        sf.family_state("ghzsym", x=0.5, y=0)
    with pytest.raises(StateError):
        sf.family_state("axi", x=1.0, y=0.0, d=3)


# ------------------------------------------------------------ twirls

@pytest.mark.parametrize("d", [2, 3, 4])
def test_axi_twirl_idempotent(d):
    rho = random_density_matrix((d, d), d)
    c = sf.axi_twirl(rho)
    again = sf.axi_twirl(sf.family_state("axi", x=c.x, y=c.y, d=d))
    assert (again.x, again.y) == pytest.approx((c.x, c.y), abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_axi_twirl_corners(d):
    c = sf.axi_twirl(named_state("psi_d", d=d).density())
    assert (c.x, c.y) == pytest.approx(psi_d_corner(d), abs=1e-12)
    c = sf.axi_twirl(DensityMatrix(np.eye(d * d) / d ** 2, (d, d)))
    assert (c.x, c.y) == pytest.approx((0, 0), abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_axi_twirl_does_not_increase(seed):
    rho = random_density_matrix((3, 3), seed, rank=2)
    c = sf.axi_twirl(rho)
    tw = sf.family_state("axi", x=c.x, y=c.y, d=3)
    assert negativity(tw) <= negativity(rho) + 1e-12
    assert huber_concurrence_bound(tw).value <= huber_concurrence_bound(rho).value + 1e-12


def test_isotropic_twirl():
    d = 3
    proj = named_state("psi_d", d=d).density()
    mixed = DensityMatrix(np.eye(9) / 9, (3, 3))
    assert sf.isotropic_twirl(proj) == pytest.approx(1, abs=1e-12)
    assert sf.isotropic_twirl(mixed) == pytest.approx(0, abs=1e-12)
    half = DensityMatrix(0.5 * proj.matrix + 0.5 * mixed.matrix, (3, 3))
    assert sf.isotropic_twirl(half) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_isotropic_line_in_axi(d):
    cx, cy = psi_d_corner(d)
    for p in (0.2, 0.5, 0.9):
        c = sf.axi_twirl(sf.family_state("isotropic", p=p, d=d))
        assert c.y / c.x == pytest.approx(cy / cx, abs=1e-12)


def test_ghzsym_twirl():
    c = sf.ghzsym_twirl(named_state("ghz", n=3).density())
    assert (c.x, c.y) == pytest.approx((0.5, SQ3 / 4), abs=1e-12)
    c = sf.ghzsym_twirl(named_state("w", n=3).density())
    assert (c.x, c.y) == pytest.approx((0, -1 / (4 * SQ3)), abs=1e-12)
    c = sf.ghzsym_twirl(DensityMatrix(np.eye(8) / 8, (2, 2, 2)))
    assert (c.x, c.y) == pytest.approx((0, 0), abs=1e-12)


# ------------------------------------------------------------ axisymmetric values

def test_axi_corner_values():
    x, y = psi_d_corner(4)
    rep = sf.axi_exact(sf.AxiCoords(x, y, 4))
    assert rep["negativity"].value == pytest.approx(1.5, abs=1e-12)
    assert rep.labels["schmidt_number"] == 4


def test_axi_zero_line():
    d = 3
    for x in (0.1, 0.2, 0.3):
        y = math.sqrt(d - 1) / d - x * math.sqrt(d)
        rep = sf.axi_exact(sf.AxiCoords(x, y, d))
        assert rep["negativity"].value == pytest.approx(0, abs=1e-12)
        assert rep.labels["schmidt_number"] == 1


def test_axi_negative_x_has_no_concurrence():
    rep = sf.axi_exact(sf.AxiCoords(-0.2, 0.3, 3))
    assert rep["concurrence"] is None
    assert rep.labels["schmidt_number"] is None


# ------------------------------------------------------------ GHZ-symmetric values

def test_ghz_corner():
    c = sf.GhzSymCoords(0.5, SQ3 / 4)
    rep = sf.ghzsym_exact(c)
    assert rep["tau3"].value == pytest.approx(1, abs=1e-12)
    assert sf.ghzsym_classify(c) == "GHZ"


def test_below_curve_zero():
    for x, y in [(0.2, 0.1), (0.3, 0.25), (-0.25, 0.2), (0.0, 0.4)]:
        assert sf.ghzsym_tau3(sf.GhzSymCoords(x, y)) == 0


def test_top_middle_gme_zero():
    assert sf.ghzsym_gme_concurrence(sf.GhzSymCoords(0, SQ3 / 4)) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("v", np.linspace(0, 1, 11))
def test_curve_points(v):
    x, y = sf.ghzw_curve(v)
    c = sf.GhzSymCoords(x, y)
    assert sf.ghzsym_tau3(c) == pytest.approx(0, abs=1e-9)
    assert sf.ghzsym_classify(c) != "GHZ"
    beyond = sf.GhzSymCoords(x + 1e-3 * (0.5 - x), y + 1e-3 * (SQ3 / 4 - y))
    assert sf.ghzsym_tau3(beyond) > 0


def test_curve_endpoint_is_w():
    assert sf.ghzsym_classify(sf.GhzSymCoords(3 / 8, SQ3 / 6)) == "W"


def test_classify_regions():
    assert sf.ghzsym_classify(sf.GhzSymCoords(0, 0)) == "separable"
    c = sf.GhzSymCoords(0.15, 0.1)
    assert sf.ghzsym_is_physical(c)
    assert sf.ghzsym_classify(c) == "biseparable"
    c = sf.GhzSymCoords(0.3, 0.3)
    assert sf.ghzsym_is_physical(c)
    assert sf.ghzsym_classify(c) in ("W", "GHZ")


def test_gme_zero_on_kite_line():
    for x in np.linspace(0.0, 0.375, 7):
        y = (0.375 - x) * 2 / SQ3
        c = sf.GhzSymCoords(x, y)
        if sf.ghzsym_is_physical(c):
            assert sf.ghzsym_gme_concurrence(c) == 0


def test_negativity_direct_vs_closed_form():
    # the direct value vanishes on the separable kite and is 1/2 at the GHZ corner
    corner = sf.ghzsym_exact(sf.GhzSymCoords(0.5, SQ3 / 4))
    assert corner["negativity"].value == pytest.approx(0.5, abs=1e-12)
    assert corner["negativity_printed"].value == 0
    rng = np.random.default_rng(3)
    for _ in range(50):
        x, y = rng.uniform(-0.5, 0.5), rng.uniform(-1 / (4 * SQ3), SQ3 / 4)
        c = sf.GhzSymCoords(x, y)
        if not sf.ghzsym_is_physical(c):
            continue
        direct = negativity(sf.family_state("ghzsym", x=x, y=y), 0)
        assert sf.ghzsym_negativity(c) == pytest.approx(direct, abs=1e-12)
