import math

import numpy as np
import pytest

from tanglekit import roofs
from tanglekit.bipartite import wootters_concurrence
from tanglekit.core import (
    DensityMatrix, PureState, named_state, random_density_matrix, random_pure_state,
)
from tanglekit.symfam import family_state
from tanglekit.threequbit import tau3_mixed_lower_bound

GHZ = named_state("ghz", n=3)
W = named_state("w", n=3)


def bell_diagonal(p):
    names = ("phi+", "phi-", "psi+", "psi-")
    return DensityMatrix(sum(w * named_state(n).density().matrix for w, n in zip(p, names)), (2, 2))


def ab_state(a, b):
    return PureState(np.array([a, 0, 0, b]), (2, 2))


def ghz_w_mixture(p):
    return DensityMatrix(p * GHZ.density().matrix + (1 - p) * W.density().matrix, (2, 2, 2))


# ------------------------------------------------------------ normal form

def test_bell_diagonal_is_normal():
    nf = roofs.normal_form(bell_diagonal((0.5, 0.3, 0.15, 0.05)))
    assert nf.iterations <= 1
    assert nf.converged


@pytest.mark.parametrize("a", [0.3, 0.6, 0.9])
def test_normal_form_pure_ab(a):
    b = math.sqrt(1 - a * a)
    nf = roofs.normal_form(ab_state(a, b).density())
    assert nf.trace == pytest.approx(2 * a * b, abs=1e-10)
    assert np.allclose(nf.state.matrix / nf.trace, named_state("phi+").density().matrix, atol=1e-9)


def test_w_nullcone():
    nf = roofs.normal_form(W.density())
    assert nf.nullcone


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3), (2, 2, 2)])
def test_normal_form_reductions(dims):
    for seed in range(5):
        nf = roofs.normal_form(random_density_matrix(dims, seed))
        assert nf.converged
        assert roofs._reduction_deviation(nf.state.matrix / nf.trace, dims) < 1e-8


def test_evaluate_via_normal_form():
    for a in (0.2, 0.5, 0.8):
        b = math.sqrt(1 - a * a)
        val = roofs.evaluate_via_normal_form(roofs.G_CONCURRENCE, ab_state(a, b).density())
        assert val == pytest.approx(2 * a * b, abs=1e-10)
    assert roofs.evaluate_via_normal_form(roofs.TAU3, GHZ.density()) == pytest.approx(1, abs=1e-9)
    assert roofs.evaluate_via_normal_form(roofs.TAU3, W.density()) == 0


def test_evaluate_via_normal_form_needs_sl_invariance():
    with pytest.raises(ValueError):
        roofs.evaluate_via_normal_form(roofs.NEGATIVITY, bell_diagonal((1, 0, 0, 0)))


def test_get_measure():
    assert roofs.get_measure("tau3") is roofs.TAU3
    with pytest.raises(ValueError):
        roofs.get_measure("nope")


# ------------------------------------------------------------ convex roofs

def test_roof_pure_input():
    psi = random_pure_state((2, 2), 3)
    b = roofs.convex_roof_upper(roofs.CONCURRENCE, psi, 0)
    assert b.kind == "upper"
    assert b.value == pytest.approx(wootters_concurrence(psi), abs=1e-12)


@pytest.mark.parametrize("p", np.linspace(0, 1, 6))
def test_roof_werner(p):
    rho = family_state("werner", p=p)
    ref = wootters_concurrence(rho)
    assert abs(roofs.convex_roof_upper(roofs.CONCURRENCE, rho, 0).value - ref) < 1e-3


def test_roof_decomposition_reconstructs():
    rho = random_density_matrix((2, 2), 9, rank=3)
    res = roofs.roof_search(roofs.CONCURRENCE, rho, 0)
    assert np.allclose(res.decomposition.density().matrix, rho.matrix, atol=1e-10)
    assert res.dispersion >= 0


def test_roof_length_below_rank():
    with pytest.raises(ValueError):
        roofs.roof_search(roofs.CONCURRENCE, random_density_matrix((2, 2), 1), 0, length=2)


def test_roof_sandwich_ghz_w():
    rho = ghz_w_mixture(0.8)
    upper = roofs.convex_roof_upper(roofs.TAU_RES, rho, 0).value
    lower = tau3_mixed_lower_bound(rho, 0).value
    # tau_res is the square of tau3 on pure states; the roof of the square
    # is bounded below by the square of the roof
    assert upper >= lower ** 2 - 1e-9


def test_bruteforce():
    psi = random_pure_state((2, 2), 2)
    assert roofs.convex_roof_bruteforce(roofs.CONCURRENCE, psi.density()) == pytest.approx(
        wootters_concurrence(psi), abs=1e-9)
    for seed in range(3):
        rho = random_density_matrix((2, 2), seed, rank=2)
        assert abs(roofs.convex_roof_bruteforce(roofs.CONCURRENCE, rho) - wootters_concurrence(rho)) < 1e-3
    assert roofs.convex_roof_bruteforce(roofs.TAU_RES, ghz_w_mixture(1.0)) == pytest.approx(1, abs=1e-9)


def test_bruteforce_rejects_high_rank():
    with pytest.raises(ValueError):
        roofs.convex_roof_bruteforce(roofs.CONCURRENCE, random_density_matrix((2, 2), 0, rank=3))


def test_cren():
    assert roofs.cren_upper(named_state("bell"), 0).value == pytest.approx(0.5)
    assert roofs.cren_upper(bell_diagonal((0.7, 0.1, 0.1, 0.1)), 0).value == pytest.approx(0.2, abs=2e-3)
    sep = roofs._separable_fixture((2, 2), np.random.default_rng(1))
    assert roofs.cren_upper(sep, 0).value == pytest.approx(0, abs=1e-6)


# ------------------------------------------------------------ monotone harness

def _fixtures():
    return [random_density_matrix((2, 2), s, rank=2) for s in range(3)] + [random_pure_state((2, 2), 10)]


def test_harness_wootters():
    report = roofs.monotone_property_checks(roofs.WOOTTERS, _fixtures(), 0)
    assert report.passed
    assert {o.name for o in report.outcomes} == set(roofs.CHECKS)


def test_harness_tau3_sl():
    fx = [random_pure_state((2, 2, 2), s) for s in range(4)]
    report = roofs.monotone_property_checks(roofs.TAU3, fx, 0, checks=("sl_invariance",))
    assert report["sl_invariance"].passed


def test_harness_catches_purity():
    purity = roofs.Measure("purity", lambda v, dims: np.ones(v.shape[:-1]), None, False,
                           lambda rho: float(np.trace(rho.matrix @ rho.matrix).real / rho.trace ** 2))
    report = roofs.monotone_property_checks(purity, _fixtures(), 0, checks=("separable_zero", "convexity"))
    assert report["convexity"].passed
    assert not report["separable_zero"].passed
    assert not report.passed
