import math

import numpy as np
import pytest

from tanglekit import threequbit as tq
from tanglekit.core import (
    DensityMatrix, DimensionError, LocalOperator, PureState, StateError, apply_local_operator,
    named_state, random_pure_state, tensor_product,
)
from tanglekit.invariants import tau3
from tanglekit.multipartite import pairwise_concurrence
from tanglekit.roofs import TAU3, convex_roof_upper
from tanglekit.symfam import GhzSymCoords, family_state, ghzsym_is_physical, ghzsym_tau3

GHZ = named_state("ghz", n=3)
W = named_state("w", n=3)
P0 = 4 * 2 ** (1 / 3) / (3 + 4 * 2 ** (1 / 3))


def noisy_ghz(p):
    return DensityMatrix(p * GHZ.density().matrix + (1 - p) * np.eye(8) / 8, (2, 2, 2))


# ------------------------------------------------------------ canonical form

def test_acin_ghz():
    p = tq.AcinParams((1 / math.sqrt(2), 0, 0, 0, 1 / math.sqrt(2)))
    assert tq.acin_measures(p)["tau3"] == pytest.approx(1)


def test_acin_no_l4():
    p = tq.AcinParams((0.6, 0, 0.8, 0, 0))
    assert tq.acin_measures(p)["tau3"] == 0


@pytest.mark.parametrize("seed", range(8))
def test_acin_matches_direct(seed):
    rng = np.random.default_rng(seed)
    lams = rng.uniform(0, 1, 5)
    p = tq.AcinParams(tuple(lams / np.linalg.norm(lams)), float(rng.uniform(0, math.pi)))
    m = tq.acin_measures(p)
    psi = p.state()
    assert m["tau3"] == pytest.approx(tau3(psi), abs=1e-10)
    assert m["C_AB"] == pytest.approx(pairwise_concurrence(psi, 0, 1), abs=1e-7)
    assert m["C_AC"] == pytest.approx(pairwise_concurrence(psi, 0, 2), abs=1e-7)
    assert m["C_BC"] == pytest.approx(pairwise_concurrence(psi, 1, 2), abs=1e-7)
    assert m["C_A|BC"] ** 2 == pytest.approx(m["C_AB"] ** 2 + m["C_AC"] ** 2 + m["tau3"] ** 2, abs=1e-10)


def test_acin_validation():
    with pytest.raises(StateError):
        tq.AcinParams((1, 1, 0, 0, 0))
    with pytest.raises(StateError):
        tq.AcinParams((1, 0, 0, 0, 0), phi=4.0)


# ------------------------------------------------------------ classification

def test_pure_class_examples():
    assert tq.pure_class3(GHZ) == "GHZ"
    assert tq.pure_class3(W) == "W"
    zero = PureState(np.array([1, 0]), (2,))
    assert tq.pure_class3(tensor_product(named_state("bell"), zero)) == "C-AB"
    assert tq.pure_class3(named_state("product", bits="011")) == "separable"


def test_pure_class_other_cuts():
    zero = PureState(np.array([1, 0]), (2,))
    a_bc = tensor_product(zero, named_state("bell"))
    assert tq.pure_class3(a_bc) == "A-BC"


@pytest.mark.parametrize("seed", range(10))
def test_class_stable_under_sl(seed):
    for psi in (GHZ, W, random_pure_state((2, 2, 2), seed)):
        out, _ = apply_local_operator(psi, LocalOperator.random_special_linear((2, 2, 2), seed), renormalize=True)
        assert tq.pure_class3(out) == tq.pure_class3(psi)


def test_requires_three_qubits():
    with pytest.raises(DimensionError):
        tq.pure_class3(named_state("bell"))


# ------------------------------------------------------------ GHZ/W superpositions

def test_superposition_tangle():
    assert tq.ghzw_superposition_tangle(1, 0) == pytest.approx(1)
    assert tq.ghzw_superposition_tangle(P0, 0) == pytest.approx(0, abs=1e-12)
    for p in np.linspace(0.01, 1, 25):
        assert tq.ghzw_superposition_tangle(p, math.pi) > 0


@pytest.mark.parametrize("p,phi", [(0.3, 0.0), (0.7, 1.1), (P0, 0.0), (0.5, math.pi)])
def test_superposition_matches_state(p, phi):
    psi = tq.ghzw_superposition_state(p, phi)
    assert tq.ghzw_superposition_tangle(p, phi) == pytest.approx(tau3(psi) ** 2, abs=1e-12)


# ------------------------------------------------------------ witnesses

def test_witness_values():
    assert tq.witness_value(GHZ, "ghz_proj") == pytest.approx(-0.25)
    mixed = DensityMatrix(np.eye(8) / 8, (2, 2, 2))
    assert tq.witness_value(mixed, "ghz_proj") == pytest.approx(0.625)
    assert tq.witness_value(named_state("bell"), "proj2qubit") == pytest.approx(-0.5)


def test_witness_dims_checked():
    with pytest.raises(DimensionError):
        tq.witness_value(named_state("bell"), "ghz_proj")
    with pytest.raises(ValueError):
        tq.named_witness("nope")


def test_witness_hermitian():
    with pytest.raises(ValueError):
        tq.WitnessOperator(np.array([[0, 1], [0, 0]]), "bad", (2,))


def test_tau3_witness_bound():
    assert tq.tau3_witness_bound(GHZ) == pytest.approx(1)
    assert tq.tau3_witness_bound(noisy_ghz(0.9)) == pytest.approx(25.7 / 7 - 3, abs=1e-9)
    assert tq.tau3_witness_bound(W) == 0


# ------------------------------------------------------------ mixed three-tangle

def test_lower_bound_ghz_and_w():
    b = tq.tau3_mixed_lower_bound(GHZ.density(), 0)
    assert b.kind == "lower"
    assert b.value == pytest.approx(1, abs=1e-6)
    assert tq.tau3_mixed_lower_bound(W.density(), 0).value == pytest.approx(0, abs=1e-9)


@pytest.mark.parametrize("x,y", [(0.45, 0.4), (0.4, 0.35), (-0.42, 0.38), (0.2, 0.1)])
def test_lower_bound_on_family(x, y):
    c = GhzSymCoords(x, y)
    assert ghzsym_is_physical(c)
    rho = family_state("ghzsym", x=x, y=y)
    assert tq.tau3_mixed_lower_bound(rho, 0).value == pytest.approx(ghzsym_tau3(c), abs=1e-6)


def test_bound_sandwich():
    rng = np.random.default_rng(0)
    phi = random_pure_state((2, 2, 2), rng)
    rho = DensityMatrix(0.8 * GHZ.density().matrix + 0.2 * phi.density().matrix, (2, 2, 2))
    lb = tq.tau3_mixed_lower_bound(rho, 1).value
    assert tq.tau3_witness_bound(rho) <= lb + 1e-9
    assert lb <= convex_roof_upper(TAU3, rho, 1).value + 1e-9
