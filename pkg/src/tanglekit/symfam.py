"""Symmetric state families with closed-form entanglement.

Covers Werner and isotropic states, the two-parameter axisymmetric family of
two qudits and the GHZ-symmetric family of three qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bipartite import negativity
from .core import DensityMatrix, DimensionError, StateError, named_state
from .results import BoundValue, MeasureReport

SQ3 = math.sqrt(3.0)
GEOM_TOL = 1e-12
# bisection leaves ~1e-11 of tau3 on the GHZ-W curve itself
CLASS_TOL = 1e-9


def _psi_d_projector(d: int) -> np.ndarray:
    v = named_state("psi_d", d=d).amplitudes
    return np.outer(v, v.conj())


# ------------------------------------------------------------ coordinates

@dataclass(frozen=True)
class AxiCoords:
    """Axisymmetric coordinates: ``x`` tracks the ``<jj|rho|kk>`` coherences,
    ``y`` the weight on the ``|jj>`` diagonal."""

    x: float
    y: float
    d: int

    @property
    def a(self) -> float:
        return self.y * math.sqrt(self.d - 1) / self.d

    @property
    def b(self) -> float:
        return self.x / math.sqrt(self.d * (self.d - 1))

    def in_range(self, tol: float = GEOM_TOL) -> bool:
        d = self.d
        return (-1 / (d * math.sqrt(d - 1)) - tol <= self.y <= math.sqrt(d - 1) / d + tol
                and -1 / math.sqrt(d * (d - 1)) - tol <= self.x <= math.sqrt((d - 1) / d) + tol)


@dataclass(frozen=True)
class GhzSymCoords:
    """GHZ-symmetric coordinates; the GHZ+ projector sits at ``(1/2, sqrt3/4)``."""

    x: float
    y: float

    def weights(self) -> tuple[float, float, float]:
        """Weights of ``GHZ+``, ``GHZ-`` and the normalized ``rho_r``."""
        s = SQ3 * self.y + 0.25
        return s / 2 + self.x, s / 2 - self.x, 1 - s


GHZ_PLUS_CORNER = (0.5, SQ3 / 4)
RHO_R_CORNER = (0.0, -1 / (4 * SQ3))
TOP_MIDDLE = (0.0, SQ3 / 4)
SEPARABLE_KITE = (RHO_R_CORNER, (0.125, 0.0), TOP_MIDDLE, (-0.125, 0.0))
BISEPARABLE_KITE = (RHO_R_CORNER, (0.25, 1 / (4 * SQ3)), TOP_MIDDLE, (-0.25, 1 / (4 * SQ3)))


def ghzsym_is_physical(c: GhzSymCoords, tol: float = GEOM_TOL) -> bool:
    return all(w >= -tol for w in c.weights())


def axi_is_physical(c: AxiCoords, tol: float = GEOM_TOL) -> bool:
    d, a, b = c.d, c.a, c.b
    diag_off = 1 / d ** 2 - a / (d - 1)
    return (c.in_range(tol) and diag_off >= -tol and 1 / d ** 2 + a - b >= -tol
            and 1 / d ** 2 + a + (d - 1) * b >= -tol)


# ------------------------------------------------------------ constructors

def _axi_matrix(x: float, y: float, d: int) -> np.ndarray:
    c = AxiCoords(x, y, d)
    a, b = c.a, c.b
    t = np.zeros((d, d, d, d))
    for j in range(d):
        for k in range(d):
            t[j, k, j, k] = 1 / d ** 2 + a if j == k else 1 / d ** 2 - a / (d - 1)
            if j != k:
                t[j, j, k, k] = b
    return t.reshape(d * d, d * d)


def _ghzsym_matrix(x: float, y: float) -> np.ndarray:
    p_plus, p_minus, q = GhzSymCoords(x, y).weights()
    m = np.zeros((8, 8))
    m[0, 0] = m[7, 7] = (p_plus + p_minus) / 2
    m[0, 7] = m[7, 0] = (p_plus - p_minus) / 2
    m[np.arange(1, 7), np.arange(1, 7)] = q / 6
    return m


def family_state(kind: str, **params) -> DensityMatrix:
    """Member of a symmetric family.

    ``werner`` (p): ``p|phi+><phi+| + (1-p) 1/4``; ``isotropic`` (p, d):
    ``p|Psi_d><Psi_d| + (1-p) 1/d^2``; ``axi`` (x, y, d); ``ghzsym`` (x, y).
    Non-physical parameters raise StateError.
    """
    if kind == "werner":
        p = float(params["p"])
        if not -1 / 3 - GEOM_TOL <= p <= 1 + GEOM_TOL:
            raise StateError("Werner weight outside [-1/3, 1]")
        return DensityMatrix(p * _psi_d_projector(2) + (1 - p) * np.eye(4) / 4, (2, 2))
    if kind == "isotropic":
        p, d = float(params["p"]), int(params["d"])
        if not -1 / (d * d - 1) - GEOM_TOL <= p <= 1 + GEOM_TOL:
            raise StateError("isotropic weight outside the physical range")
        return DensityMatrix(p * _psi_d_projector(d) + (1 - p) * np.eye(d * d) / d ** 2, (d, d))
    if kind == "axi":
        x, y, d = float(params["x"]), float(params["y"]), int(params["d"])
        if d < 2 or not axi_is_physical(AxiCoords(x, y, d)):
            raise StateError(f"axisymmetric point ({x}, {y}) is not physical for d={d}")
        return DensityMatrix._trusted(_axi_matrix(x, y, d), (d, d))
    if kind == "ghzsym":
        x, y = float(params["x"]), float(params["y"])
        if not ghzsym_is_physical(GhzSymCoords(x, y)):
            raise StateError(f"GHZ-symmetric point ({x}, {y}) is outside the triangle")
        return DensityMatrix._trusted(_ghzsym_matrix(x, y), (2, 2, 2))
    raise ValueError(f"unknown family {kind!r}")


# ------------------------------------------------------------ twirls

def _equal_dims(rho: DensityMatrix) -> int:
    if rho.n_parties != 2 or rho.dims[0] != rho.dims[1]:
        raise DimensionError(f"need two parties of equal dimension, got {rho.dims}")
    return rho.dims[0]


def axi_twirl(rho: DensityMatrix) -> AxiCoords:
    """Project onto the axisymmetric family by averaging matrix elements.

    This is the Hilbert-Schmidt projection onto operators invariant under
    simultaneous basis permutations, the phases ``e^{i phi_j} ⊗ e^{-i phi_j}``
    and the party swap.
    """
    d = _equal_dims(rho)
    t = rho.matrix.reshape(d, d, d, d)
    jj = np.array([t[j, j, j, j].real for j in range(d)])
    coh = np.array([t[j, j, k, k].real for j in range(d) for k in range(d) if j != k])
    a = jj.mean() - 1 / d ** 2
    b = coh.mean()
    return AxiCoords(b * math.sqrt(d * (d - 1)), a * d / math.sqrt(d - 1), d)


def isotropic_twirl(rho: DensityMatrix) -> float:
    """Isotropic weight ``p`` with the same ``<Psi_d|rho|Psi_d>``."""
    d = _equal_dims(rho)
    f = float(np.vdot(named_state("psi_d", d=d).amplitudes,
                      rho.matrix @ named_state("psi_d", d=d).amplitudes).real)
    return (f - 1 / d ** 2) / (1 - 1 / d ** 2)


def ghzsym_twirl(rho: DensityMatrix) -> GhzSymCoords:
    if tuple(rho.dims) != (2, 2, 2):
        raise DimensionError(f"need three qubits, got {rho.dims}")
    m = rho.matrix
    return GhzSymCoords(float((m[0, 7] + m[7, 0]).real / 2),
                        float((m[0, 0] + m[7, 7]).real - 0.25) / SQ3)


# ------------------------------------------------------------ axisymmetric values

def _axi_bracket(c: AxiCoords) -> float:
    d = c.d
    return math.sqrt(d * (d - 1)) * abs(c.x) + math.sqrt(d - 1) * c.y - (d - 1) / d


def axi_exact(c: AxiCoords) -> MeasureReport:
    """Negativity, concurrence and Schmidt number of an axisymmetric state.

    The negativity holds for either sign of ``x``.  Concurrence and Schmidt
    number are only available for ``x >= 0`` and are None otherwise.
    """
    d = c.d
    br = _axi_bracket(c)
    neg = max(0.0, br / 2)
    values = {"negativity": BoundValue(neg, "exact"), "concurrence": None}
    labels = {"schmidt_number": None}
    if c.x >= 0:
        values["concurrence"] = BoundValue(max(0.0, math.sqrt(2 / (d * (d - 1))) * br), "exact")
        # k - 2 <= 2N <= k - 1, boundary points go to the lower class
        labels["schmidt_number"] = min(d, max(1, math.ceil(2 * neg - 1e-12) + 1))
    return MeasureReport(values, labels)


# ------------------------------------------------------------ GHZ-symmetric values

def ghzw_curve(v: float) -> tuple[float, float]:
    """Point of the GHZ/W boundary curve, ``v`` in [0, 1]."""
    xw = (v ** 5 + 8 * v ** 3) / (8 * (4 - v ** 2))
    yw = SQ3 / 4 * (4 - v ** 2 - v ** 4) / (4 - v ** 2)
    return xw, yw


def _ghzw_intersection(x, y, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Curve parameter ``v`` where the ray from the GHZ+ corner through (x, y)
    meets the GHZ-W curve, by bisection; works elementwise on arrays.

    The cross product of the ray with the chord to the curve is <= 0 at
    ``v = 0`` and >= 0 at ``v = 1`` for every physical point.
    """
    cx, cy = GHZ_PLUS_CORNER
    dx, dy = np.asarray(x, dtype=float) - cx, np.asarray(y, dtype=float) - cy
    lo, hi = np.zeros(dx.shape), np.ones(dx.shape)
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        px, py = ghzw_curve(mid)
        below = dx * (py - cy) - dy * (px - cx) < 0
        lo, hi = np.where(below, mid, lo), np.where(below, hi, mid)
        if np.max(hi - lo) < tol:
            break
    return (lo + hi) / 2


def ghzsym_tau3_batch(x, y) -> np.ndarray:
    """Three-tangle of GHZ-symmetric points, elementwise; ``x`` enters as ``|x|``."""
    x, y = np.abs(np.asarray(x, dtype=float)), np.asarray(y, dtype=float)
    xw, _ = ghzw_curve(_ghzw_intersection(x, y))
    t = np.where(x > xw, (x - xw) / (0.5 - xw), 0.0)
    at_corner = np.hypot(x - GHZ_PLUS_CORNER[0], y - GHZ_PLUS_CORNER[1]) < GEOM_TOL
    return np.where(at_corner, 1.0, t)


def ghzsym_tau3(c: GhzSymCoords) -> float:
    return float(ghzsym_tau3_batch(c.x, c.y))


def ghzsym_gme_concurrence(c: GhzSymCoords) -> float:
    return 2 * max(0.0, abs(c.x) + SQ3 / 2 * c.y - 0.375)


def ghzsym_negativity_printed(c: GhzSymCoords) -> float:
    """The same affine expression with its overall sign flipped; comparison only."""
    return max(0.0, 0.125 - c.y / (2 * SQ3) - abs(c.x))


def ghzsym_negativity(c: GhzSymCoords) -> float:
    """Negativity of any single-qubit cut: ``max(0, |x| + y/(2 sqrt3) - 1/8)``."""
    return max(0.0, abs(c.x) + c.y / (2 * SQ3) - 0.125)


def ghzsym_exact(c: GhzSymCoords) -> MeasureReport:
    """Exact three-tangle, GME concurrence and negativity on the GHZ-symmetric family.

    The negativity is taken from the partial transpose of the family state;
    the printed closed form is reported alongside as ``negativity_printed``.
    """
    if not ghzsym_is_physical(c):
        raise StateError(f"point ({c.x}, {c.y}) is outside the triangle")
    direct = negativity(family_state("ghzsym", x=c.x, y=c.y), 0)
    return MeasureReport(
        {"tau3": BoundValue(ghzsym_tau3(c), "exact"),
         "gme_concurrence": BoundValue(ghzsym_gme_concurrence(c), "exact"),
         "negativity": BoundValue(direct, "exact"),
         "negativity_printed": BoundValue(ghzsym_negativity_printed(c), "exact")},
        {"class": ghzsym_classify(c)})


def _in_convex(poly, x: float, y: float, tol: float = GEOM_TOL) -> bool:
    n = len(poly)
    signs = []
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        signs.append((x2 - x1) * (y - y1) - (y2 - y1) * (x - x1))
    return all(s >= -tol for s in signs) or all(s <= tol for s in signs)


def ghzsym_classify(c: GhzSymCoords) -> str:
    """``separable``, ``biseparable``, ``W`` or ``GHZ``; boundaries go to the lower class."""
    if _in_convex(SEPARABLE_KITE, c.x, c.y):
        return "separable"
    if _in_convex(BISEPARABLE_KITE, c.x, c.y):
        return "biseparable"
    return "GHZ" if ghzsym_tau3(c) > CLASS_TOL else "W"
