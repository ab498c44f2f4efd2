"""Three-qubit tools: canonical-form formulas, classification, witnesses and
a lower bound on the mixed-state three-tangle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .bipartite import PHI_PLUS
from .core import DensityMatrix, DimensionError, PureState, StateError, named_state, rng_from
from .invariants import residual_tangle
from .multipartite import pairwise_concurrence
from .results import BoundValue
from .roofs import normal_form
from .symfam import ghzsym_tau3_batch

CLASS_TOL = 1e-8
# tau3 is a square root, so rounding of order 1e-16 in the residual tangle
# already shows up as 1e-8; the GHZ test thresholds the polynomial instead
RESIDUAL_TOL = 1e-12
HERMITIAN_TOL = 1e-10


def _require_three_qubits(state):
    if tuple(state.dims) != (2, 2, 2):
        raise DimensionError(f"need three qubits, got dims {state.dims}")


# ------------------------------------------------------------ canonical form

@dataclass(frozen=True)
class AcinParams:
    """``l0|000> + l1 e^{i phi}|100> + l2|101> + l3|110> + l4|111>``."""

    lambdas: tuple
    phi: float = 0.0

    def __post_init__(self):
        lams = tuple(float(x) for x in self.lambdas)
        if len(lams) != 5 or min(lams) < 0:
            raise StateError("need five nonnegative lambdas")
        if abs(sum(x * x for x in lams) - 1) > 1e-9:
            raise StateError("lambdas must have unit square sum")
        if not 0 <= self.phi <= math.pi:
            raise StateError("phi must lie in [0, pi]")
        object.__setattr__(self, "lambdas", lams)

    def state(self) -> PureState:
        return named_state("acin", lambdas=self.lambdas, phi=self.phi)


def acin_measures(p: AcinParams) -> dict:
    """Three-tangle, pairwise concurrences and ``C_A|BC`` in closed form."""
    l0, l1, l2, l3, l4 = p.lambdas
    return {
        "tau3": 2 * l0 * l4,
        "C_AB": 2 * l0 * l3,
        "C_AC": 2 * l0 * l2,
        "C_BC": 2 * abs(l1 * l4 * np.exp(1j * p.phi) - l2 * l3),
        "C_A|BC": 2 * l0 * math.sqrt(l2 ** 2 + l3 ** 2 + l4 ** 2),
    }


# ------------------------------------------------------------ classification

_CUT_LABELS = {(0, 1): "C-AB", (0, 2): "B-AC", (1, 2): "A-BC"}


def pure_class3(psi: PureState, tol: float = CLASS_TOL,
                residual_tol: float = RESIDUAL_TOL) -> str:
    """SLOCC class of a pure three-qubit state.

    ``GHZ`` when the residual tangle exceeds ``residual_tol``, ``W`` when
    all pairwise concurrences exceed ``tol``, the cut label of a single
    entangled pair, or ``separable``.  The thresholds make these numerical
    classes.
    """
    _require_three_qubits(psi)
    psi = psi.normalize()
    if residual_tangle(psi) > residual_tol:
        return "GHZ"
    conc = {pair: pairwise_concurrence(psi, *pair) for pair in _CUT_LABELS}
    entangled = [pair for pair, c in conc.items() if c > tol]
    if len(entangled) == 3:
        return "W"
    if len(entangled) == 1:
        return _CUT_LABELS[entangled[0]]
    if not entangled:
        return "separable"
    # two nonzero pairs cannot occur for exact states; resolve by the larger
    return _CUT_LABELS[max(entangled, key=conc.get)]


def ghzw_superposition_tangle(p: float, phi: float) -> float:
    """Residual tangle of ``sqrt(p) GHZ - e^{i phi} sqrt(1-p) W``."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return abs(p * p - 8 * math.sqrt(6) / 9 * math.sqrt(p * (1 - p) ** 3) * np.exp(3j * phi))


def ghzw_superposition_state(p: float, phi: float) -> PureState:
    ghz = named_state("ghz", n=3).amplitudes
    w = named_state("w", n=3).amplitudes
    return PureState(math.sqrt(p) * ghz - np.exp(1j * phi) * math.sqrt(1 - p) * w, (2, 2, 2))


# ------------------------------------------------------------ witnesses

@dataclass(frozen=True, eq=False)
class WitnessOperator:
    matrix: np.ndarray
    name: str
    dims: tuple

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if np.abs(m - m.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("witness must be Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(self.dims))


def _projector(v):
    return np.outer(v, v.conj())


def named_witness(name: str) -> WitnessOperator:
    """``proj2qubit`` = 1/2 - |phi+><phi+|, ``ghz_proj`` = 3/4 - |GHZ><GHZ|,
    ``ghz_opt`` = ``ghz_proj`` - 3/7 |GHZ-><GHZ-|."""
    if name == "proj2qubit":
        return WitnessOperator(np.eye(4) / 2 - _projector(PHI_PLUS), name, (2, 2))
    ghz_p = _projector(named_state("ghz", n=3).amplitudes)
    if name == "ghz_proj":
        return WitnessOperator(0.75 * np.eye(8) - ghz_p, name, (2, 2, 2))
    if name == "ghz_opt":
        ghz_m = _projector(named_state("ghz", n=3, sign=-1).amplitudes)
        return WitnessOperator(0.75 * np.eye(8) - ghz_p - 3 / 7 * ghz_m, name, (2, 2, 2))
    raise ValueError(f"unknown witness {name!r}")


WITNESSES = ("proj2qubit", "ghz_proj", "ghz_opt")


def witness_value(rho, w) -> float:
    """``tr(W rho)``; negative values certify the targeted entanglement."""
    if isinstance(rho, PureState):
        rho = rho.density()
    w = named_witness(w) if isinstance(w, str) else w
    if tuple(rho.dims) != w.dims:
        raise DimensionError(f"witness dims {w.dims} do not match state dims {rho.dims}")
    return float(np.trace(w.matrix @ rho.matrix).real)


def tau3_witness_bound(rho) -> float:
    """``max(0, ±8/7 (rho_000,111 + rho_111,000) + 20/7 (rho_000,000 + rho_111,111) - 3)``.

    Both signs are evaluated and the larger value is kept.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    _require_three_qubits(rho)
    m = rho.matrix
    off = float((m[0, 7] + m[7, 0]).real)
    diag = float((m[0, 0] + m[7, 7]).real)
    return max(0.0, 8 / 7 * abs(off) + 20 / 7 * diag - 3)


# ------------------------------------------------------------ mixed three-tangle

def _twirled_coords(m, angles):
    """GHZ-twirl coordinates of ``U m U^†`` for a batch of local unitaries.

    ``angles`` has shape ``(..., 9)``: ``(theta, phi, lam)`` per qubit.  The
    per-qubit global phase cancels in every element the twirl keeps, so
    only rows 0 and 7 of ``U1 ⊗ U2 ⊗ U3`` are built.
    """
    a = np.asarray(angles, dtype=float).reshape(np.shape(angles)[:-1] + (3, 3))
    t, p, l = a[..., 0], a[..., 1], a[..., 2]
    c, s = np.cos(t / 2), np.sin(t / 2)
    r0 = np.stack([c + 0j, -np.exp(1j * l) * s], axis=-1)
    r1 = np.stack([np.exp(1j * p) * s, np.exp(1j * (p + l)) * c], axis=-1)
    batch = r0.shape[:-2]

    def row(r):
        u = np.einsum("...i,...j,...k->...ijk", r[..., 0, :], r[..., 1, :], r[..., 2, :])
        return u.reshape(batch + (8,))

    u0, u7 = row(r0), row(r1)
    r00 = np.einsum("...i,ij,...j->...", u0, m, u0.conj()).real
    r77 = np.einsum("...i,ij,...j->...", u7, m, u7.conj()).real
    r07 = np.einsum("...i,ij,...j->...", u0, m, u7.conj())
    return r07.real, (r00 + r77 - 0.25) / math.sqrt(3)


def _lu_objective(m):
    """Negative post-twirl three-tangle; below the GHZ-W line a small
    positive penalty ``1e-3 (1 - F_GHZ)`` steers towards the GHZ region."""
    def f(angles):
        x, y = _twirled_coords(m, angles)
        t = ghzsym_tau3_batch(x, y)
        fid = np.abs(x) + (math.sqrt(3) * y + 0.25) / 2
        return np.where(t > 0, -t, 1e-3 * (1 - fid))
    return f


def tau3_mixed_lower_bound(rho, seed, restarts: int = 16) -> BoundValue:
    """Lower bound on the three-tangle of a mixed three-qubit state.

    The normal form is computed first and a vanishing trace gives 0.  The
    normalized normal form is then rotated by local unitaries chosen to
    maximize the three-tangle of its GHZ-symmetric projection, and that
    exact value times the normal-form trace is returned.  Restart 0 is the
    identity; the search ends early once two restarts agree.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    _require_three_qubits(rho)
    rng = rng_from(seed)
    nf = normal_form(rho.normalize())
    if nf.nullcone:
        return BoundValue(0.0, "lower")
    m = nf.state.matrix / nf.trace
    f = _lu_objective(m)
    n, h = 9, 1e-7
    steps = np.eye(n) * h

    def fun(x):
        vals = f(np.concatenate([x[None], x + steps, x - steps]))
        return float(vals[0]), (vals[1:n + 1] - vals[n + 1:]) / (2 * h)

    best, found = -float(f(np.zeros(n))), []
    for k in range(restarts):
        x0 = np.zeros(n) if k == 0 else rng.uniform(0, 2 * math.pi, size=n)
        res = scipy.optimize.minimize(fun, x0, jac=True, method="L-BFGS-B",
                                      options={"maxiter": 500, "gtol": 1e-12, "ftol": 1e-15})
        found.append(-float(res.fun))
        best = max(best, found[-1])
        if sum(1 for v in found if v >= best - 1e-7) >= 2:
            break
    return BoundValue(nf.trace * max(0.0, best), "lower")
