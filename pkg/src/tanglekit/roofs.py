"""Normal form, convex-roof estimators and monotone property harnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from .bipartite import (g_concurrence_batch, i_concurrence_batch, negativity_batch,
                        wootters_concurrence)
from .core import (DensityMatrix, Decomposition, DimensionError, LocalOperator, PureState,
                   apply_local_operator, ptrace_array, random_pure_state, rng_from)
from .invariants import residual_tangle_batch, tau3_batch
from .results import BoundValue

NF_TOL = 1e-10
NF_MAX_ITER = 10_000
NULLCONE_TRACE = 1e-10
NF_REGULARIZER = 1e-14


# ------------------------------------------------------------ measure handles

@dataclass(frozen=True)
class Measure:
    """A pure-state entanglement measure with the metadata the roof tools need.

    ``pure`` maps normalized vectors of shape ``(..., D)`` and the party dims
    to values.  ``degree`` is the homogeneity degree in the density matrix.
    ``mixed``, when given, evaluates the measure on a (possibly unnormalized)
    density matrix in closed form.
    """

    name: str
    pure: Callable
    degree: Optional[float] = None
    sl_invariant: bool = False
    mixed: Optional[Callable] = None

    def on_pure(self, psi: PureState) -> float:
        """Value on a possibly unnormalized vector, scaled as ``norm^(2 degree)``."""
        w = psi.norm ** 2
        value = float(self.pure(psi.amplitudes / math.sqrt(w), psi.dims))
        return value if self.degree is None else w ** self.degree * value


def _two_party(fn):
    def pure(vecs, dims):
        if len(dims) != 2:
            raise DimensionError(f"bipartite measure needs two parties, got dims {dims}")
        return fn(vecs, dims, (0,))
    return pure


CONCURRENCE = Measure("concurrence", _two_party(i_concurrence_batch), 1.0, False)
# two qubits only: SL-invariant, with the closed form on mixed states
WOOTTERS = Measure("wootters", _two_party(i_concurrence_batch), 1.0, True, wootters_concurrence)
G_CONCURRENCE = Measure("g_concurrence", _two_party(g_concurrence_batch), 1.0, True)
NEGATIVITY = Measure("negativity", _two_party(negativity_batch), 1.0, False)
TAU3 = Measure("tau3", tau3_batch, 1.0, True)
TAU_RES = Measure("tau_res", residual_tangle_batch, 2.0, True)

MEASURES = {m.name: m for m in (CONCURRENCE, WOOTTERS, G_CONCURRENCE,
                                NEGATIVITY, TAU3, TAU_RES)}


def get_measure(name: str) -> Measure:
    try:
        return MEASURES[name]
    except KeyError:
        raise ValueError(f"unknown measure {name!r}; choose from {sorted(MEASURES)}") from None


# ------------------------------------------------------------ normal form

@dataclass(frozen=True, eq=False)
class NormalFormResult:
    """``state`` is the unnormalized normal form, ``trace`` its trace."""

    state: DensityMatrix
    trace: float
    transforms: LocalOperator
    converged: bool
    iterations: int

    @property
    def nullcone(self) -> bool:
        return self.trace < NULLCONE_TRACE


def _reduction_deviation(m, dims) -> float:
    tr = np.trace(m).real
    dev = 0.0
    for j, d in enumerate(dims):
        r = ptrace_array(m, dims, [j])
        dev = max(dev, float(np.abs(r / tr - np.eye(d) / d).max()))
    return dev


def _apply_on_party(m, dims, j, s) -> np.ndarray:
    n = len(dims)
    t = m.reshape(dims + dims)
    t = np.moveaxis(np.tensordot(s, t, axes=([1], [j])), 0, j)
    t = np.moveaxis(np.tensordot(s.conj(), t, axes=([1], [n + j])), 0, n + j)
    return t.reshape(m.shape)


def normal_form(rho, tol: float = NF_TOL, max_iter: int = NF_MAX_ITER) -> NormalFormResult:
    """Local SL iteration that drives every reduction towards a multiple of 1.

    Each step replaces ``rho`` by ``S rho S^†`` on one party with
    ``S = det(rho_j)^(1/(2d)) rho_j^(-1/2)``, which has unit determinant.
    States whose trace falls below 1e-10 are reported as nullcone.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    dims = tuple(rho.dims)
    m = np.array(rho.matrix, dtype=complex)
    acc = [np.eye(d, dtype=complex) for d in dims]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        for j, d in enumerate(dims):
            r = ptrace_array(m, dims, [j]) + NF_REGULARIZER * np.eye(d)
            w, v = np.linalg.eigh((r + r.conj().T) / 2)
            w = np.clip(w, NF_REGULARIZER, None)
            s = (v * w ** -0.5) @ v.conj().T * float(np.prod(w)) ** (1 / (2 * d))
            m = _apply_on_party(m, dims, j, s)
            acc[j] = s @ acc[j]
        m = (m + m.conj().T) / 2
        tr = float(np.trace(m).real)
        if tr < NULLCONE_TRACE:
            break
        if _reduction_deviation(m, dims) < tol:
            converged = True
            break
    tr = float(np.trace(m).real)
    return NormalFormResult(DensityMatrix._trusted(m, dims, normalized=False), tr,
                            LocalOperator(tuple(acc)), converged, it)


def evaluate_via_normal_form(measure: Measure, rho, mixed: Optional[Callable] = None) -> float:
    """``(tr rho_NF)^degree * mu(rho_NF / tr rho_NF)``, zero on the nullcone.

    Rank-one normal forms are evaluated with the pure-state formula; mixed
    ones need ``mixed`` or the handle's own closed form.
    """
    if measure.degree is None or not measure.sl_invariant:
        raise ValueError(f"measure {measure.name!r} lacks SL invariance or degree metadata")
    nf = normal_form(rho)
    if nf.nullcone:
        return 0.0
    m = nf.state.matrix / nf.trace
    w, v = np.linalg.eigh(m)
    if w[-1] > 1 - 1e-9:
        value = float(measure.pure(v[:, -1], nf.state.dims))
    else:
        fn = mixed or measure.mixed
        if fn is None:
            raise ValueError(f"no mixed-state evaluator for {measure.name!r}")
        value = float(fn(DensityMatrix._trusted(m, nf.state.dims)))
    return nf.trace ** measure.degree * value


# ------------------------------------------------------------ convex roofs

@dataclass(frozen=True, eq=False)
class RoofResult:
    value: float
    decomposition: Decomposition
    restart_values: tuple = field(default_factory=tuple)

    @property
    def dispersion(self) -> float:
        return max(self.restart_values) - min(self.restart_values)


def _isometry(a):
    """Gram-Schmidt isometry of ``a`` (QR with a positive diagonal in ``R``).

    Smooth in ``a`` and much cheaper than a batched polar decomposition.
    Returns ``(Q, R)``.
    """
    q, rr = np.linalg.qr(a)
    d = np.diagonal(rr, axis1=-2, axis2=-1)
    ph = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
    return q * ph[..., None, :], rr * ph.conj()[..., :, None]


def _weighted(measure, dims):
    """``phi -> |phi|^2 mu(phi/|phi|)`` on unnormalized vectors."""
    def g(p):
        w = np.einsum("...d,...d->...", p.conj(), p).real
        safe = np.where(w > 1e-300, w, 1.0)
        vals = measure.pure(p / np.sqrt(safe)[..., None], dims)
        return np.where(w > 1e-300, w * vals, 0.0)
    return g


def _roof_objective(measure, x_cols, dims):
    """Batched ``sum_k w_k mu(phi_k / sqrt w_k)`` over mixing matrices ``A``
    of shape ``(..., ell, r)``; also returns the isometries."""
    g = _weighted(measure, dims)

    def f(a):
        iso, _ = _isometry(a)
        return g(iso @ x_cols).sum(axis=-1), iso
    return f


def _roof_value_grad(measure, x_cols, dims, h=1e-7):
    """Objective and its gradient in ``A``.

    Each term depends on one vector ``phi_k``, so the measure is
    differenced per vector (``2 D`` directions) and the result is pulled
    back through ``phi = Q X`` and the QR map analytically.
    """
    g = _weighted(measure, dims)
    dim = x_cols.shape[1]
    steps = np.concatenate([np.eye(dim), 1j * np.eye(dim)]) * h

    def fun(a):
        q, r = _isometry(a)
        phis = (q @ x_cols)[:, None]
        vals = g(np.concatenate([phis, phis + steps, phis - steps], axis=1))
        diff = (vals[:, 1:2 * dim + 1] - vals[:, 2 * dim + 1:]) / (2 * h)
        gq = (diff[:, :dim] + 1j * diff[:, dim:]) @ x_cols.conj().T
        m = q.conj().T @ gq
        # Q^H dQ is skew-Hermitian: strict lower part of Q^H dA R^-1 minus
        # its adjoint, plus the imaginary diagonal
        k = np.tril(m, -1) - np.tril(m.conj().T, -1) + np.diag(1j * np.diag(m).imag)
        rinv_h = np.linalg.inv(r).conj().T
        grad = (gq - q @ m + q @ k) @ rinv_h
        return float(vals[:, 0].sum()), grad
    return fun


def _unpack(x, ell, r):
    z = x.reshape(x.shape[:-1] + (2, ell, r))
    return z[..., 0, :, :] + 1j * z[..., 1, :, :]


def roof_search(measure: Measure, rho, seed, length: int | None = None,
                restarts: int = 4, maxiter: int = 400, agree_tol: float = 1e-7) -> RoofResult:
    """Seeded multi-start minimization of the average over decompositions.

    Decompositions are ``phi = U X`` with ``rho = X X^†`` and ``U`` an
    isometry, parameterized through a free complex matrix.
    Gradients combine per-vector central differences with the chain rule
    through the isometry.  Restart 0
    starts from the eigen-decomposition; the search stops once two restarts
    agree on the minimum within ``agree_tol`` or the minimum reaches zero.
    """
    if isinstance(rho, PureState):
        return RoofResult(measure.on_pure(rho.normalize()),
                          Decomposition(((1.0, rho.normalize()),)), (0.0,))
    rng = rng_from(seed)
    rho = rho.normalize()
    w, v = rho.eigh()
    keep = np.flatnonzero(w > 1e-12)
    r = len(keep)
    x_cols = (v[:, keep] * np.sqrt(w[keep])).T
    dims = rho.dims
    if r == 1:
        psi = PureState(x_cols[0] / np.linalg.norm(x_cols[0]), dims)
        return RoofResult(measure.on_pure(psi), Decomposition(((1.0, psi),)), (0.0,))
    ell = 2 * r if length is None else int(length)
    if ell < r:
        raise ValueError(f"decomposition length {ell} is below the rank {r}")
    f = _roof_objective(measure, x_cols, dims)
    vg = _roof_value_grad(measure, x_cols, dims)

    def fun(x):
        val, grad = vg(_unpack(x, ell, r))
        return val, np.concatenate([grad.real.ravel(), grad.imag.ravel()])

    best_val, best_iso, values = math.inf, None, []
    for k in range(restarts):
        if k == 0:
            a0 = np.zeros((ell, r), dtype=complex)
            a0[:r] = np.eye(r)
        else:
            a0 = rng.normal(size=(ell, r)) + 1j * rng.normal(size=(ell, r))
        x0 = np.concatenate([a0.real.ravel(), a0.imag.ravel()])
        res = scipy.optimize.minimize(fun, x0, jac=True, method="L-BFGS-B",
                                      options={"maxiter": maxiter, "gtol": 1e-10, "ftol": 1e-14})
        val, iso = f(_unpack(res.x, ell, r))
        values.append(float(val))
        if val < best_val:
            best_val, best_iso = float(val), iso
        # measures are nonnegative; a reproduced minimum ends the search early
        hits = sum(1 for x in values if x <= best_val + agree_tol)
        if best_val <= agree_tol or hits >= 2:
            break
    phis = best_iso @ x_cols
    wts = np.einsum("kd,kd->k", phis.conj(), phis).real
    entries = tuple((wk, PureState(p / math.sqrt(wk), dims))
                    for wk, p in zip(wts / wts.sum(), phis) if wk > 1e-15)
    return RoofResult(best_val, Decomposition(entries), tuple(values))


def convex_roof_upper(measure: Measure, rho, seed, length: int | None = None,
                      restarts: int = 4) -> BoundValue:
    """Upper bound on the convex roof; default length is twice the rank."""
    return BoundValue(roof_search(measure, rho, seed, length, restarts).value, "upper")


def _sphere_unitaries(theta, lam):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * lam)
    u = np.empty(np.shape(theta) + (2, 2), dtype=complex)
    u[..., 0, 0], u[..., 0, 1] = c, -e * s
    u[..., 1, 0], u[..., 1, 1] = s, e * c
    return u


def convex_roof_bruteforce(measure: Measure, rho, grid_n: int = 60) -> float:
    """Exhaustive search over length-two decompositions of a rank-two state.

    Row phases of the mixing unitary do not change the decomposition, which
    leaves a 2-sphere ``(theta, lam)``.  The grid minimum is refined with
    Nelder-Mead.  Intended as a test oracle.
    """
    if isinstance(rho, PureState):
        return measure.on_pure(rho.normalize())
    rho = rho.normalize()
    w, v = rho.eigh()
    keep = np.flatnonzero(w > 1e-12)
    if len(keep) > 2:
        raise ValueError(f"brute force needs rank <= 2, got {len(keep)}")
    x_cols = (v[:, keep] * np.sqrt(w[keep])).T
    if len(keep) == 1:
        return measure.on_pure(PureState(x_cols[0] / np.linalg.norm(x_cols[0]), rho.dims))

    def value(u):
        phis = u @ x_cols
        wt = np.einsum("...kd,...kd->...k", phis.conj(), phis).real
        safe = np.where(wt > 1e-300, wt, 1.0)
        vals = measure.pure(phis / np.sqrt(safe)[..., None], rho.dims)
        return np.sum(np.where(wt > 1e-300, wt * vals, 0.0), axis=-1)

    th, la = np.meshgrid(np.linspace(0, math.pi, grid_n),
                         np.linspace(0, 2 * math.pi, grid_n, endpoint=False), indexing="ij")
    grid = value(_sphere_unitaries(th, la))
    best = float(grid.min())
    for idx in np.argsort(grid, axis=None)[:3]:
        i, j = np.unravel_index(idx, grid.shape)
        res = scipy.optimize.minimize(lambda p: float(value(_sphere_unitaries(p[0], p[1]))),
                                      [th[i, j], la[i, j]], method="Nelder-Mead",
                                      options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000})
        best = min(best, float(res.fun))
    return best


def cren_upper(rho, seed, restarts: int = 4) -> BoundValue:
    """Convex roof of the pure-state negativity, from above."""
    return convex_roof_upper(NEGATIVITY, rho, seed, restarts=restarts)


# ------------------------------------------------------------ monotone harness

@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    worst: float
    detail: str = ""


@dataclass(frozen=True)
class MonotoneReport:
    outcomes: tuple

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def __getitem__(self, name) -> CheckOutcome:
        for o in self.outcomes:
            if o.name == name:
                return o
        raise KeyError(name)


def evaluate(measure: Measure, state, seed=0) -> float:
    """Value on a pure or mixed, possibly unnormalized, state.

    Rank-one input uses the pure formula; mixed input uses the closed form
    if the handle has one and the roof upper bound otherwise.
    """
    if isinstance(state, PureState):
        return measure.on_pure(state)
    tr = state.trace
    w, v = state.eigh()
    if w[-1] > tr * (1 - 1e-12):
        return measure.on_pure(PureState(v[:, -1] * math.sqrt(w[-1]), state.dims, normalized=False))
    if measure.mixed is not None:
        return float(measure.mixed(state))
    value = roof_search(measure, state.normalize(), seed).value
    return value if measure.degree is None else tr ** measure.degree * value


def _random_contraction(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    g /= np.linalg.norm(g, 2) * (1 + rng.uniform(0.05, 1.0))
    comp = scipy.linalg.sqrtm(np.eye(d) - g.conj().T @ g)
    return g, comp


def _separable_fixture(dims, rng, terms: int = 3) -> DensityMatrix:
    m = 0
    for p in rng.dirichlet(np.ones(terms)):
        vec = None
        for d in dims:
            part = random_pure_state((d,), rng).amplitudes
            vec = part if vec is None else np.kron(vec, part)
        m = m + p * np.outer(vec, vec.conj())
    return DensityMatrix._trusted(m, tuple(dims))


def _as_mixed(state) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


CHECKS = ("monotone", "separable_zero", "convexity", "homogeneity", "sl_invariance")


def monotone_property_checks(measure: Measure, fixtures, seed, checks=CHECKS,
                             trials: int = 4, tol: float = 1e-6) -> MonotoneReport:
    """Run the monotone axioms numerically on ``fixtures``.

    ``monotone``: average non-increase under random two-outcome local
    filters.  ``separable_zero``: zero on random product mixtures.
    ``convexity``: mixing never increases.  ``homogeneity``: recovered
    exponent matches ``degree``.  ``sl_invariance``: unchanged under unit-
    determinant local operators (only when the handle declares it).
    """
    rng = rng_from(seed)
    fixtures = list(fixtures)
    if not fixtures:
        raise ValueError("need at least one fixture")
    dims = fixtures[0].dims
    sub = lambda: int(rng.integers(1 << 30))  # noqa: E731
    base = [evaluate(measure, f, sub()) for f in fixtures]
    outcomes = []

    if "monotone" in checks:
        worst = -math.inf
        for f, mu in zip(fixtures, base):
            rho = _as_mixed(f).normalize()
            for _ in range(trials):
                party = int(rng.integers(len(dims)))
                total = 0.0
                for k in _random_contraction(dims[party], rng):
                    factors = [np.eye(d) for d in dims]
                    factors[party] = k
                    out = apply_local_operator(rho, LocalOperator(tuple(factors)))
                    p = out.trace
                    if p > 1e-12:
                        total += p * evaluate(measure, out.normalize(), sub())
                worst = max(worst, total - mu)
        outcomes.append(CheckOutcome("monotone", worst <= tol, worst))

    if "separable_zero" in checks:
        worst = max(evaluate(measure, _separable_fixture(dims, rng), sub()) for _ in range(trials))
        outcomes.append(CheckOutcome("separable_zero", worst <= tol, worst))

    if "convexity" in checks:
        worst = -math.inf
        for _ in range(trials):
            i, j = rng.integers(len(fixtures), size=2)
            t = float(rng.uniform())
            a, b = _as_mixed(fixtures[i]).normalize(), _as_mixed(fixtures[j]).normalize()
            mix = DensityMatrix._trusted(t * a.matrix + (1 - t) * b.matrix, dims)
            worst = max(worst, evaluate(measure, mix, sub()) - (t * base[i] + (1 - t) * base[j]))
        outcomes.append(CheckOutcome("convexity", worst <= tol, worst))

    if "homogeneity" in checks:
        worst, lam = 0.0, 0.37
        for f, mu in zip(fixtures, base):
            if mu <= 1e-8:
                continue
            scaled = (PureState(f.amplitudes * math.sqrt(lam), dims, normalized=False)
                      if isinstance(f, PureState) else f.scaled(lam))
            alpha = math.log(evaluate(measure, scaled, sub()) / mu) / math.log(lam)
            if measure.degree is not None:
                worst = max(worst, abs(alpha - measure.degree))
        outcomes.append(CheckOutcome("homogeneity", worst <= tol, worst))

    if "sl_invariance" in checks and measure.sl_invariant:
        worst = 0.0
        for f, mu in zip(fixtures, base):
            for _ in range(trials):
                op = LocalOperator.random_special_linear(dims, sub())
                out = apply_local_operator(f, op)
                worst = max(worst, abs(evaluate(measure, out, sub()) - mu) / max(1.0, abs(mu)))
        outcomes.append(CheckOutcome("sl_invariance", worst <= max(tol, 1e-7), worst))

    return MonotoneReport(tuple(outcomes))
