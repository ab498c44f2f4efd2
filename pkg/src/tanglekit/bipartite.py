"""Bipartite entanglement: Schmidt data, concurrences, negativity, two-qubit
closed forms and computable lower bounds."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.optimize

from .core import (DensityMatrix, DimensionError, PureState, matricize, ptranspose_array,
                   rng_from, unitary_from_angles)
from .results import BoundValue

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
PAULI = np.array([np.eye(2), [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
                 dtype=complex)
SCHMIDT_TOL = 1e-10


def _as_density(state) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


def _require_two_qubits(rho):
    if tuple(rho.dims) != (2, 2):
        raise DimensionError(f"expected two qubits, got dims {rho.dims}")


def _block(dims, block) -> tuple[int, ...]:
    if block is None:
        if len(dims) != 2:
            raise DimensionError("state has more than two parties; pass the block explicitly")
        return (0,)
    block = (block,) if isinstance(block, int) else tuple(sorted(block))
    if not block or len(block) >= len(dims) or any(not 0 <= b < len(dims) for b in block):
        raise DimensionError(f"invalid bipartition block {block}")
    return block


# ------------------------------------------------------------ batched kernels
# These act on arrays of (possibly unnormalized) vectors of shape (..., D) and
# are homogeneous of degree one in |psi><psi|, so roof optimizers can feed
# them unnormalized decomposition members.

def purity_batch(vecs, dims, block) -> np.ndarray:
    m = matricize(vecs, dims, block)
    red = m @ np.swapaxes(m.conj(), -1, -2)
    return np.einsum("...ij,...ij->...", red, red.conj()).real


def i_concurrence_batch(vecs, dims, block=(0,)) -> np.ndarray:
    """``sqrt(2((tr rho)^2 - tr rho_A^2))``."""
    n2 = np.einsum("...i,...i->...", vecs, vecs.conj()).real
    return np.sqrt(np.clip(2 * (n2 ** 2 - purity_batch(vecs, dims, block)), 0, None))


def negativity_batch(vecs, dims, block=(0,)) -> np.ndarray:
    s = np.linalg.svd(matricize(vecs, dims, block), compute_uv=False)
    return np.clip((s.sum(-1) ** 2 - (s ** 2).sum(-1)) / 2, 0, None)


def g_concurrence_batch(vecs, dims, block=(0,)) -> np.ndarray:
    m = matricize(vecs, dims, block)
    d = m.shape[-1]
    if m.shape[-2] != d:
        raise DimensionError("G-concurrence needs equal block dimensions")
    return d * np.abs(np.linalg.det(m)) ** (2 / d)


def two_qubit_concurrence_batch(vecs, dims=(2, 2), block=(0,)) -> np.ndarray:
    """``2|psi_00 psi_11 - psi_01 psi_10|``."""
    return 2 * np.abs(vecs[..., 0] * vecs[..., 3] - vecs[..., 1] * vecs[..., 2])


# ------------------------------------------------------------ Schmidt data

@dataclass(frozen=True, eq=False)
class SchmidtData:
    coefficients: np.ndarray
    rank: int
    left: np.ndarray
    right: np.ndarray


def schmidt(psi: PureState, block=None) -> SchmidtData:
    """Schmidt decomposition across ``block | rest``.

    ``coefficients`` are the squared Schmidt values (they sum to one for a
    normalized input), descending, truncated at 1e-10.  Each left vector has
    its first nonzero component real and positive.
    """
    block = _block(psi.dims, block)
    m = matricize(psi.amplitudes, psi.dims, block)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    lam = s ** 2
    r = int((lam > SCHMIDT_TOL).sum())
    u, vh = u[:, :r].copy(), vh[:r].copy()
    for i in range(r):
        j = np.flatnonzero(np.abs(u[:, i]) > 1e-12)[0]
        ph = u[j, i] / abs(u[j, i])
        u[:, i] /= ph
        vh[i] *= ph
    return SchmidtData(lam[:r], r, u, vh.T)


def _esym(lam: np.ndarray, k: int) -> float:
    # elementary symmetric polynomial e_k from the coefficients of prod(x + lam_i)
    return float(np.poly(-np.asarray(lam, dtype=float))[k].real)


def k_concurrence(psi: PureState, k: int, norm: str = "dimension-free", block=None) -> float:
    """Schmidt-rank-k concurrence ``N_k e_k(lambda)^(1/k)``.

    ``norm="dimension-free"`` uses ``N_k = k`` so that ``k=2`` gives the
    I-concurrence and ``k=d`` the G-concurrence; ``norm="gour"`` uses
    ``N_k = d C(d,k)^(-1/k)`` with ``d`` the smaller block dimension.
    """
    block = _block(psi.dims, block)
    m = matricize(psi.amplitudes, psi.dims, block)
    d = min(m.shape)
    if not 2 <= k <= d:
        raise ValueError(f"k must lie in [2, {d}]")
    lam = np.linalg.svd(m, compute_uv=False) ** 2
    e = max(_esym(lam, k), 0.0)
    if norm == "dimension-free":
        factor = k
    elif norm == "gour":
        factor = d * math.comb(d, k) ** (-1 / k)
    else:
        raise ValueError(f"unknown normalization {norm!r}")
    return factor * e ** (1 / k)


def i_concurrence(psi: PureState, block=None) -> float:
    """``sqrt(2(1 - tr rho_A^2))`` for a normalized state."""
    return float(i_concurrence_batch(psi.amplitudes, psi.dims, _block(psi.dims, block)))


def g_concurrence(psi: PureState, block=None) -> float:
    """``d (det rho_A)^(1/d)``; homogeneous of degree one in the projector."""
    return float(g_concurrence_batch(psi.amplitudes, psi.dims, _block(psi.dims, block)))


def concurrence_vector_norm(psi: PureState) -> float:
    """Length of the vector of all 2x2 minors ``psi_jm psi_lk - psi_jk psi_lm``."""
    if psi.n_parties != 2:
        raise DimensionError("concurrence vector needs two parties")
    t = psi.tensor
    minors = np.einsum("jm,lk->jklm", t, t) - np.einsum("jk,lm->jklm", t, t)
    return float(math.sqrt(np.sum(np.abs(minors) ** 2)))


# ------------------------------------------------------------ negativity

def _pt_eigs(rho, party) -> np.ndarray:
    rho = _as_density(rho)
    party = (party,) if isinstance(party, int) else tuple(party)
    return np.linalg.eigvalsh(ptranspose_array(rho.matrix, rho.dims, party))


def negativity(rho, party=0) -> float:
    """``(||rho^T_A||_1 - tr rho) / 2``, zero when the transpose is PSD."""
    rho = _as_density(rho)
    ev = _pt_eigs(rho, party)
    return max(0.0, float((np.abs(ev).sum() - rho.trace) / 2))


def log_negativity(rho, party=0) -> float:
    return float(math.log2(np.abs(_pt_eigs(rho, party)).sum()))


# ------------------------------------------------------------ two qubits

def _r_roots(rho: DensityMatrix) -> np.ndarray:
    """Square roots of the eigenvalues of ``rho (YY) rho* (YY)``, descending.

    With ``rho = X X^†`` these are the singular values of the symmetric
    matrix ``X^T (YY) X``, which avoids square roots of round-off.
    """
    w, v = np.linalg.eigh(rho.matrix)
    x = v * np.sqrt(np.clip(w, 0, None))
    return np.linalg.svd(x.T @ YY @ x, compute_uv=False)


def wootters_concurrence(rho) -> float:
    rho = _as_density(rho)
    _require_two_qubits(rho)
    lam = _r_roots(rho)
    return max(0.0, float(lam[0] - lam[1:].sum()))


def concurrence_of_assistance(rho) -> float:
    rho = _as_density(rho)
    _require_two_qubits(rho)
    return float(_r_roots(rho).sum())


def _binary_entropy(x: float) -> float:
    return -sum(p * math.log2(p) for p in (x, 1 - x) if p > 0)


def eof_geometric_from_concurrence(c: float) -> tuple[float, float]:
    """Entanglement of formation and geometric measure from a concurrence.

    ``E_F = h((1 + sqrt(1 - c^2))/2)`` in bits, ``E_G = (1 - sqrt(1 - c^2))/2``.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError("concurrence must lie in [0, 1]")
    root = math.sqrt(1.0 - c * c)
    return _binary_entropy((1 + root) / 2), (1 - root) / 2


def fully_entangled_fraction(rho, seed, restarts: int = 32) -> float:
    """Largest overlap of ``rho`` with a maximally entangled state.

    Every maximally entangled two-qubit state is ``(U ⊗ 1)|phi+>`` up to a
    phase, so the search runs over one SU(2) factor.
    """
    rho = _as_density(rho)
    _require_two_qubits(rho)
    m = rho.matrix
    rng = rng_from(seed)

    def overlap(angles):
        v = np.kron(unitary_from_angles((0.0, *angles)), np.eye(2)) @ PHI_PLUS
        return float(np.vdot(v, m @ v).real)

    best = overlap((0.0, 0.0, 0.0))
    for i in range(restarts):
        x0 = np.zeros(3) if i == 0 else rng.uniform(0, 2 * math.pi, 3)
        res = scipy.optimize.minimize(lambda a: -overlap(a), x0, method="Nelder-Mead",
                                      options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        best = max(best, -res.fun)
    return best


def _expm_sl2(params) -> np.ndarray:
    # exp(A) = cosh(s) 1 + sinh(s)/s A for traceless A, s^2 = -det A
    a = complex(params[0], params[3])
    b = complex(params[1], params[4])
    c = complex(params[2], params[5])
    s = cmath.sqrt(a * a + b * c)
    ch = cmath.cosh(s)
    sh = cmath.sinh(s) / s if abs(s) > 1e-8 else 1 + s * s / 6
    return np.array([[ch + sh * a, sh * b], [sh * c, ch - sh * a]])


def _normal_form_start(m: np.ndarray):
    """SL factors bringing ``m`` close to a Bell-diagonal form (few sweeps)."""
    s1, s2 = np.eye(2, dtype=complex), np.eye(2, dtype=complex)
    for _ in range(200):
        g = np.kron(s1, s2)
        cur = g @ m @ g.conj().T
        t = cur.reshape(2, 2, 2, 2)
        ra = np.einsum("ajbj->ab", t)
        rb = np.einsum("jajb->ab", t)
        if np.linalg.det(ra).real < 1e-14 or np.linalg.det(rb).real < 1e-14:
            break
        fa = _inv_sqrt_sl(ra)
        fb = _inv_sqrt_sl(rb)
        s1, s2 = fa @ s1, fb @ s2
        if max(np.abs(ra / np.trace(ra) - np.eye(2) / 2).max(),
               np.abs(rb / np.trace(rb) - np.eye(2) / 2).max()) < 1e-12:
            break
    return s1, s2


def _inv_sqrt_sl(r: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(r)
    w = np.clip(w, 1e-300, None)
    return (v * (w ** -0.5)) @ v.conj().T * np.prod(w) ** 0.25


def sl_optimized_concurrence(rho, seed, restarts: int = 32) -> BoundValue:
    """``max(0, max_S [2<phi+|S rho S^†|phi+> - tr S rho S^†])`` over SL(2)⊗SL(2).

    Each SL(2) factor is ``expm`` of a traceless complex generator (six real
    parameters).  Starts are the identity, a normal-form transform rotated
    onto ``phi+``, and seeded random generators, each refined by Nelder-Mead.
    """
    rho = _as_density(rho)
    _require_two_qubits(rho)
    m = rho.matrix
    rng = rng_from(seed)

    # K[(c,a),(d,b)] = rho_{ab,cd}, so tr(rho (P1⊗P2)) = vec(P1) K vec(P2)
    k = m.reshape(2, 2, 2, 2).transpose(2, 0, 3, 1).reshape(4, 4)

    def value_for(s1, s2):
        # (S1⊗S2)^†|phi+> has coefficient matrix conj(S1^T S2)/sqrt2, and
        # tr(S rho S^†) = tr(rho (S1^†S1 ⊗ S2^†S2))
        a = (s1.T @ s2).conj().reshape(-1)
        first = np.vdot(a, m @ a).real
        p1 = s1.conj().T @ s1
        p2 = s2.conj().T @ s2
        second = (p1.reshape(-1) @ k @ p2.reshape(-1)).real
        return float(first - second)

    def make_objective(b1, b2):
        def f(x):
            return -value_for(_expm_sl2(x[:6]) @ b1, _expm_sl2(x[6:]) @ b2)
        return f

    bases = [(np.eye(2), np.eye(2))]
    n1, n2 = _normal_form_start(m)
    if np.isfinite(n1).all() and np.isfinite(n2).all():
        # rotate whichever Bell state dominates onto phi+
        g = np.kron(n1, n2)
        cur = g @ m @ g.conj().T
        fid = [float(np.vdot(np.kron(p, np.eye(2)) @ PHI_PLUS,
                             cur @ np.kron(p, np.eye(2)) @ PHI_PLUS).real) for p in PAULI]
        # Paulis are Hermitian, so P itself undoes the rotation
        bases.append((PAULI[int(np.argmax(fid))] @ n1, n2))
    best = 0.0
    for i in range(restarts):
        b1, b2 = bases[i] if i < len(bases) else bases[0]
        x0 = np.zeros(12) if i < len(bases) else rng.normal(scale=0.5, size=12)
        f = make_objective(b1, b2)
        res = scipy.optimize.minimize(f, x0, method="Nelder-Mead",
                                      options={"xatol": 1e-8, "fatol": 1e-12,
                                               "maxiter": 3000, "adaptive": True})
        best = max(best, -min(res.fun, f(x0)))
    return BoundValue(best, "lower")


# ------------------------------------------------------------ bounds

def _default_pairs(d: int):
    return [((j, j), (k, k)) for j in range(d) for k in range(j + 1, d)]


def _huber_value(m: np.ndarray, dims, pairs) -> float:
    da, db = dims
    t = m.reshape(da, db, da, db)
    total = 0.0
    for (j, k), (l, mm) in pairs:
        total += abs(t[j, k, l, mm]) - math.sqrt(max(t[j, mm, j, mm].real, 0) * max(t[l, k, l, k].real, 0))
    return 2 / math.sqrt(len(pairs)) * total


def huber_concurrence_bound(rho, pairs=None, lu_opt=None, restarts: int = 8) -> BoundValue:
    """Concurrence lower bound from selected off-diagonal elements.

    ``pairs`` holds index pairs ``((j, k), (l, m))`` with ``j < l`` and
    ``k < m``; each contributes ``|rho_{jk,lm}| - sqrt(rho_{jm,jm} rho_{lk,lk})``.
    The default is every ``((j, j), (k, k))`` with ``j < k``.  Passing a seed
    as ``lu_opt`` maximizes the bound over local unitaries.
    """
    rho = _as_density(rho)
    if rho.n_parties != 2:
        raise DimensionError("huber bound needs two parties")
    da, db = rho.dims
    pairs = _default_pairs(min(da, db)) if pairs is None else [tuple(map(tuple, p)) for p in pairs]
    if not pairs:
        raise ValueError("empty pair set")
    for (j, k), (l, mm) in pairs:
        if not (0 <= j < l < da and 0 <= k < mm < db):
            raise ValueError(f"malformed pair {((j, k), (l, mm))}")
    best = _huber_value(rho.matrix, rho.dims, pairs)
    if lu_opt is not None:
        rng = rng_from(lu_opt)
        m = rho.matrix

        def unitary(params, d):
            h = np.zeros((d, d), dtype=complex)
            iu = np.triu_indices(d, 1)
            n_off = len(iu[0])
            h[iu] = params[:n_off] + 1j * params[n_off:2 * n_off]
            h = h + h.conj().T + np.diag(params[2 * n_off:])
            w, v = np.linalg.eigh(h)
            return (v * np.exp(1j * w)) @ v.conj().T

        na, nb = da * da, db * db

        def f(x):
            u = np.kron(unitary(x[:na], da), unitary(x[na:], db))
            return -_huber_value(u @ m @ u.conj().T, rho.dims, pairs)

        for i in range(restarts):
            x0 = np.zeros(na + nb) if i == 0 else rng.uniform(-math.pi, math.pi, na + nb)
            res = scipy.optimize.minimize(f, x0, method="Powell", options={"xtol": 1e-8, "ftol": 1e-12})
            best = max(best, -res.fun)
    return BoundValue(max(0.0, best), "lower")


def schmidt_number_bounds(rho, eps: float = 1e-9) -> tuple[int, int]:
    """Schmidt-number lower bounds from the negativity and the huber bound."""
    rho = _as_density(rho)
    n = negativity(rho)
    c = huber_concurrence_bound(rho).value
    r_n = max(1, math.ceil(2 * n + 1 - eps))
    r_c = max(1, math.ceil(2 / (2 - c * c) - eps))
    return r_n, r_c


def geometric_measure_pure(psi: PureState, seed, restarts: int = 8, sweeps: int = 500) -> float:
    """``1 - max |<phi_1...phi_n|psi>|^2`` over product states.

    Alternating maximization over one party at a time.  A feasible product
    state is always found, so the result can only overestimate.
    """
    rng = rng_from(seed)
    t = psi.tensor / psi.norm
    n = psi.n_parties
    letters = "abcdefghijklmnopqrstuvwxyz"[:n]
    best = 0.0
    for r in range(restarts):
        if r == 0:
            # leading single-party eigenvectors as a deterministic start
            vecs = []
            for j in range(n):
                m = matricize(t.reshape(-1), psi.dims, (j,))
                vecs.append(np.linalg.svd(m)[0][:, 0].conj())
        else:
            vecs = []
            for d in psi.dims:
                v = rng.normal(size=d) + 1j * rng.normal(size=d)
                vecs.append(v / np.linalg.norm(v))
        prev = -1.0
        for _ in range(sweeps):
            for j in range(n):
                others = [letters[k] for k in range(n) if k != j]
                expr = letters + "," + ",".join(others) + "->" + letters[j]
                v = np.einsum(expr, t, *[vecs[k] for k in range(n) if k != j])
                nv = np.linalg.norm(v)
                vecs[j] = v.conj() / nv if nv > 0 else vecs[j]
            ov = float(nv ** 2)
            if abs(ov - prev) < 1e-15:
                break
            prev = ov
        best = max(best, ov)
    return max(0.0, 1.0 - best)


def bell_diagonal_monotones(p: Sequence[float]):
    """Complete monotones of Bell-diagonal weights ``p1 >= p2 >= p3 >= p4``.

    Returns ``(E1, E2, E3, Et1, Et2, Et3)``; ``E2``/``E3`` (and their shifted
    versions) are None when ``p3 + p4`` or ``p4`` vanishes.
    """
    p = [float(x) for x in p]
    if len(p) != 4 or any(x < -1e-12 for x in p) or abs(sum(p) - 1) > 1e-9:
        raise ValueError("need four nonnegative weights summing to one")
    if any(p[i] < p[i + 1] - 1e-12 for i in range(3)):
        raise ValueError("weights must be descending")
    e1 = p[0]
    e2 = (1 - 2 * p[1]) / (p[2] + p[3]) if p[2] + p[3] > 0 else None
    e3 = (1 - 2 * p[1] - 2 * p[2]) / p[3] if p[3] > 0 else None

    def shift(e, off):
        return None if e is None else max(0.0, e - off)

    return e1, e2, e3, shift(e1, 0.5), shift(e2, 2.0), shift(e3, 2.0)


def correlation_matrix(rho) -> np.ndarray:
    """Real coefficients ``c_{mu nu}`` with ``rho = sum c_{mu nu} sigma_mu ⊗ sigma_nu``."""
    m = _as_density(rho).matrix
    return np.einsum("aij,bkl,jlik->ab", PAULI, PAULI, m.reshape(2, 2, 2, 2)).real / 4


def lorentz_singular_monotone(rho):
    """Lorentz singular values ``(s0, s1, s2, s3)`` and ``max(0, -s0 + s1 + s2)``.

    The ``s_i`` are the coefficients of the SL-normal form
    ``s0 II + s1 XX + s2 YY + s3 ZZ``; they are the roots of the eigenvalues
    of ``X eta X^T eta``.  The sign of ``s3`` follows ``det X``.
    """
    rho = _as_density(rho)
    _require_two_qubits(rho)
    x = correlation_matrix(rho)
    eta = np.diag([1.0, -1, -1, -1])
    ev = np.linalg.eigvals(x @ eta @ x.T @ eta).real
    s = np.sort(np.sqrt(np.clip(ev, 0, None)))[::-1]
    s3 = s[3] * (-1.0 if np.linalg.det(x) < 0 else 1.0)
    s0, s1, s2 = (float(v) for v in s[:3])
    return s0, s1, s2, float(s3), max(0.0, -s0 + s1 + s2)
