"""Local SL-invariant polynomials of qubit states built from combs.

The basic object is the antilinear expectation ``<psi*| s_1 ⊗ ... |psi>``,
which is the bilinear form ``psi^T (s_1 ⊗ ...) psi``.  Contracting pairs of
such values with the metric ``g = (-1, 1, 0, 1)`` over the Pauli index gives
quantities invariant under ``SL(2, C)`` on every qubit.

All polynomials here are evaluated on the raw amplitudes, so they scale with
the norm: a polynomial of degree ``k`` in the amplitudes picks up ``|c|^k``
when ``psi`` is rescaled by ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import DimensionError, PureState

PAULI = np.array([np.eye(2), [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
                 dtype=complex)
METRIC = np.array([-1.0, 1.0, 0.0, 1.0])
CONTRACTED = (0, 1, 3)  # indices with nonzero metric


def _qubits(psi: PureState, n: int | None = None) -> np.ndarray:
    if any(d != 2 for d in psi.dims):
        raise DimensionError(f"expected qubits, got dims {psi.dims}")
    if n is not None and psi.n_parties != n:
        raise DimensionError(f"expected {n} qubits, got {psi.n_parties}")
    return psi.tensor


@dataclass(frozen=True)
class PauliString:
    """Per-qubit Pauli indices, 0 = identity, 1 = x, 2 = y, 3 = z."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i not in (0, 1, 2, 3) for i in idx):
            raise ValueError(f"Pauli indices must be 0..3, got {idx}")
        object.__setattr__(self, "indices", idx)

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for i in self.indices:
            out = np.kron(out, PAULI[i])
        return out


def _comb(t: np.ndarray, indices) -> complex:
    out = t
    for axis, i in enumerate(indices):
        if i:
            out = np.moveaxis(np.tensordot(PAULI[i], out, axes=([1], [axis])), 0, axis)
    return complex(np.sum(t * out))


def comb_expectation(psi: PureState, s) -> complex:
    """``<psi*| sigma_{s_1} ⊗ ... ⊗ sigma_{s_N} |psi>`` (no complex conjugation)."""
    t = _qubits(psi)
    s = s if isinstance(s, PauliString) else PauliString(tuple(s))
    if len(s.indices) != psi.n_parties:
        raise DimensionError("Pauli string length differs from qubit count")
    return _comb(t, s.indices)


def comb_table(psi: PureState) -> np.ndarray:
    """All ``4^N`` comb expectations as an array indexed by the Pauli string."""
    t = _qubits(psi)
    n = t.ndim
    letters = "abcdefghij"[:n]
    out_letters = "klmnopqrst"[:n]
    mid = "ABCDEFGHIJ"[:n]
    expr = (letters + "," + ",".join(f"{o}{m}{l}" for o, m, l in zip(out_letters, mid, letters))
            + "," + mid + "->" + out_letters)
    return np.einsum(expr, t, *([PAULI] * n), t, optimize=True)


# ------------------------------------------------------------ three qubits

def _d_terms(t: np.ndarray) -> tuple[complex, complex, complex]:
    p = {f"{i}{j}{k}": t[i, j, k] for i, j, k in product((0, 1), repeat=3)}
    d1 = (p["000"] ** 2 * p["111"] ** 2 + p["001"] ** 2 * p["110"] ** 2
          + p["010"] ** 2 * p["101"] ** 2 + p["011"] ** 2 * p["100"] ** 2)
    d2 = (p["000"] * p["001"] * p["110"] * p["111"] + p["000"] * p["010"] * p["101"] * p["111"]
          + p["000"] * p["011"] * p["100"] * p["111"] + p["001"] * p["010"] * p["101"] * p["110"]
          + p["001"] * p["011"] * p["100"] * p["110"] + p["010"] * p["011"] * p["100"] * p["101"])
    d3 = p["000"] * p["110"] * p["101"] * p["011"] + p["100"] * p["010"] * p["001"] * p["111"]
    return d1, d2, d3


def cayley_hyperdeterminant(psi: PureState) -> complex:
    """``d1 - 2 d2 + 4 d3`` of a three-qubit amplitude tensor."""
    d1, d2, d3 = _d_terms(_qubits(psi, 3))
    return d1 - 2 * d2 + 4 * d3


def _b_odd(t: np.ndarray, a: int) -> complex:
    n = t.ndim
    total = 0j
    for mu in CONTRACTED:
        idx = [2] * n
        idx[a] = mu
        total += METRIC[mu] * _comb(t, idx) ** 2
    return total


def residual_tangle(psi: PureState, form: str = "coefficients") -> float:
    """``4|d1 - 2 d2 + 4 d3|``, or the comb form ``|B_1|`` with ``form="comb"``."""
    t = _qubits(psi, 3)
    if form == "coefficients":
        d1, d2, d3 = _d_terms(t)
        return 4 * abs(d1 - 2 * d2 + 4 * d3)
    if form == "comb":
        return abs(_b_odd(t, 0))
    raise ValueError(f"unknown form {form!r}")


def residual_tangle_batch(vecs, dims=(2, 2, 2), block=None) -> np.ndarray:
    """Residual tangle of a stack of amplitude vectors of shape ``(..., 8)``."""
    vecs = np.asarray(vecs)
    if tuple(dims) != (2, 2, 2) or vecs.shape[-1] != 8:
        raise DimensionError("residual tangle needs three qubits")
    t = np.moveaxis(vecs.reshape(vecs.shape[:-1] + (2, 2, 2)), (-3, -2, -1), (0, 1, 2))
    d1, d2, d3 = _d_terms(t)
    return 4 * np.abs(d1 - 2 * d2 + 4 * d3)


def tau3_batch(vecs, dims=(2, 2, 2), block=None) -> np.ndarray:
    return np.sqrt(residual_tangle_batch(vecs, dims))


def tau3(psi: PureState) -> float:
    """Three-tangle ``sqrt(tau_res)``, cross-checked against the comb form."""
    coeff = residual_tangle(psi)
    comb = residual_tangle(psi, "comb")
    if abs(coeff - comb) > 1e-10 * max(1.0, psi.norm ** 4):
        raise ArithmeticError(f"residual tangle forms disagree: {coeff} vs {comb}")
    return math.sqrt(coeff)


# ------------------------------------------------------------ four qubits

def _lmn_dets(t: np.ndarray) -> tuple[complex, complex, complex]:
    # rows (c, d), columns (a, b); M and N come from qubit swaps 2<->3 and 2<->4,
    # with the overall sign chosen so that L + M + N = 0
    l = np.linalg.det(t.reshape(4, 4).T)
    m = -np.linalg.det(t.transpose(0, 2, 1, 3).reshape(4, 4).T)
    n = -np.linalg.det(t.transpose(0, 3, 2, 1).reshape(4, 4).T)
    return complex(l), complex(m), complex(n)


def _pair_contraction(e: np.ndarray, a: int, b: int) -> complex:
    idx = [2, 2, 2, 2]
    total = 0j
    for mu, nu in product(CONTRACTED, repeat=2):
        idx[a], idx[b] = mu, nu
        total += METRIC[mu] * METRIC[nu] * e[tuple(idx)] ** 2
    return total


def _four_qubit_table(psi: PureState, normalize: bool) -> np.ndarray:
    _qubits(psi, 4)
    if normalize:
        psi = psi.normalize()
    return comb_table(psi), psi.tensor


def four_qubit_generators(psi: PureState, normalize: bool = False) -> dict:
    """Four-qubit invariants ``H, L, M, N, B12, B13, B14, W, Dxy, Dxz, Dxt``.

    ``H`` is the degree-2 comb ``<yyyy>``; ``L, M, N`` are the determinants
    of the three 4x4 matricizations; the ``B1j`` are degree-4 combs with two
    contractions.  ``W = (F1 + H^3)/32`` and the ``D`` polynomials follow
    from ``H(N - M)/2 = 3 Dxy - W`` and its cyclic versions.  Values are
    complex and taken on raw amplitudes unless ``normalize`` is set.
    """
    e, t = _four_qubit_table(psi, normalize)
    h = complex(e[2, 2, 2, 2])
    l, m, n = _lmn_dets(t)
    b12, b13, b14 = (_pair_contraction(e, 0, j) for j in (1, 2, 3))
    w = (_f1(e) + h ** 3) / 32
    dxy = (h * (n - m) / 2 + w) / 3
    dxz = (h * (l - n) / 2 + w) / 3
    dxt = (h * (m - l) / 2 + w) / 3
    return {"H": h, "L": l, "M": m, "N": n, "B12": b12, "B13": b13, "B14": b14,
            "W": w, "Dxy": dxy, "Dxz": dxz, "Dxt": dxt}


def _f1(e: np.ndarray) -> complex:
    g = METRIC
    return complex(np.einsum("m,n,l,mn,ml,nl->", g, g, g,
                             e[:, :, 2, 2], e[:, 2, :, 2], e[2, :, :, 2]))


def filters(psi: PureState, normalize: bool = False) -> dict:
    """Degree-6, 8 and 12 filter invariants ``F1, F2, F3``.

    They vanish on every biseparable four-qubit state.
    """
    e, _ = _four_qubit_table(psi, normalize)
    g = METRIC
    f2 = np.einsum("m,n,l,s,mn,ml,ns,ls->", g, g, g, g,
                   e[:, :, 2, 2], e[:, 2, :, 2], e[2, :, 2, :], e[2, 2, :, :])
    b12, b13, b14 = (_pair_contraction(e, 0, j) for j in (1, 2, 3))
    return {"F1": _f1(e), "F2": complex(f2), "F3": 0.5 * b12 * b13 * b14}


def hyperdeterminant4(psi: PureState) -> complex:
    """Cayley hyperdeterminant of the 2x2x2x2 amplitude tensor (degree 24)."""
    v = four_qubit_generators(psi)
    h, l, m, n, w = v["H"], v["L"], v["M"], v["N"], v["W"]
    f1 = 32 * w - h ** 3
    sig = l * l + m * m + n * n
    pi = (l - m) * (m - n) * (n - l)
    a = (5 / 512 * h ** 9 + 5 / 16 * w * h ** 6 - 9 / 2 * sig * h ** 5
         + 2 * (5 * w ** 2 - 24 * pi) * h ** 3 - 240 * w * sig * h ** 2
         + 768 * sig ** 2 * h + 192 * w * (3 * w ** 2 + 8 * pi))
    b = h ** 8 / 256 - 17 / 2 * sig * h ** 4 - 96 * pi * h ** 2 + 256 * sig ** 2
    total = -2 * f1 * a + (128 * sig - h ** 4) * b - (256 * pi + h ** 6 / 8) ** 2
    return total / (2 ** 12 * 3 ** 3)


# ------------------------------------------------------------ N qubits

MAX_QUBITS_DEG24 = 10


def n_qubit_degree24(psi: PureState, kind: str, a: int | None = None, b: int | None = None) -> complex:
    """Generic degree-2 and degree-4 comb invariants of ``N <= 10`` qubits.

    ``kind``: ``"H"`` (even N, ``<y...y>``), ``"B_pair"`` (even N, contraction
    at qubits ``a`` and ``b``), ``"B_odd"`` (odd N, contraction at ``a``) or
    ``"B_sym"`` (odd N, sum of all ``B_odd``).  Qubit positions are 0-based.
    """
    t = _qubits(psi)
    n = t.ndim
    if n > MAX_QUBITS_DEG24:
        raise DimensionError(f"at most {MAX_QUBITS_DEG24} qubits supported")
    even = n % 2 == 0
    if kind == "H":
        if not even:
            raise DimensionError("H needs an even number of qubits")
        return _comb(t, [2] * n)
    if kind == "B_pair":
        if not even or a is None or b is None or a == b or not (0 <= a < n and 0 <= b < n):
            raise ValueError("B_pair needs an even qubit count and two distinct positions")
        total = 0j
        for mu, nu in product(CONTRACTED, repeat=2):
            idx = [2] * n
            idx[a], idx[b] = mu, nu
            total += METRIC[mu] * METRIC[nu] * _comb(t, idx) ** 2
        return total
    if kind == "B_odd":
        if even or a is None or not 0 <= a < n:
            raise ValueError("B_odd needs an odd qubit count and a position")
        return _b_odd(t, a)
    if kind == "B_sym":
        if even:
            raise ValueError("B_sym needs an odd qubit count")
        return sum(_b_odd(t, j) for j in range(n))
    raise ValueError(f"unknown kind {kind!r}")


# ------------------------------------------------------------ Bloch tensors

@dataclass(frozen=True, eq=False)
class BlochTensor:
    """Real coefficients ``x`` with ``rho = 2^-N sum x_{i..} sigma_i ⊗ ...``."""

    x: np.ndarray

    def density(self) -> np.ndarray:
        n = self.x.ndim
        out = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for idx in product(range(4), repeat=n):
            if self.x[idx] != 0:
                out += self.x[idx] * PauliString(idx).matrix()
        return out / 2 ** n


def bloch_tensor(rho) -> BlochTensor:
    rho = rho.density() if isinstance(rho, PureState) else rho
    if any(d != 2 for d in rho.dims):
        raise DimensionError("Bloch tensor needs qubits")
    n = rho.n_parties
    x = np.empty((4,) * n)
    m = rho.matrix
    for idx in product(range(4), repeat=n):
        x[idx] = np.einsum("ij,ji->", m, PauliString(idx).matrix()).real
    return BlochTensor(x)


def bloch_minkowski(rho) -> dict:
    """Bloch tensor, its Minkowski length squared and the purity ``2^-N sum x^2``.

    The length uses the metric ``diag(1, -1, -1, -1)`` on every index; for
    one qubit it equals ``4 det rho`` and for two qubits it is the sum with
    signs ``+x00^2 - x_j0^2 - x_0j^2 + x_jk^2``.
    """
    rho = rho.density() if isinstance(rho, PureState) else rho
    bt = bloch_tensor(rho)
    eta = np.array([1.0, -1, -1, -1])
    sign = np.ones(())
    for _ in range(bt.x.ndim):
        sign = np.multiply.outer(sign, eta)
    return {"tensor": bt,
            "mink_len2": float(np.sum(sign * bt.x ** 2)),
            "purity": float(np.sum(bt.x ** 2) / 2 ** bt.x.ndim)}


def concurrence_from_correlations(psi: PureState) -> float:
    """Pure two-qubit concurrence from ``<psi|sigma_mu ⊗ sigma_nu|psi>`` alone."""
    _qubits(psi, 2)
    corr = bloch_tensor(psi.density()).x
    eta = np.array([1.0, -1, -1, -1])
    c2 = 0.25 * np.einsum("m,k,mk,mk->", eta, eta, corr, corr)
    return math.sqrt(max(c2, 0.0))
