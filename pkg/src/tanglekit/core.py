"""State containers, index plumbing and named states.

All multipartite arrays use party-major, row-major flattening: the first
party is the most significant index, so ``|jkl>`` sits at position
``(j*d_B + k)*d_C + l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.linalg

NORM_TOL = 1e-9
PSD_TOL = 1e-9
MAX_TOTAL_DIM = 4096

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]


class StateError(ValueError):
    """Invalid state data or parameters."""


class DimensionError(StateError):
    """Party dimensions do not match what an operation requires."""


class AnnihilatedStateError(StateError):
    """A local filter mapped the state to the zero vector."""


def rng_from(seed: SeedLike) -> np.random.Generator:
    """Return a generator for ``seed``; a Generator is passed through untouched."""
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.default_rng(seed)


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


def _check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"invalid party dimensions {dims}")
    if math.prod(dims) > MAX_TOTAL_DIM:
        raise DimensionError(f"total dimension {math.prod(dims)} exceeds {MAX_TOTAL_DIM}")
    return dims


def _set(obj, **fields):
    for k, v in fields.items():
        object.__setattr__(obj, k, v)
    return obj


@dataclass(frozen=True, eq=False)
class PureState:
    """A state vector with ordered party dimensions.

    ``normalized=False`` admits vectors of arbitrary nonzero norm; every
    measure documents whether it rescales such inputs.
    """

    amplitudes: np.ndarray
    dims: tuple[int, ...]
    normalized: bool = True

    def __post_init__(self):
        amps = _readonly(self.amplitudes).reshape(-1)
        dims = _check_dims(self.dims)
        if amps.size != math.prod(dims):
            raise DimensionError(f"{amps.size} amplitudes do not fit dims {dims}")
        norm = float(np.linalg.norm(amps))
        if self.normalized and abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state norm {norm!r} differs from 1")
        if not self.normalized and norm == 0.0:
            raise StateError("zero vector is not a state")
        _set(self, amplitudes=amps, dims=dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def normalize(self) -> "PureState":
        return PureState(self.amplitudes / self.norm, self.dims)

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix._trusted(np.outer(v, v.conj()), self.dims, self.normalized)

    def __repr__(self):
        return f"PureState(dims={self.dims}, normalized={self.normalized})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian positive semidefinite matrix with party dimensions.

    Normal-form outputs and homogeneity probes use ``normalized=False``.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    normalized: bool = True

    def __post_init__(self):
        m = _readonly(self.matrix)
        dims = _check_dims(self.dims)
        n = math.prod(dims)
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not fit dims {dims}")
        if np.abs(m - m.conj().T).max(initial=0.0) > NORM_TOL:
            raise StateError("matrix is not Hermitian")
        tr = float(np.trace(m).real)
        lo = np.linalg.eigvalsh(m).min()
        if lo < -PSD_TOL * max(1.0, tr):
            raise StateError(f"matrix has negative eigenvalue {lo!r}")
        if self.normalized and abs(tr - 1.0) > NORM_TOL:
            raise StateError(f"trace {tr!r} differs from 1")
        _set(self, matrix=m, dims=dims)

    @classmethod
    def _trusted(cls, matrix, dims, normalized=True) -> "DensityMatrix":
        # internal fast path for matrices that are valid by construction
        obj = object.__new__(cls)
        return _set(obj, matrix=_readonly(matrix), dims=tuple(dims), normalized=normalized)

    @classmethod
    def from_external(cls, matrix, dims, normalize: bool = True) -> "DensityMatrix":
        """Build from I/O data, clipping eigenvalues in [-1e-9, 0) to zero.

        More negative eigenvalues are rejected.  With ``normalize`` the
        result is rescaled to unit trace.
        """
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"matrix shape {m.shape} is not square")
        if np.abs(m - m.conj().T).max(initial=0.0) > NORM_TOL:
            raise StateError("matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        w, v = np.linalg.eigh(m)
        if w.min() < -PSD_TOL:
            raise StateError(f"matrix has negative eigenvalue {w.min()!r}")
        w = np.clip(w, 0.0, None)
        m = (v * w) @ v.conj().T
        if normalize:
            tr = w.sum()
            if tr <= 0:
                raise StateError("zero matrix is not a state")
            m = m / tr
        return cls(m, dims, normalized=normalize)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.matrix)
        return np.clip(w, 0.0, None), v

    def rank(self, tol: float = 1e-10) -> int:
        return int((np.linalg.eigvalsh(self.matrix) > tol).sum())

    def normalize(self) -> "DensityMatrix":
        return DensityMatrix._trusted(self.matrix / self.trace, self.dims)

    def scaled(self, factor: float) -> "DensityMatrix":
        return DensityMatrix._trusted(self.matrix * factor, self.dims, normalized=False)

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims}, normalized={self.normalized})"


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Weighted pure states ``{(p_j, psi_j)}`` with unit total weight."""

    entries: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        entries = tuple((float(p), s) for p, s in self.entries)
        if not entries:
            raise StateError("empty decomposition")
        if any(not (0.0 < p <= 1.0 + NORM_TOL) for p, _ in entries):
            raise StateError("weights must lie in (0, 1]")
        if abs(sum(p for p, _ in entries) - 1.0) > NORM_TOL:
            raise StateError("weights must sum to 1")
        if len({s.dims for _, s in entries}) != 1:
            raise DimensionError("entries have different dims")
        _set(self, entries=entries)

    @classmethod
    def from_density(cls, rho: DensityMatrix, tol: float = 1e-12) -> "Decomposition":
        """Eigen-decomposition, dropping eigenvalues at or below ``tol``."""
        w, v = rho.eigh()
        keep = np.flatnonzero(w > tol)[::-1]
        tot = w[keep].sum()
        return cls(tuple((w[i] / tot, PureState(v[:, i], rho.dims)) for i in keep))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.entries[0][1].dims

    def __len__(self):
        return len(self.entries)

    def density(self) -> DensityMatrix:
        m = sum(p * np.outer(s.amplitudes, s.amplitudes.conj()) for p, s in self.entries)
        return DensityMatrix._trusted(m, self.dims)


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """A product operator ``G_1 ⊗ ... ⊗ G_n`` with a verified kind tag."""

    factors: tuple[np.ndarray, ...]
    kind: str = "general"

    def __post_init__(self):
        factors = tuple(_readonly(f) for f in self.factors)
        for f in factors:
            if f.ndim != 2 or f.shape[0] != f.shape[1]:
                raise DimensionError("local factors must be square")
        if self.kind == "unitary":
            for f in factors:
                if np.abs(f.conj().T @ f - np.eye(len(f))).max() > NORM_TOL:
                    raise StateError("factor is not unitary")
        elif self.kind == "special-linear":
            for f in factors:
                if abs(np.linalg.det(f) - 1.0) > NORM_TOL:
                    raise StateError("factor does not have unit determinant")
        elif self.kind != "general":
            raise ValueError(f"unknown kind {self.kind!r}")
        _set(self, factors=factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for f in self.factors:
            out = np.kron(out, f)
        return out

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "LocalOperator":
        return cls(tuple(np.eye(d) for d in dims), "unitary")

    @classmethod
    def random_unitary(cls, dims: Sequence[int], seed: SeedLike) -> "LocalOperator":
        rng = rng_from(seed)
        return cls(tuple(haar_unitary(d, rng) for d in dims), "unitary")

    @classmethod
    def random_special_linear(cls, dims: Sequence[int], seed: SeedLike,
                              scale: float = 0.5) -> "LocalOperator":
        """Factors ``expm(G)`` with traceless Gaussian generators of width ``scale``."""
        rng = rng_from(seed)
        factors = []
        for d in dims:
            params = rng.normal(scale=scale, size=2 * (d * d - 1))
            factors.append(special_linear(params, d))
        return cls(tuple(factors), "special-linear")


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def _traceless(params: np.ndarray, d: int) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    n = d * d - 1
    if params.size != 2 * n:
        raise ValueError(f"expected {2 * n} parameters, got {params.size}")
    c = params[:n] + 1j * params[n:]
    g = np.zeros(d * d, dtype=complex)
    g[:n] = c
    g = g.reshape(d, d)
    g[-1, -1] = -np.trace(g[:-1, :-1]) if d > 1 else 0.0
    return g


def special_linear(params, d: int = 2) -> np.ndarray:
    """``expm`` of a traceless complex generator built from ``2(d^2-1)`` reals."""
    return scipy.linalg.expm(_traceless(params, d))


def unitary_from_angles(angles) -> np.ndarray:
    """U(2) element from four angles ``(alpha, theta, phi, lam)``."""
    a, t, p, l = angles
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.exp(1j * a) * np.array([[c, -np.exp(1j * l) * s],
                                      [np.exp(1j * p) * s, np.exp(1j * (p + l)) * c]])


# ---------------------------------------------------------------- array kernels

def ptrace_array(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a square array keeping the sorted parties ``keep``."""
    n = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n) if i not in keep]
    dk = math.prod(dims[i] for i in keep)
    dd = math.prod(dims[i] for i in drop)
    t = m.reshape(tuple(dims) * 2)
    order = keep + drop + [i + n for i in keep] + [i + n for i in drop]
    t = t.transpose(order).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def ptranspose_array(m: np.ndarray, dims: Sequence[int], parties: Iterable[int]) -> np.ndarray:
    n = len(dims)
    axes = list(range(2 * n))
    for p in parties:
        axes[p], axes[p + n] = axes[p + n], axes[p]
    return m.reshape(tuple(dims) * 2).transpose(axes).reshape(m.shape)


def matricize(vec: np.ndarray, dims: Sequence[int], block: Sequence[int]) -> np.ndarray:
    """Reshape state vectors ``(..., D)`` into ``(..., d_block, d_rest)``."""
    n = len(dims)
    block = sorted(block)
    rest = [i for i in range(n) if i not in block]
    lead = vec.shape[:-1]
    t = vec.reshape(lead + tuple(dims))
    k = len(lead)
    t = t.transpose(list(range(k)) + [k + i for i in block + rest])
    return t.reshape(lead + (math.prod(dims[i] for i in block), -1))


def _parties(party, n: int) -> tuple[int, ...]:
    ps = (party,) if isinstance(party, (int, np.integer)) else tuple(party)
    if not ps or any(not 0 <= p < n for p in ps) or len(set(ps)) != len(ps):
        raise DimensionError(f"invalid party selection {party!r} for {n} parties")
    return tuple(int(p) for p in ps)


# ---------------------------------------------------------------- operations

def tensor_product(a, b):
    """Kronecker product; dims concatenate with ``a`` as the leading parties."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims,
                         a.normalized and b.normalized)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix._trusted(np.kron(a.matrix, b.matrix), _check_dims(a.dims + b.dims),
                                      a.normalized and b.normalized)
    raise TypeError("tensor_product needs two operands of the same kind")


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    if isinstance(rho, PureState):
        rho = rho.density()
    keep = _parties(keep, rho.n_parties)
    m = ptrace_array(rho.matrix, rho.dims, keep)
    return DensityMatrix._trusted(m, tuple(rho.dims[i] for i in sorted(keep)), rho.normalized)


def partial_transpose(rho: DensityMatrix, party) -> np.ndarray:
    """Transpose on one party (or a block of parties); the result may be non-PSD."""
    if isinstance(rho, PureState):
        rho = rho.density()
    return ptranspose_array(rho.matrix, rho.dims, _parties(party, rho.n_parties))


def trace_norm(m) -> float:
    return float(np.linalg.svd(np.asarray(m), compute_uv=False).sum())


def apply_local_operator(state, op: LocalOperator, renormalize: bool = False):
    """Apply ``op`` to a pure or mixed state.

    Without ``renormalize`` the result is flagged unnormalized.  With it,
    ``(state, weight)`` is returned where ``weight`` is the norm squared
    (pure) or trace (mixed) before rescaling.
    """
    if op.dims != state.dims:
        raise DimensionError(f"operator dims {op.dims} do not match state dims {state.dims}")
    if isinstance(state, PureState):
        t = state.tensor
        for i, f in enumerate(op.factors):
            t = np.moveaxis(np.tensordot(f, t, axes=([1], [i])), 0, i)
        v = t.reshape(-1)
        weight = float(np.vdot(v, v).real)
        if weight < 1e-300:
            raise AnnihilatedStateError("local operator annihilated the state")
        if renormalize:
            return PureState(v / math.sqrt(weight), state.dims), weight
        return PureState(v, state.dims, normalized=False)
    if isinstance(state, DensityMatrix):
        g = op.matrix()
        m = g @ state.matrix @ g.conj().T
        m = (m + m.conj().T) / 2
        weight = float(np.trace(m).real)
        if weight < 1e-300:
            raise AnnihilatedStateError("local operator annihilated the state")
        if renormalize:
            return DensityMatrix._trusted(m / weight, state.dims), weight
        return DensityMatrix._trusted(m, state.dims, normalized=False)
    raise TypeError(f"cannot apply a local operator to {type(state).__name__}")


def random_pure_state(dims: Sequence[int], seed: SeedLike) -> PureState:
    """Haar-random pure state."""
    rng = rng_from(seed)
    dims = _check_dims(dims)
    n = math.prod(dims)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return PureState(v / np.linalg.norm(v), dims)


def random_density_matrix(dims: Sequence[int], seed: SeedLike, rank: int | None = None) -> DensityMatrix:
    """Induced-measure random state ``G G^†/tr`` with a Ginibre ``G`` of ``rank`` columns."""
    rng = rng_from(seed)
    dims = _check_dims(dims)
    n = math.prod(dims)
    r = n if rank is None else int(rank)
    if not 1 <= r <= n:
        raise ValueError(f"rank must lie in [1, {n}]")
    g = rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r))
    m = g @ g.conj().T
    return DensityMatrix._trusted(m / np.trace(m).real, dims)


def mix_decomposition(d: Decomposition, u) -> Decomposition:
    """Remix a decomposition with an isometry: ``phi_k = sum_j u_kj sqrt(p_j) psi_j``.

    ``u`` needs orthonormal columns and at least as many columns as ``d``
    has entries; extra columns are ignored.  Zero-weight outputs are dropped.
    """
    u = np.asarray(u, dtype=complex)
    ell = len(d)
    if u.ndim != 2 or u.shape[1] < ell or u.shape[0] < ell:
        raise ValueError(f"mixing matrix of shape {u.shape} cannot remix {ell} entries")
    u = u[:, :ell]
    if np.abs(u.conj().T @ u - np.eye(ell)).max() > 1e-9:
        raise ValueError("mixing matrix columns are not orthonormal")
    basis = np.array([math.sqrt(p) * s.amplitudes for p, s in d.entries])
    phis = u @ basis
    weights = np.einsum("kd,kd->k", phis.conj(), phis).real
    entries = [(w, PureState(v / math.sqrt(w), d.dims))
               for w, v in zip(weights, phis) if w > 1e-15]
    total = sum(w for w, _ in entries)
    return Decomposition(tuple((w / total, s) for w, s in entries))


# ---------------------------------------------------------------- named states

def _basis(bits: str, dims=None) -> np.ndarray:
    dims = dims or (2,) * len(bits)
    v = np.zeros(math.prod(dims), dtype=complex)
    v[np.ravel_multi_index(tuple(int(b) for b in bits), dims)] = 1.0
    return v


def _dicke(n: int, k: int) -> np.ndarray:
    v = np.zeros(2 ** n, dtype=complex)
    for ones in combinations(range(n), k):
        v[sum(1 << (n - 1 - i) for i in ones)] = 1.0
    return v / math.sqrt(math.comb(n, k))


def _pure(v, dims, normalize=True) -> PureState:
    if normalize:
        return PureState(v / np.linalg.norm(v), dims)
    return PureState(v, dims, normalized=False)


def named_state(name: str, **params):
    """Construct a standard state by name.

    Names: ``product`` (bits), ``phi+``/``phi-``/``psi+``/``psi-``,
    ``psi_d`` (d), ``ghz`` (n, sign), ``w`` (n), ``wbar``, ``dicke`` (n, k),
    ``cl4``, ``x4``, ``acin`` (lambdas, phi), ``x_family`` (lam; unnormalized
    ``|0000>+|1111>+lam*D_4^(2)``), ``rho_r`` (mixed, unnormalized unless
    ``normalize=True``).  Pass ``normalize=False`` for an unnormalized vector
    where that makes sense.
    """
    name = name.lower()
    normalize = params.pop("normalize", None)
    if name == "product":
        bits = str(params.pop("bits"))
        state = _pure(_basis(bits), (2,) * len(bits))
    elif name in ("phi+", "phi-", "psi+", "psi-", "bell"):
        sign = -1.0 if name.endswith("-") else 1.0
        a, b = ("00", "11") if name.startswith("phi") or name == "bell" else ("01", "10")
        state = _pure(_basis(a) + sign * _basis(b), (2, 2))
    elif name == "psi_d":
        d = int(params.pop("d"))
        if d < 2:
            raise StateError("psi_d needs d >= 2")
        v = np.zeros(d * d, dtype=complex)
        v[[j * d + j for j in range(d)]] = 1.0
        state = _pure(v, (d, d))
    elif name == "ghz":
        n = int(params.pop("n", 3))
        sign = float(params.pop("sign", 1))
        if n < 2 or sign not in (1.0, -1.0):
            raise StateError("ghz needs n >= 2 and sign = +-1")
        state = _pure(_basis("0" * n) + sign * _basis("1" * n), (2,) * n)
    elif name == "w":
        n = int(params.pop("n", 3))
        if n < 2:
            raise StateError("w needs n >= 2")
        state = _pure(_dicke(n, 1), (2,) * n)
    elif name == "wbar":
        state = _pure(_basis("011") + _basis("101") + _basis("110"), (2, 2, 2))
    elif name == "dicke":
        n, k = int(params.pop("n")), int(params.pop("k"))
        if not 0 <= k <= n:
            raise StateError("dicke needs 0 <= k <= n")
        state = _pure(_dicke(n, k), (2,) * n)
    elif name == "cl4":
        v = sum(_basis(b) for b in ("0000", "0111", "1011", "1100"))
        state = _pure(v, (2,) * 4)
    elif name == "x4":
        v = math.sqrt(2) * _basis("1111") + sum(_basis(b) for b in ("0001", "0010", "0100", "1000"))
        state = _pure(v, (2,) * 4)
    elif name == "x_family":
        lam = float(params.pop("lam"))
        v = _basis("0000") + _basis("1111") + lam * _dicke(4, 2)
        state = _pure(v, (2,) * 4, normalize=bool(normalize))
        normalize = None
    elif name == "acin":
        lams = np.asarray(params.pop("lambdas"), dtype=float)
        phi = float(params.pop("phi", 0.0))
        if lams.shape != (5,) or (lams < 0).any() or abs((lams ** 2).sum() - 1) > NORM_TOL \
                or not 0 <= phi <= math.pi:
            raise StateError("acin needs five nonnegative lambdas with unit square sum and 0 <= phi <= pi")
        v = (lams[0] * _basis("000") + lams[1] * np.exp(1j * phi) * _basis("100")
             + lams[2] * _basis("101") + lams[3] * _basis("110") + lams[4] * _basis("111"))
        state = PureState(v, (2, 2, 2))
    elif name == "rho_r":
        m = np.diag([0, 1, 1, 1, 1, 1, 1, 0]).astype(complex)
        if normalize:
            return DensityMatrix(m / 6, (2, 2, 2))
        return DensityMatrix(m, (2, 2, 2), normalized=False)
    else:
        raise StateError(f"unknown state {name!r}")
    if params:
        raise StateError(f"unexpected parameters {sorted(params)} for {name!r}")
    if normalize is False:
        return PureState(state.amplitudes, state.dims, normalized=False)
    return state
