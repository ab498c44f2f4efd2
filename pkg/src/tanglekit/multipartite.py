"""Multipartite measures over bipartitions, GME concurrence bounds and monogamy."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .bipartite import _as_density, negativity, purity_batch, wootters_concurrence
from .core import DensityMatrix, DimensionError, PureState, partial_trace
from .invariants import four_qubit_generators, tau3
from .results import BoundValue

MAX_PARTIES = 12


@dataclass(frozen=True)
class Bipartition:
    """A cut ``block | complement``; the stored block always contains party 0."""

    block: tuple
    n: int

    def __post_init__(self):
        block = tuple(sorted(set(self.block)))
        if not block or len(block) >= self.n or any(not 0 <= b < self.n for b in block):
            raise DimensionError(f"invalid block {self.block} for {self.n} parties")
        if 0 not in block:
            block = tuple(p for p in range(self.n) if p not in block)
        object.__setattr__(self, "block", block)

    @property
    def complement(self) -> tuple:
        return tuple(p for p in range(self.n) if p not in self.block)


def bipartitions(n: int) -> list[Bipartition]:
    """All ``2^(n-1) - 1`` cuts of ``n`` parties in a fixed order."""
    if n < 2:
        raise DimensionError("need at least two parties")
    if n > MAX_PARTIES:
        raise DimensionError(f"bipartition enumeration is capped at {MAX_PARTIES} parties")
    rest = range(1, n)
    cuts = []
    for size in range(0, n - 1):
        for extra in combinations(rest, size):
            cuts.append(Bipartition((0,) + extra, n))
    return cuts


def _require_qubits(state, parties=None):
    dims = state.dims
    parties = range(len(dims)) if parties is None else parties
    if any(dims[p] != 2 for p in parties):
        raise DimensionError(f"parties {tuple(parties)} must be qubits, dims are {dims}")


# ------------------------------------------------------------ one-party quantities

def one_party_concurrence(psi: PureState, j: int) -> float:
    """``sqrt(2(1 - tr rho_j^2))`` on the normalized state."""
    v = psi.normalize().amplitudes
    return math.sqrt(max(0.0, 2 * (1 - float(purity_batch(v, psi.dims, (j,))))))


def one_tangle(psi: PureState, j: int) -> float:
    _require_qubits(psi, (j,))
    return one_party_concurrence(psi, j) ** 2


def global_entanglement(psi: PureState) -> float:
    """Mean one-tangle over all qubits."""
    _require_qubits(psi)
    return sum(one_tangle(psi, j) for j in range(psi.n_parties)) / psi.n_parties


def pairwise_concurrence(state, j: int, k: int) -> float:
    """Wootters concurrence of the reduced state of parties ``j`` and ``k``."""
    rho = _as_density(state)
    if j == k:
        raise DimensionError("pair needs two distinct parties")
    _require_qubits(rho, (j, k))
    red = partial_trace(rho, sorted((j, k)))
    return wootters_concurrence(red.normalize())


def _pair_negativity(rho: DensityMatrix, j: int, k: int) -> float:
    return negativity(partial_trace(rho, sorted((j, k))).normalize(), 0)


# ------------------------------------------------------------ monogamy

@dataclass(frozen=True)
class MonogamyAudit:
    """One monogamy relation: ``slack = lhs - rhs``.

    ``kind`` is ``inequality`` (slack should be >= 0) or ``equality``.
    """

    relation: str
    lhs: float
    rhs: float
    kind: str

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


def monogamy_audit(psi: PureState, j: int = 0) -> list[MonogamyAudit]:
    """Monogamy relations for qubit ``j`` of a pure multi-qubit state.

    Always emits the concurrence (Osborne-Verstraete) and negativity (Ou-Fan)
    inequalities; adds the CKW equality with the three-tangle for three
    qubits and the identity ``tau2 = (4 tau1 - |H|^2)/3`` for four.
    """
    if not isinstance(psi, PureState):
        raise TypeError("monogamy audit needs a pure state")
    _require_qubits(psi)
    n = psi.n_parties
    if n < 3:
        raise DimensionError("monogamy needs at least three qubits")
    psi = psi.normalize()
    rho = psi.density()
    others = [k for k in range(n) if k != j]
    tau_j = one_tangle(psi, j)
    c2 = sum(pairwise_concurrence(rho, j, k) ** 2 for k in others)
    out = [MonogamyAudit("osborne-verstraete", tau_j, c2, "inequality")]
    n_j = negativity(rho, j)
    out.append(MonogamyAudit("ou-fan", n_j ** 2,
                             sum(_pair_negativity(rho, j, k) ** 2 for k in others), "inequality"))
    if n == 3:
        out.append(MonogamyAudit("ckw", tau_j, c2 + tau3(psi) ** 2, "equality"))
    if n == 4:
        tau1 = global_entanglement(psi)
        v = psi.amplitudes
        tau2 = sum(2 * (1 - float(purity_batch(v, psi.dims, (0, k))))
                   for k in (1, 2, 3)) / 3
        h = four_qubit_generators(psi)["H"]
        out.append(MonogamyAudit("gour", tau2, (4 * tau1 - abs(h) ** 2) / 3, "equality"))
    return out


# ------------------------------------------------------------ GME concurrence

def gme_concurrence_pure(psi: PureState) -> float:
    """Minimum over all cuts of ``sqrt(2(1 - tr rho_P^2))``."""
    if psi.n_parties < 3:
        raise DimensionError("GME concurrence needs at least three parties")
    v = psi.normalize().amplitudes
    purities = [float(purity_batch(v, psi.dims, cut.block)) for cut in bipartitions(psi.n_parties)]
    return math.sqrt(max(0.0, 2 * (1 - max(purities))))


def gme_preset(name: str, n: int, k: int = 1) -> list[tuple]:
    """Index pairs for the ``ghz`` preset or the ``dicke`` preset of weight ``k``.

    ``w`` is the ``dicke`` preset with ``k = 1``.
    """
    if name == "ghz":
        return [((0,) * n, (1,) * n)]
    if name in ("w", "dicke"):
        k = 1 if name == "w" else k
        if not 0 < k < n:
            raise ValueError(f"Dicke weight {k} out of range for {n} qubits")
        strings = [tuple(1 if p in ones else 0 for p in range(n))
                   for ones in combinations(range(n), k)]
        return list(combinations(strings, 2))
    raise ValueError(f"unknown preset {name!r}")


def _validate_pairs(pairs, dims):
    out = []
    for pair in pairs:
        if len(pair) != 2:
            raise ValueError(f"index pair {pair!r} must have two multi-indices")
        m, mp = (tuple(int(i) for i in idx) for idx in pair)
        if len(m) != len(dims) or len(mp) != len(dims):
            raise ValueError(f"multi-index length must be {len(dims)}")
        if any(not 0 <= i < d for idx in (m, mp) for i, d in zip(idx, dims)):
            raise ValueError(f"multi-index out of range in {pair!r}")
        if m == mp:
            raise ValueError("index pair must be off-diagonal")
        out.append((m, mp))
    if not out:
        raise ValueError("need at least one index pair")
    return out


def gme_concurrence_bound(rho: DensityMatrix, pairs="ghz", k: int = 1) -> BoundValue:
    """Lower bound on the GME concurrence from off-diagonal elements.

    For each cut and each pair ``(M, M')`` the diagonal term is
    ``sqrt(rho_{K L', K L'} rho_{K' L, K' L})`` where ``K, L`` are the two
    sides of ``M``.  A diagonal term is subtracted as many times as it occurs
    within the single cut where it occurs most often.  The result is
    ``2/sqrt(eta) (sum |rho_{M,M'}| - sum of diagonal terms)`` clamped at 0.
    """
    dims = rho.dims
    if len(dims) < 3:
        raise DimensionError("GME bound needs at least three parties")
    if isinstance(pairs, str):
        _require_qubits(rho)
        pairs = gme_preset(pairs, len(dims), k)
    pairs = _validate_pairs(pairs, dims)
    m = rho.matrix

    def flat(idx):
        return int(np.ravel_multi_index(idx, dims))

    off = sum(abs(m[flat(a), flat(b)]) for a, b in pairs)
    mult: dict = {}
    for cut in bipartitions(len(dims)):
        side = set(cut.block)
        seen = Counter()
        for a, b in pairs:
            kl = tuple(a[p] if p in side else b[p] for p in range(len(dims)))
            lk = tuple(b[p] if p in side else a[p] for p in range(len(dims)))
            seen[tuple(sorted((flat(kl), flat(lk))))] += 1
        for term, c in seen.items():
            mult[term] = max(mult.get(term, 0), c)
    diag = sum(c * math.sqrt(max(0.0, m[i, i].real * m[j, j].real)) for (i, j), c in mult.items())
    value = 2 / math.sqrt(len(pairs)) * (off - diag)
    return BoundValue(max(0.0, value), "lower")


def min_bipartition_negativity(rho) -> BoundValue:
    """Smallest negativity over all cuts.

    Bounds the genuine multipartite negativity from above, since the
    minimization over biseparable mixtures is not carried out.
    """
    rho = _as_density(rho)
    if rho.n_parties < 3:
        raise DimensionError("needs at least three parties")
    return BoundValue(min(negativity(rho, cut.block) for cut in bipartitions(rho.n_parties)), "upper")


def telescope(psi3: PureState) -> PureState:
    """``|jkl> -> |jkll>``; an isometry on the computational basis."""
    if tuple(psi3.dims) != (2, 2, 2):
        raise DimensionError(f"need three qubits, got {psi3.dims}")
    t = np.zeros((2, 2, 2, 2), dtype=complex)
    src = psi3.tensor
    for l in (0, 1):
        t[:, :, l, l] = src[:, :, l]
    return PureState(t.ravel(), (2, 2, 2, 2), normalized=psi3.normalized)
