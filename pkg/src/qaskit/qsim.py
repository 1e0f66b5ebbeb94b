"""Sparse qudit simulation of polynomial-code threshold schemes.

The ((k, 2k-1)) scheme over F_q encodes a basis secret s as the uniform
superposition of codewords (f(x_1), ..., f(x_{2k-1})) over all polynomials
of degree <= k-1 whose x**(k-1) coefficient is s. Holding the code at
distinct points including 0 is allowed because the secret is not f(0).

A set of shares is checked against a reference qudit R that is maximally
entangled with the secret: the set learns nothing iff rho_{R,set} equals
rho_R (x) rho_set, and it can recover iff the complementary shares learn
nothing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from . import limits
from .core import AccessStructure, PlayerSet, bits_of
from .errors import SizeLimitError, StructureError

log = logging.getLogger(__name__)

TOLERANCE = 1e-9


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ValueError("field elements from different fields")
            return other
        return FieldElement(int(other) % self.modulus, self.modulus)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement((self.value + o.value) % self.modulus, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElement((self.value - o.value) % self.modulus, self.modulus)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElement(self.value * o.value % self.modulus, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.modulus, self.modulus)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.value, self.modulus - 2, self.modulus), self.modulus)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, e: int):
        return FieldElement(pow(self.value, e, self.modulus), self.modulus)

    def __int__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class SparseState:
    """Amplitude map over basis labels of ``num_qudits`` qudits of dimension ``dim``."""

    num_qudits: int
    dim: int
    labels: np.ndarray = field(repr=False)  # (support, num_qudits) int64
    amplitudes: np.ndarray = field(repr=False)  # (support,) complex128

    def __post_init__(self):
        if self.labels.shape != (len(self.amplitudes), self.num_qudits):
            raise StructureError("labels and amplitudes disagree in shape")
        limits.check("support", len(self.amplitudes))
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise StructureError(f"state not normalized: {norm}")

    @property
    def support(self) -> int:
        return len(self.amplitudes)

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(v) for v in row): complex(a) for row, a in zip(self.labels, self.amplitudes)}


@dataclass(frozen=True)
class SchemeInstance:
    q: int
    k: int
    points: tuple[int, ...]
    assignment: tuple[tuple[str, tuple[int, ...]], ...]  # player -> share indices
    discarded: tuple[int, ...] = ()

    def __post_init__(self):
        n_code = 2 * self.k - 1
        if self.k < 1:
            raise StructureError("threshold must be positive")
        if len(self.points) != n_code:
            raise StructureError(f"need {n_code} evaluation points, got {len(self.points)}")
        if len(set(p % self.q for p in self.points)) != n_code or any(not 0 <= p < self.q for p in self.points):
            raise StructureError("evaluation points must be distinct elements of the field")
        held = [i for _, shares in self.assignment for i in shares]
        if sorted(held + list(self.discarded)) != list(range(n_code)):
            raise StructureError("every share must be held by exactly one player or discarded")
        if len({p for p, _ in self.assignment}) != len(self.assignment):
            raise StructureError("duplicate player in bundling map")

    @property
    def n_code(self) -> int:
        return 2 * self.k - 1

    @property
    def players(self) -> list[str]:
        return [p for p, _ in self.assignment]

    def shares_of(self, players: Iterable[str]) -> frozenset[int]:
        table = dict(self.assignment)
        out: set[int] = set()
        for p in players:
            out.update(table.get(p, ()))
        return frozenset(out)

    @classmethod
    def unit(cls, k: int, q: int, players: Iterable[str] | None = None) -> "SchemeInstance":
        n_code = 2 * k - 1
        players = list(players) if players is not None else [f"S{i + 1}" for i in range(n_code)]
        if len(players) > n_code:
            raise StructureError("more players than shares")
        assignment = tuple((p, (i,)) for i, p in enumerate(players))
        return cls(q, k, tuple(range(n_code)), assignment, tuple(range(len(players), n_code)))

    @classmethod
    def from_witness(cls, witness) -> "SchemeInstance":
        """Bundled threshold to scheme: shares dealt in player order, the rest discarded."""
        k, q = witness.threshold, witness.field_order
        n_code = 2 * k - 1
        assignment = []
        nxt = 0
        for name, w in zip(witness.participants.names, witness.weights):
            assignment.append((name, tuple(range(nxt, nxt + w))))
            nxt += w
        return cls(q, k, tuple(range(n_code)), tuple(assignment), tuple(range(nxt, n_code)))

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "k": self.k,
            "points": list(self.points),
            "bundling": {p: list(s) for p, s in self.assignment},
            "discarded": list(self.discarded),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SchemeInstance":
        try:
            return cls(
                int(doc["q"]),
                int(doc["k"]),
                tuple(int(x) for x in doc["points"]),
                tuple((str(p), tuple(int(i) for i in s)) for p, s in doc["bundling"].items()),
                tuple(int(i) for i in doc.get("discarded", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureError(f"malformed scheme descriptor: {exc}") from exc


def _codewords(scheme: SchemeInstance, secrets: np.ndarray) -> np.ndarray:
    """Rows (s, f(x_1), ..., f(x_n)) for every secret in ``secrets`` and every free coefficient choice."""
    q, k = scheme.q, scheme.k
    free = np.array(list(product(range(q), repeat=k - 1)), dtype=np.int64).reshape(q ** (k - 1), k - 1)
    x = np.array(scheme.points, dtype=np.int64)
    # powers[j, i] = x_i ** j mod q for j < k
    powers = np.ones((k, len(x)), dtype=np.int64)
    for j in range(1, k):
        powers[j] = powers[j - 1] * x % q
    low = free @ powers[: k - 1] % q  # contribution of the free coefficients
    rows = []
    for s in secrets:
        values = (low + int(s) * powers[k - 1]) % q
        rows.append(np.hstack([np.full((len(values), 1), int(s), dtype=np.int64), values]))
    return np.vstack(rows)


def encode(scheme: SchemeInstance, secret: int) -> SparseState:
    q, k = scheme.q, scheme.k
    limits.check("support", q ** (k - 1))
    if not 0 <= secret < q:
        raise StructureError(f"secret must lie in F_{q}")
    rows = _codewords(scheme, np.array([secret]))[:, 1:]
    amps = np.full(len(rows), q ** (-(k - 1) / 2), dtype=np.complex128)
    return SparseState(scheme.n_code, q, rows, amps)


@lru_cache(maxsize=32)
def reference_state(scheme: SchemeInstance) -> SparseState:
    """(1/sqrt q) sum_s |s>_R (x) encode(s); qudit 0 is the reference."""
    q, k = scheme.q, scheme.k
    limits.check("support", q**k)
    rows = _codewords(scheme, np.arange(q))
    amps = np.full(len(rows), q ** (-k / 2), dtype=np.complex128)
    return SparseState(scheme.n_code + 1, q, rows, amps)


def _index(labels: np.ndarray, cols: list[int], q: int) -> tuple[np.ndarray, int]:
    """Compressed index of the sub-label on ``cols`` for every row."""
    if not cols:
        return np.zeros(len(labels), dtype=np.int64), 1
    key = np.zeros(len(labels), dtype=np.int64)
    for c in cols:
        key = key * q + labels[:, c]
    uniq, inv = np.unique(key, return_inverse=True)
    return inv.reshape(-1), len(uniq)


def _partial_trace(m: sp.csr_matrix, d_keep: int, d_out: int, keep_first: bool) -> sp.csr_matrix:
    """Trace out one tensor factor of a sparse operator on C^d_first (x) C^d_second."""
    c = m.tocoo()
    if keep_first:
        rk, ro = np.divmod(c.row, d_out)
        ck, co = np.divmod(c.col, d_out)
    else:
        ro, rk = np.divmod(c.row, d_keep)
        co, ck = np.divmod(c.col, d_keep)
    sel = ro == co
    return sp.csr_matrix((c.data[sel], (rk[sel], ck[sel])), shape=(d_keep, d_keep))


def residual_from_state(state: SparseState, subset: Iterable[int]) -> float:
    """|| rho_{R,S} - rho_R (x) rho_S ||_F with R = qudit 0 and S = share qudits ``subset`` (0-based).

    The reduced operators are formed by contracting over whichever side
    (traced-out shares or kept shares) is cheaper. For equal-amplitude states,
    the usual case here, all arithmetic is on integer overlap counts, so a
    decoupled set yields exactly 0.
    """
    subset = sorted(set(subset))
    if not subset:
        return 0.0
    share_cols = [1 + i for i in subset]
    rest = [c for c in range(1, state.num_qudits) if c not in share_cols]
    q = state.dim
    r_idx, d_r = _index(state.labels, [0], q)
    s_idx, d_s = _index(state.labels, share_cols, q)
    e_idx, d_e = _index(state.labels, rest, q)
    amps = state.amplitudes
    if not np.all(amps == amps[0]):
        return _direct_float(amps, r_idx, s_idx, e_idx, d_r, d_s, d_e)
    n = state.support
    cost_direct = int(np.sum(np.bincount(e_idx).astype(np.int64) ** 2))
    cost_gram = int(np.sum(np.bincount(s_idx).astype(np.int64) ** 2))
    if cost_direct <= cost_gram:
        return _direct_exact(n, r_idx, s_idx, e_idx, d_r, d_s, d_e)
    return _gram_exact(n, r_idx, s_idx, e_idx, d_r, d_s, d_e)


def _direct_float(amps, r_idx, s_idx, e_idx, d_r, d_s, d_e) -> float:
    amp = sp.csr_matrix((amps, (r_idx * d_s + s_idx, e_idx)), shape=(d_r * d_s, d_e))
    rho_rs = (amp @ amp.conj().T).tocsr()
    rho_r = _partial_trace(rho_rs, d_r, d_s, keep_first=True)
    rho_s = _partial_trace(rho_rs, d_s, d_r, keep_first=False)
    diff = rho_rs - sp.kron(rho_r, rho_s, format="csr")
    return float(np.sqrt(np.sum(np.abs(diff.data) ** 2)))


def _direct_exact(n, r_idx, s_idx, e_idx, d_r, d_s, d_e) -> float:
    # every amplitude is 1/sqrt(n): rho = counts / n
    ones = np.ones(len(r_idx), dtype=np.int64)
    amp = sp.csr_matrix((ones, (r_idx * d_s + s_idx, e_idx)), shape=(d_r * d_s, d_e))
    c_rs = (amp @ amp.T).tocsr()
    c_r = _partial_trace(c_rs, d_r, d_s, keep_first=True)
    c_s = _partial_trace(c_rs, d_s, d_r, keep_first=False)
    diff = c_rs * n - sp.kron(c_r, c_s, format="csr")
    diff.eliminate_zeros()
    return float(np.sqrt(np.sum(diff.data.astype(np.float64) ** 2))) / n**2


def _gram_exact(n, r_idx, s_idx, e_idx, d_r, d_s, d_e) -> float:
    # Overlaps of the kept-share vectors v_(r,e); with C = counts(v_a . v_b):
    #   Tr rho_RS^2 = Tr rho_E^2, Tr rho_S^2 = ||C||^2 and
    #   Tr[rho_RS (rho_R (x) rho_S)] = Tr[(rho_R^T (x) 1_E) C C]
    ones = np.ones(len(r_idx), dtype=np.int64)
    cols = r_idx * d_e + e_idx
    amp = sp.csr_matrix((ones, (s_idx, cols)), shape=(d_s, d_r * d_e))
    c = (amp.T @ amp).tocsr()
    co = c.tocoo()
    rr, re = np.divmod(co.row, d_e)
    cr, ce = np.divmod(co.col, d_e)
    same_e = re == ce
    c_r = sp.csr_matrix((co.data[same_e], (cr[same_e], rr[same_e])), shape=(d_r, d_r))
    same_r = rr == cr
    c_e = sp.csr_matrix((co.data[same_r], (ce[same_r], re[same_r])), shape=(d_e, d_e))
    x = sp.kron(c_r.T, sp.identity(d_e, dtype=np.int64, format="csr"), format="csr")
    t1 = _exact_sum(c_e.data**2)
    t2 = _exact_sum((x @ c).multiply(c.T).tocsr().data)
    t3 = _exact_sum(c_r.data**2) * _exact_sum(c.data**2)
    num = n * n * t1 - 2 * n * t2 + t3
    return math.sqrt(max(num, 0)) / n**2


def _exact_sum(values: np.ndarray) -> int:
    return int(np.sum(values.astype(object))) if len(values) else 0


@lru_cache(maxsize=4096)
def _cached_residual(scheme: SchemeInstance, subset: frozenset[int]) -> float:
    return residual_from_state(reference_state(scheme), subset)


def decoupling_residual(scheme: SchemeInstance, subset: Iterable[int]) -> float:
    subset = frozenset(subset)
    if any(not 0 <= i < scheme.n_code for i in subset):
        raise StructureError("share index out of range")
    return _cached_residual(scheme, subset)


@dataclass(frozen=True)
class SubsetReport:
    players: tuple[str, ...]
    recoverable: bool
    secret_free: bool
    residual_held: float
    residual_complement: float

    def to_dict(self) -> dict:
        return {
            "players": list(self.players),
            "recoverable": self.recoverable,
            "secret_free": self.secret_free,
            "residual_held": self.residual_held,
            "residual_complement": self.residual_complement,
        }


def player_subset_report(scheme: SchemeInstance, players: PlayerSet | Iterable[str]) -> SubsetReport:
    names = tuple(players.names) if isinstance(players, PlayerSet) else tuple(players)
    held = scheme.shares_of(names)
    others = frozenset(range(scheme.n_code)) - held
    res_held = decoupling_residual(scheme, held)
    res_comp = decoupling_residual(scheme, others)
    return SubsetReport(names, res_comp <= TOLERANCE, res_held <= TOLERANCE, res_held, res_comp)


@dataclass
class VerificationReport:
    passed: bool
    rows: list[dict]
    violations: list[dict]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "violations": self.violations, "subsets": self.rows}


def verify_structure(scheme: SchemeInstance, gamma: AccessStructure) -> VerificationReport:
    """Sweep every subset of the players involved and compare with ``gamma``'s closure."""
    universe = gamma.players
    unknown = [p for p in scheme.players if p not in universe]
    if unknown:
        raise StructureError(f"scheme players not in the structure's universe: {unknown}")
    involved = PlayerSet.of(universe, scheme.players).bits | gamma.support
    idx = bits_of(involved)
    limits.check("verify_players", len(idx))
    rows, violations = [], []
    for local in range(1 << len(idx)):
        mask = sum(1 << idx[j] for j in range(len(idx)) if local >> j & 1)
        rep = player_subset_report(scheme, PlayerSet(mask, universe))
        authorized = gamma.authorizes(mask)
        row = rep.to_dict() | {"authorized": authorized}
        rows.append(row)
        if authorized and not rep.recoverable:
            violations.append(row | {"problem": "authorized set cannot recover"})
        elif not authorized and not rep.secret_free:
            violations.append(row | {"problem": "unauthorized set learns about the secret"})
    return VerificationReport(not violations, rows, violations)


def induced_structure(scheme: SchemeInstance, universe: tuple[str, ...]) -> AccessStructure | None:
    """Access structure realized by the scheme, read off the recoverability checks."""
    idx = bits_of(PlayerSet.of(universe, scheme.players).bits)
    limits.check("verify_players", len(idx))
    masks = []
    for local in range(1, 1 << len(idx)):
        mask = sum(1 << idx[j] for j in range(len(idx)) if local >> j & 1)
        if player_subset_report(scheme, PlayerSet(mask, universe)).recoverable:
            masks.append(mask)
    return AccessStructure.from_masks(universe, masks) if masks else None


def dense_oracle_crosscheck(scheme: SchemeInstance, subset: Iterable[int]) -> float:
    """Residual recomputed from a dense state vector and explicit partial traces."""
    subset = sorted(set(subset))
    q, k, n = scheme.q, scheme.k, scheme.n_code
    limits.check("dense", q ** (n + 1))
    kept = 1 + len(subset)
    limits.check("dense", q ** (2 * kept))
    psi = np.zeros(q ** (n + 1), dtype=np.complex128)
    amp = q ** (-k / 2)
    for s in range(q):
        for coeffs in product(range(q), repeat=k - 1):
            poly = (s,) + coeffs[::-1]  # highest degree first
            digits = [s]
            for x in scheme.points:
                acc = 0
                for c in poly:
                    acc = (acc * x + c) % q
                digits.append(acc)
            psi[np.ravel_multi_index(digits, (q,) * (n + 1))] += amp
    tensor = psi.reshape((q,) * (n + 1))
    keep_axes = [0] + [1 + i for i in subset]
    trace_axes = [a for a in range(n + 1) if a not in keep_axes]
    mat = np.transpose(tensor, keep_axes + trace_axes).reshape(q**kept, -1)
    rho = mat @ mat.conj().T
    d_s = q ** (kept - 1)
    blocks = rho.reshape(q, d_s, q, d_s)
    rho_r = np.einsum("iaja->ij", blocks)
    rho_s = np.einsum("aiaj->ij", blocks)
    return float(np.linalg.norm(rho - np.kron(rho_r, rho_s)))
