"""Assembly and verification of the two multi-level sharing schemes.

Scheme II (concatenation): an outer ((l, 2l-1)) threshold scheme whose first
l shares are re-shared through the blocks of an optimal decomposition and
whose remaining l-1 shares are re-shared through a minimal maximal structure
containing the target. A player set then reconstructs one outer share per
block it is authorized in, plus l-1 if the minimal maximal structure
authorizes it.

Scheme I (parallel registers): every block gets its own sub-scheme for the
same secret and each player collects one register per block. Only the
share-flow layer and a classical-secret simulation are provided.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import limits
from .core import AccessStructure, PlayerSet, authorized_table, bits_of, require_quantum
from .decomp import (
    BundledThreshold,
    Decomposition,
    Oracle,
    make_oracle,
    optimal_decomposition,
    smallest_prime_at_least,
    trivial_decomposition,
)
from .errors import SizeLimitError, StructureError
from .io import structure_to_dict
from .maximalize import (
    ExtendStrategy,
    PivotPolicy,
    closure_contains,
    extend_to_maximal,
    is_minmax,
    reduce_to_minmax,
)
from .qsim import FieldElement, SchemeInstance, verify_structure

log = logging.getLogger(__name__)

MINMAX = "minmax"


def _block_target(i: int) -> str:
    return f"block:{i}"


def default_routing(l: int) -> tuple[str, ...]:  # noqa: E741
    return tuple(_block_target(i) for i in range(l)) + (MINMAX,) * (l - 1)


@dataclass(frozen=True)
class ConcatScheme:
    gamma: AccessStructure
    minmax: AccessStructure
    decomposition: Decomposition
    routing: tuple[str, ...]  # outer share j -> "block:i" or "minmax"
    minmax_reduced: bool = True  # False when no minimal maximal structure contains gamma
    steps: tuple = ()

    @property
    def l(self) -> int:  # noqa: E743
        return self.decomposition.l

    @property
    def outer(self) -> tuple[int, int]:
        return self.l, 2 * self.l - 1

    def validate(self) -> None:
        self.decomposition.validate()
        if self.decomposition.gamma.masks != self.gamma.masks:
            raise StructureError("decomposition is not of the target structure")
        if not closure_contains(self.minmax, self.gamma):
            raise StructureError("the maximal component does not contain the target structure")
        if self.minmax_reduced and not is_minmax(self.minmax):
            raise StructureError("the maximal component is not minimal maximal")
        if len(self.routing) != 2 * self.l - 1:
            raise StructureError("routing must assign every outer share")

    def to_dict(self) -> dict:
        k, m = self.outer
        return {
            "structure": structure_to_dict(self.gamma),
            "outer": {"k": k, "m": m},
            "decomposition": self.decomposition.to_dict(),
            "minmax": structure_to_dict(self.minmax),
            "minmax_is_minimal_maximal": self.minmax_reduced,
            "routing": [{"outer_share": j + 1, "target": t} for j, t in enumerate(self.routing)],
        }


def build_scheme2(
    gamma: AccessStructure,
    trivial: bool = False,
    oracle: Oracle | None = None,
    extend: ExtendStrategy | None = None,
    policy: PivotPolicy | None = None,
) -> ConcatScheme:
    """Concatenated scheme for ``gamma``; ``trivial`` uses one block per minimal set.

    The maximal component is reduced towards a minimal maximal structure while
    keeping ``gamma`` authorized. Some structures are contained in no minimal
    maximal structure (the 5-player majority is one); the smallest maximal
    structure reached is used instead and the scheme says so.
    """
    require_quantum(gamma)
    steps: list = []
    maximal = extend_to_maximal(gamma, extend, steps)
    minmax = reduce_to_minmax(maximal, policy, steps, protect=gamma)
    reduced = is_minmax(minmax)
    if not reduced:
        log.info("no minimal maximal structure containing %s was reached; using r=%d", gamma, minmax.r)
    decomposition = trivial_decomposition(gamma) if trivial else optimal_decomposition(gamma, oracle)
    cs = ConcatScheme(gamma, minmax, decomposition, default_routing(decomposition.l), reduced, tuple(steps))
    cs.validate()
    return cs


def outer_share_counts(cs: ConcatScheme) -> np.ndarray:
    """Number of outer shares each of the 2**n player subsets can rebuild."""
    limits.check("scheme_players", cs.gamma.n)
    counts = np.zeros(1 << cs.gamma.n, dtype=np.int64)
    blocks = cs.decomposition.blocks
    minmax_table = authorized_table(cs.minmax)
    for target in cs.routing:
        if target == MINMAX:
            counts += minmax_table
        elif target.startswith("block:"):
            counts += authorized_table(blocks[int(target.split(":")[1])])
    return counts


def concat_authorized_family(cs: ConcatScheme) -> list[PlayerSet]:
    """Minimal player sets that rebuild at least l outer shares."""
    counts = outer_share_counts(cs)
    masks = [int(m) for m in np.flatnonzero(counts >= cs.l)]
    if not masks:
        return []
    return AccessStructure.from_masks(cs.gamma.players, masks).minimal_sets


def outer_scheme(l: int) -> SchemeInstance:  # noqa: E741
    return SchemeInstance.unit(l, smallest_prime_at_least(2 * l - 1), [f"share{j + 1}" for j in range(2 * l - 1)])


def within_envelope(q: int, k: int) -> bool:
    return q**k <= limits.LIMITS.support


@dataclass
class ComponentCheck:
    name: str
    structure: AccessStructure | None
    witness: dict | None
    simulated: bool
    passed: bool | None
    note: str = ""
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "component": self.name,
            "structure": None if self.structure is None else structure_to_dict(self.structure),
            "witness": self.witness,
            "simulated": self.simulated,
            "passed": self.passed,
            "note": self.note,
            "violations": self.violations,
        }


def _simulate_witness(name: str, block: AccessStructure, witness: BundledThreshold | None) -> ComponentCheck:
    if witness is None:
        return ComponentCheck(name, block, None, False, None, "no bundled threshold witness; share-flow check only")
    if not within_envelope(witness.field_order, witness.threshold):
        return ComponentCheck(name, block, witness.to_dict(), False, None, "outside the simulation envelope")
    scheme = SchemeInstance.from_witness(witness)
    report = verify_structure(scheme, block)
    return ComponentCheck(name, block, witness.to_dict(), True, report.passed, violations=report.violations)


def _simulate_outer(l: int) -> ComponentCheck:  # noqa: E741
    scheme = outer_scheme(l)
    labels = tuple(scheme.players)
    threshold = AccessStructure.from_masks(
        labels, [m for m in range(1, 1 << len(labels)) if bin(m).count("1") >= l]
    )
    witness = {"k": l, "m": 2 * l - 1, "q": scheme.q}
    if not within_envelope(scheme.q, l):
        return ComponentCheck("outer", None, witness, False, None, "outside the simulation envelope")
    report = verify_structure(scheme, threshold)
    return ComponentCheck("outer", None, witness, True, report.passed, violations=report.violations)


def _run_check(task):
    kind, args = task
    return _simulate_outer(*args) if kind == "outer" else _simulate_witness(*args)


@dataclass
class Scheme2Report:
    passed: bool
    family_matches: bool
    missing: list[str]
    extra: list[str]
    max_unauthorized_shares: int
    components: list[ComponentCheck]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "family_matches": self.family_matches,
            "missing": self.missing,
            "extra": self.extra,
            "max_unauthorized_outer_shares": self.max_unauthorized_shares,
            "components": [c.to_dict() for c in self.components],
        }


def verify_scheme2(cs: ConcatScheme, simulate: bool = True, oracle: Oracle | None = None, jobs: int = 1) -> Scheme2Report:
    """Share-flow sweep over all player subsets plus simulation of every sub-scheme.

    Unrealizable or oversized components are reported as share-flow only; the
    result fails only on an actual mismatch.
    """
    gamma = cs.gamma
    counts = outer_share_counts(cs)
    family = concat_authorized_family(cs)
    got = {s.bits for s in family}
    want = set(gamma.masks)
    missing = [PlayerSet(m, gamma.players).label for m in sorted(want - got)]
    extra = [PlayerSet(m, gamma.players).label for m in sorted(got - want)]
    unauth = ~authorized_table(gamma)
    max_unauth = int(counts[unauth].max()) if unauth.any() else 0

    components: list[ComponentCheck] = []
    if simulate:
        oracle = oracle or make_oracle()
        tasks = [("outer", (cs.l,))]
        for i, (block, w) in enumerate(zip(cs.decomposition.blocks, cs.decomposition.witnesses)):
            tasks.append(("block", (f"block:{i}", block, w)))
        if cs.l > 1:
            try:
                mw = oracle(cs.minmax)
            except SizeLimitError:
                mw = None
            tasks.append(("block", (MINMAX, cs.minmax, mw)))
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                components = list(pool.map(_run_check, tasks))
        else:
            components = [_run_check(t) for t in tasks]
    family_ok = not missing and not extra
    passed = family_ok and max_unauth < cs.l and all(c.passed is not False for c in components)
    return Scheme2Report(passed, family_ok, missing, extra, max_unauth, components)


# --- Scheme I -------------------------------------------------------------


@dataclass(frozen=True)
class RegisterPlan:
    gamma: AccessStructure
    decomposition: Decomposition
    schemes: tuple[SchemeInstance, ...]  # one per block

    def registers(self) -> dict[str, list[dict]]:
        out: dict[str, list[dict]] = {p: [] for p in self.gamma.players}
        for i, scheme in enumerate(self.schemes):
            for player, shares in scheme.assignment:
                out[player].append({"block": i, "shares": list(shares)})
        return {p: regs for p, regs in out.items() if regs}

    def authorized_in_some_block(self, mask: int) -> bool:
        return any(b.authorizes(mask) for b in self.decomposition.blocks)

    def to_dict(self) -> dict:
        return {
            "structure": structure_to_dict(self.gamma),
            "decomposition": self.decomposition.to_dict(),
            "block_schemes": [s.to_dict() for s in self.schemes],
            "registers": self.registers(),
        }


def build_scheme1(gamma: AccessStructure, oracle: Oracle | None = None, trivial: bool = False) -> RegisterPlan:
    require_quantum(gamma)
    decomposition = trivial_decomposition(gamma) if trivial else optimal_decomposition(gamma, oracle)
    schemes = tuple(SchemeInstance.from_witness(w) for w in decomposition.witnesses)
    return RegisterPlan(gamma, decomposition, schemes)


def _poly_eval(coeffs: list[FieldElement], x: int) -> FieldElement:
    acc = coeffs[0] * 0
    for c in coeffs:  # highest degree first
        acc = acc * x + c
    return acc


def _fits_low_degree(points: list[tuple[int, FieldElement]], degree: int) -> bool:
    """Whether some polynomial of degree <= ``degree`` passes through all points."""
    base = points[: degree + 1]
    for x, y in points[degree + 1 :]:
        # Lagrange interpolation through ``base`` evaluated at x
        acc = y * 0
        for i, (xi, yi) in enumerate(base):
            term = yi
            for j, (xj, _) in enumerate(base):
                if j != i:
                    term = term * (x - xj) / (xi - xj)
            acc = acc + term
        if acc != y:
            return False
    return True


def consistent_secrets(points: list[tuple[int, FieldElement]], k: int, q: int) -> list[int]:
    """Leading coefficients compatible with the given evaluations of a degree <= k-1 polynomial."""
    out = []
    for s in range(q):
        shifted = [(x, y - FieldElement(s * pow(x, k - 1, q), q)) for x, y in points]
        if _fits_low_degree(shifted, k - 2):
            out.append(s)
    return out


@dataclass
class Scheme1Report:
    passed: bool
    share_flow_matches: bool
    secret: int
    mismatches: list[dict]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "share_flow_matches": self.share_flow_matches,
            "classical_secret": self.secret,
            "mismatches": self.mismatches,
        }


def verify_scheme1(plan: RegisterPlan, seed: int = 0) -> Scheme1Report:
    """Share-flow sweep plus a classical run: every block shares one random secret.

    An authorized set must pin the secret down in some block; an unauthorized
    set must find every field value consistent with what it holds in every block.
    """
    gamma = plan.gamma
    limits.check("scheme_players", gamma.n)
    rng = np.random.default_rng(seed)
    q_common = min(s.q for s in plan.schemes)
    secret = int(rng.integers(q_common))
    dealt = []
    for scheme in plan.schemes:
        q, k = scheme.q, scheme.k
        coeffs = [FieldElement(secret, q)] + [FieldElement(int(c), q) for c in rng.integers(q, size=k - 1)]
        dealt.append([(x, _poly_eval(coeffs, x)) for x in scheme.points])

    flow_ok = True
    mismatches = []
    for mask in range(1, 1 << gamma.n):
        expected = gamma.authorizes(mask)
        by_flow = plan.authorized_in_some_block(mask)
        names = [gamma.players[i] for i in bits_of(mask)]
        recovered = False
        for scheme, values in zip(plan.schemes, dealt):
            held = sorted(scheme.shares_of(names))
            candidates = consistent_secrets([values[i] for i in held], scheme.k, scheme.q)
            if len(candidates) == 1:
                recovered = recovered or candidates == [secret]
            elif len(candidates) != scheme.q:
                mismatches.append({"players": names, "problem": "partial information leaked"})
        if by_flow != expected:
            flow_ok = False
        if recovered != expected or by_flow != expected:
            mismatches.append({"players": names, "authorized": expected, "recovered": recovered})
    return Scheme1Report(not mismatches, flow_ok, secret, mismatches)


# --- resources --------------------------------------------------------------


@dataclass(frozen=True)
class ResourceReport:
    label: str
    outer: tuple[int, int]
    block_shares: tuple[int, ...]
    minmax_shares: int | None
    total_shares: int | None
    verification_count: int

    def to_dict(self) -> dict:
        return {
            "scheme": self.label,
            "outer": {"k": self.outer[0], "m": self.outer[1]},
            "block_shares": list(self.block_shares),
            "minmax_shares": self.minmax_shares,
            "total_shares": self.total_shares,
            "verification_count": self.verification_count,
        }


def _resources(label: str, cs: ConcatScheme, verification_count: int, oracle: Oracle | None) -> ResourceReport:
    block_shares = tuple(w.total_shares for w in cs.decomposition.witnesses)
    mw = None
    if cs.l > 1:
        try:
            mw = (oracle or make_oracle())(cs.minmax)
        except SizeLimitError:
            mw = None
    minmax_shares = 0 if cs.l == 1 else (None if mw is None else mw.total_shares)
    total = None if minmax_shares is None else sum(block_shares) + (cs.l - 1) * minmax_shares
    return ResourceReport(label, cs.outer, block_shares, minmax_shares, total, verification_count)


def resource_compare(gamma: AccessStructure, oracle: Oracle | None = None) -> tuple[ResourceReport, ResourceReport]:
    """Optimal-decomposition scheme against the one-block-per-set scheme.

    Verification counts are the number of minimal sets to check: those of the
    minimal maximal reduction for the optimal scheme and those of the plain
    maximal extension for the trivial one.
    """
    maximal = extend_to_maximal(gamma)
    reduced = reduce_to_minmax(maximal)
    optimal = build_scheme2(gamma, oracle=oracle)
    trivial = build_scheme2(gamma, trivial=True)
    return (
        _resources("optimal", optimal, reduced.r, oracle),
        _resources("trivial", trivial, maximal.r, oracle),
    )


# --- text rendering -----------------------------------------------------------


def _braces(gamma: AccessStructure) -> str:
    return "{" + ", ".join(gamma.labels()) + "}"


def render_scheme2(cs: ConcatScheme) -> str:
    k, m = cs.outer
    lines = [f"(({k},{m})) outer threshold for {_braces(cs.gamma)}"]
    blocks = cs.decomposition.blocks
    witnesses = cs.decomposition.witnesses
    for j, target in enumerate(cs.routing):
        if target == MINMAX:
            tag = "minimal maximal" if cs.minmax_reduced else "maximal"
            lines.append(f"  share {j + 1} -> {tag} {_braces(cs.minmax)}")
        else:
            i = int(target.split(":")[1])
            w = witnesses[i]
            weights = " ".join(f"{p}:{x}" for p, x in w.weight_map().items())
            lines.append(
                f"  share {j + 1} -> block {i + 1} {_braces(blocks[i])}"
                f"  [(({w.threshold},{2 * w.threshold - 1})) q={w.field_order}, {weights}]"
            )
    return "\n".join(lines) + "\n"


def render_scheme1(plan: RegisterPlan) -> str:
    lines = [f"registers for {_braces(plan.gamma)}"]
    for player, regs in plan.registers().items():
        parts = [f"block {r['block'] + 1}: shares {r['shares']}" for r in regs]
        lines.append(f"  {player}: " + "; ".join(parts))
    return "\n".join(lines) + "\n"
