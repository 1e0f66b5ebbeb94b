"""Command-line front end: ``qaskit <command> ...``.

Every command prints a JSON report (or a text rendering with ``--text``) and
exits 0 on success, 1 when a verification fails and 2 on usage, input or
size errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .core import (
    AccessStructure,
    PlayerSet,
    authorized_table,
    is_authorized,
    is_maximal,
    unauthorized_split,
    validate_quantum,
)
from .decomp import make_oracle, optimal_decomposition
from .enumeration import all_maximal_structures, canonical_form, isomorphism_classes
from .errors import PivotError, SizeLimitError, StructureError
from .io import dumps, load_structure, structure_from_dict, structure_to_dict
from .maximalize import (
    all_maximal_extensions,
    check_corollary,
    extend_to_maximal,
    grow_minmax,
    is_minmax,
    pivot_order,
    prefer,
    reduce_to_minmax,
    replace_step,
)
from .qsim import SchemeInstance, induced_structure, verify_structure
from .schemes import (
    build_scheme1,
    build_scheme2,
    concat_authorized_family,
    render_scheme1,
    render_scheme2,
    resource_compare,
    verify_scheme1,
    verify_scheme2,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _split_sets(text: str | None) -> list[str]:
    if not text:
        return []
    return [t for t in text.replace(";", ",").split(",") if t.strip()]


def _emit(args, doc: dict, text: str | None = None) -> None:
    out = text if (args.text and text is not None) else dumps(doc)
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def _structures(gs) -> list[dict]:
    return [structure_to_dict(g) for g in gs]


# --- commands -------------------------------------------------------------


def cmd_validate(args) -> int:
    gamma = load_structure(args.structure)
    report = validate_quantum(gamma)
    doc = {"operation": "validate", "input": structure_to_dict(gamma)} | report.to_dict()
    if report.valid:
        doc["maximal"] = is_maximal(gamma)
        doc["minimal_maximal"] = is_minmax(gamma)
    _emit(args, doc)
    return EXIT_OK if report.valid else EXIT_FAIL


def cmd_closure(args) -> int:
    gamma = load_structure(args.structure)
    names = [p.strip() for p in args.set.split(",") if p.strip()]
    a = PlayerSet.of(gamma.players, names)
    doc = {
        "operation": "closure",
        "input": structure_to_dict(gamma),
        "set": a.names,
        "authorized": is_authorized(gamma, a),
    }
    valid = validate_quantum(gamma).valid
    if valid and gamma.n <= 20:
        split = unauthorized_split(gamma)
        doc["class"] = (
            "authorized" if doc["authorized"] else ("A1" if a in split.a1 else "A2")
        ) if a.bits else "empty"
    _emit(args, doc)
    return EXIT_OK


def cmd_maximalize(args) -> int:
    gamma = load_structure(args.structure)
    doc = {"operation": "maximalize", "input": structure_to_dict(gamma)}
    if args.all:
        found = all_maximal_extensions(gamma)
        doc["results"] = _structures(found)
        doc["count"] = len(found)
    else:
        steps: list = []
        strategy = prefer(_split_sets(args.prefer)) if args.prefer else None
        result = extend_to_maximal(gamma, strategy, steps)
        doc |= {"steps": steps, "result": structure_to_dict(result), "r": result.r}
    _emit(args, doc)
    return EXIT_OK


def cmd_minmax(args) -> int:
    gamma = load_structure(args.structure)
    steps: list = []
    start = gamma if is_maximal(gamma) else extend_to_maximal(gamma, steps=steps)
    policy = pivot_order(_split_sets(args.pivots)) if args.pivots else None
    result = reduce_to_minmax(start, policy, steps)
    doc = {
        "operation": "minmax",
        "input": structure_to_dict(gamma),
        "maximal_start": structure_to_dict(start),
        "steps": steps,
        "result": structure_to_dict(result),
        "r": result.r,
        "minimal_maximal": is_minmax(result),
        "corollary": check_corollary(start).to_dict(),
    }
    _emit(args, doc)
    return EXIT_OK


def cmd_grow(args) -> int:
    gamma = load_structure(args.structure)
    steps: list = []
    result = grow_minmax(gamma, args.player, args.pivot, steps)
    doc = {
        "operation": "grow",
        "input": structure_to_dict(gamma),
        "steps": steps,
        "result": structure_to_dict(result),
        "minimal_maximal": is_minmax(result),
    }
    _emit(args, doc)
    return EXIT_OK


def cmd_decompose(args) -> int:
    gamma = load_structure(args.structure)
    oracle = make_oracle(args.oracle, args.max_weight, args.max_threshold)
    d = optimal_decomposition(gamma, oracle)
    doc = {"operation": "decompose", "input": structure_to_dict(gamma)} | d.to_dict()
    _emit(args, doc)
    return EXIT_OK


def cmd_synth(args) -> int:
    gamma = load_structure(args.structure)
    oracle = make_oracle(args.oracle, args.max_weight, args.max_threshold)
    if args.scheme == "1":
        plan = build_scheme1(gamma, oracle, trivial=args.trivial)
        doc = {"operation": "synth", "scheme": 1} | plan.to_dict()
        ok = True
        if args.verify:
            report = verify_scheme1(plan, seed=args.seed)
            doc["verification"] = report.to_dict()
            ok = report.passed
        _emit(args, doc, render_scheme1(plan))
        return EXIT_OK if ok else EXIT_FAIL
    cs = build_scheme2(gamma, trivial=args.trivial, oracle=oracle)
    doc = {"operation": "synth", "scheme": 2} | cs.to_dict()
    doc["authorized_family"] = [s.names for s in concat_authorized_family(cs)]
    ok = True
    if args.verify:
        report = verify_scheme2(cs, simulate=not args.no_sim, oracle=oracle, jobs=args.jobs)
        doc["verification"] = report.to_dict()
        ok = report.passed
    _emit(args, doc, render_scheme2(cs))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simverify(args) -> int:
    try:
        raw = json.loads(Path(args.scheme).read_text())
    except json.JSONDecodeError as exc:
        raise StructureError(f"{args.scheme}: malformed JSON ({exc})") from exc
    scheme = SchemeInstance.from_dict(raw)
    doc = {"operation": "simverify", "scheme": scheme.to_dict()}
    if "access_structure" in raw:
        gamma = structure_from_dict(raw["access_structure"])
        report = verify_structure(scheme, gamma)
        doc |= {"access_structure": structure_to_dict(gamma)} | report.to_dict()
        ok = report.passed
    else:
        universe = tuple(sorted(scheme.players))
        induced = induced_structure(scheme, universe)
        doc["induced_structure"] = None if induced is None else structure_to_dict(induced)
        ok = True
    _emit(args, doc)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_compare(args) -> int:
    gamma = load_structure(args.structure)
    ours, trivial = resource_compare(gamma, make_oracle(args.oracle, args.max_weight, args.max_threshold))
    doc = {
        "operation": "compare",
        "input": structure_to_dict(gamma),
        "optimal": ours.to_dict(),
        "trivial": trivial.to_dict(),
    }
    k1, m1 = ours.outer
    k2, m2 = trivial.outer
    text = (
        f"outer (({k1},{m1})) vs (({k2},{m2}))\n"
        f"verification counts {ours.verification_count} (minimal maximal) vs "
        f"{trivial.verification_count} (maximal)\n"
    )
    _emit(args, doc, text)
    return EXIT_OK


# --- reproduction of the worked examples ---------------------------------------


def _p(n: int, text: str) -> AccessStructure:
    return AccessStructure.parse(text, n)


FOUR_SET = "P1P2 P1P4P5 P2P3P5 P2P3P4"
FOUR_SET_MAXIMAL = "P1P2 P1P3 P1P4P5 P2P3P5 P2P3P4"
FOUR_SET_MAXIMAL_ALT = "P1P2 P1P3P5 P1P3P4 P1P4P5 P2P3P5 P2P3P4 P2P4P5"
SIX_PLAYER_MAXIMAL = (
    "P1P2 P1P3P4 P1P3P5 P1P3P6 P1P4P5 P1P4P6 P1P5P6 P2P3P5P6 P2P4P5P6 P2P3P4P5 P2P3P4P6"
)
SIX_PLAYER_AFTER_FIRST = "P1P2 P1P3 P1P4P5 P1P4P6 P1P5P6 P2P3P4P5 P2P3P4P6 P2P3P5P6"
SIX_PLAYER_RESULT = "P1P2 P1P3 P1P4 P1P5P6 P2P3P4P5 P2P3P4P6"
FIVE_PLAYER_MAJORITY = "P1P2P3 P1P2P4 P1P2P5 P1P3P4 P1P3P5 P1P4P5 P2P3P4 P2P3P5 P2P4P5 P3P4P5"
FIVE_PLAYER_MINMAX = ("P1P2 P1P3 P1P4 P1P5 P2P3P4P5", "P1P2 P1P3 P1P4P5 P2P3P4 P2P3P5")


def _repro_cases() -> dict[str, tuple[dict, list[tuple[str, bool]]]]:
    """Each case: (report document, inline checks against the printed values)."""
    cases = {}

    g1 = _p(5, FOUR_SET)
    extensions = all_maximal_extensions(g1)
    ext_masks = {e.masks for e in extensions}
    default = extend_to_maximal(g1)
    alt_steps: list = []
    alt = extend_to_maximal(g1, prefer(["P2P4P5", "P1P3P5", "P1P3P4"]), alt_steps)
    back: list = []
    back_result = reduce_to_minmax(alt, pivot_order(["P1P3"]), back)
    cases["extension"] = (
        {
            "input": structure_to_dict(g1),
            "candidate_sets": [s.label for s in unauthorized_split(g1).a2],
            "extension_default": structure_to_dict(default),
            "extension_alternative": structure_to_dict(alt),
            "all_extensions": _structures(extensions),
            "alternative_reduced": structure_to_dict(back_result),
            "alternative_reduction_steps": back,
        },
        [
            ("five-set extension among all extensions", _p(5, FOUR_SET_MAXIMAL).masks in ext_masks),
            ("seven-set extension among all extensions", _p(5, FOUR_SET_MAXIMAL_ALT).masks in ext_masks),
            ("adding P1P3 gives the five-set extension", default.masks == _p(5, FOUR_SET_MAXIMAL).masks),
            ("preferred additions give the seven-set extension", alt.masks == _p(5, FOUR_SET_MAXIMAL_ALT).masks),
            ("seven-set extension reduces to the five-set one", back_result.masks == _p(5, FOUR_SET_MAXIMAL).masks),
            ("five-set extension is minimal maximal", is_minmax(default)),
        ],
    )

    g2 = _p(6, SIX_PLAYER_MAXIMAL)
    steps: list = []
    documented_steps: list = []
    result = reduce_to_minmax(g2, pivot_order(["P1P3", "P1P4"]), documented_steps)
    default_result = reduce_to_minmax(g2, None, steps)
    cases["reduction"] = (
        {
            "input": structure_to_dict(g2),
            "pivot_policy": ["P1P3", "P1P4"],
            "steps": documented_steps,
            "result": structure_to_dict(result),
            "default_policy_steps": steps,
            "default_policy_result": structure_to_dict(default_result),
            "corollary": check_corollary(g2).to_dict(),
        },
        [
            ("input is maximal with r=11", is_maximal(g2) and g2.r == 11),
            ("first step gives the 8-set structure", _first_step_matches(g2)),
            ("pivots P1P3, P1P4 reach the six-set structure", result.masks == _p(6, SIX_PLAYER_RESULT).masks),
            ("six-set structure is minimal maximal", is_minmax(result)),
            ("default policy also reaches r=n", is_minmax(default_result)),
        ],
    )

    g3 = g1
    cs = build_scheme2(g3)
    trivial = build_scheme2(g3, trivial=True)
    p1p3 = g3.playerset("P1P3").bits
    counts_ok = {s.bits for s in concat_authorized_family(cs)} == set(g3.masks)
    table = authorized_table(g3)
    cases["concatenation"] = (
        {
            "scheme": cs.to_dict(),
            "trivial_outer": {"k": trivial.outer[0], "m": trivial.outer[1]},
            "authorized_family": [s.names for s in concat_authorized_family(cs)],
            "P1P3_authorized": bool(table[p1p3]),
            "rendering": render_scheme2(cs).splitlines(),
        },
        [
            ("optimal decomposition has l=2", cs.l == 2),
            (
                "blocks are {P1P2,P1P4P5} and {P2P3P5,P2P3P4}",
                sorted(b.masks for b in cs.decomposition.blocks)
                == sorted([_p(5, "P1P2 P1P4P5").masks, _p(5, "P2P3P5 P2P3P4").masks]),
            ),
            ("outer scheme ((2,3))", cs.outer == (2, 3)),
            ("trivial decomposition uses ((4,7))", trivial.outer == (4, 7)),
            ("minimal maximal component", cs.minmax.masks == _p(5, FOUR_SET_MAXIMAL).masks),
            ("concatenation authorizes exactly the input", counts_ok),
            ("P1P3 unauthorized", not table[p1p3]),
        ],
    )

    rows = []
    checks = []
    for label, text, n, want in (
        ("5 players", FIVE_PLAYER_MAJORITY, 5, (10, 5)),
        ("6 players", SIX_PLAYER_MAXIMAL, 6, (11, 6)),
    ):
        ours, triv = resource_compare(_p(n, text))
        got = (triv.verification_count, ours.verification_count)
        rows.append({"players": n, "maximal": got[0], "minimal_maximal": got[1]})
        checks.append((f"{label}: {want[0]} vs {want[1]}", got == want))
    reduced = reduce_to_minmax(_p(5, FIVE_PLAYER_MAJORITY))
    checks.append(("5-player majority reduces to the five-set extension", reduced.masks == _p(5, FOUR_SET_MAXIMAL).masks))
    cases["verification_counts"] = ({"rows": rows}, checks)

    five = [g for g in all_maximal_structures(5) if g.r == 5 and is_minmax(g)]
    classes = isomorphism_classes(five)
    printed = {canonical_form(_p(5, t)) for t in FIVE_PLAYER_MINMAX}
    grow4 = grow_minmax(_p(3, "P1P2 P1P3 P2P3"), "P4", "P2P3")
    grow5 = grow_minmax(grow4, "P5", "P2P3P4")
    cases["five_players"] = (
        {
            "class_count": len(classes),
            "class_sizes": sorted(len(v) for v in classes.values()),
            "grow_4": structure_to_dict(grow4),
            "grow_5": structure_to_dict(grow5),
        },
        [
            ("two isomorphism classes", len(classes) == 2),
            ("classes match the two known structures", set(classes) == printed),
            ("growing to 4 players", grow4.masks == _p(4, "P1P2 P1P3 P1P4 P2P3P4").masks),
            ("growing to 5 players", grow5.masks == _p(5, FIVE_PLAYER_MINMAX[0]).masks),
        ],
    )
    return cases


def _first_step_matches(g2: AccessStructure) -> bool:
    after, _, _ = replace_step(g2, g2.playerset("P1P3").bits)
    return after.masks == _p(6, SIX_PLAYER_AFTER_FIRST).masks and is_maximal(after)


def expected_dir() -> Path:
    return Path(str(resources.files("qaskit") / "expected"))


def cmd_repro(args) -> int:
    cases = _repro_cases()
    directory = Path(args.expected) if args.expected else expected_dir()
    summary = {"operation": "repro-paper", "cases": {}}
    ok = True
    for name, (doc, checks) in cases.items():
        path = directory / f"{name}.json"
        text = dumps(doc)
        if args.update:
            directory.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        diff = _diff(json.loads(path.read_text()), json.loads(text)) if path.exists() else ["missing expected file"]
        failed = [label for label, passed in checks if not passed]
        ok = ok and not diff and not failed
        summary["cases"][name] = {
            "diff": diff,
            "checks": {label: bool(passed) for label, passed in checks},
            "passed": not diff and not failed,
        }
    summary["passed"] = ok
    _emit(args, summary)
    return EXIT_OK if ok else EXIT_FAIL


def _diff(expected, actual, path: str = "") -> list[str]:
    if isinstance(expected, dict) and isinstance(actual, dict):
        out = []
        for key in sorted(set(expected) | set(actual)):
            sub = f"{path}/{key}"
            if key not in actual:
                out.append(f"{sub}: missing")
            elif key not in expected:
                out.append(f"{sub}: unexpected")
            else:
                out.extend(_diff(expected[key], actual[key], sub))
        return out
    if expected != actual:
        return [f"{path or '/'}: expected {json.dumps(expected)} got {json.dumps(actual)}"]
    return []


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--text", action="store_true", help="plain-text rendering where available")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for simulation sweeps")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("-v", "--verbose", action="store_true")

    oracle = argparse.ArgumentParser(add_help=False)
    oracle.add_argument("--oracle", choices=["bundled", "unanimity"], default="bundled")
    oracle.add_argument("--max-weight", type=int, default=5)
    oracle.add_argument("--max-threshold", type=int, default=25)

    parser = argparse.ArgumentParser(prog="qaskit", description="Quantum access structure toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the pairwise-intersection condition")
    p.add_argument("structure")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("closure", parents=[common], help="is a player set authorized")
    p.add_argument("structure")
    p.add_argument("--set", required=True, help="comma separated players, e.g. P1,P3")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("maximalize", parents=[common], help="extend to a maximal structure")
    p.add_argument("structure")
    p.add_argument("--all", action="store_true", help="list every maximal extension (n <= 6)")
    p.add_argument("--prefer", help="sets to add first, e.g. P2P4P5,P1P3P5")
    p.set_defaults(func=cmd_maximalize)

    p = sub.add_parser("minmax", parents=[common], help="reduce to a minimal maximal structure")
    p.add_argument("structure")
    p.add_argument("--pivots", help="intersections to try first, e.g. P1P3,P1P4")
    p.set_defaults(func=cmd_minmax)

    p = sub.add_parser("grow", parents=[common], help="add a player to a minimal maximal structure")
    p.add_argument("structure")
    p.add_argument("--player", required=True)
    p.add_argument("--pivot", help="minimal set that absorbs the new player")
    p.set_defaults(func=cmd_grow)

    p = sub.add_parser("decompose", parents=[common, oracle], help="optimal decomposition")
    p.add_argument("structure")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("synth", parents=[common, oracle], help="build scheme I or II")
    p.add_argument("structure")
    p.add_argument("--scheme", choices=["1", "2"], required=True)
    p.add_argument("--trivial", action="store_true", help="one block per minimal set")
    p.add_argument("--verify", action="store_true", help="run the verification sweep")
    p.add_argument("--no-sim", action="store_true", help="skip sub-scheme simulation")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simverify", parents=[common], help="simulate a threshold scheme descriptor")
    p.add_argument("scheme")
    p.set_defaults(func=cmd_simverify)

    p = sub.add_parser("compare", parents=[common, oracle], help="optimal vs trivial decomposition")
    p.add_argument("structure")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("repro-paper", parents=[common], help="rerun the worked examples and diff")
    p.add_argument("--expected", help="directory of expected reports")
    p.add_argument("--update", action="store_true", help="rewrite the expected reports")
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
    except SizeLimitError as exc:
        print(f"error: size limit: {exc}", file=sys.stderr)
    except PivotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except StructureError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
