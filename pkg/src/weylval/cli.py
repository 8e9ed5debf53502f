"""Command-line front end.

Every subcommand prints one JSON report on standard output and a short
human-readable summary on standard error.  Exit code 0 means success, 1 a
domain failure (reported as a structured error object) or a check that found
violations, 2 a usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .coeff import format_rat
from .descriptor import OmegaDescriptor, validate
from .errors import ParseError, WeylvalError
from .evaluate import (
    eval_element,
    residue,
    sample_element,
    shadow_eval,
    strongly_abelian_sample,
)
from .expr import parse_expr
from .extension import check_extendable, omega_to_z, resolve_gammas, roundtrip_check
from .orderings import enumerate_orderings, extend_ordering, sign
from .valuegroup import cmp as value_cmp, value_to_json

Outcome = Tuple[dict, str, bool]


def _load_descriptor(path: str) -> OmegaDescriptor:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read descriptor file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None
    return OmegaDescriptor.from_json(data)


def _sign_choice(args: argparse.Namespace) -> Optional[int]:
    return int(args.sign_choice) if args.sign_choice is not None else None


def _depth(args: argparse.Namespace, fallback: int = 64) -> int:
    return args.depth if args.depth is not None else fallback


def _cmd_validate(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    violations = validate(desc, prefix_depth=_depth(args, 8))
    report = {
        "violations": [{"rule": v.rule, "detail": v.detail} for v in violations]
    }
    if violations:
        return report, f"invalid: {len(violations)} violation(s)", False
    return report, "valid", True


def _cmd_eval(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    element = parse_expr(args.expr)
    value = eval_element(desc, element, _depth(args))
    return {"value": value_to_json(value)}, f"value: {value}", True


def _cmd_residue(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    element = parse_expr(args.expr)
    res = residue(desc, element, _depth(args))
    return {"residue": format_rat(res)}, f"residue: {format_rat(res)}", True


def _cmd_sign(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    element = parse_expr(args.expr)
    entries = []
    for ordering in enumerate_orderings(desc):
        s = sign(desc, ordering, element, _depth(args))
        entries.append({"ordering": ordering.to_json(), "sign": s})
    summary = ", ".join(f"{e['sign']:+d}" for e in entries)
    return {"signs": entries}, f"signs per ordering: {summary}", True


def _cmd_orderings(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    orderings = enumerate_orderings(desc)
    report = {
        "count": len(orderings),
        "orderings": [o.to_json() for o in orderings],
    }
    return report, f"{len(orderings)} compatible ordering(s)", True


def _cmd_extend_check(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    violation = check_extendable(desc)
    if violation is not None:
        report = {"extendable": False, "violation": violation.to_json()}
        return report, f"not extendable: {violation.detail}", False
    entries = []
    for ordering in enumerate_orderings(desc):
        entry: dict = {"ordering": ordering.to_json()}
        try:
            result = extend_ordering(desc, ordering, _depth(args))
        except WeylvalError as exc:
            entry["extendable"] = False
            entry["reason"] = str(exc)
        else:
            entry["extendable"] = True
            entry["sign_choice"] = result.sign_choice
            entry["extension"] = result.ordering.to_json()
        entries.append(entry)
    report = {"extendable": True, "orderings": entries}
    extended = sum(1 for e in entries if e["extendable"])
    return report, f"extendable; {extended}/{len(entries)} ordering(s) extend", True


def _cmd_convert(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    res = resolve_gammas(desc, _sign_choice(args))
    zseq = omega_to_z(desc, res, _depth(args))
    report = {"gammas": res.to_json(), "z_sequence": zseq.to_json()}
    tail = "terminal" if zseq.terminal else ("rule" if zseq.rule else "none")
    summary = f"{len(zseq.explicit_entries)} entries emitted, tail: {tail}"
    return report, summary, True


def _cmd_roundtrip(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    res = resolve_gammas(desc, _sign_choice(args))
    rng = random.Random(args.seed)
    samples = [sample_element(rng, max_degree=6) for _ in range(args.trials)]
    report = roundtrip_check(desc, res, samples, depth_limit=_depth(args))
    summary = (
        "round trip agreed on all samples"
        if report.ok
        else f"{len(report.mismatches)} mismatch(es)"
    )
    return report.to_json(), summary, report.ok


def _cmd_sample_strongly_abelian(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    report = strongly_abelian_sample(
        desc, args.seed, args.trials, depth_limit=_depth(args)
    )
    summary = (
        "no violations"
        if report.ok
        else f"{len(report.violations)} violation(s)"
    )
    return report.to_json(), summary, report.ok


def _cmd_shadow_compare(args: argparse.Namespace) -> Outcome:
    desc = _load_descriptor(args.desc)
    rng = random.Random(args.seed)
    disagreements: List[dict] = []
    for _ in range(args.trials):
        element = sample_element(rng, max_degree=6)
        main_value = eval_element(desc, element, _depth(args))
        shadow_value = shadow_eval(desc, element, _depth(args))
        if value_cmp(main_value, shadow_value) != 0:
            disagreements.append(
                {
                    "element": str(element),
                    "main": value_to_json(main_value),
                    "shadow": value_to_json(shadow_value),
                }
            )
    report = {"trials": args.trials, "disagreements": disagreements}
    summary = (
        "main and shadow evaluation agree"
        if not disagreements
        else f"{len(disagreements)} disagreement(s)"
    )
    return report, summary, not disagreements


_HANDLERS: Dict[str, Callable[[argparse.Namespace], Outcome]] = {
    "validate": _cmd_validate,
    "eval": _cmd_eval,
    "residue": _cmd_residue,
    "sign": _cmd_sign,
    "orderings": _cmd_orderings,
    "extend-check": _cmd_extend_check,
    "convert": _cmd_convert,
    "roundtrip": _cmd_roundtrip,
    "sample-strongly-abelian": _cmd_sample_strongly_abelian,
    "shadow-compare": _cmd_shadow_compare,
}


def _build_parser() -> argparse.ArgumentParser:
    desc_flags = argparse.ArgumentParser(add_help=False)
    desc_flags.add_argument(
        "--desc", required=True, metavar="FILE", help="descriptor JSON file"
    )
    desc_flags.add_argument(
        "--depth", type=int, default=None, help="expansion depth limit (default 64)"
    )
    expr_flags = argparse.ArgumentParser(add_help=False)
    expr_flags.add_argument(
        "--expr", required=True, help='element expression, e.g. "x^2*y^4 - 1"'
    )
    sample_flags = argparse.ArgumentParser(add_help=False)
    sample_flags.add_argument(
        "--trials", type=int, default=500, help="number of samples (default 500)"
    )
    sample_flags.add_argument(
        "--seed", type=int, default=0, help="RNG seed (default 0)"
    )
    choice_flags = argparse.ArgumentParser(add_help=False)
    choice_flags.add_argument(
        "--sign-choice",
        choices=("+1", "-1"),
        help="sign of the free root in the non-2-divisible case",
    )

    parser = argparse.ArgumentParser(
        prog="weylval",
        description="Exact valuations on the Weyl algebra and their extensions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(
        "validate", parents=[desc_flags], help="check descriptor well-formedness"
    )
    sub.add_parser(
        "eval", parents=[desc_flags, expr_flags], help="value of an element"
    )
    sub.add_parser(
        "residue", parents=[desc_flags, expr_flags], help="residue of a value-0 element"
    )
    sub.add_parser(
        "sign",
        parents=[desc_flags, expr_flags],
        help="sign of an element under every compatible ordering",
    )
    sub.add_parser(
        "orderings", parents=[desc_flags], help="enumerate compatible orderings"
    )
    sub.add_parser(
        "extend-check",
        parents=[desc_flags],
        help="extendability of the valuation and of each ordering",
    )
    sub.add_parser(
        "convert",
        parents=[desc_flags, choice_flags],
        help="convert the tower to its z-sequence",
    )
    sub.add_parser(
        "roundtrip",
        parents=[desc_flags, sample_flags, choice_flags],
        help="compare direct evaluation against the converted z-sequence",
    )
    sub.add_parser(
        "sample-strongly-abelian",
        parents=[desc_flags, sample_flags],
        help="sample the commutator value inequality",
    )
    sub.add_parser(
        "shadow-compare",
        parents=[desc_flags, sample_flags],
        help="compare the main evaluator against the commutative shadow",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = _HANDLERS[args.command]
    try:
        report, summary, ok = handler(args)
    except WeylvalError as exc:
        print(json.dumps({"error": exc.payload()}, indent=2))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2))
    print(summary, file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
