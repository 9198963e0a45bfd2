"""Command-line front end.

Exit codes: 0 when a result was computed (whatever it says), 1 for input or
parse errors, 2 when a resource budget was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from svrunify.budget import Budget, ResourceExceeded
from svrunify.syntax import ParseError, parse_term, print_term, signature

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    variety: str | None = None
    budget: Budget = field(default_factory=Budget)
    output: str = "human"

    def __post_init__(self):
        if self.output not in ("human", "json"):
            raise ValueError(f"unknown output format {self.output!r}")
        if self.variety is not None:
            signature(self.variety)
        bad = [k for k, v in self.budget.as_dict().items() if isinstance(v, int) and v <= 0]
        if bad:
            raise ValueError(f"budgets must be positive: {', '.join(bad)}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        defaults = Budget()
        budget = Budget(
            max_algebra_size=args.max_algebra_size or defaults.max_algebra_size,
            max_candidates=args.max_candidates or defaults.max_candidates,
            max_congruences=args.max_congruences or defaults.max_congruences,
            max_fresh_vars=args.max_fresh_vars or defaults.max_fresh_vars,
            isl_kripke_bound=defaults.isl_kripke_bound,
            nis_model_bound=args.nis_model_bound or defaults.nis_model_bound,
        )
        return cls(args.variety, budget, "json" if args.json else "human")


class InputError(ValueError):
    pass


def _load_json(arg: str) -> Any:
    """Inline JSON, '-' for stdin, or a file path."""
    text = arg
    if arg == "-":
        text = sys.stdin.read()
    elif not arg.lstrip().startswith(("{", "[")):
        path = Path(arg)
        if not path.exists():
            raise InputError(f"no such file: {arg}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _variety(cfg: RunConfig, data: dict | None = None) -> str:
    v = cfg.variety or (data or {}).get("variety")
    if v is None:
        raise InputError("no variety given (use --variety)")
    return v


# ------------------------------------------------------------------ commands


def cmd_validity(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.varieties import engine_note, valid

    sig = signature(_variety(cfg))
    t = parse_term(args.formula, sig)
    ok = valid(sig, t, cfg.budget)
    rep = {"formula": print_term(t), "variety": sig.tag, "valid": ok, "engine": engine_note(sig, cfg.budget)}
    return rep, f"{'valid' if ok else 'not valid'} in {sig.tag.upper()}: {print_term(t)}"


def cmd_entails(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.varieties import engine_note, entails

    sig = signature(_variety(cfg))
    if not args.formulas:
        raise InputError("entails needs at least a conclusion")
    *prem, goal = [parse_term(f, sig) for f in args.formulas]
    ok = entails(sig, prem, goal, cfg.budget)
    rep = {
        "premises": [print_term(p) for p in prem],
        "conclusion": print_term(goal),
        "variety": sig.tag,
        "entails": ok,
        "engine": engine_note(sig, cfg.budget),
    }
    arrow = "|-" if ok else "|/-"
    return rep, f"{', '.join(rep['premises'])} {arrow} {rep['conclusion']}"


def _problem(args, cfg):
    from svrunify.unification import UnificationProblem

    data = _load_json(args.problem)
    return UnificationProblem.from_json(data, cfg.variety)


def _basis_text(basis) -> str:
    if not basis.unifiers:
        return f"NOT_UNIFIABLE ({basis.certificate})"
    lines = [f"basis of {len(basis.unifiers)} unifier(s) [{basis.certificate}]"]
    lines += [f"  {s}" for s in basis.unifiers]
    lines += [f"  note: {n}" for n in basis.notes]
    return "\n".join(lines)


def cmd_unify(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.unification import unify

    p = _problem(args, cfg)
    if p.restriction:
        raise InputError("problem has a restriction; use svr-unify")
    basis = unify(p, cfg.budget)
    return _basis_report(basis), _basis_text(basis)


def _basis_report(basis) -> dict:
    return {"verdict": "UNIFIABLE" if basis.unifiers else "NOT_UNIFIABLE", **basis.to_json()}


def cmd_svr_unify(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.unification import svr_unify

    p = _problem(args, cfg)
    factors = None
    if args.factorization:
        factors = [[parse_term(t, p.sig) for t in f] for f in _load_json(args.factorization)]
    basis = svr_unify(p, cfg.budget, factors)
    return _basis_report(basis), _basis_text(basis)


def cmd_factorize(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.interpolation import forall_factorize

    sig = signature(_variety(cfg))
    delta = [parse_term(f, sig) for f in args.formulas]
    fz = forall_factorize(delta, args.bound or (), sig, cfg.budget, free=args.free)
    text = [f"{len(fz.factors)} factor(s) [{fz.method}]"] + [f"  {f}" for f in fz.factors]
    return fz.to_json(), "\n".join(text)


def cmd_admissible(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.admissibility import check_admissible, rule_from_json

    data = _load_json(args.rule)
    if cfg.variety:
        data = {**data, "variety": cfg.variety}
    rule, factors = rule_from_json(data)
    v = check_admissible(rule, cfg.budget, factors)
    rep = {"rule": str(rule), **v.to_json()}
    text = [f"{v.verdict} [{v.path}]: {rule}"]
    if v.witness is not None:
        text.append(f"  witness: {v.witness}")
    text += [f"  note: {n}" for n in v.notes]
    return rep, "\n".join(text)


def _sposet(arg):
    from svrunify.sposet import SPoset

    return SPoset.from_json(_load_json(arg))


def cmd_sposet(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.syntax import NUC
    from svrunify.sposet import (
        PartialMap,
        build_retract,
        dual_algebra,
        is_morphism,
        projectivity,
    )

    if args.action == "check-morphism":
        x, y = _sposet(args.source), _sposet(args.target)
        f = PartialMap.from_json(x, y, _load_json(args.map))
        r = is_morphism(f)
        rep = {"morphism": r.ok, "violated": r.condition, "detail": r.detail}
        return rep, "morphism" if r.ok else f"not a morphism: condition ({r.condition}) {r.detail}"
    if args.action == "projective":
        x = _sposet(args.source)
        r = projectivity(x)
        rep = {"projective": r.projective, "uncovered": None if r.uncovered is None else x.subset(r.uncovered)}
        return rep, "projective" if r else f"not projective: antichain {rep['uncovered']} has no cover"
    if args.action == "retract":
        x, y = _sposet(args.source), _sposet(args.target)
        e = PartialMap.from_json(x, y, _load_json(args.map))
        r = build_retract(e)
        return {"retract": r.to_json()}, json.dumps(r.to_json())
    if args.action == "dual":
        x = _sposet(args.source)
        a = dual_algebra(x)
        ups = x.poset.upsets()
        elements = [x.subset(u) for u in ups]
        rep = {
            "size": a.size,
            "elements": elements,
            "nucleus": {json.dumps(elements[i]): elements[int(a.tables[NUC][i])] for i in range(a.size)},
        }
        lines = [f"{a.size} up-sets"] + [f"  l{elements[i]} = {elements[int(a.tables[NUC][i])]}" for i in range(a.size)]
        return rep, "\n".join(lines)
    raise InputError(f"unknown sposet action {args.action}")


def cmd_fixtures(args, cfg: RunConfig) -> tuple[dict, str]:
    from svrunify.fixtures import compute_fixtures, diff_fixtures, load_fixtures, write_fixtures

    current = compute_fixtures(full=args.full)
    if args.write:
        path = write_fixtures(current, args.path)
        return {"written": str(path), "fixtures": current}, f"wrote {path}"
    stored = load_fixtures(args.path)
    diffs = diff_fixtures(stored, current)
    rep = {"match": not diffs, "differences": diffs, "fixtures": current}
    text = "fixtures match" if not diffs else "fixtures differ:\n" + "\n".join(f"  {d}" for d in diffs)
    return rep, text


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--variety", choices=["isl", "lc", "nis"])
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-algebra-size", type=int)
    common.add_argument("--max-candidates", type=int)
    common.add_argument("--max-congruences", type=int)
    common.add_argument("--max-fresh-vars", type=int)
    common.add_argument("--nis-model-bound", type=int)

    ap = argparse.ArgumentParser(prog="svrunify", description="Admissibility and restricted unification in ISL, LC, NIS")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validity", parents=[common], help="decide validity of a formula")
    p.add_argument("formula")
    p.set_defaults(func=cmd_validity)

    p = sub.add_parser("entails", parents=[common], help="premises... conclusion")
    p.add_argument("formulas", nargs="+")
    p.set_defaults(func=cmd_entails)

    p = sub.add_parser("unify", parents=[common], help="unification basis of a problem")
    p.add_argument("problem", help="JSON file, inline JSON or -")
    p.set_defaults(func=cmd_unify)

    p = sub.add_parser("svr-unify", parents=[common], help="basis for a problem with restricted variables")
    p.add_argument("problem")
    p.add_argument("--factorization", help="JSON list of factor formula lists")
    p.set_defaults(func=cmd_svr_unify)

    p = sub.add_parser("factorize", parents=[common], help="forall-factorization of formulas")
    p.add_argument("formulas", nargs="+")
    p.add_argument("--bound", nargs="*", default=[])
    p.add_argument("--free", nargs="*")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("admissible", parents=[common], help="decide admissibility of a rule")
    p.add_argument("rule")
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("sposet", parents=[common], help="S-poset utilities")
    p.add_argument("action", choices=["check-morphism", "projective", "retract", "dual"])
    p.add_argument("source")
    p.add_argument("target", nargs="?")
    p.add_argument("map", nargs="?")
    p.set_defaults(func=cmd_sposet)

    p = sub.add_parser("fixtures", parents=[common], help="recompute golden values and diff")
    p.add_argument("--write", action="store_true")
    p.add_argument("--full", action="store_true", help="also re-run the slow carrier-overflow checks")
    p.add_argument("--path")
    p.set_defaults(func=cmd_fixtures)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = RunConfig.from_args(args)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    echo = {"command": args.command, "argv": list(argv) if argv is not None else sys.argv[1:], "budget": cfg.budget.as_dict()}
    try:
        if args.command == "sposet" and args.action in ("check-morphism", "retract") and not (args.target and args.map):
            raise InputError(f"sposet {args.action} needs SOURCE TARGET MAP")
        report, text = args.func(args, cfg)
        code = EXIT_OK
        if report.get("verdict") == "UNDECIDED_RESOURCE":
            code = EXIT_RESOURCE
    except ResourceExceeded as exc:
        report, text, code = {"error": "RESOURCE_EXCEEDED", "message": str(exc)}, f"RESOURCE_EXCEEDED: {exc}", EXIT_RESOURCE
    except ParseError as exc:
        report = {"error": "PARSE_ERROR", "message": str(exc), "position": exc.position}
        text, code = f"parse error: {exc}", EXIT_INPUT
    except (InputError, ValueError, KeyError, TypeError) as exc:
        report, text, code = {"error": "INPUT_ERROR", "message": str(exc)}, f"input error: {exc}", EXIT_INPUT
    if cfg.output == "json":
        print(json.dumps({**echo, **report}, indent=2, default=str))
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
