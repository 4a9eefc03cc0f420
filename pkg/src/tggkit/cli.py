"""Command line front end.

Exit codes: 0 success, 1 validation failure or incomplete translation,
2 usage error, 3 I/O or document format error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import documents
from .engine import Session
from .errors import ArgumentError, DocumentError, NoMatchError, StaleMatchError, ValidationError
from .graph import TripleGraph
from .rules import OperationKind
from .views import DisplayOptions, build_protocol_view, build_rule_view, render_diagram

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _emit(args, payload: dict, human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif human:
        print(human)


def _violations_payload(violations) -> list[dict]:
    return [
        {"code": v.code, "elementIds": list(v.element_ids), "message": v.message}
        for v in violations
    ]


def _open_session(grammar, kind: OperationKind, input_triple: TripleGraph, seed: int) -> Session:
    try:
        return Session.create(grammar, kind, input_triple, seed)
    except ArgumentError as exc:
        # bad input content is a consistency failure, not a usage error
        raise ValidationError(str(exc)) from exc


def cmd_validate(args) -> int:
    try:
        grammar = documents.load_path(args.ruleset, expected_kind="RULESET")
    except ValidationError as exc:
        _emit(
            args,
            {"ok": False, "violations": _violations_payload(exc.violations)},
            "",
        )
        if not args.json:
            for violation in exc.violations:
                print(f"{violation.code} {list(violation.element_ids)}: {violation.message}", file=sys.stderr)
        return EXIT_VALIDATION
    _emit(
        args,
        {"ok": True, "rules": list(grammar.rule_names), "violations": []},
        f"OK: {len(grammar.rules)} rules, no violations",
    )
    return EXIT_OK


def _run(args, kind: OperationKind) -> int:
    grammar = documents.load_path(args.ruleset, expected_kind="RULESET")
    if kind is OperationKind.GEN:
        input_triple = TripleGraph.empty()
    else:
        input_triple = documents.load_path(args.input, expected_kind="TRIPLE", metamodel=grammar.metamodel)
    session = _open_session(grammar, kind, input_triple, args.seed)
    package = session.run_background(args.max_steps)
    documents.save_path(session.triple, args.out)
    if args.protocol:
        record = documents.ProtocolRecord(kind, session.initial_triple, tuple(session.protocol))
        documents.save_path(record, args.protocol)

    untranslated = session.untranslated_element_ids()
    payload = {
        "ok": not untranslated,
        "steps": package.protocol_length,
        "haltReason": package.halt_reason.value if package.halt_reason else None,
        "untranslated": list(untranslated),
        "warnings": list(package.warnings),
    }
    halt = package.halt_reason.value if package.halt_reason else "?"
    if untranslated:
        _emit(args, payload, "")
        if not args.json:
            print(
                f"INCOMPLETE: {len(untranslated)} element(s) untranslated after {package.protocol_length} steps: "
                + ", ".join(untranslated),
                file=sys.stderr,
            )
        return EXIT_VALIDATION
    _emit(args, payload, f"{halt} after {package.protocol_length} steps -> {args.out}")
    return EXIT_OK


def cmd_gen(args) -> int:
    return _run(args, OperationKind.GEN)


def cmd_fwd(args) -> int:
    return _run(args, OperationKind.FWD)


def cmd_bwd(args) -> int:
    return _run(args, OperationKind.BWD)


def cmd_replay(args) -> int:
    from .engine import replay

    grammar = documents.load_path(args.ruleset, expected_kind="RULESET")
    record = documents.load_path(args.protocol, expected_kind="PROTOCOL")
    if not 0 <= args.at < len(record.applications):
        raise ArgumentError(f"--at must be in 0..{len(record.applications) - 1}")
    triple, _ = replay(grammar, record.kind, record.initial, record.applications, upto=args.at + 1)
    documents.save_path(triple, args.out)
    _emit(
        args,
        {"ok": True, "at": args.at, "elements": sum(triple.counts())},
        f"state after step {args.at} -> {args.out}",
    )
    return EXIT_OK


def _parse_selection(spec: str) -> list[int]:
    steps: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, _, hi = part.partition("..")
            try:
                steps.extend(range(int(lo), int(hi) + 1))
            except ValueError:
                raise ArgumentError(f"bad selection {spec!r}") from None
        else:
            try:
                steps.append(int(part))
            except ValueError:
                raise ArgumentError(f"bad selection {spec!r}") from None
    return steps


def cmd_diagram(args) -> int:
    grammar = documents.load_path(args.ruleset, expected_kind="RULESET")
    options = DisplayOptions()
    if args.options:
        with open(args.options, "rb") as handle:
            try:
                raw = json.load(handle)
            except json.JSONDecodeError as exc:
                raise DocumentError("PARSE", "$", f"invalid JSON in options file: {exc.msg}") from None
        options = DisplayOptions.from_dict(raw)

    if args.rule:
        try:
            rule = grammar.rule(args.rule)
        except KeyError:
            raise ArgumentError(f"unknown rule {args.rule!r}") from None
        view = build_rule_view(rule, options)
    else:
        record = documents.load_path(args.protocol, expected_kind="PROTOCOL")
        selection = _parse_selection(args.select)
        view = build_protocol_view(
            grammar, record.kind, record.initial, record.applications, selection, options
        )
    text = render_diagram(view, args.format)
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    print(f"{args.format} diagram -> {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import run_server

    grammar = documents.load_path(args.ruleset, expected_kind="RULESET")
    kind = OperationKind(args.mode.upper())
    if kind is OperationKind.GEN:
        input_triple = TripleGraph.empty()
    else:
        if not args.input:
            raise ArgumentError(f"--input is required for mode {args.mode}")
        input_triple = documents.load_path(args.input, expected_kind="TRIPLE", metamodel=grammar.metamodel)
    # fail early if the session cannot even be created
    _open_session(grammar, kind, input_triple, args.seed)
    run_server(grammar, kind, input_triple, args.seed, args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgg", description="Triple graph grammar engine and debugger")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a ruleset document")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="generate a random consistent triple")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-steps", type=int, required=True, dest="max_steps")
    p.add_argument("--out", required=True)
    p.add_argument("--protocol")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gen)

    for name, func in (("fwd", cmd_fwd), ("bwd", cmd_bwd)):
        p = sub.add_parser(name, help=f"run the {name} transformation to exhaustion")
        p.add_argument("--ruleset", required=True)
        p.add_argument("--input", required=True)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--max-steps", type=int, default=100000, dest="max_steps")
        p.add_argument("--out", required=True)
        p.add_argument("--protocol")
        p.add_argument("--json", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("replay", help="re-execute a protocol prefix")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--protocol", required=True)
    p.add_argument("--at", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("diagram", help="render a rule or protocol view")
    p.add_argument("--ruleset", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--rule")
    group.add_argument("--protocol")
    p.add_argument("--select", help="protocol steps, e.g. 0..2 or 0,3,5")
    p.add_argument("--options", help="display options JSON file")
    p.add_argument("--format", choices=("puml", "dot"), default="puml")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("serve", help="serve one debugging session over a socket")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--mode", choices=("gen", "fwd", "bwd"), required=True)
    p.add_argument("--input")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "diagram" and args.protocol and not args.select:
        parser.error("--select is required with --protocol")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for violation in exc.violations:
            print(f"  {violation.code} {list(violation.element_ids)}: {violation.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StaleMatchError, NoMatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
