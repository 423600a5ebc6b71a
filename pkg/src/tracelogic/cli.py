"""Command-line driver: ``tracelogic verify | parse | fixtures``."""
from __future__ import annotations

import argparse
import json
import sys

from . import fixtures
from .dsl import SpecError, parse, render_spec
from .engine import SearchOptions, search
from .render import format_text, report

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAPPED = 0, 1, 2, 3

# options a spec file may set in its `options { }` block
_FILE_OPTIONS = {"all": bool, "max_states": int, "order": str, "eager_replies": bool}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tracelogic", description="Verify protocol roles against attached trace formulas.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="search for runs that violate an attached formula")
    v.add_argument("file", nargs="?", help="specification (.tlp)")
    v.add_argument("--fixture", help="use a bundled fixture instead of a file")
    v.add_argument("--all", action="store_true", default=None, help="report every violation (default: stop at the first)")
    v.add_argument("--max-states", type=int, help="give up after exploring this many states")
    v.add_argument("--seed-order", choices=("input", "lex"), help="branch ordering (both deterministic)")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--quiet", action="store_true", help="print only the verdict")
    v.add_argument("--jobs", type=int, default=1, help="worker processes for --all (report is identical)")
    v.add_argument("--interleave-all", action="store_true",
                   help="also interleave other roles between a receive and the reply it triggers")

    ps = sub.add_parser("parse", help="check a specification and print it normalized")
    ps.add_argument("file")

    sub.add_parser("fixtures", help="list bundled fixtures")
    return p


def _load(args):
    if args.fixture and args.file:
        raise SystemExit("give either a file or --fixture, not both")
    if args.fixture:
        if args.fixture not in fixtures.NAMES:
            raise SystemExit(f"unknown fixture {args.fixture!r}; valid names: {', '.join(fixtures.NAMES)}")
        return args.fixture, fixtures.source(args.fixture), "<" + args.fixture + ">"
    if not args.file:
        raise SystemExit("verify needs a file or --fixture")
    with open(args.file, encoding="utf-8") as fh:
        return args.file, fh.read(), args.file


def _options(spec, args) -> dict:
    opts = {"all": False, "max_states": None, "order": "input", "eager_replies": True}
    for key, value in spec.options:
        if key not in _FILE_OPTIONS:
            raise SystemExit(f"unknown option {key!r} in options block")
        if not isinstance(value, _FILE_OPTIONS[key]):
            raise SystemExit(f"option {key!r} expects a {_FILE_OPTIONS[key].__name__}")
        opts[key] = value
    if args.all is not None:
        opts["all"] = True
    if args.max_states is not None:
        opts["max_states"] = args.max_states
    if args.seed_order is not None:
        opts["order"] = args.seed_order
    if args.interleave_all:
        opts["eager_replies"] = False
    if opts["order"] not in ("input", "lex"):
        raise SystemExit(f"order must be 'input' or 'lex', got {opts['order']!r}")
    return opts


def _verify(args) -> int:
    name, text, origin = _load(args)
    try:
        spec = parse(text)
    except SpecError as exc:
        print(f"{origin}:{exc}", file=sys.stderr)
        return EXIT_USAGE
    opts = _options(spec, args)
    if args.jobs < 1:
        raise SystemExit("--jobs must be at least 1")
    result = search(spec.scenario(), SearchOptions(
        stop_at_first=not opts["all"], max_states=opts["max_states"], order=opts["order"],
        jobs=args.jobs, eager_replies=opts["eager_replies"]))
    if args.format == "json":
        print(json.dumps(report(result, name, opts), indent=2, ensure_ascii=False, sort_keys=True))
    else:
        print(format_text(result, name, quiet=args.quiet))
    if result.violations:
        return EXIT_VIOLATION
    return EXIT_CAPPED if result.status == "capped" else EXIT_OK


def _parse(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    try:
        spec = parse(text)
    except SpecError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render_spec(spec))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "parse":
            return _parse(args)
        for name, desc in fixtures.list_fixtures():
            print(f"{name:16} {desc}")
        return EXIT_OK
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(f"tracelogic: {exc.code}", file=sys.stderr)
            return EXIT_USAGE
        raise
    except OSError as exc:
        print(f"tracelogic: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
