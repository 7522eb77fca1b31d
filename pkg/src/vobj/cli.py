"""Command-line entry point: ``vobj parse|expand|bench|demo``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import bench, corpus
from .compiler import compile_class
from .dsl import parse_classes
from .errors import VobjError
from .expand import expand
from .registry import Registry
from .value import Value, to_text


def _json_default(o):
    if isinstance(o, Value):
        return to_text(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_parse(args) -> int:
    decls = parse_classes(_read(args.file))
    out = [dataclasses.asdict(d) for d in decls]
    print(json.dumps(out, indent=2, default=_json_default))
    return 0


def cmd_expand(args) -> int:
    r = Registry()
    chunks = []
    for decl in parse_classes(_read(args.file)):
        chunks.append(expand(decl, r))
        compile_class(decl, r)
    sys.stdout.write("\n".join(chunks))
    return 0


def _split(values):
    out = []
    for v in values or ():
        out.extend(p for p in v.split(",") if p)
    return out


def cmd_bench(args) -> int:
    suites = _split(args.suites) or list(bench.SUITES)
    frameworks = _split(args.frameworks) or list(bench.DEFAULT_FRAMEWORKS)
    results = bench.run_suite(suites, frameworks, args.iterations, bulk=args.bulk)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            bench.emit_report(results, args.format, fh)
        print(f"wrote {len(results)} results to {args.out}", file=sys.stderr)
    else:
        bench.emit_report(results, args.format, sys.stdout)
    return 0


def cmd_demo(args) -> int:
    r = Registry()
    corpus.load(r, "person", "shapes")
    call = r.call
    p1 = call("Person::new", "Alice", 30, 75000.0)
    p2 = call("Person::new()")
    p3 = call("Person::new.args", "-name", "Bob", "-age", 35)
    print(f"p1 = {p1}")
    print(f"p2 = {p2}")
    print(f"p3 = {p3}")
    print(call("Person::greet", p1))

    # variables are the counted holders; copying one shares the list
    env = r.globals
    env.set("p1", p1)
    env.set("copy", env.get("p1"))
    call("Person::set.age", "copy", 31)
    print(f"after set.age on a copy: p1 = {env.get('p1')}, copy = {env.get('copy')}")

    s = call("Circle::new", 5.0)
    print(f"s = {s}")
    print(f"Shape::area $s -> {call('Shape::area', s)}")
    cc = call("ColoredCircle::new", 5.0, "blue")
    print(f"cc = {cc}")
    print(f"Shape::area $cc -> {call('Shape::area', cc)} "
          f"(Circle::base.area = {call('Circle::base.area', cc)})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vobj", description="Value-semantics objects on lists.")
    sub = ap.add_subparsers(dest="command", metavar="{parse,expand,bench,demo}")
    sub.required = True

    p = sub.add_parser("parse", help="dump parsed class declarations as JSON")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("expand", help="print the generated commands for each class")
    p.add_argument("file")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("bench", help="run the benchmark suites")
    p.add_argument("--suites", action="append",
                   help=f"comma-separated subset of {','.join(bench.SUITES)}")
    p.add_argument("--frameworks", action="append",
                   help=f"comma-separated subset of {','.join(bench.FRAMEWORKS)}")
    p.add_argument("--iterations", type=int, default=bench.DEFAULT_ITERATIONS)
    p.add_argument("--bulk", type=int, default=None,
                   help="also create this many objects per framework and report bytes")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of standard output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("demo", help="run the Person and Shape walkthrough")
    p.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # usage errors and --help
        return e.code if isinstance(e.code, int) else 2
    try:
        return args.func(args)
    except (VobjError, OSError, ValueError) as e:
        print(f"vobj {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
