"""Command-line interface: ``contract-diag {compose,diagnose,status,gen}``.

Exit codes: 0 success (or nothing to diagnose), 1 diagnosis found faulty
components, 2 bad input.  Errors are printed to stderr as one line,
``error: <Kind>: <message>``.  Set ``CONTRACT_DIAG_COLOR=0`` to turn off
ANSI colors; otherwise they are used when stdout is a terminal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import yaml

from .contract import Status
from .diagnostics import Diagnoser, component_statuses
from .errors import (
    ContractDiagError,
    DiagnosisError,
    NoViolationError,
)
from .harness import gen_system, inject_fault
from .ids import TermId
from .sysio import (
    ComponentSpec,
    SystemSpec,
    dump_spec,
    export_dot,
    load_log,
    load_spec,
    missing_variables,
    render_report,
)

EXIT_OK = 0
EXIT_FAULTS = 1
EXIT_INPUT = 2

_STATUS_STYLE = {Status.ACTIVE: "\033[32m", Status.FAIL: "\033[31m", Status.IDLE: "\033[33m"}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors already; keep its one-line form
    def error(self, message):
        self.exit(EXIT_INPUT, f"error: UsageError: {message}\n")


def use_color(stream=sys.stdout):
    if os.environ.get("CONTRACT_DIAG_COLOR") == "0":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _fail(kind, msg):
    print(f"error: {kind}: {' '.join(str(msg).split())}", file=sys.stderr)
    return EXIT_INPUT


def _system_as_spec(spec, system):
    comp = ComponentSpec(
        system.name,
        sorted(system.inputs),
        sorted(system.outputs),
        [str(t) for _, t in system.assumptions],
        [str(t) for _, t in system.guarantees],
    )
    return SystemSpec(spec.theory, [comp], [comp.name])


def cmd_compose(args):
    spec = load_spec(args.spec)
    order = spec.order()
    dx = Diagnoser(order)
    system = dx.system
    print(f"system {system.name} ({len(order)} components, theory {spec.theory})")
    print(f"inputs:  {', '.join(sorted(system.inputs))}")
    print(f"outputs: {', '.join(sorted(system.outputs))}")
    print(f"assumptions ({len(system.assumptions)}):")
    for tid, t in system.assumptions:
        print(f"  {tid}: {t}")
    print(f"guarantees ({len(system.guarantees)}):")
    for tid, t in system.guarantees:
        print(f"  {tid}: {t}")
    print(f"component-level terms: {order.terms_total}")
    print(f"diagnostics graph: {len(dx.graph.vertices)} vertices, {len(dx.graph.edges)} edges")
    if args.out:
        dump_spec(_system_as_spec(spec, system), args.out)
    if args.dot:
        text = export_dot(dx.graph)
        if args.dot == "-":
            sys.stdout.write(text)
        else:
            Path(args.dot).write_text(text, encoding="utf-8")
    return EXIT_OK


def _resolve_guarantee(text, system):
    if text == "all":
        return None
    ids = {tid for tid, _ in system.guarantees}
    try:
        tid = TermId.parse(text) if "." in text else TermId.parse(f"{system.name}.{text}")
    except ValueError as exc:
        raise DiagnosisError(str(exc)) from None
    if tid not in ids:
        raise DiagnosisError(f"{text} is not a guarantee of the system contract {system.name}")
    return [tid]


def cmd_diagnose(args):
    spec = load_spec(args.spec)
    log = load_log(args.log, spec)
    missing = missing_variables(spec, log)
    if missing:
        shown = ", ".join(missing[:8]) + (", ..." if len(missing) > 8 else "")
        raise DiagnosisError(
            f"log is incomplete, {len(missing)} variable(s) have no value ({shown}); "
            "diagnosis needs every component-level variable"
        )
    dx = Diagnoser(spec.order())
    targets = _resolve_guarantee(args.guarantee, dx.system)
    try:
        report = dx.diagnose_all(log, targets)
    except NoViolationError as exc:
        if args.format == "json":
            print(json.dumps({"faulty_components": [], "message": str(exc)}, sort_keys=True))
        else:
            print(str(exc))
        return EXIT_OK
    sys.stdout.write(render_report(report, args.format, color=use_color() and args.format == "text"))
    return EXIT_FAULTS if report.faulty_components else EXIT_OK


def cmd_status(args):
    spec = load_spec(args.spec)
    log = load_log(args.log, spec)
    order = spec.order()
    names = order.names
    if args.component:
        by_label = {order.label(n): n for n in names}
        if args.component in names:
            names = [args.component]
        elif args.component in by_label:
            names = [by_label[args.component]]
        else:
            raise DiagnosisError(f"unknown component {args.component!r}")
    color = use_color()
    width = max(len(n) for n in names)
    statuses = component_statuses(order, log)
    for n in names:
        st, terms = statuses[n]
        shown = f"{_STATUS_STYLE[st]}{st}\033[0m" if color else str(st)
        extra = f"  {', '.join(str(t) for t in terms)}" if terms else ""
        print(f"{n:<{width}}  {shown}{extra}")
    return EXIT_OK


def cmd_gen(args):
    spec = gen_system(args.seed, args.n, args.theory)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.theory}_n{args.n}_s{args.seed}"
    spec_path = out / f"system_{stem}.yaml"
    dump_spec(spec, spec_path)
    print(spec_path)
    if args.inject:
        targets = [t.strip() for t in args.inject.split(",") if t.strip()]
        val = inject_fault(spec, args.seed, set(targets))
        log_path = out / f"log_{stem}_{'-'.join(sorted(targets))}.yaml"
        data = {k: (v if isinstance(v, bool) else str(v)) for k, v in sorted(val.items())}
        log_path.write_text(yaml.safe_dump(data, sort_keys=True), encoding="utf-8")
        print(log_path)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="contract-diag", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compose", help="compose a system spec and print the system contract")
    c.add_argument("spec")
    c.add_argument("--out", help="write the system contract as a one-component spec")
    c.add_argument("--dot", help="write the diagnostics graph as DOT ('-' for stdout)")
    c.set_defaults(func=cmd_compose)

    d = sub.add_parser("diagnose", help="locate faulty components from a log")
    d.add_argument("spec")
    d.add_argument("log")
    d.add_argument("--guarantee", default="all",
                   help="violated system guarantee to trace (g3 or comp_3.g3), or 'all'")
    d.add_argument("--format", choices=("text", "json"), default="text")
    d.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("status", help="FAIL/ACTIVE/IDLE of each component under a log")
    s.add_argument("spec")
    s.add_argument("log")
    s.add_argument("--component")
    s.set_defaults(func=cmd_status)

    g = sub.add_parser("gen", help="write a random system (and optionally a faulty log)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=3, help="number of components (3..8)")
    g.add_argument("--theory", choices=("linear", "prop"), default="linear")
    g.add_argument("--inject", help="comma-separated components to make faulty")
    g.add_argument("--out-dir", default=".")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ContractDiagError as exc:
        return _fail(type(exc).__name__, exc)
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, exc)
