"""System spec files, log files, DOT export and report rendering.

Spec files are YAML or JSON objects::

    theory: linear
    components:
      - name: C1
        component: M1          # optional; how the component is reported
        inputs: [i]
        outputs: [a]
        assumptions: ["i <= 2", "i >= 0"]
        guarantees: ["a <= 2"]
    composition_order: [C1, C2, C3]
    keep: [[], []]             # optional, one list per composition stage

A component may carry ``replicate: {count: N, start: S, wiring: {...}}``.
It is then cloned N times with suffixes ``@S`` ... ``@S+N-1``; inside the
clone ``x@t`` becomes ``x@k`` and ``x@t-1`` becomes ``x@(k-1)``.  ``wiring``
renames template variables before the suffixes are applied (``{q_prev:
q@t-1}``).  In templates, write subtraction with spaces (``x@t - 1``) so it
is not read as an offset.

Logs are CSV tables or flat JSON/YAML objects.  A CSV with several rows (or
a ``step`` column) is a timestep table: the cell for column ``x`` in step
``k`` becomes variable ``x@k``.  ``--`` marks a value that was not recorded.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .contract import make_contract
from .diagnostics import CompositionOrder, DiagnosisReport
from .errors import ContractDiagError, SpecFormatError, TermSyntaxError
from .theory import get_theory

ABSENT = "--"
STEP_COLUMN = "step"

_SLOT = re.compile(r"([A-Za-z_][A-Za-z0-9_']*)@t(?:([+-])(\d+))?(?![A-Za-z0-9_'])")


@dataclass
class ComponentSpec:
    name: str
    inputs: list
    outputs: list
    assumptions: list = field(default_factory=list)
    guarantees: list = field(default_factory=list)
    label: str | None = None

    def to_dict(self):
        d = {
            "name": self.name,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "assumptions": list(self.assumptions),
            "guarantees": list(self.guarantees),
        }
        if self.label and self.label != self.name:
            d["component"] = self.label
        return d


@dataclass
class SystemSpec:
    theory: str
    components: list
    composition_order: list
    keep: list | None = None

    def __post_init__(self):
        get_theory(self.theory)
        names = [c.name for c in self.components]
        if len(set(names)) != len(names):
            raise SpecFormatError(f"duplicate component names: {sorted(n for n in names if names.count(n) > 1)}")
        if sorted(self.composition_order) != sorted(names):
            raise SpecFormatError("composition_order must list every component exactly once")
        if self.keep is not None and len(self.keep) != len(names) - 1:
            raise SpecFormatError(f"keep needs {len(names) - 1} entries (one per stage), got {len(self.keep)}")

    @property
    def variables(self):
        out = set()
        for c in self.components:
            out |= set(c.inputs) | set(c.outputs)
        return out

    def component(self, name):
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    def contracts(self):
        """Parsed contracts in composition order."""
        out = []
        for name in self.composition_order:
            c = self.component(name)
            try:
                out.append(make_contract(c.name, c.inputs, c.outputs, c.assumptions, c.guarantees, self.theory))
            except (TermSyntaxError, ContractDiagError) as exc:
                raise SpecFormatError(f"component {c.name}: {exc}") from exc
        return out

    def order(self):
        labels = {c.name: c.label for c in self.components if c.label}
        return CompositionOrder(self.contracts(), self.keep, labels)

    def to_dict(self):
        d = {
            "theory": self.theory,
            "components": [c.to_dict() for c in self.components],
            "composition_order": list(self.composition_order),
        }
        if self.keep is not None:
            d["keep"] = [sorted(k) for k in self.keep]
        return d


def _slot(text, k, wiring):
    if wiring:
        for src, dst in wiring.items():
            text = re.sub(rf"(?<![A-Za-z0-9_'@]){re.escape(src)}(?![A-Za-z0-9_'@])", dst, text)

    def sub(m):
        off = int(m.group(3) or 0)
        step = k - off if m.group(2) == "-" else k + off
        return f"{m.group(1)}@{step}"

    return _SLOT.sub(sub, text)


def expand_replicate(entry):
    """Clone a component entry that carries a ``replicate`` block."""
    rep = entry.get("replicate")
    if not rep:
        return [entry]
    try:
        count = int(rep["count"])
    except (KeyError, TypeError, ValueError):
        raise SpecFormatError(f"component {entry.get('name')}: replicate needs an integer count") from None
    if count < 1:
        raise SpecFormatError(f"component {entry.get('name')}: replicate count must be positive")
    start = int(rep.get("start", 1))
    wiring = rep.get("wiring") or {}
    base = {k: v for k, v in entry.items() if k != "replicate"}
    out = []
    for k in range(start, start + count):
        clone = dict(base)
        clone["name"] = f"{base['name']}@{k}"
        if base.get("component"):
            clone["component"] = _slot(str(base["component"]), k, None)
        for key in ("inputs", "outputs", "assumptions", "guarantees"):
            clone[key] = [_slot(str(x), k, wiring) for x in base.get(key, [])]
        out.append(clone)
    return out


def _strings(entry, key, required=True):
    if key not in entry:
        if required:
            raise SpecFormatError(f"component {entry.get('name', '?')}: missing field {key!r}")
        return []
    val = entry[key]
    if isinstance(val, str) or not isinstance(val, (list, tuple)):
        raise SpecFormatError(f"component {entry.get('name', '?')}: {key!r} must be a list")
    return [str(x) for x in val]


def spec_from_dict(data):
    if not isinstance(data, dict):
        raise SpecFormatError("a system spec must be an object")
    for key in ("theory", "components"):
        if key not in data:
            raise SpecFormatError(f"system spec is missing {key!r}")
    comps = []
    for raw in data["components"]:
        if not isinstance(raw, dict) or "name" not in raw:
            raise SpecFormatError("every component needs a name")
        for entry in expand_replicate(raw):
            comps.append(ComponentSpec(
                str(entry["name"]),
                _strings(entry, "inputs"),
                _strings(entry, "outputs"),
                _strings(entry, "assumptions", False),
                _strings(entry, "guarantees", False),
                entry.get("component"),
            ))
    order = data.get("composition_order") or [c.name for c in comps]
    keep = data.get("keep")
    if keep is not None:
        keep = [frozenset(str(v) for v in k) for k in keep]
    try:
        return SystemSpec(str(data["theory"]), comps, [str(n) for n in order], keep)
    except ContractDiagError as exc:
        raise SpecFormatError(str(exc)) from exc


def load_spec(path):
    """Read a YAML or JSON system spec (YAML is a superset, so one reader does both)."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise SpecFormatError(f"{path}: {exc}") from exc
    return spec_from_dict(data)


def dump_spec(spec: SystemSpec, path=None, fmt=None):
    """Serialize a spec; format follows ``fmt`` or the file suffix (json or yaml)."""
    if fmt is None:
        fmt = "json" if path is not None and str(path).endswith(".json") else "yaml"
    data = spec.to_dict()
    text = json.dumps(data, indent=2) + "\n" if fmt == "json" else yaml.safe_dump(data, sort_keys=False)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


# ---------------------------------------------------------------------------
# logs

def _coerce(theory, name, value):
    th = get_theory(theory)
    try:
        return th.coerce(value)
    except (TypeError, ValueError, ZeroDivisionError):
        kind = "rational" if theory == "linear" else "Boolean"
        raise SpecFormatError(f"type mismatch: {name} = {value!r} is not a {kind}") from None


def _check_known(names, spec, timed=False):
    if spec is None:
        return
    if timed:
        # a step outside the unrolled horizon is fine, an unknown signal is not
        bases = {v.split("@")[0] for v in spec.variables}
        unknown = sorted(n for n in names if n.split("@")[0] not in bases)
    else:
        unknown = sorted(set(names) - spec.variables)
    if unknown:
        raise SpecFormatError(f"unknown variable(s) in log: {unknown}")


def valuation_from_rows(header, rows, spec=None, theory=None, timed=None):
    """Flatten a table of rows into one valuation.

    With ``timed`` (default: more than one row, or a step column) the cell
    of column ``x`` in step ``k`` is stored as ``x@k``.
    """
    theory = theory or (spec.theory if spec else "linear")
    header = [h.strip() for h in header]
    if not rows:
        raise SpecFormatError("log has no rows: non-total valuation")
    dupes = sorted({h for h in header if header.count(h) > 1})
    if dupes:
        raise SpecFormatError(f"duplicate column(s) {dupes}")
    has_step = STEP_COLUMN in header
    if timed is None:
        timed = has_step or len(rows) > 1
    out = {}
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise SpecFormatError(f"row {r} has {len(row)} cells but the header has {len(header)}: non-total row")
        cells = dict(zip(header, row))
        step = cells.pop(STEP_COLUMN).strip() if has_step else str(r)
        for name, raw in cells.items():
            raw = raw.strip() if isinstance(raw, str) else raw
            if raw == "" or raw is None:
                raise SpecFormatError(f"row {r}: empty cell for {name}: non-total row")
            if raw == ABSENT:
                continue
            var = f"{name}@{step}" if timed else name
            if var in out:
                raise SpecFormatError(f"variable {var} assigned twice")
            out[var] = _coerce(theory, var, raw)
    _check_known(out, spec, timed)
    return out


def load_log(path, spec: SystemSpec | None = None, theory=None):
    """Read a CSV timestep table or a flat JSON/YAML object into a valuation."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    theory = theory or (spec.theory if spec else "linear")
    if path.suffix.lower() == ".csv":
        rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
        if not rows:
            raise SpecFormatError(f"{path}: empty log: non-total valuation")
        return valuation_from_rows(rows[0], rows[1:], spec, theory)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecFormatError(f"{path}: {exc}") from exc
    if isinstance(data, list):
        if not data or not all(isinstance(r, dict) for r in data):
            raise SpecFormatError(f"{path}: a list log must hold one object per step")
        header = list(data[0])
        rows = []
        for r in data:
            if set(r) != set(header):
                raise SpecFormatError(f"{path}: steps disagree on their columns: non-total row")
            rows.append([r[h] if r[h] is not None else "" for h in header])
        return valuation_from_rows(header, rows, spec, theory, timed=True)
    if not isinstance(data, dict) or not data:
        raise SpecFormatError(f"{path}: empty log: non-total valuation")
    out = {}
    for k, v in data.items():
        if v == ABSENT:
            continue
        if v is None or v == "":
            raise SpecFormatError(f"{path}: no value for {k}: non-total valuation")
        out[str(k)] = _coerce(theory, k, v)
    _check_known(out, spec)
    return out


def missing_variables(spec: SystemSpec, valuation):
    """Declared variables a diagnosis would need but the log does not provide."""
    return sorted(spec.variables - set(valuation))


def dump_log_csv(valuation, path=None):
    """Flat single-row CSV of a valuation, columns sorted."""
    names = sorted(valuation)
    rows = [names, [_cell(valuation[n]) for n in names]]
    lines = [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


# ---------------------------------------------------------------------------
# graphs and reports

def _esc(text):
    return str(text).replace("\\", "\\\\").replace('"', '\\"')


def _q(text):
    return f'"{_esc(text)}"'


def export_dot(graph, name="diagnostics"):
    """Graphviz DOT text, nodes and edges sorted by term id."""
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=box, fontname=monospace];"]
    for tid in graph.vertices:
        label = f"{_esc(tid)}\\n{_esc(graph.terms[tid])}"
        lines.append(f'  {_q(tid)} [label="{label}"];')
    for u, w in graph.sorted_edges():
        lines.append(f"  {_q(u)} -> {_q(w)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_STYLE = {"satisfied": "\033[32m", "violated": "\033[31m", "bold": "\033[1m"}
_RESET = "\033[0m"


def render_report(report: DiagnosisReport, fmt="text", color=False):
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    def paint(text, style):
        return f"{_STYLE[style]}{text}{_RESET}" if color else text

    out = []
    for root in report.trace_tree:
        out.append(f"violated system guarantee: {root['term_id']}  {root['term']}")
    faulty = ", ".join(sorted(report.faulty_components)) or "none identified"
    out.append(paint(f"faulty components: {faulty}", "bold"))
    out.append("evaluations:")
    width = max((len(str(e.tid)) for e in report.evaluations), default=0)
    tw = max((len(e.term) for e in report.evaluations), default=0)
    for n, e in enumerate(report.evaluations, 1):
        out.append(f"  {n:>3}. {str(e.tid):<{width}}  {e.term:<{tw}}  {paint(e.verdict, e.verdict)}")
    pct = 100.0 * report.ratio
    out.append(f"terms checked: {report.terms_checked}/{report.terms_total} ({pct:.1f}%)")
    if report.low_confidence:
        out.append("note: some causes were found by shared variables only (low confidence)")
    for w in report.warnings:
        out.append(f"warning: {w}")
    return "\n".join(out) + "\n"
