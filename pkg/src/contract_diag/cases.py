"""Bundled example systems: two small linear ones and the intersection pipeline.

The intersection pipeline has a perception, a planner and a tracker per
timestep.  Perception reports which of three waiting cars it sees, the
planner keeps the vehicle's place in the arrival queue (one-hot ``q1..q4``),
and the tracker drives (``v``) exactly when the vehicle is first in line.
"""

from __future__ import annotations

from importlib import resources

from .sysio import load_log, load_spec, spec_from_dict

CARS = (1, 2, 3)
SLOTS = (1, 2, 3, 4)


def data_path(name):
    return resources.files("contract_diag") / "data" / name


def example1_spec():
    return spec_from_dict({
        "theory": "linear",
        "components": [
            {"name": "C1", "component": "M1", "inputs": ["i"], "outputs": ["o"],
             "assumptions": ["i >= 0", "i <= 2"], "guarantees": ["o + i <= 3"]},
            {"name": "C2", "component": "M2", "inputs": ["o"], "outputs": ["o'"],
             "assumptions": ["o <= 5"], "guarantees": ["o + 2*o' >= 6"]},
        ],
        "composition_order": ["C1", "C2"],
    })


def example3_spec():
    return spec_from_dict({
        "theory": "linear",
        "components": [
            {"name": "C1", "component": "M1", "inputs": ["i"], "outputs": ["a"],
             "assumptions": ["i <= 2", "i >= 0"], "guarantees": ["a <= 2"]},
            {"name": "C2", "component": "M2", "inputs": ["j"], "outputs": ["b"],
             "assumptions": ["j <= 2", "j >= 0"], "guarantees": ["b <= 3"]},
            {"name": "C3", "component": "M3", "inputs": ["a", "b"], "outputs": ["o"],
             "assumptions": ["a <= 5", "b <= 5"], "guarantees": ["o <= a", "o <= b"]},
        ],
        "composition_order": ["C1", "C2", "C3"],
    })


def example3_log():
    return {"i": 1, "j": 1, "a": 2, "b": 7, "o": 3}


# ---------------------------------------------------------------------------
# intersection pipeline

def _same(k):
    return f"(c_P{k}@t <=> c_P{k}@t-1)"


def _left(k):
    return f"(!c_P{k}@t & c_P{k}@t-1)"


def one_hot(fmt):
    """Exactly one of ``q1..q4`` (names produced by ``fmt.format(slot)``)."""
    alts = []
    for j in SLOTS:
        lits = [fmt.format(s) if s == j else "!" + fmt.format(s) for s in SLOTS]
        alts.append("(" + " & ".join(lits) + ")")
    return " | ".join(alts)


def planner_guarantees():
    """Queue update rules; the last entry keeps the new position one-hot."""
    stay = " & ".join(_same(k) for k in CARS)
    g0 = [f"{stay} & q{j}@t-1 => q{j}@t" for j in (4, 3, 2, 1)]
    two_gone = [
        f"{_same(1)} & {_left(2)} & {_left(3)}",
        f"{_left(1)} & {_same(2)} & {_left(3)}",
        f"{_left(1)} & {_left(2)} & {_same(3)}",
    ]
    g1 = [f"{pre} & q{a}@t-1 => q{b}@t" for pre in two_gone for a, b in ((4, 3), (3, 2), (2, 1))]
    g2 = [f"{pre} & q{a}@t-1 => q{b}@t" for pre in two_gone for a, b in ((4, 3), (3, 1))]
    all_gone = " & ".join(_left(k) for k in CARS)
    g3 = [f"{all_gone} & q4@t-1 => q1@t"]
    g4 = ["q1@t-1 => q1@t"]
    return g0 + g1 + g2 + g3 + g4 + [one_hot("q{}@t")]


def alice_dict(fillers=0, steps=2):
    """Spec object of the pipeline unrolled over ``steps`` timesteps.

    ``fillers`` adds that many pass-through channels per component: the
    perception copies ``u_k`` to ``x_k``, the planner ``x_k`` to ``y_k`` and
    the tracker ``y_k`` to ``z_k``.
    """
    ks = range(1, fillers + 1)
    perception = {
        "name": "Perception", "component": "Perception",
        "inputs": [f"c_T{k}@t" for k in CARS] + ["poor_visibility@t"] + [f"u{k}@t" for k in ks],
        "outputs": [f"c_P{k}@t" for k in CARS] + [f"x{k}@t" for k in ks],
        "assumptions": ["!poor_visibility@t"],
        "guarantees": [f"c_T{k}@t <=> c_P{k}@t" for k in CARS] + [f"u{k}@t <=> x{k}@t" for k in ks],
    }
    planner = {
        "name": "Planner", "component": "Planner",
        "inputs": [f"c_P{k}@t" for k in CARS] + [f"c_P{k}@t-1" for k in CARS]
        + [f"q{j}@t-1" for j in SLOTS] + [f"x{k}@t" for k in ks],
        "outputs": [f"q{j}@t" for j in SLOTS] + [f"y{k}@t" for k in ks],
        "assumptions": [one_hot("q{}@t-1")],
        "guarantees": planner_guarantees() + [f"x{k}@t <=> y{k}@t" for k in ks],
    }
    tracker = {
        "name": "Tracker", "component": "Tracker",
        "inputs": ["q1@t", "icy_roads@t"] + [f"y{k}@t" for k in ks],
        "outputs": ["v@t"] + [f"z{k}@t" for k in ks],
        "assumptions": ["!icy_roads@t"],
        "guarantees": ["q1@t <=> v@t"] + [f"y{k}@t <=> z{k}@t" for k in ks],
    }
    comps = []
    for c in (perception, planner, tracker):
        comps.append(dict(c, replicate={"count": steps, "start": 1}))
    order = [f"{c['name']}@{i}" for i in range(1, steps + 1) for c in comps]
    return {"theory": "prop", "components": comps, "composition_order": order}


def alice_spec(fillers=0):
    return spec_from_dict(alice_dict(fillers))


# Recorded run.  Row k holds the step-k values; step 0 is the initial
# condition.  At step 1 the perception misses cars 2 and 3 although they are
# still there, so the planner moves the vehicle up the queue; at step 2 the
# cars are seen again, the planner has no rule for arrivals and the vehicle
# ends up first in line and drives.
ALICE_COLUMNS = ("poor_visibility", "icy_roads", "c_T1", "c_T2", "c_T3",
                 "c_P1", "c_P2", "c_P3", "q1", "q2", "q3", "q4", "v")
ALICE_ROWS = (
    (0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1, 0),
    (0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0),
    (0, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1),
)
# only observable at system level after the initial step
ALICE_HIDDEN = {"c_P1", "c_P2", "c_P3", "q1", "q2", "q3", "q4"}


def alice_log(fillers=0, masked=False):
    """Valuation of the recorded run; ``masked`` drops internal values after step 0."""
    out = {}
    for step, row in enumerate(ALICE_ROWS):
        for name, val in zip(ALICE_COLUMNS, row):
            if masked and step > 0 and name in ALICE_HIDDEN:
                continue
            out[f"{name}@{step}"] = bool(val)
        if step == 0:
            continue
        for k in range(1, fillers + 1):
            bit = (k + step) % 2 == 0
            out[f"u{k}@{step}"] = bit
            if not masked:
                out[f"x{k}@{step}"] = bit
                out[f"y{k}@{step}"] = bit
            out[f"z{k}@{step}"] = bit
    return out


def alice_csv(masked=False):
    lines = ["step," + ",".join(ALICE_COLUMNS)]
    for step, row in enumerate(ALICE_ROWS):
        cells = [
            "--" if masked and step > 0 and name in ALICE_HIDDEN else str(v)
            for name, v in zip(ALICE_COLUMNS, row)
        ]
        lines.append(f"{step}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def load_bundled(name):
    """Spec or log shipped in the package data directory."""
    path = data_path(name)
    with resources.as_file(path) as p:
        if name.endswith((".yaml", ".yml")) and "log" not in name:
            return load_spec(p)
        return load_log(p)
