"""Random systems with injected faults: compare the diagnosis with the brute-force oracle."""

import random
import sys

from contract_diag.diagnostics import Diagnoser
from contract_diag.errors import NoWitnessError
from contract_diag.harness import gen_system, inject_fault, oracle_diagnose

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20
counts = {"agree": 0, "disagree": 0, "no witness": 0}

for seed in range(trials):
    for theory in ("linear", "prop"):
        spec = gen_system(seed, 3 + seed % 6, theory)
        rng = random.Random(seed)
        targets = set(rng.sample([c.name for c in spec.components], rng.choice((1, 2))))
        try:
            log = inject_fault(spec, seed, targets)
        except NoWitnessError:
            counts["no witness"] += 1
            continue
        got = Diagnoser(spec.order()).diagnose_all(log).faulty_components
        same = got == oracle_diagnose(spec, log) == targets
        counts["agree" if same else "disagree"] += 1
        print(f"{theory:6} seed={seed:<3} n={len(spec.components)} injected={sorted(targets)} found={sorted(got)}")

print(counts)
