"""Compose two contracts that share a signal, then print the system contract and its provenance graph."""

from contract_diag.cases import example1_spec
from contract_diag.contract import compose
from contract_diag.sysio import export_dot

c1, c2 = example1_spec().contracts()
system, graph = compose(c1, c2, name="comp_2")

print("assumptions:")
for tid, t in system.assumptions:
    print(f"  {tid}: {t}")
print("guarantees:")
for tid, t in system.guarantees:
    print(f"  {tid}: {t}")
print()
print(export_dot(graph, "example1"))
