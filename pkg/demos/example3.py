"""Three-component chain: trace a violated system guarantee back to the component that broke it."""

from contract_diag.cases import example3_log, example3_spec
from contract_diag.diagnostics import Diagnoser
from contract_diag.sysio import render_report

dx = Diagnoser(example3_spec().order())
print("system guarantees:", [str(t) for _, t in dx.system.guarantees])

log = example3_log()
print("log:", log)
report = dx.diagnose_all(log)
print(render_report(report, "text"))
