"""Why the stop-time set matters.

A deterministic flow x' = 1 from 0 passes sqrt(2) exactly once.  Whether
the diamond below holds depends only on which stopping times the
interpretation allows.
"""

import math

from stochdl.parser import parse_formula
from stochdl.semantics import Interpretation, Valuation, eval_formula

GOAL = parse_formula("<x := 0; dx = 1 dt + 0 dW & x <= 3> (x * x - 2) * (x * x - 2) <= 1e-18")

for times in [(math.sqrt(2),), (1.0, 1.41, 1.414), (0.5, 1.0, 2.0, math.sqrt(2))]:
    out = eval_formula(Interpretation(times=times), Valuation({}), 0, GOAL)
    print(f"times {times}: {out.value.name}")
