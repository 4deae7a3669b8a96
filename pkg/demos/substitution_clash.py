"""Uniform substitution with and without a clash.

Replacing p by a formula that reads x is unsound underneath an assignment
to x: the admissibility check names the offending variable and the two
sides really evaluate differently.
"""

from stochdl.analysis import admissible
from stochdl.harness import InterpGenerator
from stochdl.parser import parse_formula
from stochdl.printer import print_node
from stochdl.semantics import Valuation, eval_formula
from stochdl.substitution import adjoint, apply, parse_substitution, symbol_kinds

phi = parse_formula("<x := 1> p@0")
v = Valuation({"x": -1.0, "y": 2.0})
interp, _ = InterpGenerator().generate(0)

for text in ("subst { p@0 -> y >= 0 }", "subst { p@0 -> x >= 0 }"):
    sigma = parse_substitution(text, symbol_kinds(phi))
    verdict = admissible(sigma, phi)
    out = apply(sigma, phi)
    lhs = eval_formula(interp, v, 0, out).value
    rhs = eval_formula(adjoint(sigma, interp, v), v, 0, phi).value
    print(f"{text}\n  result {print_node(out)}\n  admissible: {verdict}")
    print(f"  substituted {lhs.name}, adjoint {rhs.name}\n")
