"""Monte Carlo estimates against closed forms.

Brownian motion from 0 ends above 1 at time 1 with probability 1 - Phi(1).
Geometric Brownian motion dx = x dW from 1 ends above 1 with probability
Phi(-1/2), since log x_1 is normal with mean -1/2.
"""

from scipy.stats import norm

from stochdl.parser import parse_formula
from stochdl.probability import InitialSpec, estimate
from stochdl.semantics import Interpretation

CASES = [
    ("brownian", "<x := 0; dx = 0 dt + 1 dW & 0 <= 0> sure(x >= 1)", norm.sf(1.0)),
    ("gbm", "<x := 1; dx = 0 * x dt + 1 * x dW & 0 <= 0> sure(x >= 1)", norm.cdf(-0.5)),
]

interp = Interpretation(step=1e-3)
for name, text, exact in CASES:
    est = estimate(interp, InitialSpec(), parse_formula(text), n=10_000, seed=1)
    print(f"{name}: {est}  exact {exact:.4f}  error {abs(est.p - exact):.4f}")
