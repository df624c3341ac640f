"""From a potential to a drift and its symmetries.

Solve eps W'' + (C + lam) W = 0 for C = 0, lam = -1, build B = 2 eps epsb W'/W,
and check that the mapped fields are symmetries of the Kolmogorov equation.
"""

import numpy as np
import sympy as sp

from lieclass.expr import DomainSampler, x
from lieclass.jet import DT, UDU
from lieclass.mapping import DriftOracle, drift_equation, mapped_symmetries, solve_W
from lieclass.symmetry import algebra_closure, is_lie_symmetry

W = solve_W(0, -1.0, 1, 0.0, 1.0, 0.0, (-2.0, 2.0))
drift = DriftOracle(W, 1, 1)
g = np.linspace(-2, 2, 9)
print("B(x) numeric     ", np.round(drift(g), 8))
print("2 tanh x          ", np.round(2 * np.tanh(g), 8))

# the closed form for the same W
B = 2 * sp.tanh(x)
eq = drift_equation(B, 1, 1).with_domain(DomainSampler({"t": (0.2, 1.5), "x": (-2.0, 2.0)}))
basis = [DT, UDU, *mapped_symmetries("2''", B, -1, 1)]
for i, v in enumerate(basis):
    rep = is_lie_symmetry(eq, v)
    print(f"field {i}: passed={rep.passed} residual={rep.max_residual:.1e}")

sc = algebra_closure(eq, basis)
print("algebra:", sc.spectrum())
