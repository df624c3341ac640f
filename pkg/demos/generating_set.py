"""The generating transformations of the mu/x^2 family and the T4 decomposition."""

import sympy as sp

from lieclass.catalog.groupoid import generating_triples, phi4, phi4_decomposition
from lieclass.transforms import pushforward_equation, verify_admissible

for name, T in generating_triples(2).items():
    if name.startswith("T0"):
        continue
    out = pushforward_equation(T.phi, T.source)
    rep = verify_admissible(T, 1e-10)
    print(f"{name}: C = {T.source.C}  ->  C~ = {sp.simplify(out.C)}   admissible: {rep.passed}")

lhs, rhs = phi4_decomposition(), phi4()
print("T4 components:")
for a, b in zip(lhs.components, rhs.components):
    print("  ", sp.simplify(a), " | ", b)
