"""Point-transformation calculus and symmetry verification for linear evolution equations.

Equations have the form u_t = A u_xx + B u_x + C u + D with coefficients in (t, x).
Submodules: ``expr`` (expressions and sampling), ``jet`` (vector fields and
prolongation), ``equations`` (classes and adjoints), ``transforms`` (point
transformations and equivalence families), ``symmetry`` (determining residuals
and brackets), ``mapping`` (drifts from potentials), ``catalog`` (classification
data and its verifiers) and ``cli``.
"""

__version__ = "0.1.0"

from .equations import (ClassFamily, ClassTag, Form, LinearEvolutionEquation, fokker_planck,
                        formal_adjoint, heat, kolmogorov)
from .expr import DomainSampler, parse, render, zero_test
from .jet import VectorField, lie_bracket, prolong2
from .report import SymmetryReport, VerificationReport
from .symmetry import algebra_closure, is_lie_symmetry
from .transforms import PointTransformation, compose, invert, pushforward_equation

__all__ = [
    "__version__", "ClassFamily", "ClassTag", "Form", "LinearEvolutionEquation", "fokker_planck",
    "formal_adjoint", "heat", "kolmogorov", "DomainSampler", "parse", "render", "zero_test",
    "VectorField", "lie_bracket", "prolong2", "SymmetryReport", "VerificationReport",
    "algebra_closure", "is_lie_symmetry", "PointTransformation", "compose", "invert",
    "pushforward_equation",
]
