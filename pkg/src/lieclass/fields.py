"""Named vector fields used by the classification lists."""

from __future__ import annotations

import sympy as sp

from .expr import Expr, as_expr, eps as EPS, fn, t, u, x
from .jet import DT, DX, UDU, VectorField

HALF = sp.Rational(1, 2)


def _antiderivative(f: Expr) -> Expr:
    return sp.integrate(as_expr(f), t)


# -- essential algebra of heat equations with potentials ---------------------

def D_field() -> VectorField:
    return VectorField(2 * t, x, 0)


def Pi_field(e: Expr = EPS) -> VectorField:
    return VectorField(4 * t**2, 4 * t * x, -(e * x**2 + 2 * t) * u)


def G_field(e: Expr = EPS) -> VectorField:
    return VectorField(0, 2 * t, -e * x * u)


# -- time-independent potentials, parameterised by f(t) ---------------------

def D_f(f, e: Expr = EPS) -> VectorField:
    f = as_expr(f)
    ft, ftt = sp.diff(f, t), sp.diff(f, t, 2)
    return VectorField(f, HALF * ft * x, -(e * ftt * x**2 / 8 + ft / 4) * u)


def P_f(f, e: Expr = EPS) -> VectorField:
    f = as_expr(f)
    return VectorField(0, f, -HALF * e * sp.diff(f, t) * x * u)


def Pbar_f(f, e: Expr = EPS) -> VectorField:
    return P_f(f, e) + VectorField(0, 0, _antiderivative(f) * u)


# -- time-independent drifts --------------------------------------------------

def drift(B: Expr | None = None) -> Expr:
    return fn("B", x) if B is None else as_expr(B)


def D_Bk(f, kappa_, B: Expr | None = None, e: Expr = EPS) -> VectorField:
    f, k, B = as_expr(f), as_expr(kappa_), drift(B)
    ft, ftt = sp.diff(f, t), sp.diff(f, t, 2)
    eta = -e * (ftt * x**2 / 8 + e * ft / 4 - k * f + ft * x * B / 4) * u
    return VectorField(f, HALF * ft * x, eta)


def P_B(f, B: Expr | None = None, e: Expr = EPS) -> VectorField:
    f, B = as_expr(f), drift(B)
    return VectorField(0, f, -HALF * e * (sp.diff(f, t) * x + f * B) * u)


def Pbar_B(f, B: Expr | None = None, e: Expr = EPS) -> VectorField:
    return P_B(f, B, e) - VectorField(0, 0, e * _antiderivative(f) * u)


# -- fields mapped from heat equations by u -> u / U ---------------------------

def hat_fields(U: Expr, epsb_: Expr, e: Expr = EPS) -> dict[str, VectorField]:
    """The images of d_t, D, Pi, d_x, G for B = 2 eps epsb U_x/U, R = epsb U_t/U."""
    U = as_expr(U)
    B = 2 * e * epsb_ * sp.diff(U, x) / U
    R = epsb_ * sp.diff(U, t) / U
    return {
        "Pt": VectorField(1, 0, -R * u),
        "D": VectorField(2 * t, x, -(2 * t * R + HALF * e * x * B) * u),
        "Pi": VectorField(4 * t**2, 4 * t * x,
                          -(e * x**2 + 2 * t + 4 * t**2 * R + 2 * e * t * x * B) * u),
        "Px": VectorField(0, 1, -HALF * e * B * u),
        "G": VectorField(0, 2 * t, -e * (x + t * B) * u),
    }


__all__ = ["DT", "DX", "UDU", "D_field", "Pi_field", "G_field", "D_f", "P_f", "Pbar_f",
           "D_Bk", "P_B", "Pbar_B", "hat_fields", "drift"]
