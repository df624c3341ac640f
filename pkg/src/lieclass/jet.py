"""Jet coordinates, total derivatives, vector fields, prolongation, brackets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import sympy as sp

from .expr import (JET, JET_SYMBOLS, Expr, as_expr, jet_order, simplify,
                   t, u, u_t, u_x, u_tx, u_xx, x)


class JetOrderError(ValueError):
    """A computation would need jet coordinates above the allowed order."""


# u_J -> u_{J t}, u_J -> u_{J x}; jet names keep t's before x's
def _bump(sym: sp.Symbol, var: str) -> sp.Symbol | None:
    idx = "" if sym == u else sym.name[2:]
    new = "".join(sorted(idx + var, key=lambda ch: ch != "t"))
    return JET.get(f"u_{new}")


def total_derivative(e: Expr, v: sp.Symbol, max_order: int = 2) -> Expr:
    """D_t or D_x of a jet expression.

    Raises JetOrderError if the result would contain jet coordinates of order
    above ``max_order``.
    """
    e = as_expr(e)
    name = {t: "t", x: "x"}.get(v)
    if name is None:
        raise ValueError("total derivatives are taken in t or x")
    out = sp.diff(e, v)
    for s in JET_SYMBOLS:
        if not e.has(s):
            continue
        coeff = sp.diff(e, s)
        if coeff == 0:
            continue
        nxt = _bump(s, name)
        if nxt is None or jet_order(nxt) > max_order:
            raise JetOrderError(f"D_{name} of {s} exceeds jet order {max_order}")
        out += coeff * nxt
    return out


def jet_symbols_in(e: Expr) -> set[sp.Symbol]:
    return {s for s in e.free_symbols if s in JET_SYMBOLS and s != u}


@dataclass(frozen=True)
class VectorField:
    """v = tau d_t + xi d_x + eta d_u with coefficients in (t, x, u)."""

    tau: Expr
    xi: Expr
    eta: Expr

    def __post_init__(self):
        for name in ("tau", "xi", "eta"):
            val = as_expr(getattr(self, name))
            object.__setattr__(self, name, val)
            if jet_symbols_in(val):
                raise ValueError(f"vector field coefficient {name} contains jet coordinates")

    @classmethod
    def from_tuple(cls, coeffs) -> "VectorField":
        return cls(*coeffs)

    def as_tuple(self) -> tuple[Expr, Expr, Expr]:
        return (self.tau, self.xi, self.eta)

    def __call__(self, f: Expr) -> Expr:
        """Apply as a derivation to a function of (t, x, u)."""
        f = as_expr(f)
        return self.tau * sp.diff(f, t) + self.xi * sp.diff(f, x) + self.eta * sp.diff(f, u)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(p + q for p, q in zip(self.as_tuple(), other.as_tuple())))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(p - q for p, q in zip(self.as_tuple(), other.as_tuple())))

    def __neg__(self) -> "VectorField":
        return VectorField(*(-p for p in self.as_tuple()))

    def __mul__(self, k) -> "VectorField":
        k = as_expr(k)
        return VectorField(*(k * p for p in self.as_tuple()))

    __rmul__ = __mul__

    def map(self, f: Callable[[Expr], Expr]) -> "VectorField":
        return VectorField(*(f(p) for p in self.as_tuple()))

    def subs(self, bindings: Mapping) -> "VectorField":
        return self.map(lambda p: p.subs(bindings, simultaneous=True))

    def simplify(self) -> "VectorField":
        return self.map(simplify)

    def is_structurally_zero(self) -> bool:
        return all(simplify(p) == 0 for p in self.as_tuple())

    def __str__(self) -> str:
        parts = []
        for coef, d in zip(self.as_tuple(), ("d_t", "d_x", "d_u")):
            if coef != 0:
                parts.append(f"({coef})*{d}")
        return " + ".join(parts) or "0"


ZERO = VectorField(0, 0, 0)
DT = VectorField(1, 0, 0)
DX = VectorField(0, 1, 0)
DU = VectorField(0, 0, 1)
UDU = VectorField(0, 0, u)


def prolong2(v: VectorField) -> tuple[Expr, Expr, Expr]:
    """Coefficients (phi^t, phi^x, phi^xx) of the second prolongation."""
    tau, xi, eta = v.as_tuple()
    Dt = lambda e: total_derivative(e, t)
    Dx = lambda e: total_derivative(e, x)
    phi_t = Dt(eta) - u_t * Dt(tau) - u_x * Dt(xi)
    phi_x = Dx(eta) - u_t * Dx(tau) - u_x * Dx(xi)
    phi_xx = Dx(phi_x) - u_tx * Dx(tau) - u_xx * Dx(xi)
    return phi_t, phi_x, phi_xx


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v, w] = v(w-coefficients) - w(v-coefficients)."""
    return VectorField(*(v(q) - w(p) for p, q in zip(v.as_tuple(), w.as_tuple())))
