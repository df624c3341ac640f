"""Linear second-order evolution equations and their subclasses."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
import sympy as sp

from .expr import (DEFAULT_DOMAIN, DomainSampler, Expr, as_expr, is_zero, parse,
                   render, t, u, u_t, u_tt, u_tx, u_x, u_xx, x)
from .jet import JetOrderError, total_derivative


class Form(enum.Enum):
    STANDARD = "standard"      # u_t = A u_xx + B u_x + C u + D
    DIVERGENCE = "divergence"  # u_t = (A u)_xx + (B u)_x + C u + D


@dataclass(frozen=True)
class LinearEvolutionEquation:
    A: Expr
    B: Expr = sp.S.Zero
    C: Expr = sp.S.Zero
    D: Expr = sp.S.Zero
    form: Form = Form.STANDARD
    domain: DomainSampler = field(default=DEFAULT_DOMAIN, compare=False)

    def __post_init__(self):
        for name in "ABCD":
            object.__setattr__(self, name, as_expr(getattr(self, name)))
        if isinstance(self.form, str):
            object.__setattr__(self, "form", Form(self.form))

    @property
    def coefficients(self) -> tuple[Expr, Expr, Expr, Expr]:
        return (self.A, self.B, self.C, self.D)

    def standard(self) -> "LinearEvolutionEquation":
        if self.form is Form.STANDARD:
            return self
        A, B, C, D = self.coefficients
        Ax = sp.diff(A, x)
        return replace(self, B=B + 2 * Ax, C=C + sp.diff(B, x) + sp.diff(A, x, 2),
                       form=Form.STANDARD)

    def divergence(self) -> "LinearEvolutionEquation":
        if self.form is Form.DIVERGENCE:
            return self
        A, B, C, D = self.coefficients
        Bd = B - 2 * sp.diff(A, x)
        return replace(self, B=Bd, C=C - sp.diff(Bd, x) - sp.diff(A, x, 2),
                       form=Form.DIVERGENCE)

    def in_form(self, form: Form | str) -> "LinearEvolutionEquation":
        form = Form(form)
        return self.standard() if form is Form.STANDARD else self.divergence()

    def rhs(self, w: Expr) -> Expr:
        """Right-hand side applied to a function w(t, x)."""
        A, B, C, D = self.coefficients
        if self.form is Form.STANDARD:
            return A * sp.diff(w, x, 2) + B * sp.diff(w, x) + C * w + D
        return sp.diff(A * w, x, 2) + sp.diff(B * w, x) + C * w + D

    def jet_rhs(self) -> Expr:
        """Right-hand side in jet coordinates (standard form)."""
        A, B, C, D = self.standard().coefficients
        return A * u_xx + B * u_x + C * u + D

    def with_domain(self, domain: DomainSampler) -> "LinearEvolutionEquation":
        return replace(self, domain=domain)

    def subs(self, bindings: Mapping) -> "LinearEvolutionEquation":
        return replace(self, **{k: getattr(self, k).subs(bindings, simultaneous=True)
                                for k in "ABCD"})

    def to_json(self) -> dict:
        out = {"form": self.form.value}
        out.update({k: render(getattr(self, k)) for k in "ABCD"})
        out["domain"] = self.domain.to_json()
        return out

    @classmethod
    def from_json(cls, data: Mapping | str) -> "LinearEvolutionEquation":
        if isinstance(data, str):
            data = json.loads(data)
        if "A" not in data:
            raise ValueError("equation literal needs at least the coefficient A")
        form = Form(data.get("form", "standard"))
        coeffs = {k: parse(str(data.get(k, "0"))) for k in "ABCD"}
        domain = DomainSampler.from_json(data.get("domain")) if data.get("domain") else DEFAULT_DOMAIN
        return cls(**coeffs, form=form, domain=domain)

    def __str__(self) -> str:
        A, B, C, D = (render(c) for c in self.coefficients)
        if self.form is Form.STANDARD:
            return f"u_t = ({A}) u_xx + ({B}) u_x + ({C}) u + ({D})"
        return f"u_t = (({A}) u)_xx + (({B}) u)_x + ({C}) u + ({D})"


def heat(C: Expr = 0, e: int | Expr = 1, domain: DomainSampler = DEFAULT_DOMAIN) -> LinearEvolutionEquation:
    """u_t = e u_xx + C u."""
    return LinearEvolutionEquation(e, 0, C, 0, Form.STANDARD, domain)


def kolmogorov(B: Expr, e: int | Expr = 1, domain: DomainSampler = DEFAULT_DOMAIN) -> LinearEvolutionEquation:
    """u_t = e u_xx + B u_x."""
    return LinearEvolutionEquation(e, B, 0, 0, Form.STANDARD, domain)


def fokker_planck(B: Expr, e: int | Expr = 1, domain: DomainSampler = DEFAULT_DOMAIN) -> LinearEvolutionEquation:
    """u_t = e u_xx + (B u)_x."""
    return LinearEvolutionEquation(e, B, 0, 0, Form.DIVERGENCE, domain)


# -- class tags -------------------------------------------------------------

class ClassFamily(enum.Enum):
    E = "E"
    E_BREVE = "E_breve"
    E0 = "E0"
    E0_BREVE = "E0_breve"
    E_PRIME = "E'"
    E0_PRIME = "E'0"
    P_BAR = "P_bar"
    P = "P"
    P_PRIME = "P'"
    K_BAR = "K_bar"
    K = "K"
    K_BAR_PRIME = "K_bar'"
    K_PRIME = "K'"
    F_BAR = "F_bar"
    F = "F"
    F_BAR_PRIME = "F_bar'"
    F_PRIME = "F'"


_WITH_EPS = {ClassFamily.P, ClassFamily.P_PRIME, ClassFamily.K, ClassFamily.K_PRIME,
             ClassFamily.F, ClassFamily.F_PRIME}
_STATIONARY = {ClassFamily.E_PRIME, ClassFamily.E0_PRIME, ClassFamily.P_PRIME,
               ClassFamily.K_BAR_PRIME, ClassFamily.K_PRIME, ClassFamily.F_BAR_PRIME,
               ClassFamily.F_PRIME}


@dataclass(frozen=True)
class ClassTag:
    family: ClassFamily
    eps: int | None = None

    def __post_init__(self):
        if self.family in _WITH_EPS and self.eps not in (-1, 1):
            raise ValueError(f"class {self.family.value} needs eps in {{-1, 1}}")
        if self.family not in _WITH_EPS and self.eps is not None:
            raise ValueError(f"class {self.family.value} takes no eps")

    @classmethod
    def parse(cls, text: str) -> "ClassTag":
        """'K^1', "K'^-1", 'E0', ... ."""
        name, _, e = text.partition("^")
        return cls(ClassFamily(name), int(e) if e else None)

    def __str__(self) -> str:
        return self.family.value + (f"^{self.eps}" if self.eps is not None else "")


def _vanishes(e: Expr, domain: DomainSampler, tol: float) -> bool:
    e = sp.sympify(e)
    if e == 0:
        return True
    return is_zero(e, domain, tol=tol, trials=64, rng=np.random.default_rng(11))


def membership(eq: LinearEvolutionEquation, tag: ClassTag, tol: float = 1e-10) -> bool:
    """Decide membership by zero tests of the defining constraints."""
    fam = tag.family
    dom = eq.domain
    std = eq.standard()
    div = eq.divergence()
    A, B, C, D = std.coefficients
    zero = lambda e: _vanishes(e, dom, tol)
    static = lambda *cs: all(zero(sp.diff(c, t)) for c in cs)
    if fam in (ClassFamily.E, ClassFamily.E_BREVE):
        return True
    if not zero(D):
        return False
    if fam in (ClassFamily.E0, ClassFamily.E0_BREVE):
        return True
    if fam is ClassFamily.E0_PRIME:
        return static(A, B, C)
    if fam is ClassFamily.E_PRIME:
        return static(A, B, C, D)
    if fam in (ClassFamily.P_BAR, ClassFamily.P, ClassFamily.P_PRIME):
        ok = zero(B)
        if fam is not ClassFamily.P_BAR:
            ok = ok and zero(A - tag.eps)
        if fam is ClassFamily.P_PRIME:
            ok = ok and static(C)
        return ok
    if fam in (ClassFamily.K_BAR, ClassFamily.K, ClassFamily.K_BAR_PRIME, ClassFamily.K_PRIME):
        ok = zero(C)
        if fam in (ClassFamily.K, ClassFamily.K_PRIME):
            ok = ok and zero(A - tag.eps)
        if fam in _STATIONARY:
            ok = ok and static(A, B)
        return ok
    Ad, Bd, Cd, _ = div.coefficients
    ok = zero(Cd)
    if fam in (ClassFamily.F, ClassFamily.F_PRIME):
        ok = ok and zero(Ad - tag.eps)
    if fam in _STATIONARY:
        ok = ok and static(Ad, Bd)
    return ok


# -- jets and solutions -------------------------------------------------------

def on_shell(e: Expr, eq: LinearEvolutionEquation, max_order: int = 2) -> Expr:
    """Restrict a jet expression to the solution set of ``eq``.

    u_t is replaced by the right-hand side.  u_tx needs third-order jets and is
    only eliminated when ``max_order >= 3``; u_tt would need fourth order and
    always raises.
    """
    e = as_expr(e)
    rhs = eq.jet_rhs()
    if e.has(u_tt) and sp.diff(e, u_tt) != 0:
        raise JetOrderError("on-shell reduction of u_tt needs fourth-order jets")
    if e.has(u_tx) and sp.diff(e, u_tx) != 0:
        if max_order < 3:
            raise JetOrderError("on-shell reduction of u_tx needs third-order jets")
        e = e.subs(u_tx, total_derivative(rhs, x, max_order=3))
    return e.subs(u_t, rhs)


def formal_adjoint(eq: LinearEvolutionEquation) -> LinearEvolutionEquation:
    """Adjoint equation: standard (A, B, C) <-> divergence (-A, B, -C)."""
    if not _vanishes(eq.D, eq.domain, 1e-12):
        raise ValueError("formal adjoint is defined for homogeneous equations (D = 0)")
    A, B, C, _ = eq.coefficients
    form = Form.DIVERGENCE if eq.form is Form.STANDARD else Form.STANDARD
    return LinearEvolutionEquation(-A, B, -C, 0, form, eq.domain)


def adjoint_tag(tag: ClassTag) -> ClassTag:
    """Tag-level duality K^e <-> F^-e (bars and primes are kept)."""
    pairs = {
        ClassFamily.K: ClassFamily.F, ClassFamily.F: ClassFamily.K,
        ClassFamily.K_PRIME: ClassFamily.F_PRIME, ClassFamily.F_PRIME: ClassFamily.K_PRIME,
        ClassFamily.K_BAR: ClassFamily.F_BAR, ClassFamily.F_BAR: ClassFamily.K_BAR,
        ClassFamily.K_BAR_PRIME: ClassFamily.F_BAR_PRIME,
        ClassFamily.F_BAR_PRIME: ClassFamily.K_BAR_PRIME,
    }
    if tag.family not in pairs:
        raise ValueError(f"no adjoint counterpart recorded for {tag}")
    return ClassTag(pairs[tag.family], -tag.eps if tag.eps is not None else None)


def residual(eq: LinearEvolutionEquation, candidate: Expr) -> Expr:
    """candidate_t - RHS(candidate)."""
    w = as_expr(candidate)
    return sp.diff(w, t) - eq.rhs(w)
