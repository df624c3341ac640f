"""Point transformations t~ = T(t), x~ = X(t, x), u~ = U1 u + U0 and their action.

Pushforward of equations uses the pullback formulas of the general
equivalence group (standard or divergence form) and then re-expresses the
result in the new variables through an inverse map.  When no closed-form
inverse exists, a numeric inverse by root finding can be requested.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np
import sympy as sp
from scipy.optimize import brentq

from .equations import ClassFamily, ClassTag, Form, LinearEvolutionEquation
from .expr import (DEFAULT_DOMAIN, DomainError, DomainSampler, Expr, as_expr, evaluate,
                   parse, render, simplify, t, u, x, zero_test)
from .jet import VectorField
from .report import VerificationReport


class NoClosedFormInverse(ValueError):
    pass


class NotComposable(ValueError):
    """The target of the first triple is not the source of the second."""


class EmptyOverlap(ValueError):
    pass


class ConstraintViolation(ValueError):
    pass


@dataclass(frozen=True)
class PointTransformation:
    T: Expr
    X: Expr
    U1: Expr = sp.S.One
    U0: Expr = sp.S.Zero
    inverse: "PointTransformation | None" = field(default=None, compare=False, repr=False)
    domain: DomainSampler | None = field(default=None, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for k in ("T", "X", "U1", "U0"):
            object.__setattr__(self, k, as_expr(getattr(self, k)))
        if self.T.free_symbols & {x, u} or self.X.has(u) or self.U1.has(u) or self.U0.has(u):
            raise ValueError("components must have the form T(t), X(t,x), U1(t,x), U0(t,x)")

    @property
    def components(self) -> tuple[Expr, Expr, Expr, Expr]:
        return (self.T, self.X, self.U1, self.U0)

    @property
    def u_component(self) -> Expr:
        return self.U1 * u + self.U0

    def with_inverse(self, inv: "PointTransformation") -> "PointTransformation":
        inv_plain = replace(inv, inverse=None)
        return replace(self, inverse=replace(inv_plain, inverse=replace(self, inverse=None)))

    def jacobian(self) -> Expr:
        return sp.diff(self.T, t) * sp.diff(self.X, x) * self.U1

    def __call__(self, tv, xv, uv=0.0, oracles=None):
        pt = {"t": tv, "x": xv}
        T = evaluate(self.T, pt, oracles) + 0 * np.asarray(xv, dtype=float)
        X = evaluate(self.X, pt, oracles)
        U = evaluate(self.U1, pt, oracles) * np.asarray(uv, dtype=float) + evaluate(self.U0, pt, oracles)
        return T, X, U

    def check(self, sampler: DomainSampler | None = None, trials: int = 200,
              tol: float = 1e-10, rng: np.random.Generator | None = None) -> VerificationReport:
        """Nondegeneracy on the domain and, if registered, the inverse round trip."""
        rng = rng if rng is not None else np.random.default_rng(0)
        sampler = sampler or self.domain or DEFAULT_DOMAIN
        rep = VerificationReport(f"transformation {self.name or '?'}", tol=tol)
        pts = sampler.sample({"t", "x"} | {s.name for s in self.jacobian().free_symbols}, trials, rng)
        jac = evaluate(self.jacobian(), pts)
        if np.min(np.abs(jac)) == 0:
            rep.fail("T_t X_x U1 vanishes at a sample point")
        rep.samples = trials
        if self.inverse is not None:
            uv = rng.uniform(-2, 2, trials)
            T, X, U = self(pts["t"], pts["x"], uv)
            t2, x2, u2 = self.inverse(T, X, U)
            err = max(np.max(np.abs(t2 - pts["t"])), np.max(np.abs(x2 - pts["x"])),
                      np.max(np.abs(u2 - uv)))
            rep.max_residual = float(err)
            if err > tol * (1 + np.max(np.abs(pts["x"]))):
                rep.fail(f"inverse round trip error {err:.3e}")
        return rep

    def to_json(self) -> dict:
        out = {"T": render(self.T), "X": render(self.X), "U1": render(self.U1), "U0": render(self.U0)}
        if self.inverse is not None:
            out["inverse"] = {k: render(v) for k, v in zip(("T", "X", "U1", "U0"), self.inverse.components)}
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        return out

    @classmethod
    def from_json(cls, data: Mapping | str) -> "PointTransformation":
        if isinstance(data, str):
            data = json.loads(data)
        for key in ("T", "X"):
            if key not in data:
                raise ValueError(f"transformation literal is missing {key}")
        comps = [parse(str(data.get(k, d))) for k, d in (("T", "t"), ("X", "x"), ("U1", "1"), ("U0", "0"))]
        domain = DomainSampler.from_json(data["domain"]) if data.get("domain") else None
        phi = cls(*comps, domain=domain, name=data.get("name", ""))
        if data.get("inverse"):
            inv = data["inverse"]
            phi = phi.with_inverse(cls(*[parse(str(inv.get(k, d))) for k, d in
                                         (("T", "t"), ("X", "x"), ("U1", "1"), ("U0", "0"))]))
        return phi


def identity() -> PointTransformation:
    phi = PointTransformation(t, x, 1, 0, name="id")
    return phi.with_inverse(phi)


def _after(phi2: PointTransformation, phi1: PointTransformation) -> PointTransformation:
    sub = {t: phi1.T, x: phi1.X}
    T = phi2.T.subs(t, phi1.T)
    X = phi2.X.subs(sub, simultaneous=True)
    U1o = phi2.U1.subs(sub, simultaneous=True)
    U0o = phi2.U0.subs(sub, simultaneous=True)
    return PointTransformation(T, X, U1o * phi1.U1, U1o * phi1.U0 + U0o,
                               domain=phi1.domain, name=f"{phi2.name}*{phi1.name}")


def compose(phi1: PointTransformation, phi2: PointTransformation,
            rng: np.random.Generator | None = None, check_overlap: bool = True) -> PointTransformation:
    """phi2 after phi1 (apply phi1 first)."""
    if check_overlap and phi1.domain is not None and phi2.domain is not None:
        rng = rng if rng is not None else np.random.default_rng(1)
        pts = phi1.domain.sample({"t", "x"}, 64, rng)
        with np.errstate(all="ignore"):
            T, X, _ = phi1(pts["t"], pts["x"])
        inside = [phi2.domain.contains({"t": a, "x": b}) for a, b in zip(np.atleast_1d(T), np.atleast_1d(X))]
        if not any(inside):
            raise EmptyOverlap("range of the first transformation misses the domain of the second")
    out = _after(phi2, phi1)
    if phi1.inverse is not None and phi2.inverse is not None:
        out = out.with_inverse(_after(phi1.inverse, phi2.inverse))
    return out


def invert(phi: PointTransformation, sampler: DomainSampler | None = None) -> PointTransformation:
    """Registered inverse, or a closed form when T is solvable and X is affine in x."""
    if phi.inverse is not None:
        return phi.inverse
    s = sp.Dummy("s", real=True)
    if phi.T == t:
        Tinv = t
    else:
        sols = sp.solve(sp.Eq(phi.T.subs(t, s), t), s)
        Tinv = None
        sampler = sampler or phi.domain or DEFAULT_DOMAIN
        pts = sampler.sample({"t", "x"}, 16, np.random.default_rng(3))
        for cand in sols:
            back = cand.subs(t, phi.T)
            try:
                vals = evaluate(back - t, {"t": pts["t"]})
            except (DomainError, TypeError):
                continue
            if np.all(np.abs(vals) < 1e-9):
                Tinv = cand
                break
        if Tinv is None:
            raise NoClosedFormInverse(f"cannot invert T = {phi.T}")
    if sp.diff(phi.X, x, 2) != 0 and simplify(sp.diff(phi.X, x, 2)) != 0:
        raise NoClosedFormInverse(f"X = {phi.X} is not affine in x")
    slope = sp.diff(phi.X, x)
    offset = phi.X.subs(x, 0)
    back_t = {t: Tinv}
    Xinv = ((x - offset) / slope).subs(back_t)
    at = {t: Tinv, x: Xinv}
    U1i = (1 / phi.U1).subs(at, simultaneous=True)
    U0i = (-phi.U0 / phi.U1).subs(at, simultaneous=True)
    inv = PointTransformation(Tinv, Xinv, U1i, U0i, name=f"{phi.name}^-1")
    return inv


# -- pushforward of equations --------------------------------------------------

def _E(eq: LinearEvolutionEquation, w: Expr) -> Expr:
    A, B, C, _ = eq.coefficients
    return sp.diff(w, t) - A * sp.diff(w, x, 2) - B * sp.diff(w, x) - C * w


def pullback_coefficients(phi: PointTransformation, eq: LinearEvolutionEquation) -> tuple[Expr, ...]:
    """Target coefficients composed with phi, i.e. written in source variables.

    Standard form: A~ = X_x^2 A/T_t, B~ = X_x/T_t (B - 2 U1_x/U1 A) - (X_t - X_xx A)/T_t,
    C~ = -(U1/T_t) E(1/U1), D~ = (U1/T_t)(D + E(U0/U1)).
    Divergence form: B~ uses X_t + 3 X_xx A and C~ = -E^dag(X_x U1)/(T_t X_x U1)
    with E^dag = -d_t - A d_xx + B d_x - C.
    """
    T, X, U1, U0 = phi.components
    Tt, Xx, Xt, Xxx = sp.diff(T, t), sp.diff(X, x), sp.diff(X, t), sp.diff(X, x, 2)
    A, B, C, D = eq.coefficients
    At = Xx**2 * A / Tt
    Dt_ = U1 / Tt * (D + _E(eq.standard(), U0 / U1))
    if eq.form is Form.STANDARD:
        Bt = Xx / Tt * (B - 2 * sp.diff(U1, x) / U1 * A) - (Xt - Xxx * A) / Tt
        Ct = -U1 / Tt * _E(eq, 1 / U1)
    else:
        w = Xx * U1
        adj = -sp.diff(w, t) - A * sp.diff(w, x, 2) + B * sp.diff(w, x) - C * w
        Bt = Xx / Tt * (B - 2 * sp.diff(U1, x) / U1 * A) - (Xt + 3 * Xxx * A) / Tt
        Ct = -adj / (Tt * w)
    return (At, Bt, Ct, Dt_)


@dataclass(frozen=True)
class NumericEquation:
    """Target coefficients available only as callables of (t~, x~)."""

    A: Callable
    B: Callable
    C: Callable
    D: Callable
    form: Form


def _numeric_inverse(phi: PointTransformation, domain: DomainSampler):
    t_lo, t_hi = domain.intervals.get("t", (0.2, 1.5))
    x_lo, x_hi = domain.intervals.get("x", (0.5, 2.0))
    fT = sp.lambdify(t, phi.T, "numpy")
    fX = sp.lambdify((t, x), phi.X, "numpy")

    def inv(tt: float, xt: float) -> tuple[float, float]:
        ts = brentq(lambda s: fT(s) - tt, t_lo, t_hi, xtol=1e-14)
        xs = brentq(lambda s: fX(ts, s) - xt, x_lo, x_hi, xtol=1e-14)
        return ts, xs

    return inv


def pushforward_equation(phi: PointTransformation, eq: LinearEvolutionEquation,
                         target_form: Form | str | None = None, numeric: bool = False,
                         simplify_result: bool = False):
    """Image of ``eq`` under ``phi`` in the new variables (named t, x again)."""
    target_form = Form(target_form) if target_form is not None else eq.form
    pulled = pullback_coefficients(phi, eq)
    try:
        inv = invert(phi, eq.domain)
    except NoClosedFormInverse:
        if not numeric:
            raise
        return _numeric_pushforward(phi, eq, pulled, target_form)
    at = {t: inv.T, x: inv.X}
    coeffs = [c.subs(at, simultaneous=True) for c in pulled]
    if simplify_result:
        coeffs = [simplify(c) for c in coeffs]
    dom = _image_domain(phi, eq.domain)
    out = LinearEvolutionEquation(*coeffs, form=eq.form, domain=dom)
    return out.in_form(target_form)


def _image_domain(phi: PointTransformation, domain: DomainSampler) -> DomainSampler:
    """Bounding box of the image of the source domain (sampled)."""
    try:
        pts = domain.sample({"t", "x"}, 400, np.random.default_rng(5))
        T, X, _ = phi(pts["t"], pts["x"])
        T = np.broadcast_to(T, pts["t"].shape)
        return DomainSampler({"t": (float(np.min(T)), float(np.max(T))),
                              "x": (float(np.min(X)), float(np.max(X)))}, dict(domain.fixed))
    except Exception:
        return domain


def _numeric_pushforward(phi, eq, pulled, target_form):
    inv = _numeric_inverse(phi, eq.domain)
    fixed = dict(eq.domain.fixed)
    if eq.form is not target_form:
        raise NoClosedFormInverse("numeric pushforward keeps the source form")

    def wrap(expr):
        f = sp.lambdify((t, x) + tuple(sp.Symbol(k, real=True) for k in fixed), expr, "numpy")

        def call(tt, xt):
            tt, xt = np.broadcast_arrays(np.asarray(tt, float), np.asarray(xt, float))
            out = np.empty(tt.shape)
            for idx in np.ndindex(tt.shape):
                ts, xs = inv(float(tt[idx]), float(xt[idx]))
                out[idx] = f(ts, xs, *fixed.values())
            return out if out.ndim else float(out)

        return call

    return NumericEquation(*(wrap(c) for c in pulled), form=eq.form)


def pushforward_vectorfield(phi: PointTransformation, v: VectorField) -> VectorField:
    """phi_* v written in the new variables."""
    inv = invert(phi)
    new = (v(phi.T), v(phi.X), v(phi.u_component))
    at = {t: inv.T, x: inv.X, u: inv.u_component}
    return VectorField(*(c.subs(at, simultaneous=True) for c in new))


# -- admissible transformations ---------------------------------------------

@dataclass(frozen=True)
class AdmissibleTransformation:
    source: LinearEvolutionEquation
    phi: PointTransformation
    target: LinearEvolutionEquation
    tag: ClassTag | None = None
    verified: bool = False
    name: str = ""

    @classmethod
    def build(cls, source, phi, target, tag=None, name="", tol=1e-8, trials=200,
              rng=None) -> "AdmissibleTransformation":
        draft = cls(source, phi, target, tag, False, name)
        rep = verify_admissible(draft, tol, trials, rng)
        return replace(draft, verified=rep.passed)

    def inverse(self) -> "AdmissibleTransformation":
        return AdmissibleTransformation(self.target, invert(self.phi), self.source, self.tag,
                                        self.verified, f"{self.name}^-1")


def _sampler_for(T: AdmissibleTransformation) -> DomainSampler:
    dom = T.phi.domain or T.source.domain
    fixed = dict(T.source.domain.fixed)
    fixed.update(dom.fixed)
    return DomainSampler(dict(dom.intervals), fixed, dom.positive, dom.nonzero, dom.margin)


def verify_admissible(T: AdmissibleTransformation, tol: float = 1e-8, trials: int = 200,
                      rng: np.random.Generator | None = None, oracles=None) -> VerificationReport:
    """Compare the pulled-back target with the transformed source in source variables."""
    rng = rng if rng is not None else np.random.default_rng(0)
    rep = VerificationReport(f"admissible {T.name or ''}".strip(), tol=tol)
    src = T.source.standard()
    tgt = T.target.standard()
    pulled = pullback_coefficients(T.phi, src)
    at = {t: T.phi.T, x: T.phi.X}
    sampler = _sampler_for(T)
    for name, p, q in zip("ABCD", pulled, tgt.coefficients):
        diff = q.subs(at, simultaneous=True) - p
        res = zero_test(diff, sampler, tol, trials, rng, oracles)
        child = VerificationReport(f"coefficient {name}", res.passed, res.max_residual,
                                   res.samples, tol)
        if not res.passed:
            child.fail(f"{name} mismatch, residual {res.max_residual:.3e}")
        rep.add(child)
    return rep


def equations_agree(e1: LinearEvolutionEquation, e2: LinearEvolutionEquation,
                    tol: float = 1e-10, trials: int = 64, rng=None, sampler=None) -> bool:
    s1, s2 = e1.standard(), e2.standard()
    rng = rng if rng is not None else np.random.default_rng(2)
    sampler = sampler or e2.domain
    for p, q in zip(s1.coefficients, s2.coefficients):
        d = p - q
        if d == 0 or simplify(d) == 0:
            continue
        if not zero_test(d, sampler, tol, trials, rng).passed:
            return False
    return True


def compose_admissible(T1: AdmissibleTransformation, T2: AdmissibleTransformation,
                       tol: float = 1e-10) -> AdmissibleTransformation:
    """Groupoid product: T1 first, then T2."""
    if not equations_agree(T1.target, T2.source, tol, sampler=T2.source.domain):
        raise NotComposable(f"target of {T1.name or 'T1'} differs from source of {T2.name or 'T2'}")
    phi = compose(T1.phi, T2.phi, check_overlap=False)
    return AdmissibleTransformation(T1.source, phi, T2.target, T1.tag,
                                    T1.verified and T2.verified, f"{T2.name}*{T1.name}")


# -- equivalence families ------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    name: str
    kind: str  # "const" or a variable signature such as "t", "x", "tx"


@dataclass(frozen=True)
class EquivalenceFamily:
    """One equivalence group as a parametric family of point transformations."""

    id: str
    tag: ClassFamily
    slots: tuple[Slot, ...]
    build: Callable[[Mapping], PointTransformation]
    pullback: Callable[[Mapping, LinearEvolutionEquation], tuple]
    constraints: Callable[[Mapping], list] = lambda p: []
    nonzero: Callable[[Mapping], list] = lambda p: []
    recover: Callable[[PointTransformation], dict] | None = None
    form: Form = Form.STANDARD
    eps_dependent: bool = False

    def check(self, params: Mapping, sampler: DomainSampler | None = None,
              tol: float = 1e-12) -> None:
        sampler = sampler or DomainSampler({"t": (-0.5, 0.5), "x": (0.5, 1.5)})
        for expr in self.constraints(params):
            expr = as_expr(expr)
            if simplify(expr) == 0:
                continue
            if not zero_test(expr, sampler, tol, 50, np.random.default_rng(7)).passed:
                raise ConstraintViolation(f"{self.id}: constraint {expr} = 0 fails")
        for expr in self.nonzero(params):
            vals = np.atleast_1d(evaluate(as_expr(expr), sampler.sample({"t", "x"}, 50, np.random.default_rng(8))))
            if np.min(np.abs(vals)) == 0:
                raise ConstraintViolation(f"{self.id}: {expr} must not vanish")


def _p(params: Mapping, key: str, default=None) -> Expr:
    if key not in params:
        if default is None:
            raise KeyError(f"missing parameter {key}")
        return as_expr(default)
    return as_expr(params[key])


def _eps(params: Mapping) -> Expr:
    return _p(params, "eps", 1)


def _general_pullback(family_form: Form):
    def pull(params, eq):
        return pullback_coefficients(FAMILIES_BUILD[family_form](params), eq.in_form(family_form))
    return pull


def _build_general(params) -> PointTransformation:
    return PointTransformation(_p(params, "T"), _p(params, "X"), _p(params, "U1"), _p(params, "U0", 0))


FAMILIES_BUILD = {Form.STANDARD: _build_general, Form.DIVERGENCE: _build_general}


def _stationary_build(params) -> PointTransformation:
    c1_, c2_, c3_ = (_p(params, k) for k in ("c1", "c2", "c3"))
    U1 = sp.exp(c3_ * t) * _p(params, "W")
    return PointTransformation(c1_ * t + c2_, _p(params, "X"), U1, _p(params, "U0", 0))


def _stationary_pullback(params, eq):
    c1_, c3_ = _p(params, "c1"), _p(params, "c3")
    X, W, U0 = _p(params, "X"), _p(params, "W"), _p(params, "U0", 0)
    A, B, C, D = eq.standard().coefficients
    Xx, Xxx = sp.diff(X, x), sp.diff(X, x, 2)
    Eprime = lambda w: A * sp.diff(w, x, 2) + B * sp.diff(w, x) + C * w
    U1 = sp.exp(c3_ * t) * W
    return (Xx**2 * A / c1_,
            Xx / c1_ * (B - 2 * sp.diff(W, x) / W * A) + Xxx * A / c1_,
            W / c1_ * Eprime(1 / W) + c3_ / c1_,
            U1 / c1_ * (D + _E(eq.standard(), U0 / U1)))


def _pbar_build(params):
    X = _p(params, "X")
    return PointTransformation(_p(params, "T"), X, _p(params, "c") * sp.sqrt(sp.Abs(sp.diff(X, x))))


def _pbar_pullback(params, eq):
    T, X = _p(params, "T"), _p(params, "X")
    A, _, C, _ = eq.standard().coefficients
    Tt = sp.diff(T, t)
    X1, X2, X3 = (sp.diff(X, x, k) for k in (1, 2, 3))
    schw = X3 / (2 * X1) - sp.Rational(3, 4) * (X2 / X1) ** 2
    return (X1**2 * A / Tt, sp.S.Zero, (C - schw * A) / Tt, sp.S.Zero)


def _P_build(params):
    e = _eps(params)
    X1, X0, V = _p(params, "X1"), _p(params, "X0"), _p(params, "V")
    U1 = V * sp.exp(-e * sp.diff(X1, t) / (4 * X1) * x**2 - e * sp.diff(X0, t) / (2 * X1) * x)
    return PointTransformation(_p(params, "T"), X1 * x + X0, U1)


def _P_pullback(params, eq):
    e = _eps(params)
    X1, X0, V = _p(params, "X1"), _p(params, "X0"), _p(params, "V")
    C = eq.standard().C
    Ct = (C + e / 4 * X1 * sp.diff(1 / X1, t, 2) * x**2
          - e / 2 * X1 * sp.diff(sp.diff(X0, t) / X1**2, t) * x
          + sp.diff(V, t) / V + sp.diff(X1, t) / (2 * X1)
          + e / 4 * (sp.diff(X0, t) / X1) ** 2) / X1**2
    return (eq.standard().A, sp.S.Zero, Ct, sp.S.Zero)


def _P_recover(phi):
    X1 = sp.diff(phi.X, x)
    return {"T": phi.T, "X1": X1, "X0": sp.expand(phi.X - X1 * x), "V": phi.U1.subs(x, 0)}


def _Pprime_build(params):
    c1_, c2_, c3_, c4_, c5_ = (_p(params, f"c{i}") for i in range(1, 6))
    return PointTransformation(c1_**2 * t + c2_, c1_ * x + c3_, c4_ * sp.exp(c5_ * t))


def _Pprime_pullback(params, eq):
    c1_, c5_ = _p(params, "c1"), _p(params, "c5")
    std = eq.standard()
    return (std.A, sp.S.Zero, (std.C + c5_) / c1_**2, sp.S.Zero)


def _Pprime_recover(phi):
    c1_ = sp.diff(phi.X, x)
    U1 = phi.U1
    c5_ = sp.simplify(sp.diff(U1, t) / U1)
    return {"c1": c1_, "c2": phi.T.subs(t, 0), "c3": phi.X.subs({t: 0, x: 0}),
            "c4": U1.subs(t, 0), "c5": c5_}


def _Kbar_build(params):
    return PointTransformation(_p(params, "T"), _p(params, "X"), _p(params, "U1"), _p(params, "U0", 0))


def _Kbar_pullback(params, eq):
    T, X = _p(params, "T"), _p(params, "X")
    A, B, _, _ = eq.standard().coefficients
    Tt, Xx, Xt, Xxx = sp.diff(T, t), sp.diff(X, x), sp.diff(X, t), sp.diff(X, x, 2)
    return (Xx**2 * A / Tt, Xx * B / Tt - (Xt - Xxx * A) / Tt, sp.S.Zero, sp.S.Zero)


def _K_build(params):
    X1, X0 = _p(params, "X1"), _p(params, "X0")
    return PointTransformation(_p(params, "T"), X1 * x + X0, _p(params, "c1"), _p(params, "c2", 0))


def _drift_affine(params, B):
    X1, X0 = _p(params, "X1"), _p(params, "X0")
    return B / X1 - (sp.diff(X1, t) * x + sp.diff(X0, t)) / X1**2


def _K_pullback(params, eq):
    std = eq.standard()
    return (std.A, _drift_affine(params, std.B), sp.S.Zero, sp.S.Zero)


def _K_recover(phi):
    X1 = sp.diff(phi.X, x)
    return {"T": phi.T, "X1": X1, "X0": sp.expand(phi.X - X1 * x), "c1": phi.U1, "c2": phi.U0}


def _Kbarprime_build(params):
    c1_, c2_, c3_, c4_ = (_p(params, f"c{i}") for i in range(1, 5))
    return PointTransformation(c1_ * t + c2_, _p(params, "X"), c3_, c4_)


def _Kbarprime_pullback(params, eq):
    c1_, X = _p(params, "c1"), _p(params, "X")
    A, B, _, _ = eq.standard().coefficients
    Xx, Xxx = sp.diff(X, x), sp.diff(X, x, 2)
    return (Xx**2 * A / c1_, (Xx * B + Xxx * A) / c1_, sp.S.Zero, sp.S.Zero)


def _Kbarprime_recover(phi):
    return {"c1": sp.diff(phi.T, t), "c2": phi.T.subs(t, 0), "X": phi.X, "c3": phi.U1, "c4": phi.U0}


def _Kprime_build(params):
    c1_, c2_, c3_, c4_, c5_ = (_p(params, f"c{i}") for i in range(1, 6))
    return PointTransformation(c1_**2 * t + c2_, c1_ * x + c3_, c4_, c5_)


def _Kprime_pullback(params, eq):
    std = eq.standard()
    return (std.A, std.B / _p(params, "c1"), sp.S.Zero, sp.S.Zero)


def _Kprime_recover(phi):
    return {"c1": sp.diff(phi.X, x), "c2": phi.T.subs(t, 0), "c3": phi.X.subs(x, 0),
            "c4": phi.U1, "c5": phi.U0}


def _Fbar_build(params):
    X = _p(params, "X")
    return PointTransformation(_p(params, "T"), X, _p(params, "c1") / sp.diff(X, x))


def _Fbar_pullback(params, eq):
    T, X = _p(params, "T"), _p(params, "X")
    A, B, _, _ = eq.divergence().coefficients
    Tt, Xx, Xt, Xxx = sp.diff(T, t), sp.diff(X, x), sp.diff(X, t), sp.diff(X, x, 2)
    return (Xx**2 * A / Tt, Xx * B / Tt - (Xt + Xxx * A) / Tt, sp.S.Zero, sp.S.Zero)


def _F_build(params):
    X1, X0 = _p(params, "X1"), _p(params, "X0")
    return PointTransformation(_p(params, "T"), X1 * x + X0, _p(params, "c1") / X1)


def _F_pullback(params, eq):
    div = eq.divergence()
    return (div.A, _drift_affine(params, div.B), sp.S.Zero, sp.S.Zero)


def _F_recover(phi):
    X1 = sp.diff(phi.X, x)
    return {"T": phi.T, "X1": X1, "X0": sp.expand(phi.X - X1 * x), "c1": sp.simplify(phi.U1 * X1)}


def _Fbarprime_build(params):
    c1_, c2_, c3_ = (_p(params, f"c{i}") for i in range(1, 4))
    X = _p(params, "X")
    return PointTransformation(c1_ * t + c2_, X, c3_ / sp.diff(X, x))


def _Fbarprime_pullback(params, eq):
    c1_, X = _p(params, "c1"), _p(params, "X")
    A, B, _, _ = eq.divergence().coefficients
    Xx, Xxx = sp.diff(X, x), sp.diff(X, x, 2)
    return (Xx**2 * A / c1_, (Xx * B - Xxx * A) / c1_, sp.S.Zero, sp.S.Zero)


def _Fbarprime_recover(phi):
    return {"c1": sp.diff(phi.T, t), "c2": phi.T.subs(t, 0), "X": phi.X,
            "c3": sp.simplify(phi.U1 * sp.diff(phi.X, x))}


def _Fprime_build(params):
    c1_, c2_, c3_, c4_ = (_p(params, f"c{i}") for i in range(1, 5))
    return PointTransformation(c1_**2 * t + c2_, c1_ * x + c3_, c4_)


def _Fprime_pullback(params, eq):
    div = eq.divergence()
    return (div.A, div.B / _p(params, "c1"), sp.S.Zero, sp.S.Zero)


def _Fprime_recover(phi):
    return {"c1": sp.diff(phi.X, x), "c2": phi.T.subs(t, 0), "c3": phi.X.subs(x, 0), "c4": phi.U1}


def _affine_constraint(params):
    return [sp.diff(_p(params, "T"), t) - _p(params, "X1") ** 2]


_C = lambda *names: tuple(Slot(n, "const") for n in names)

FAMILIES: dict[str, EquivalenceFamily] = {
    "E": EquivalenceFamily(
        "E", ClassFamily.E, (Slot("T", "t"), Slot("X", "tx"), Slot("U1", "tx"), Slot("U0", "tx")),
        _build_general, _general_pullback(Form.STANDARD),
        nonzero=lambda p: [sp.diff(_p(p, "T"), t) * sp.diff(_p(p, "X"), x) * _p(p, "U1")]),
    "E_breve": EquivalenceFamily(
        "E_breve", ClassFamily.E_BREVE, (Slot("T", "t"), Slot("X", "tx"), Slot("U1", "tx"), Slot("U0", "tx")),
        _build_general, _general_pullback(Form.DIVERGENCE), form=Form.DIVERGENCE,
        nonzero=lambda p: [sp.diff(_p(p, "T"), t) * sp.diff(_p(p, "X"), x) * _p(p, "U1")]),
    "E0": EquivalenceFamily(
        "E0", ClassFamily.E0, (Slot("T", "t"), Slot("X", "tx"), Slot("U1", "tx")),
        _build_general, _general_pullback(Form.STANDARD),
        constraints=lambda p: [_p(p, "U0", 0)]),
    "E0_breve": EquivalenceFamily(
        "E0_breve", ClassFamily.E0_BREVE, (Slot("T", "t"), Slot("X", "tx"), Slot("U1", "tx")),
        _build_general, _general_pullback(Form.DIVERGENCE), form=Form.DIVERGENCE,
        constraints=lambda p: [_p(p, "U0", 0)]),
    "E'": EquivalenceFamily(
        "E'", ClassFamily.E_PRIME, _C("c1", "c2", "c3") + (Slot("X", "x"), Slot("W", "x"), Slot("U0", "tx")),
        _stationary_build, _stationary_pullback,
        nonzero=lambda p: [_p(p, "c1"), sp.diff(_p(p, "X"), x) * _p(p, "W")]),
    "E'0": EquivalenceFamily(
        "E'0", ClassFamily.E0_PRIME, _C("c1", "c2", "c3") + (Slot("X", "x"), Slot("W", "x")),
        _stationary_build, _stationary_pullback,
        constraints=lambda p: [_p(p, "U0", 0)],
        nonzero=lambda p: [_p(p, "c1"), sp.diff(_p(p, "X"), x) * _p(p, "W")]),
    "P_bar": EquivalenceFamily(
        "P_bar", ClassFamily.P_BAR, (Slot("T", "t"), Slot("X", "x")) + _C("c"),
        _pbar_build, _pbar_pullback,
        nonzero=lambda p: [sp.diff(_p(p, "T"), t) * sp.diff(_p(p, "X"), x), _p(p, "c")]),
    "P": EquivalenceFamily(
        "P", ClassFamily.P, (Slot("T", "t"), Slot("X1", "t"), Slot("X0", "t"), Slot("V", "t")),
        _P_build, _P_pullback, constraints=_affine_constraint,
        nonzero=lambda p: [_p(p, "X1") * _p(p, "V")], recover=_P_recover, eps_dependent=True),
    "P'": EquivalenceFamily(
        "P'", ClassFamily.P_PRIME, _C("c1", "c2", "c3", "c4", "c5"),
        _Pprime_build, _Pprime_pullback,
        nonzero=lambda p: [_p(p, "c1") * _p(p, "c4")], recover=_Pprime_recover, eps_dependent=True),
    "K_bar": EquivalenceFamily(
        "K_bar", ClassFamily.K_BAR, (Slot("T", "t"), Slot("X", "tx")) + _C("U1", "U0"),
        _Kbar_build, _Kbar_pullback,
        nonzero=lambda p: [sp.diff(_p(p, "T"), t) * sp.diff(_p(p, "X"), x), _p(p, "U1")]),
    "K": EquivalenceFamily(
        "K", ClassFamily.K, (Slot("T", "t"), Slot("X1", "t"), Slot("X0", "t")) + _C("c1", "c2"),
        _K_build, _K_pullback, constraints=_affine_constraint,
        nonzero=lambda p: [_p(p, "X1") * _p(p, "c1")], recover=_K_recover, eps_dependent=True),
    "K_bar'": EquivalenceFamily(
        "K_bar'", ClassFamily.K_BAR_PRIME, _C("c1", "c2", "c3", "c4") + (Slot("X", "x"),),
        _Kbarprime_build, _Kbarprime_pullback,
        nonzero=lambda p: [_p(p, "c1") * _p(p, "c3"), sp.diff(_p(p, "X"), x)],
        recover=_Kbarprime_recover),
    "K'": EquivalenceFamily(
        "K'", ClassFamily.K_PRIME, _C("c1", "c2", "c3", "c4", "c5"),
        _Kprime_build, _Kprime_pullback,
        nonzero=lambda p: [_p(p, "c1") * _p(p, "c4")], recover=_Kprime_recover, eps_dependent=True),
    "F_bar": EquivalenceFamily(
        "F_bar", ClassFamily.F_BAR, (Slot("T", "t"), Slot("X", "tx")) + _C("c1"),
        _Fbar_build, _Fbar_pullback, form=Form.DIVERGENCE,
        nonzero=lambda p: [sp.diff(_p(p, "T"), t) * sp.diff(_p(p, "X"), x), _p(p, "c1")]),
    "F": EquivalenceFamily(
        "F", ClassFamily.F, (Slot("T", "t"), Slot("X1", "t"), Slot("X0", "t")) + _C("c1"),
        _F_build, _F_pullback, constraints=_affine_constraint, form=Form.DIVERGENCE,
        nonzero=lambda p: [_p(p, "X1") * _p(p, "c1")], recover=_F_recover, eps_dependent=True),
    "F_bar'": EquivalenceFamily(
        "F_bar'", ClassFamily.F_BAR_PRIME, _C("c1", "c2", "c3") + (Slot("X", "x"),),
        _Fbarprime_build, _Fbarprime_pullback, form=Form.DIVERGENCE,
        nonzero=lambda p: [_p(p, "c1") * _p(p, "c3"), sp.diff(_p(p, "X"), x)],
        recover=_Fbarprime_recover),
    "F'": EquivalenceFamily(
        "F'", ClassFamily.F_PRIME, _C("c1", "c2", "c3", "c4"),
        _Fprime_build, _Fprime_pullback, form=Form.DIVERGENCE,
        nonzero=lambda p: [_p(p, "c1") * _p(p, "c4")], recover=_Fprime_recover, eps_dependent=True),
}

# families with parameter recovery; used by the closure checks
CLOSED_FAMILIES = ("P", "P'", "K", "K'", "F", "F'", "K_bar'", "F_bar'")


def equivalence_element(family: EquivalenceFamily | str, params: Mapping,
                        check: bool = True, sampler: DomainSampler | None = None):
    """Transformation and arbitrary-element map of one group element.

    The map sends an equation to its image; coefficients are expressed in the
    new variables when the transformation has a closed-form inverse and are
    left pulled back to the old variables (flag ``pulled=True``) otherwise.
    """
    fam = FAMILIES[family] if isinstance(family, str) else family
    if check:
        fam.check(params, sampler)
    phi = fam.build(params)
    phi = replace(phi, name=fam.id)

    def element_map(eq: LinearEvolutionEquation) -> LinearEvolutionEquation:
        pulled = fam.pullback(params, eq)
        form = fam.form
        try:
            inv = invert(phi, eq.domain)
        except NoClosedFormInverse:
            out = LinearEvolutionEquation(*pulled, form=form, domain=eq.domain)
            object.__setattr__(out, "pulled", True)
            return out
        at = {t: inv.T, x: inv.X}
        return LinearEvolutionEquation(*(c.subs(at, simultaneous=True) for c in pulled),
                                       form=form, domain=_image_domain(phi, eq.domain))

    element_map.pulled_back = lambda eq: fam.pullback(params, eq)
    return phi, element_map
