"""Generating admissible transformations and the invariants of the mu/x^2 symmetry group."""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy as sp

from ..equations import heat
from ..expr import (DomainSampler, JET, evaluate, mu, simplify, t, u, u_t, u_tx, u_x, u_xx, x,
                    zero_test)
from ..jet import total_derivative
from ..report import VerificationReport
from ..transforms import (AdmissibleTransformation, PointTransformation, compose,
                          pushforward_equation, verify_admissible)

QUARTER_PI = sp.pi / 4


def phi1() -> PointTransformation:
    """t~ = tan(2t)/2, x~ = x/cos 2t, u~ = sqrt|cos 2t| e^{-tan(2t) x^2/2} u, on cos 2t > 0."""
    c = sp.cos(2 * t)
    fwd = PointTransformation(sp.tan(2 * t) / 2, x / c, sp.sqrt(sp.Abs(c)) * sp.exp(-sp.tan(2 * t) * x**2 / 2),
                              domain=DomainSampler({"t": (-0.7, 0.7), "x": (0.5, 2.0)}), name="Phi1")
    s = 1 + 4 * t**2
    inv = PointTransformation(sp.atan(2 * t) / 2, x / sp.sqrt(s), s ** sp.Rational(1, 4) * sp.exp(t * x**2 / s),
                              domain=DomainSampler({"t": (-2.0, 2.0), "x": (0.5, 2.0)}), name="Phi1^-1")
    return fwd.with_inverse(inv)


def phi2() -> PointTransformation:
    """t~ = e^{4t}/4, x~ = e^{2t} x, u~ = e^{-x^2/2 - t} u."""
    fwd = PointTransformation(sp.exp(4 * t) / 4, sp.exp(2 * t) * x, sp.exp(-x**2 / 2 - t),
                              domain=DomainSampler({"t": (-0.5, 0.5), "x": (0.5, 2.0)}), name="Phi2")
    inv = PointTransformation(sp.log(4 * t) / 4, x / (2 * sp.sqrt(t)),
                              sp.sqrt(2) * t ** sp.Rational(1, 4) * sp.exp(x**2 / (8 * t)),
                              domain=DomainSampler({"t": (0.05, 2.0), "x": (0.5, 2.0)}), name="Phi2^-1")
    return fwd.with_inverse(inv)


def phi3(literal: bool = False) -> PointTransformation:
    """x~ = x + t^2, u~ = e^{-t x - t^3/3} u takes C = x to C~ = 0.

    With ``literal`` the opposite signs are used (x~ = x - t^2,
    u~ = e^{t x - t^3/3} u); that map takes C = -x to 0 instead.
    """
    s = -1 if literal else 1
    fwd = PointTransformation(t, x + s * t**2, sp.exp(-s * t * x - t**3 / 3),
                              domain=DomainSampler({"t": (-1.0, 1.0), "x": (-2.0, 2.0)}),
                              name="Phi3" + ("(literal)" if literal else ""))
    inv = PointTransformation(t, x - s * t**2, sp.exp(s * t * (x - s * t**2) + t**3 / 3))
    return fwd.with_inverse(inv)


def phi4() -> PointTransformation:
    """t~ = -1/t, x~ = x/t, u~ = sqrt|t| e^{x^2/(4t)} u, for t > 0."""
    fwd = PointTransformation(-1 / t, x / t, sp.sqrt(sp.Abs(t)) * sp.exp(x**2 / (4 * t)),
                              domain=DomainSampler({"t": (0.2, 2.0), "x": (0.5, 2.0)}), name="Phi4")
    return fwd.with_inverse(_phi4_inverse())


def _phi4_inverse() -> PointTransformation:
    # t = -1/t~, x = -x~/t~, u = u~ / (sqrt|t| e^{x^2/(4t)}) evaluated at the old point
    return PointTransformation(-1 / t, -x / t, sp.sqrt(sp.Abs(t)) * sp.exp(x**2 / (4 * t)),
                               domain=DomainSampler({"t": (-5.0, -0.5), "x": (-10.0, 10.0)}), name="Phi4^-1")


def phi0(shift=QUARTER_PI) -> PointTransformation:
    fwd = PointTransformation(t - shift, x, 1, name="Phi0")
    return fwd.with_inverse(PointTransformation(t + shift, x, 1))


def phi0_check() -> PointTransformation:
    """t~ = 4t, x~ = 2x, u~ = u/sqrt 2."""
    fwd = PointTransformation(4 * t, 2 * x, 1 / sp.sqrt(2), name="Phi0check")
    return fwd.with_inverse(PointTransformation(t / 4, x / 2, sp.sqrt(2)))


def phi4_decomposition() -> PointTransformation:
    """Phi1^-1 first, then Phi0, then Phi1, then the scaling."""
    p1 = phi1()
    return compose(compose(compose(p1.inverse, phi0(), check_overlap=False), p1, check_overlap=False),
                   phi0_check(), check_overlap=False)


def generating_triples(mu_value) -> dict[str, AdmissibleTransformation]:
    """The generating transformations and the auxiliary ones at one value of mu."""
    m = sp.nsimplify(mu_value)
    C_src = {"T1": m / x**2 + x**2, "T2": m / x**2 - x**2, "T3": x, "T4": m / x**2,
             "T0": m / x**2 + x**2, "T0check": m / x**2}
    C_tgt = {"T1": m / x**2, "T2": m / x**2, "T3": sp.S.Zero, "T4": m / x**2,
             "T0": m / x**2 + x**2, "T0check": m / x**2}
    maps = {"T1": phi1(), "T2": phi2(), "T3": phi3(), "T4": phi4(), "T0": phi0(),
            "T0check": phi0_check()}
    doms = {"T1": phi1().domain, "T2": phi2().domain, "T3": phi3().domain, "T4": phi4().domain,
            "T0": DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)}),
            "T0check": DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)})}
    out = {}
    for k, phi in maps.items():
        src = heat(C_src[k], 1, doms[k])
        tgt = heat(C_tgt[k], 1, doms[k])
        out[k] = AdmissibleTransformation(src, phi, tgt, name=k)
    return out


def _target_match(T: AdmissibleTransformation, tol: float, rng) -> VerificationReport:
    """Push the source forward and compare with the stated target potential."""
    rep = VerificationReport(f"{T.name}: pushed potential equals target", tol=tol)
    pushed = pushforward_equation(T.phi, T.source)
    tgt = T.target.standard()
    for name, p, q in zip("ABCD", pushed.coefficients, tgt.coefficients):
        d = p - q
        if d == 0 or simplify(d) == 0:
            continue
        z = zero_test(d, pushed.domain, tol, 1000, rng)
        rep.max_residual = max(rep.max_residual, z.max_residual)
        rep.samples += z.samples
        if not z.passed:
            rep.fail(f"coefficient {name} differs, residual {z.max_residual:.3e}")
        else:
            rep.note(f"coefficient {name} matched numerically")
    return rep


def verify_phi4_decomposition(tol: float = 1e-10, n: int = 200, rng=None) -> VerificationReport:
    rng = rng if rng is not None else np.random.default_rng(0)
    rep = VerificationReport("Phi4 = Phi0check . Phi1 . Phi0 . Phi1^-1", tol=tol)
    lhs, rhs = phi4_decomposition(), phi4()
    pts = phi4().domain.sample({"t", "x"}, n, rng)
    for name, p, q in zip(("T", "X", "U1", "U0"), lhs.components, rhs.components):
        d = np.abs(np.asarray(evaluate(p - q, pts)) + 0 * pts["t"])
        scale = 1 + np.abs(np.asarray(evaluate(q, pts)) + 0 * pts["t"])
        worst = float(np.max(d / scale))
        rep.max_residual = max(rep.max_residual, worst)
        if worst > tol:
            rep.fail(f"component {name} differs by {worst:.3e}")
    rep.samples = n
    return rep


def verify_generating_set(mu_samples: Sequence[float] = (-1, 1, 3), tol: float = 1e-10,
                          trials: int = 200, rng=None) -> VerificationReport:
    rng = rng if rng is not None else np.random.default_rng(0)
    rep = VerificationReport("generating set", tol=tol)
    for m in mu_samples:
        for name, T in generating_triples(m).items():
            sub = VerificationReport(f"{name} (mu={m:g})", tol=tol)
            sub.add(verify_admissible(T, tol, trials, rng))
            if name in ("T1", "T2", "T3", "T4"):
                sub.add(_target_match(T, tol, rng))
            rep.add(sub)
    rep.add(verify_phi4_decomposition(tol, 200, rng))
    lit = AdmissibleTransformation(heat(-x, 1, phi3().domain), phi3(literal=True),
                                   heat(0, 1, phi3().domain), name="T3 literal signs, C = -x")
    rep.add(verify_admissible(lit, tol, trials, rng))
    return rep


# -- invariants of the mu/x^2 symmetry group -------------------------------------

_al, _be, _ga, _de, _si = sp.symbols("alpha beta gamma delta sigma", real=True)
_q = sp.symbols("q0:6", real=True)


def group_element() -> PointTransformation:
    """t~ = (al t + be)/(ga t + de), x~ = Lambda x/(ga t + de), u~ = sigma sqrt|ga t + de| e^{ga x^2/(4(ga t + de))} u."""
    den = _ga * t + _de
    lam_ = sp.sqrt(_al * _de - _be * _ga)
    return PointTransformation((_al * t + _be) / den, lam_ * x / den,
                               _si * sp.sqrt(sp.Abs(den)) * sp.exp(_ga * x**2 / (4 * den)))


def I10_expr():
    return x**2 * u_t / u - x**2 * u_x**2 / u**2 - x * u_x / u


def I02_expr():
    return x**2 * (u_xx - u_t) / u


@lru_cache(maxsize=1)
def _I10_transport():
    """Lambdified I10 of f and of its image under a group element, f = exp(quadratic)."""
    f = sp.exp(_q[0] + _q[1] * t + _q[2] * x + _q[3] * t * x + _q[4] * x**2 + _q[5] * t**2)
    g = group_element()
    T, X, U1 = g.T, g.X, g.U1
    w = U1 * f
    Tt, Xt, Xx = sp.diff(T, t), sp.diff(X, t), sp.diff(X, x)
    w_x = sp.diff(w, x) / Xx
    w_t = (sp.diff(w, t) - Xt * w_x) / Tt
    I_new = X**2 * w_t / w - X**2 * w_x**2 / w**2 - X * w_x / w
    I_old = I10_expr().subs({u: f, u_t: sp.diff(f, t), u_x: sp.diff(f, x)})
    args = (t, x, _al, _be, _ga, _de, _si) + _q
    return (sp.lambdify(args, I_new, "numpy"),
            sp.lambdify(args, I_old, "numpy"))


def verify_invariant_I10(elements: int = 50, points: int = 100, tol: float = 1e-8,
                         rng=None, include_identity: bool = True) -> VerificationReport:
    """Numerical invariance of I10 under sampled group elements (off the solution set)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    new, old = _I10_transport()
    rep = VerificationReport("I10 invariance", tol=tol)
    params = []
    if include_identity:
        params.append((1.0, 0.0, 0.0, 1.0, 1.0))
        params.append((4.0, 0.0, 0.0, 1.0, 1.0))
    while len(params) < elements:
        al, de = rng.uniform(0.5, 2.0, 2)
        be, ga = rng.uniform(-0.4, 0.4, 2)
        si = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        if al * de - be * ga > 0.1:
            params.append((al, be, ga, de, si))
    for p in params:
        tv = rng.uniform(0.0, 1.0, points)
        xv = rng.uniform(0.5, 2.0, points)
        qv = rng.uniform(-1.0, 1.0, (6, points))
        a_ = new(tv, xv, *p, *qv)
        b_ = old(tv, xv, *p, *qv)
        res = float(np.max(np.abs(a_ - b_) / (1 + np.abs(b_))))
        child = VerificationReport(f"element {tuple(round(v, 4) for v in p)}", res <= tol, res, points, tol)
        rep.add(child)
    return rep


def Di1(F):
    return x**2 * (total_derivative(F, t, 3) - 2 * u_x / u * total_derivative(F, x, 3))


def Di2(F):
    return x * total_derivative(F, x, 3)


SAMPLE_JET_EXPRS = (u, u_x, x * u_t, u_t / u, t * x * u_x**2 / u)


def verify_commutator(exprs=SAMPLE_JET_EXPRS, tol: float = 1e-10, points: int = 200,
                      rng=None) -> VerificationReport:
    """[Di1, Di2] F = 2 (I02 + I10) Di2 F - 2 Di1 F, evaluated off-shell."""
    rng = rng if rng is not None else np.random.default_rng(0)
    rep = VerificationReport("invariant differentiation commutator", tol=tol)
    dom = DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)})
    for F in exprs:
        lhs = Di1(Di2(F)) - Di2(Di1(F))
        rhs = 2 * (I02_expr() + I10_expr()) * Di2(F) - 2 * Di1(F)
        z = zero_test(sp.expand(lhs - rhs), dom, tol, points, rng)
        child = VerificationReport(f"F = {F}", z.passed, z.max_residual, z.samples, tol)
        rep.add(child)
    return rep


__all__ = ["phi0", "phi0_check", "phi1", "phi2", "phi3", "phi4", "phi4_decomposition",
           "generating_triples", "verify_generating_set", "verify_phi4_decomposition",
           "group_element", "I10_expr", "I02_expr", "verify_invariant_I10", "Di1", "Di2",
           "verify_commutator", "SAMPLE_JET_EXPRS"]
