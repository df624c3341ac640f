"""Mapping heat equations with potentials onto Kolmogorov and Fokker-Planck equations.

A nonvanishing solution W of eps W'' + (C + lam) W = 0 gives the drift
B = 2 eps epsb W'/W, and the transformation u~ = e^{lam t} u / W (epsb = 1) or
u~ = e^{lam t} W u (epsb = -1) carries u_t = eps u_xx + C u to the Kolmogorov
or Fokker-Planck equation with that drift.  B then obeys the Riccati relation
B_x = -2 epsb (C + lam) - eps epsb B^2 / 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma as _gamma
from typing import Mapping, Sequence

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

from .equations import LinearEvolutionEquation, fokker_planck, heat, kolmogorov
from .expr import (DomainSampler, Expr, RewriteRule, as_expr, evaluate, fn, parse, render,
                   t, u, x)
from .fields import D_Bk, P_B, Pbar_B
from .jet import VectorField
from .report import VerificationReport
from .transforms import PointTransformation, compose, invert, pullback_coefficients


class SingularityError(ValueError):
    pass


class VanishingError(ValueError):
    """W (hence the drift) vanishes where it is needed."""


# -- the W equation ----------------------------------------------------------

@dataclass(frozen=True)
class WSolution:
    """Dense RK solution of eps W'' + (C + lam) W = 0 on [lo, hi].

    ``subintervals`` are the maximal pieces of [lo, hi] on which W keeps a sign.
    """

    C: Expr
    lam: float
    eps: int
    params: Mapping[str, float]
    lo: float
    hi: float
    x0: float
    pieces: tuple
    zeros: tuple[float, ...]
    _C: object = field(repr=False, compare=False)
    _Cx: object = field(repr=False, compare=False)

    @property
    def subintervals(self) -> list[tuple[float, float]]:
        cuts = [self.lo, *self.zeros, self.hi]
        return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]

    def widest_subinterval(self, margin: float = 0.05) -> tuple[float, float]:
        a, b = max(self.subintervals, key=lambda ab: ab[1] - ab[0])
        pad = margin * (b - a)
        return a + pad, b - pad

    def _state(self, xv: np.ndarray) -> np.ndarray:
        xv = np.asarray(xv, dtype=float)
        out = np.empty((2,) + xv.shape)
        for lo, hi, sol in self.pieces:
            m = (xv >= lo - 1e-12) & (xv <= hi + 1e-12)
            if np.any(m):
                out[:, m] = sol(xv[m])
        return out

    def __call__(self, xv, order: int = 0):
        xv = np.asarray(xv, dtype=float)
        if np.any(xv < self.lo - 1e-12) or np.any(xv > self.hi + 1e-12):
            raise ValueError("point outside the integration interval")
        W, Wp = self._state(xv)
        if order == 0:
            return W
        if order == 1:
            return Wp
        q = self._C(xv) + self.lam
        if order == 2:
            return -self.eps * q * W
        if order == 3:
            return -self.eps * (self._Cx(xv) * W + q * Wp)
        raise ValueError("W derivatives are available up to order 3")

    def oracle(self):
        return lambda values, orders: self(values[0], orders[0])


def _c_funcs(C: Expr, params: Mapping[str, float]):
    C = as_expr(C).subs({sp.Symbol(k, real=True): v for k, v in params.items()})
    if C.free_symbols - {x}:
        raise ValueError(f"C has unbound parameters {sorted(s.name for s in C.free_symbols - {x})}")
    f = sp.lambdify(x, C, "numpy")
    fx = sp.lambdify(x, sp.diff(C, x), "numpy")
    return (lambda v: np.asarray(f(v), dtype=float) + 0 * np.asarray(v, dtype=float),
            lambda v: np.asarray(fx(v), dtype=float) + 0 * np.asarray(v, dtype=float))


def solve_W(C, lam: float, eps: int, x0: float, W0: float, W0p: float,
            interval: tuple[float, float], params: Mapping[str, float] | None = None,
            rtol: float = 1e-10, atol: float = 1e-12, grid: int = 2001) -> WSolution:
    """Integrate eps W'' + (C + lam) W = 0 from (x0, W0, W0p) over ``interval``."""
    params = dict(params or {})
    lo, hi = map(float, interval)
    if not lo <= x0 <= hi:
        raise ValueError("x0 must lie in the interval")
    Cf, Cx = _c_funcs(parse(C) if isinstance(C, str) else C, params)
    with np.errstate(all="ignore"):
        probe = Cf(np.linspace(lo, hi, grid))
    if not np.all(np.isfinite(probe)):
        raise SingularityError(f"C is singular on [{lo}, {hi}]")

    def rhs(xv, y):
        return [y[1], -eps * (Cf(xv) + lam) * y[0]]

    def crossing(xv, y):
        return y[0]

    pieces, zeros = [], []
    for end in (hi, lo):
        if end == x0:
            continue
        # capped step keeps the dense interpolant near the step tolerance
        sol = solve_ivp(rhs, (x0, end), [W0, W0p], method="DOP853", rtol=rtol, atol=atol,
                        dense_output=True, events=crossing, max_step=0.1)
        if sol.status != 0:
            raise RuntimeError(f"integration failed: {sol.message}")
        zeros.extend(float(z) for z in sol.t_events[0] if abs(z - x0) > 1e-12)
        pieces.append((min(x0, end), max(x0, end), sol.sol))
    if W0 == 0:
        zeros.append(float(x0))
    return WSolution(as_expr(C) if not isinstance(C, str) else parse(C), float(lam), int(eps),
                     params, lo, hi, float(x0), tuple(pieces), tuple(sorted(set(zeros))), Cf, Cx)


# -- drifts ----------------------------------------------------------------

def riccati_rule(C, lam, eps_, epsb_, B: Expr | None = None) -> RewriteRule:
    """B_x -> -2 epsb (C + lam) - eps epsb B^2 / 2."""
    B = fn("B", x) if B is None else B
    C, lam = as_expr(C), as_expr(lam)
    return RewriteRule(B, x, 1, -2 * epsb_ * (C + lam) - eps_ * epsb_ * B**2 / 2)


class DriftOracle:
    """B = 2 eps epsb W'/W and its first two derivatives from a numeric W."""

    def __init__(self, W: WSolution, eps_: int, epsb_: int):
        self.W, self.k = W, 2 * eps_ * epsb_

    def __call__(self, xv, order: int = 0):
        W = self.W
        w0, w1 = W(xv, 0), W(xv, 1)
        if np.any(np.abs(w0) < 1e-12):
            raise VanishingError("W vanishes at an evaluation point")
        r1 = w1 / w0
        if order == 0:
            return self.k * r1
        r2 = W(xv, 2) / w0
        if order == 1:
            return self.k * (r2 - r1**2)
        if order == 2:
            return self.k * (W(xv, 3) / w0 - 3 * r1 * r2 + 2 * r1**3)
        raise ValueError("drift derivatives are available up to order 2")

    def oracle(self):
        return lambda values, orders: self(values[0], orders[0])


def drift_from_W(W, eps_, epsb_, interval: tuple[float, float] | None = None):
    """Drift 2 eps epsb W'/W: an Expr for closed-form W, a DriftOracle otherwise."""
    if isinstance(W, WSolution):
        a, b = interval or (W.lo, W.hi)
        if any(a < z < b for z in W.zeros):
            raise VanishingError(f"W vanishes inside [{a}, {b}]")
        return DriftOracle(W, eps_, epsb_)
    W = as_expr(W)
    if W == 0:
        raise VanishingError("W is identically zero")
    if interval is not None and not W.free_symbols - {x}:
        grid = np.linspace(*interval, 401)
        vals = np.asarray(evaluate(W, {"x": grid}))
        if np.any(np.abs(vals) < 1e-12) or np.any(np.sign(vals) != np.sign(vals[0])):
            raise VanishingError(f"W vanishes inside {list(interval)}")
    return sp.simplify(2 * eps_ * epsb_ * sp.diff(W, x) / W)


@dataclass(frozen=True)
class DriftSpec:
    """Potential, spectral parameter, signs and the W that defines the drift."""

    C: Expr
    lam: Expr
    eps: int
    epsb: int
    W: Expr | None = None
    x0: float = 1.0
    W0: float = 1.0
    W0p: float = 0.0
    interval: tuple[float, float] = (0.5, 2.0)
    params: Mapping[str, float] = field(default_factory=dict)

    @property
    def kappa(self) -> Expr:
        return self.eps * as_expr(self.lam)

    @property
    def is_closed_form(self) -> bool:
        return self.W is not None

    def solve(self) -> WSolution:
        lam = float(as_expr(self.lam).subs({sp.Symbol(k, real=True): v for k, v in self.params.items()}))
        return solve_W(self.C, lam, self.eps, self.x0, self.W0, self.W0p, self.interval, self.params)

    def drift(self):
        if self.W is not None:
            return drift_from_W(self.W, self.eps, self.epsb)
        W = self.solve()
        return drift_from_W(W, self.eps, self.epsb, W.widest_subinterval())

    def check(self, tol: float = 1e-8) -> VerificationReport:
        rep = VerificationReport("W equation", tol=tol)
        if self.W is None:
            W = self.solve()
            a, b = W.widest_subinterval()
            grid = np.linspace(a, b, 200)
            # the stored second derivative comes from the ODE; compare with the dense first derivative
            h = 1e-4
            fd = (W(np.clip(grid + h, W.lo, W.hi), 1) - W(np.clip(grid - h, W.lo, W.hi), 1)) / (2 * h)
            err = float(np.max(np.abs(fd - W(grid, 2)) / (1 + np.abs(W(grid, 2)))))
            rep.max_residual, rep.samples = err, len(grid)
            if err > 1e-6:
                rep.fail(f"RK residual {err:.3e}")
            return rep
        res = self.eps * sp.diff(self.W, x, 2) + (as_expr(self.C) + as_expr(self.lam)) * self.W
        sub = {sp.Symbol(k, real=True): v for k, v in self.params.items()}
        grid = np.linspace(*self.interval, 200)
        vals = np.abs(np.asarray(evaluate(res.subs(sub), {"x": grid})))
        rep.max_residual, rep.samples = float(np.max(vals)), len(grid)
        if rep.max_residual > tol:
            rep.fail(f"W does not solve its equation, residual {rep.max_residual:.3e}")
        return rep

    @classmethod
    def from_json(cls, data: Mapping | str) -> "DriftSpec":
        """{"C": ..., "mu": ..., "kappa": ..., "eps": ..., "epsb": ..., "W": {...}}."""
        if isinstance(data, str):
            data = json.loads(data)
        eps_, epsb_ = int(data.get("eps", 1)), int(data.get("epsb", 1))
        params = {k: float(v) for k, v in data.items()
                  if k in ("mu", "nu", "alpha", "a", "b", "a1", "a2")}
        lam = float(data["lam"]) if "lam" in data else eps_ * float(data.get("kappa", 0))
        wspec = data.get("W", {"type": "ode"})
        C = parse(str(data.get("C", "0")))
        if wspec.get("type") == "closed":
            return cls(C, lam, eps_, epsb_, parse(wspec["expr"]),
                       interval=tuple(wspec.get("interval", (0.5, 2.0))), params=params)
        return cls(C, lam, eps_, epsb_, None, float(wspec.get("x0", 1.0)),
                   float(wspec.get("W0", 1.0)), float(wspec.get("W0p", 0.0)),
                   tuple(map(float, wspec.get("interval", (0.5, 2.0)))), params)


# -- mapping transformations ------------------------------------------------------

TO_KOLMOGOROV = "kolmogorov"
TO_FOKKER_PLANCK = "fokker-planck"


def mapping_transformation(lam, W: Expr, direction: str = TO_KOLMOGOROV) -> PointTransformation:
    """Phi: u~ = e^{lam t} u / W (to Kolmogorov) or Psi: u~ = e^{lam t} W u (to Fokker-Planck)."""
    lam, W = as_expr(lam), as_expr(W)
    if direction == TO_KOLMOGOROV:
        U1, name = sp.exp(lam * t) / W, "Phi"
    elif direction == TO_FOKKER_PLANCK:
        U1, name = sp.exp(lam * t) * W, "Psi"
    else:
        raise ValueError(f"unknown direction {direction!r}")
    phi = PointTransformation(t, x, U1, 0, name=name)
    return phi.with_inverse(PointTransformation(t, x, 1 / U1, 0, name=f"{name}^-1"))


def target_equation(C, lam, W, eps_, epsb_) -> LinearEvolutionEquation:
    """The Kolmogorov (epsb = 1) or Fokker-Planck (epsb = -1) image of the heat equation."""
    B = 2 * eps_ * epsb_ * sp.diff(as_expr(W), x) / as_expr(W)
    return kolmogorov(B, eps_) if epsb_ == 1 else fokker_planck(B, eps_)


def additional_equivalence(lam1, W1, lam2, W2, direction: str = TO_FOKKER_PLANCK) -> PointTransformation:
    """Psi_2 o Psi_1^{-1}: links two drifts obtained from one potential."""
    m1 = mapping_transformation(lam1, W1, direction)
    m2 = mapping_transformation(lam2, W2, direction)
    out = compose(m1.inverse, m2, check_overlap=False)
    return out


# -- Airy functions by power series ----------------------------------------------

@lru_cache(maxsize=8)
def _airy_coefficients(n_terms: int) -> tuple[np.ndarray, np.ndarray]:
    deg = 3 * n_terms + 2
    f, g = np.zeros(deg + 1), np.zeros(deg + 1)
    f[0], g[1] = 1.0, 1.0
    for n in range(deg - 2):
        f[n + 3] = f[n] / ((n + 3) * (n + 2))
        g[n + 3] = g[n] / ((n + 3) * (n + 2))
    return f, g


def airy_series(xv, n_terms: int = 40, order: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """(Ai, Bi) or their ``order``-th derivatives from the Maclaurin series."""
    f, g = _airy_coefficients(n_terms)
    fp = np.polynomial.Polynomial(f).deriv(order) if order else np.polynomial.Polynomial(f)
    gp = np.polynomial.Polynomial(g).deriv(order) if order else np.polynomial.Polynomial(g)
    c1 = 1.0 / (3 ** (2 / 3) * _gamma(2 / 3))
    c2 = 1.0 / (3 ** (1 / 3) * _gamma(1 / 3))
    xv = np.asarray(xv, dtype=float)
    F, G = fp(xv), gp(xv)
    return c1 * F - c2 * G, np.sqrt(3.0) * (c1 * F + c2 * G)


def airy_oracle(a1_: float, a2_: float, shift: float = 0.0):
    """Oracle for W(x) = a1 Ai(x - shift) + a2 Bi(x - shift)."""
    def oracle(values, orders):
        ai, bi = airy_series(values[0] - shift, order=orders[0])
        return a1_ * ai + a2_ * bi
    return oracle


def airy_drift_oracle(a1_: float, a2_: float, eps_: int, epsb_: int, shift: float = 0.0):
    """Oracle for B = 2 eps epsb W'/W with the Airy W, derivatives up to order 2."""
    W = airy_oracle(a1_, a2_, shift)
    k = 2 * eps_ * epsb_

    def oracle(values, orders):
        v = values[0]
        w = [W((v,), (n,)) for n in range(4)]
        if np.any(np.abs(w[0]) < 1e-12):
            raise VanishingError("Airy combination vanishes at an evaluation point")
        r1, r2, r3 = w[1] / w[0], w[2] / w[0], w[3] / w[0]
        return k * [r1, r2 - r1**2, r3 - 3 * r1 * r2 + 2 * r1**3][orders[0]]

    return oracle


# -- mapped symmetry bases -------------------------------------------------------

TABLE2_ROWS = ("0", "1", "1'", "1''", "1a", "1b", "2", "2'", "2''", "2a", "2b", "2c")

# potentials per row; eps enters through the symbol
_EPS = sp.Symbol("eps", real=True)
_MU = sp.Symbol("mu", real=True)
TABLE2_POTENTIALS = {
    "0": fn("C", x), "1": _MU / x**2, "1'": _MU / x**2, "1''": _MU / x**2,
    "1a": _MU / x**2 + _EPS * x**2, "1b": _MU / x**2 - _EPS * x**2,
    "2": sp.S.Zero, "2'": sp.S.Zero, "2''": sp.S.Zero,
    "2a": _EPS * x**2, "2b": -_EPS * x**2, "2c": -_EPS * x,
}
# kappa is pinned by the row where the list says so
TABLE2_KAPPA = {"1": 0, "1'": 1, "1''": -1, "2": 0, "2'": 1, "2''": -1, "2c": 0}


def mapped_symmetries(case_id: str, B: Expr | None = None, kappa_=None, eps_=_EPS,
                      epsb_=1) -> list[VectorField]:
    """Extension fields of a Table-2 row (the kernel d_t, u d_u is not included).

    ``epsb_`` does not enter the fields; it only fixes which class the drift
    belongs to and is accepted for symmetry of the interface.
    """
    row = case_id.split(".")[-1].removeprefix("case")
    if row not in TABLE2_ROWS:
        raise KeyError(f"unknown Table 2 row {case_id!r}")
    k = TABLE2_KAPPA.get(row, kappa_ if kappa_ is not None else sp.Symbol("kappa", real=True))
    if row in TABLE2_KAPPA and kappa_ is not None and row != "1" and as_expr(kappa_) != k:
        raise ValueError(f"row {row} fixes kappa = {k}")
    if row == "1" and kappa_ is not None:
        k = kappa_
    e = eps_
    D = lambda f: D_Bk(f, k, B, e)
    P = lambda f: P_B(f, B, e)
    Pb = lambda f: Pbar_B(f, B, e)
    h = sp.Rational(3, 2)
    if row == "0":
        return []
    if row in ("1", "1'", "1''"):
        return [D(t), D(t**2)]
    if row == "1a":
        return [D(sp.cos(4 * t)), D(sp.sin(4 * t))]
    if row == "1b":
        return [D(sp.exp(4 * t)), D(sp.exp(-4 * t))]
    if row in ("2", "2'", "2''"):
        return [P(1), P(t), D(t), D(t**2)]
    if row == "2a":
        return [P(sp.sin(2 * t)), P(sp.cos(2 * t)), D(sp.cos(4 * t)), D(sp.sin(4 * t))]
    if row == "2b":
        return [P(sp.exp(2 * t)), P(sp.exp(-2 * t)), D(sp.exp(4 * t)), D(sp.exp(-4 * t))]
    return [Pb(1), Pb(t), D(t) + Pb(t**2) * h, D(t**2) + Pb(t**3)]


def drift_equation(B: Expr | None, eps_, epsb_) -> LinearEvolutionEquation:
    """K'^eps_B for epsb = 1, F'^eps_B for epsb = -1."""
    B = fn("B", x) if B is None else B
    return kolmogorov(B, eps_) if epsb_ == 1 else fokker_planck(B, eps_)


__all__ = [
    "WSolution", "solve_W", "riccati_rule", "DriftOracle", "drift_from_W", "DriftSpec",
    "mapping_transformation", "target_equation", "additional_equivalence", "airy_series",
    "airy_oracle", "airy_drift_oracle", "mapped_symmetries", "drift_equation",
    "TABLE2_ROWS", "TABLE2_POTENTIALS", "TABLE2_KAPPA", "SingularityError", "VanishingError",
    "TO_KOLMOGOROV", "TO_FOKKER_PLANCK",
]
