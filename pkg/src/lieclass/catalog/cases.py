"""Classification cases: equations, symmetry bases and how to check them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy as sp

from ..equations import LinearEvolutionEquation, fokker_planck, heat, kolmogorov
from ..expr import (DomainSampler, Expr, RewriteRule, a, alpha, b, eps, epsb, fn, kappa, mu,
                    oracle_from_expr, t, u, x)
from ..fields import (D_f, D_field, G_field, P_f, Pbar_f, Pi_field, hat_fields)
from ..jet import DT, DX, UDU, VectorField
from ..mapping import (TABLE2_KAPPA, TABLE2_POTENTIALS, DriftOracle, VanishingError,
                       airy_drift_oracle, drift_equation, mapped_symmetries, riccati_rule, solve_W)

HALF = sp.Rational(1, 2)
T_RANGE = (0.2, 1.5)


@dataclass
class CaseInstance:
    """One concrete equation of a case with the fields to verify on it."""

    label: str
    eq: LinearEvolutionEquation
    fields: list[tuple[str, VectorField]]
    sampler: DomainSampler
    rules: tuple[RewriteRule, ...] = ()
    oracles: Mapping | None = None
    tol: float = 1e-8
    closure: bool = True
    time_independent: bool = True


@dataclass(frozen=True)
class ClassificationCase:
    id: str
    tags: tuple[str, ...]
    citation: str
    grid: Mapping[str, tuple]
    build: Callable[[Mapping, np.random.Generator], list[CaseInstance]] = field(repr=False)

    def combos(self, overrides: Mapping[str, Sequence] | None = None) -> list[dict]:
        grid = dict(self.grid)
        for k, v in (overrides or {}).items():
            if k in grid:
                grid[k] = tuple(v)
        keys = sorted(grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]


def _dom(x_range=(0.5, 2.0), t_range=T_RANGE, **fixed) -> DomainSampler:
    return DomainSampler({"t": tuple(t_range), "x": tuple(x_range)},
                         {k: float(v) for k, v in fixed.items()})


# -- heat equations with potentials: general classification -----------------------

def _sample_potential():
    return 2 + sp.sin(x) + x**2 / 3


def _thm_p(case: int):
    def build(p, rng):
        e = p["eps"]
        if case == 1:
            C, extra = fn("C", x), []
            oracles = {"C": oracle_from_expr(_sample_potential(), (x,))}
        elif case == 2:
            C, oracles = mu / x**2, None
            extra = [("D", D_field()), ("Pi", Pi_field(eps))]
        else:
            C, oracles = sp.S.Zero, None
            extra = [("D", D_field()), ("Pi", Pi_field(eps)), ("Px", DX), ("G", G_field(eps))]
        dom = _dom(eps=e, **({"mu": p["mu"]} if case == 2 else {}))
        eq = heat(C, eps, dom)
        fields = [("Pt", DT)] + extra + [("I", UDU)]
        return [CaseInstance(_label(p), eq, fields, dom, oracles=oracles)]
    return build


def _label(p: Mapping) -> str:
    return ",".join(f"{k}={_fmt(v)}" for k, v in sorted(p.items()))


def _fmt(v) -> str:
    if isinstance(v, (tuple, list)):
        return ":".join(_fmt(w) for w in v)
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


# -- Kolmogorov and Fokker-Planck equations ------------------------------------

def _kf_eq(B: Expr, e, eb, dom) -> LinearEvolutionEquation:
    return kolmogorov(B, e, dom) if eb == 1 else fokker_planck(B, e, dom)


def _thm_kf(case: int):
    def build(p, rng):
        e, eb = p["eps"], p["epsb"]
        fixed = {"eps": e, "epsb": eb}
        oracles = None
        if case == 1:
            B = fn("B", x)
            oracles = {"B": oracle_from_expr(sp.sin(x) + x**2, (x,))}
            extra = []
        elif case == 2:
            B = eps * epsb / x * (1 - 2 * a * sp.tan(a * sp.log(x)))
            fixed["a"] = p["a"]
            extra = [("D", D_field() - VectorField(0, 0, HALF * eps * x * B * u)),
                     ("Pi", Pi_field(eps) - VectorField(0, 0, 2 * eps * t * x * B * u))]
        elif case == 3:
            B = eps * epsb * b / x
            fixed["b"] = p["b"]
            extra = [("D", D_field()), ("Pi", Pi_field(eps) - VectorField(0, 0, 2 * epsb * b * t * u))]
        else:
            B = sp.S.Zero
            extra = [("Px", DX), ("D", D_field()), ("Pi", Pi_field(eps)), ("G", G_field(eps))]
        dom = _dom(**fixed)
        eq = _kf_eq(B, eps, eb, dom)
        return [CaseInstance(_label(p), eq, [("Pt", DT)] + extra + [("I", UDU)], dom, oracles=oracles)]
    return build


_S = sp.Symbol("s", real=True)


def _mapped_U(case: int, e: int, eb: int, p: Mapping):
    """Sample solution U of U_t = e eb U_xx + eb C U, the domain and fixed parameters.

    Signs and exponents stay symbolic so one residual serves a whole branch.
    """
    ee = eps * epsb
    lam_ = p.get("lam", 1)
    if case == 1:
        W = 2 + sp.sin(x)
        return sp.exp(lam_ * t) * W, _dom(), {}
    m = float(p.get("mu", 0))
    if case == 2:
        heat_kernel = sp.exp(-x**2 / (4 * ee * t))
        if 4 * e * m < 1:
            U = t ** (-_S - HALF) * x**_S * heat_kernel
            return U, _dom(), {"s": 0.5 + 0.5 * np.sqrt(1 - 4 * e * m)}
        phase = sp.cos(alpha * sp.log(x / t))
        U = sp.sqrt(x) / t * phase * heat_kernel
        return U, _dom().constrain(nonzero=[phase]), {"alpha": 0.5 * np.sqrt(4 * e * m - 1)}
    U = 1 + sp.exp(-x**2 / (4 * ee * t)) / sp.sqrt(t)
    return U, _dom(), {}


def _thm_kf_mapped(case: int):
    names = {1: ["Pt"], 2: ["Pt", "D", "Pi"], 3: ["Pt", "D", "Pi", "Px", "G"]}[case]

    def build(p, rng):
        e, eb = p["eps"], p["epsb"]
        U, dom, extra = _mapped_U(case, e, eb, p)
        B = 2 * eps * epsb * sp.diff(U, x) / U
        dom = DomainSampler(dict(dom.intervals), {"eps": e, "epsb": eb, **extra}, dom.positive,
                            dom.nonzero, dom.margin)
        eq = _kf_eq(B, eps, eb, dom)
        hf = hat_fields(U, epsb, eps)
        fields = [(n, hf[n]) for n in names] + [("I", UDU)]
        return [CaseInstance(_label(p), eq, fields, dom, time_independent=False)]
    return build


# -- time-independent potentials ------------------------------------------------

_T1_ROWS = {
    "0": (fn("C", x), []),
    "1": (mu / x**2, [("D(t)", D_f(t)), ("D(t^2)", D_f(t**2))]),
    "1a": (mu / x**2 + eps * x**2, [("D(cos4t)", D_f(sp.cos(4 * t))), ("D(sin4t)", D_f(sp.sin(4 * t)))]),
    "1b": (mu / x**2 - eps * x**2, [("D(e^4t)", D_f(sp.exp(4 * t))), ("D(e^-4t)", D_f(sp.exp(-4 * t)))]),
    "2": (sp.S.Zero, [("P(1)", P_f(1)), ("P(t)", P_f(t)), ("D(t)", D_f(t)), ("D(t^2)", D_f(t**2))]),
    "2a": (eps * x**2, [("P(cos2t)", P_f(sp.cos(2 * t))), ("P(sin2t)", P_f(sp.sin(2 * t))),
                        ("D(cos4t)", D_f(sp.cos(4 * t))), ("D(sin4t)", D_f(sp.sin(4 * t)))]),
    "2b": (-eps * x**2, [("P(e^2t)", P_f(sp.exp(2 * t))), ("P(e^-2t)", P_f(sp.exp(-2 * t))),
                         ("D(e^4t)", D_f(sp.exp(4 * t))), ("D(e^-4t)", D_f(sp.exp(-4 * t)))]),
    "2c": (x, [("Pbar(1)", Pbar_f(1)), ("Pbar(t)", Pbar_f(t)),
               ("D(t)-3/2 eps Pbar(t^2)", D_f(t) - Pbar_f(t**2) * (sp.Rational(3, 2) * eps)),
               ("D(t^2)-eps Pbar(t^3)", D_f(t**2) - Pbar_f(t**3) * eps)]),
}


def _table1(row: str):
    C, extra = _T1_ROWS[row]

    def build(p, rng):
        fixed = {"eps": p["eps"]}
        if "mu" in p:
            fixed["mu"] = p["mu"]
        dom = _dom(**fixed)
        oracles = {"C": oracle_from_expr(_sample_potential(), (x,))} if row == "0" else None
        eq = heat(C, eps, dom)
        fields = [("Pt", DT), ("I", UDU)] + list(extra)
        return [CaseInstance(_label(p), eq, fields, dom, oracles=oracles)]
    return build


# -- time-independent drifts ------------------------------------------------------

# nonvanishing closed-form W per row: (label, W, fixed parameters, x-range)
def _elementary_W(row: str, e: int):
    out = []
    if row == "1":
        for al in (sp.Rational(1, 2), sp.Integer(1)):
            out.append((f"sqrt(x)cos({al} ln x)", sp.sqrt(x) * sp.cos(al * sp.log(x)),
                        {"mu": float(e * (1 + 4 * al**2) / 4)}, (0.5, 2.0)))
        out.append(("sqrt(x)", sp.sqrt(x), {"mu": e / 4}, (0.5, 2.0)))
        out.append(("sqrt(x) ln x", sp.sqrt(x) * sp.log(x), {"mu": e / 4}, (1.2, 3.0)))
        for al in (sp.Rational(1, 4), sp.Integer(1)):
            for c1_, c2_ in ((1, 0), (0, 1), (1, 1)):
                W = sp.sqrt(x) * (c1_ * x**al + c2_ * x**-al)
                out.append((f"sqrt(x)({c1_}x^{al}+{c2_}x^-{al})", W,
                            {"mu": float(e * (1 - 4 * al**2) / 4)}, (0.5, 2.0)))
    elif row == "2":
        out += [("1", sp.S.One, {}, (0.5, 2.0)), ("x", x, {}, (0.5, 2.0)),
                ("1+x", 1 + x, {}, (0.5, 2.0))]
    elif row == "2'":
        out += [("cos x", sp.cos(x), {}, (0.2, 1.3)), ("cos x + sin x", sp.cos(x) + sp.sin(x), {}, (0.2, 1.3))]
    elif row == "2''":
        out += [("e^x", sp.exp(x), {}, (0.5, 2.0)), ("cosh x", sp.cosh(x), {}, (0.5, 2.0)),
                ("sinh x", sp.sinh(x), {}, (0.5, 2.0))]
    return out


TABLE2_ELEMENTARY = ("1", "2", "2'", "2''")
TABLE2_ODE = ("1", "1'", "1''", "1a", "1b", "2a", "2b")


def _named_fields(row, B, k, e):
    fs = mapped_symmetries(row, B, k, e)
    names = {
        "1": ["D(t)", "D(t^2)"], "1'": ["D(t)", "D(t^2)"], "1''": ["D(t)", "D(t^2)"],
        "1a": ["D(cos4t)", "D(sin4t)"], "1b": ["D(e^4t)", "D(e^-4t)"],
        "2": ["P(1)", "P(t)", "D(t)", "D(t^2)"], "2'": ["P(1)", "P(t)", "D(t)", "D(t^2)"],
        "2''": ["P(1)", "P(t)", "D(t)", "D(t^2)"],
        "2a": ["P(sin2t)", "P(cos2t)", "D(cos4t)", "D(sin4t)"],
        "2b": ["P(e^2t)", "P(e^-2t)", "D(e^4t)", "D(e^-4t)"],
        "2c": ["Pbar(1)", "Pbar(t)", "D(t)+3/2 Pbar(t^2)", "D(t^2)+Pbar(t^3)"],
    }.get(row, [])
    return [("Pt", DT), ("I", UDU)] + list(zip(names, fs))


def _table2(row: str):
    C = TABLE2_POTENTIALS[row]

    def build(p, rng):
        e, eb = p["eps"], p["epsb"]
        out: list[CaseInstance] = []
        # abstract drift under the Riccati rule, for every row
        k = TABLE2_KAPPA.get(row, p.get("kappa", 1))
        fixed = {"eps": e, "epsb": eb, "mu": p.get("mu", 1.0)}
        dom = _dom(**fixed)
        eq = drift_equation(None, e, eb).with_domain(dom)
        if row == "0":
            # generic drift: only the kernel, checked with a sample B
            orc = {"B": oracle_from_expr(sp.sin(x) + x**2, (x,))}
            out.append(CaseInstance(f"generic[{_label(p)}]", eq, _named_fields(row, None, k, e), dom,
                                    oracles=orc))
        else:
            rule = riccati_rule(C, e * k, e, eb)
            out.append(CaseInstance(f"riccati[{_label(p)}]", eq, _named_fields(row, None, k, e), dom,
                                    rules=(rule,)))
        if row in TABLE2_ELEMENTARY:
            for name, W, params, xr in _elementary_W(row, e):
                B = sp.simplify(2 * e * eb * sp.diff(W, x) / W)
                d = _dom(xr, eps=e, epsb=eb, **params)
                out.append(CaseInstance(f"W={name}[{_label(p)}]", drift_equation(B, e, eb).with_domain(d),
                                        _named_fields(row, B, k, e), d))
        if row in TABLE2_ODE:
            out.extend(_ode_instances(row, p, rng))
        if row == "2c":
            out.extend(_airy_instances(p))
        return out
    return build


ODE_KAPPAS = (-1, 0, 2)
ODE_DATA = ((1, 0), (0, 1), (1, 1))
ODE_X = (0.5, 3.0)
ODE_X0 = 1.0


def _ode_instances(row: str, p: Mapping, rng: np.random.Generator) -> list[CaseInstance]:
    """Drifts from numerically integrated W; checked against the bare drift equation."""
    e, eb = p["eps"], p["epsb"]
    if "kappa" in p:
        kappas = (p["kappa"],)
    elif row in ("1'", "1''"):
        kappas = (TABLE2_KAPPA[row],)
    else:
        kappas = ODE_KAPPAS
    C = TABLE2_POTENTIALS[row]
    out = []
    for k in kappas:
        for w0, w0p in ODE_DATA:
            m = float(rng.choice([-1.0, 0.5, 1.0, 3.0])) if C.has(mu) else 0.0
            Csub = C.subs({eps: e, mu: m})
            W = solve_W(Csub, e * k, e, ODE_X0, w0, w0p, ODE_X)
            lo, hi = W.widest_subinterval()
            drift = DriftOracle(W, e, eb)
            d = _dom((lo, hi), eps=e, epsb=eb, kappa=k)
            eq = drift_equation(None, e, eb).with_domain(d)
            fields = _named_fields(row, None, k, e)
            label = f"ode[{_label(p)},kappa={k},a1:a2={w0}:{w0p},mu={_fmt(m)},x=({lo:.3f},{hi:.3f})]"
            out.append(CaseInstance(label, eq, fields, d, oracles={"B": drift.oracle()},
                                    tol=1e-6, closure=False))
    return out


def _airy_instances(p: Mapping) -> list[CaseInstance]:
    e, eb = p["eps"], p["epsb"]
    out = []
    for a1_, a2_ in ODE_DATA:
        d = _dom((0.5, 2.5), eps=e, epsb=eb)
        eq = drift_equation(None, e, eb).with_domain(d)
        orc = {"B": airy_drift_oracle(a1_, a2_, e, eb)}
        out.append(CaseInstance(f"airy[{_label(p)},a1:a2={a1_}:{a2_}]", eq,
                                _named_fields("2c", None, 0, e), d, oracles=orc, tol=1e-6))
    return out


# -- registry --------------------------------------------------------------------

SIGNS = (-1, 1)
MUS = (-1, 1, 3)


def _cases() -> list[ClassificationCase]:
    cs: list[ClassificationCase] = []
    add = cs.append
    # general potentials
    add(ClassificationCase("Thm-P.case1", ("P",), "heat equations with potentials: generic C(t,x), kernel only",
                           {"eps": SIGNS}, _thm_p(1)))
    add(ClassificationCase("Thm-P.case2", ("P",), "heat equations with potentials: C = mu/x^2",
                           {"eps": SIGNS, "mu": MUS}, _thm_p(2)))
    add(ClassificationCase("Thm-P.case3", ("P",), "heat equations with potentials: C = 0",
                           {"eps": SIGNS}, _thm_p(3)))
    kf = {"eps": SIGNS, "epsb": SIGNS}
    add(ClassificationCase("Thm-KF.case1", ("K_bar", "F_bar"), "Kolmogorov/Fokker-Planck: generic B(x)",
                           kf, _thm_kf(1)))
    add(ClassificationCase("Thm-KF.case2", ("K_bar", "F_bar"),
                           "Kolmogorov/Fokker-Planck: B = eps epsb (1 - 2a tan(a ln x))/x",
                           {**kf, "a": (0.5, 1.0)}, _thm_kf(2)))
    add(ClassificationCase("Thm-KF.case3", ("K_bar", "F_bar"), "Kolmogorov/Fokker-Planck: B = eps epsb b/x",
                           {**kf, "b": (1.0, 1.5, 3.0)}, _thm_kf(3)))
    add(ClassificationCase("Thm-KF.case4", ("K_bar", "F_bar"), "Kolmogorov/Fokker-Planck: B = 0",
                           kf, _thm_kf(4)))
    add(ClassificationCase("Thm-KF-mapped.case1", ("K", "F"),
                           "time-dependent drifts from U = e^(lam t) W(x): field hat-Pt",
                           kf, _thm_kf_mapped(1)))
    add(ClassificationCase("Thm-KF-mapped.case2", ("K", "F"),
                           "time-dependent drifts from solutions with C = mu/x^2: hat-Pt, hat-D, hat-Pi",
                           {**kf, "mu": MUS}, _thm_kf_mapped(2)))
    add(ClassificationCase("Thm-KF-mapped.case3", ("K", "F"),
                           "time-dependent drifts from solutions of the free equation: five hat fields",
                           kf, _thm_kf_mapped(3)))
    t1_desc = {"0": "generic C(x)", "1": "C = mu/x^2", "1a": "C = mu/x^2 + eps x^2",
               "1b": "C = mu/x^2 - eps x^2", "2": "C = 0", "2a": "C = eps x^2",
               "2b": "C = -eps x^2", "2c": "C = x"}
    for row, desc in t1_desc.items():
        grid = {"eps": SIGNS, **({"mu": MUS} if row.startswith("1") else {})}
        add(ClassificationCase(f"T1.case{row}", ("P'", "E'0"),
                               f"time-independent potentials: {desc}", grid, _table1(row)))
    t2_desc = {"0": "generic B(x)", "1": "C = mu/x^2, kappa = 0", "1'": "C = mu/x^2, kappa = 1",
               "1''": "C = mu/x^2, kappa = -1", "1a": "C = mu/x^2 + eps x^2",
               "1b": "C = mu/x^2 - eps x^2", "2": "C = 0, kappa = 0", "2'": "C = 0, kappa = 1",
               "2''": "C = 0, kappa = -1", "2a": "C = eps x^2", "2b": "C = -eps x^2",
               "2c": "C = -eps x (Airy drifts)"}
    for row, desc in t2_desc.items():
        grid = {**kf}
        if row in ("1a", "1b", "2a", "2b"):
            grid["kappa"] = ODE_KAPPAS
        add(ClassificationCase(f"T2.case{row}", ("K'", "F'", "K_bar'", "F_bar'"),
                               f"time-independent drifts B = 2 eps epsb W'/W: {desc}", grid, _table2(row)))
    return cs


CASES: dict[str, ClassificationCase] = {c.id: c for c in _cases()}
