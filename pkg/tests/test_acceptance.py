"""Acceptance criteria, one test each.

Every test records a pass/fail line that pytest echoes in its terminal summary.
Running this file directly prints the same lines without pytest.
"""

import json
import os
import subprocess
import sys
import tempfile
import time

import numpy as np
import sympy as sp

from conftest import ACCEPTANCE
from families import random_params
from lieclass.catalog import suite_ids, verify_case, verify_commutator, verify_generating_set
from lieclass.catalog import verify_invariant_I10, verify_phi4_decomposition
from lieclass.equations import (ClassTag, Form, LinearEvolutionEquation, adjoint_tag, fokker_planck,
                                formal_adjoint)
from lieclass.expr import DomainSampler, evaluate, mu, t, x
from lieclass.jet import DT, UDU
from lieclass.mapping import (DriftOracle, additional_equivalence, drift_equation,
                              mapped_symmetries, riccati_rule, solve_W)
from lieclass.symmetry import algebra_closure, is_lie_symmetry
from lieclass.transforms import CLOSED_FAMILIES, FAMILIES, compose, pushforward_equation


def record(n: int, title: str, ok: bool, note: str) -> None:
    ACCEPTANCE[n] = (title, bool(ok), note)


def run_cases(ids, trials=200):
    worst, failed = 0.0, []
    for cid in ids:
        rep = verify_case(cid, trials=trials, rng=np.random.default_rng([7, len(cid)]))
        worst = max(worst, rep.max_residual)
        if not rep.passed:
            failed.append(cid)
    return worst, failed


# 1 ----------------------------------------------------------------------------------------

def test_table1_suite():
    ids = [f"T1.case{r}" for r in ("1", "1a", "1b", "2", "2a", "2b", "2c")]
    start = time.perf_counter()
    worst, failed = run_cases(ids)
    ok = not failed and worst < 1e-8
    record(1, "Table 1 fields and closure", ok,
           f"{len(ids) - len(failed)}/{len(ids)} cases, max residual {worst:.1e}, "
           f"{time.perf_counter() - start:.1f}s")
    assert ok, failed


# 4 (runs before 2: the Riccati oracle has to hold before the symbolic rows mean anything) ----

RICCATI_COMBOS = [
    (sp.S.Zero, -1.0, 1, 1, {}),
    (sp.S.Zero, 1.0, -1, -1, {}),
    (mu / x**2, 1.0, 1, -1, {"mu": 1.0}),
    (mu / x**2, 0.5, -1, 1, {"mu": 3.0}),
    (-x, 0.5, 1, 1, {}),
]


def riccati_oracle_residual() -> float:
    worst = 0.0
    for C, lam_, e, eb, params in RICCATI_COMBOS:
        W = solve_W(C, lam_, e, 1.0, 1.0, 0.3, (0.5, 3.0), params)
        drift = DriftOracle(W, e, eb)
        Cn = C.subs({mu: params.get("mu", 0)})
        rule = riccati_rule(Cn, lam_, e, eb)
        a, b = W.widest_subinterval()
        pad = 0.05 * (b - a)
        g = np.linspace(a + pad, b - pad, 50)
        h = 1e-5
        fd = (drift(g + h) - drift(g - h)) / (2 * h)
        pred = np.asarray(evaluate(rule.replacement, {"x": g}, {"B": drift.oracle()}), float)
        worst = max(worst, float(np.max(np.abs(fd - pred))))
    return worst


def test_riccati_oracle():
    r = riccati_oracle_residual()
    ok = r < 1e-6
    record(4, "Riccati oracle against integrated W", ok,
           f"{len(RICCATI_COMBOS)} combinations x 50 points, max |B_x - rule| {r:.1e}")
    assert ok


# 2 ----------------------------------------------------------------------------------------

def test_table2_suite():
    # the oracle is re-checked here so this test stands on its own
    assert riccati_oracle_residual() < 1e-6
    ids = suite_ids("table2")
    start = time.perf_counter()
    worst, failed = run_cases(ids)
    ok = not failed
    record(2, "Table 2 rows for both drift classes", ok,
           f"{len(ids) - len(failed)}/{len(ids)} rows, max residual {worst:.1e}, "
           f"{time.perf_counter() - start:.1f}s")
    assert ok, failed


# 3 ----------------------------------------------------------------------------------------

def test_generating_set():
    rng = np.random.default_rng(3)
    gs = verify_generating_set((-1, 1, 3), 1e-10, 200, rng)
    dec = verify_phi4_decomposition(1e-10, 200, rng)
    ok = gs.passed and dec.passed
    record(3, "generating transformations and T4 decomposition", ok,
           f"targets max residual {gs.max_residual:.1e}, decomposition {dec.max_residual:.1e}")
    assert ok, gs.summary() + dec.summary()


# 5 ----------------------------------------------------------------------------------------

def component_gap(p, q, pts) -> float:
    worst = 0.0
    for a, b in zip(p.components, q.components):
        va = np.asarray(evaluate(a, pts), float) + 0 * pts["x"]
        vb = np.asarray(evaluate(b, pts), float) + 0 * pts["x"]
        worst = max(worst, float(np.max(np.abs(va - vb) / (1 + np.abs(va)))))
    return worst


def test_equivalence_group_closure():
    rng = np.random.default_rng(5)
    pts = {"t": rng.uniform(0.1, 0.4, 20), "x": rng.uniform(0.5, 1.0, 20)}
    worst, constraint_ok, start = 0.0, True, time.perf_counter()
    for fid in CLOSED_FAMILIES:
        fam = FAMILIES[fid]
        for _ in range(100):
            e = int(rng.choice([-1, 1]))
            c = compose(fam.build(random_params(fid, rng, e)), fam.build(random_params(fid, rng, e)),
                        check_overlap=False)
            rec = fam.recover(c)
            if fam.eps_dependent:
                rec["eps"] = e
            worst = max(worst, component_gap(c, fam.build(rec), pts))
            if fid in ("P", "K", "F"):
                constraint_ok &= sp.expand(sp.diff(c.T, t) - sp.diff(c.X, x) ** 2) == 0
    ok = worst < 1e-12 and constraint_ok
    record(5, "equivalence families closed under composition", ok,
           f"{len(CLOSED_FAMILIES)} families x 100 pairs, recovery residual {worst:.1e}, "
           f"T_t = (X^1)^2 exact: {constraint_ok}, {time.perf_counter() - start:.1f}s")
    assert ok


# 6 ----------------------------------------------------------------------------------------

ATOMS = [sp.S.Zero, sp.S.One, x, t * x, sp.sin(x), sp.exp(t), 1 / (1 + x**2), x**3, sp.cos(t * x)]


def random_equation(rng) -> LinearEvolutionEquation:
    pick = lambda: ATOMS[int(rng.integers(len(ATOMS)))] * int(rng.integers(-3, 4))
    A = 1 + x**2 * int(rng.integers(0, 3)) + pick() ** 2
    form = Form.STANDARD if rng.random() < 0.5 else Form.DIVERGENCE
    return LinearEvolutionEquation(A, pick(), pick(), 0, form)


def test_adjoint_duality():
    rng = np.random.default_rng(6)
    inv_ok = all(formal_adjoint(formal_adjoint(eq)) == eq
                 for eq in (random_equation(rng) for _ in range(50)))
    tag_ok = adjoint_tag(ClassTag.parse("F'^1")) == ClassTag.parse("K'^-1")
    B = 2 / x
    dom = DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)})
    kol = drift_equation(B, 1, 1).with_domain(dom)
    adj = formal_adjoint(kol).with_domain(dom)
    pairs = [(kol, mapped_symmetries("2", B, 0, 1)),
             (adj, mapped_symmetries("2", B, 0, -1))]
    same_class = adj.standard() == drift_equation(B, -1, -1).standard()
    spectra, fit, fields_ok = [], 0.0, True
    for eq, extra in pairs:
        basis = [DT, UDU, *extra]
        fields_ok &= all(is_lie_symmetry(eq, v, 1e-8, 100, rng).passed for v in basis)
        sc = algebra_closure(eq, basis, 1e-8, rng)
        fit = max(fit, sc.max_residual)
        spectra.append(sc.spectrum())
    ok = (inv_ok and tag_ok and same_class and fields_ok and fit < 1e-8
          and spectra[0] == spectra[1] and spectra[0]["dim"] == 6)
    record(6, "adjoint duality", ok,
           f"involution on 50 tuples: {inv_ok}, tag map: {tag_ok}, dims "
           f"{spectra[0]['dim']}/{spectra[1]['dim']}, spectra equal: {spectra[0] == spectra[1]}, "
           f"fit residual {fit:.1e}")
    assert ok


# 7 ----------------------------------------------------------------------------------------

def test_invariant_suite():
    rng = np.random.default_rng(7)
    inv = verify_invariant_I10(50, 100, 1e-8, rng)
    com = verify_commutator(tol=1e-10, rng=rng)
    ok = inv.passed and com.passed and len(com.children) == 5
    record(7, "I10 invariance and the commutator identity", ok,
           f"50 group elements, residual {inv.max_residual:.1e}; "
           f"{len(com.children)} expressions, residual {com.max_residual:.1e}")
    assert ok


# 8 ----------------------------------------------------------------------------------------

def test_additional_equivalence():
    phi = additional_equivalence(-1, sp.cosh(x), -1, sp.exp(x))
    dom = DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)})
    out = pushforward_equation(phi, fokker_planck(-2 * sp.tanh(x), 1, dom)).standard()
    want = fokker_planck(-2, 1, dom).standard()
    pts = dom.sample({"t", "x"}, 200, np.random.default_rng(8))
    worst = 0.0
    for p, q in zip(out.coefficients, want.coefficients):
        d = np.asarray(evaluate(p - q, pts), float) + 0 * pts["x"]
        worst = max(worst, float(np.max(np.abs(d))))
    ok = worst < 1e-6
    record(8, "drifts of one row linked by the groupoid", ok,
           f"B = -2 tanh x mapped to B = -2, residual {worst:.1e}")
    assert ok


# 9 ----------------------------------------------------------------------------------------

def verify_all(out: str) -> dict:
    env = dict(os.environ)
    src = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    subprocess.run([sys.executable, "-m", "lieclass", "verify", "all", "--seed", "7", "--quiet",
                    "--out", out], check=False, env=env, capture_output=True)
    with open(out) as fh:
        rep = json.load(fh)
    rep.pop("timestamp", None)
    return rep


def test_determinism():
    with tempfile.TemporaryDirectory() as d:
        a = verify_all(os.path.join(d, "a.json"))
        b = verify_all(os.path.join(d, "b.json"))
    ok = a == b
    record(9, "verify all --seed 7 is reproducible", ok,
           f"{len(a['entries'])} entries, all pass: {a['pass']}, identical: {ok}")
    assert ok


if __name__ == "__main__":
    tests = [test_table1_suite, test_riccati_oracle, test_table2_suite, test_generating_set,
             test_equivalence_group_closure, test_adjoint_duality, test_invariant_suite,
             test_additional_equivalence, test_determinism]
    for fn_ in tests:
        try:
            fn_()
        except AssertionError:
            pass
    for n in sorted(ACCEPTANCE):
        title, ok, note = ACCEPTANCE[n]
        print(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}: {note}")
    sys.exit(0 if len(ACCEPTANCE) == 9 and all(v[1] for v in ACCEPTANCE.values()) else 1)
