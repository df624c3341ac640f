import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import airy

from lieclass.equations import fokker_planck, heat, kolmogorov, residual
from lieclass.expr import DomainSampler, evaluate, fn, mu, t, u, x, zero_test
from lieclass.fields import D_f, P_f, Pbar_f
from lieclass.jet import DT, DX, UDU, VectorField
from lieclass.mapping import (TO_FOKKER_PLANCK, TO_KOLMOGOROV, DriftOracle, DriftSpec,
                              VanishingError, additional_equivalence, airy_series,
                              drift_from_W, mapped_symmetries, mapping_transformation,
                              riccati_rule, solve_W)
from lieclass.transforms import equations_agree, identity, pushforward_equation, pushforward_vectorfield


def test_constant_W():
    W = solve_W(0, 0.0, 1, 0.0, 1.0, 0.0, (-1.0, 1.0))
    g = np.linspace(-1, 1, 11)
    assert np.allclose(W(g), 1.0, atol=1e-12)


def test_cosh_against_closed_form():
    W = solve_W(0, -1.0, 1, 0.0, 1.0, 0.0, (-3.0, 3.0))
    g = np.linspace(-3, 3, 101)
    assert np.max(np.abs(W(g) - np.cosh(g))) < 1e-9
    assert np.max(np.abs(W(g, 1) - np.sinh(g))) < 1e-9


def test_airy_equation_against_scipy():
    # eps = 1, C = -x, lam = kappa: W'' = (x - kappa) W
    kappa = 0.5
    ai0, aip0, bi0, bip0 = airy(-kappa)
    W = solve_W(-x, kappa, 1, 0.0, ai0 + bi0, aip0 + bip0, (-2.0, 2.0))
    g = np.linspace(-2, 2, 20)
    ai, _, bi, _ = airy(g - kappa)
    want = ai + bi
    assert np.max(np.abs(W(g) - want) / np.abs(want)) < 1e-7


def test_airy_series_against_scipy():
    g = np.linspace(-3, 3, 31)
    ai, bi = airy_series(g)
    sa, _, sb, _ = airy(g)
    assert np.max(np.abs(ai - sa)) < 1e-10 and np.max(np.abs(bi - sb)) < 1e-9


def test_zeros_split_the_interval():
    W = solve_W(0, 1.0, 1, 0.0, 1.0, 0.0, (0.0, 3.0))
    assert len(W.zeros) == 1 and abs(W.zeros[0] - np.pi / 2) < 1e-8
    assert len(W.subintervals) == 2
    with pytest.raises(VanishingError):
        drift_from_W(W, 1, 1)
    a, b = W.widest_subinterval()
    assert b < np.pi / 2 or a > np.pi / 2


def test_riccati_rule_against_integrated_W():
    W = solve_W(mu / x**2, 1.0, 1, 1.0, 1.0, 0.3, (0.5, 3.0), {"mu": 1.0})
    drift = DriftOracle(W, 1, 1)
    rule = riccati_rule(1 / x**2, 1, 1, 1)
    g = np.linspace(*W.widest_subinterval(), 52)[1:-1]
    h = 1e-5
    fd = (drift(g + h) - drift(g - h)) / (2 * h)
    pred = evaluate(rule.replacement, {"x": g}, {"B": drift.oracle()})
    assert np.max(np.abs(fd - pred)) < 1e-6


def test_riccati_rule_elementary():
    B = 2 / x
    rule = riccati_rule(0, 0, 1, 1)
    assert sp.simplify(rule.replacement.subs(fn("B", x), B) - sp.diff(B, x)) == 0


def test_riccati_rule_epsb_flip():
    lam_, C = sp.Rational(1, 2), mu / x**2
    a = riccati_rule(C, lam_, 1, 1).replacement
    b = riccati_rule(C, lam_, 1, -1).replacement
    assert sp.simplify(b - a - 4 * (C + lam_) - fn("B", x) ** 2) == 0


def test_drift_from_W_examples():
    assert drift_from_W(sp.exp(x), 1, 1) == 2
    assert sp.simplify(drift_from_W(sp.sqrt(sp.Abs(x)), 1, 1) - 1 / x).subs(x, 1.3) == 0
    assert drift_from_W(sp.S.One, 1, 1) == 0
    with pytest.raises(VanishingError):
        drift_from_W(sp.cos(x), 1, 1, (0.0, 3.0))


def test_mapping_identity():
    phi = mapping_transformation(0, 1)
    assert phi.components == identity().components


def test_mapping_to_kolmogorov():
    out = pushforward_equation(mapping_transformation(0, x, TO_KOLMOGOROV), heat(0, 1))
    assert equations_agree(out, kolmogorov(2 / x, 1))


def test_mapping_to_fokker_planck_transports_solutions():
    lam_, W = -1, sp.cosh(x)
    psi = mapping_transformation(lam_, W, TO_FOKKER_PLANCK)
    target = fokker_planck(drift_from_W(W, 1, -1), 1)
    dom = DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)})
    for k in (sp.Rational(1, 2), 1, -1, 2, 0):
        sol = sp.exp(k * x + k**2 * t)
        moved = psi.U1 * sol
        assert zero_test(residual(target, moved), dom, 1e-6, 100).passed


def test_mapped_field_examples():
    B = fn("B", x)
    e = sp.Symbol("eps", real=True)
    P1, _, _, _ = mapped_symmetries("2", B, 0, e)
    assert P1 == VectorField(0, 1, -e * B * u / 2)
    k = sp.Symbol("kappa", real=True)
    D1 = mapped_symmetries("1", B, k, e)[0].subs({t: 0})
    assert isinstance(D1, VectorField)
    Pb1 = mapped_symmetries("2c", B, 0, e)[0]
    # F = t is the antiderivative of f = 1
    assert sp.simplify(Pb1.eta - (-e * B / 2 - e * t) * u) == 0


def test_unknown_row():
    with pytest.raises(KeyError):
        mapped_symmetries("T2.case9")


def test_drift_spec_from_json():
    spec = DriftSpec.from_json({"C": "mu/x^2", "mu": 1.0, "kappa": 0.5, "eps": 1, "epsb": -1,
                                "W": {"type": "ode", "x0": 1.0, "W0": 1.0, "W0p": 0.3,
                                      "interval": [0.2, 4.0]}})
    assert spec.lam == 0.5 and spec.epsb == -1
    assert spec.check().passed
    drift = spec.drift()
    assert np.all(np.isfinite(drift(np.linspace(0.3, 0.4, 5))))


def test_additional_equivalence_links_drifts():
    phi = additional_equivalence(-1, sp.cosh(x), -1, sp.exp(x))
    out = pushforward_equation(phi, fokker_planck(-2 * sp.tanh(x), 1))
    assert equations_agree(out, fokker_planck(-2, 1), 1e-10)


@given(st.sampled_from([-1, 1]), st.sampled_from([sp.S.One, x, 1 + x, 2 + x**2 / 3]))
def test_pipeline_matches_mapped_fields(e, W):
    # free potential, lam = 0: W'' = 0 for the first three, so only those qualify
    if sp.diff(W, x, 2) != 0:
        return
    phi = mapping_transformation(0, W, TO_KOLMOGOROV)
    B = drift_from_W(W, e, 1)
    heat_fields = [P_f(1, e), P_f(t, e), D_f(t, e), D_f(t**2, e)]
    for f, m in zip(heat_fields, mapped_symmetries("2", B, 0, e)):
        p = pushforward_vectorfield(phi, f)
        assert sp.simplify(p.tau - m.tau) == 0 and sp.simplify(p.xi - m.xi) == 0
        assert sp.diff(sp.simplify((p.eta - m.eta) / u), x) == 0


@given(st.floats(-1.5, 1.5), st.floats(0.2, 2.0), st.sampled_from([-1, 1]))
def test_W_solves_its_equation(lam_, w0p, e):
    W = solve_W(mu / x**2, lam_, e, 1.0, 1.0, w0p, (0.6, 2.0), {"mu": 0.7})
    g = np.linspace(*W.widest_subinterval(), 40)
    res = e * W(g, 2) + (0.7 / g**2 + lam_) * W(g)
    assert np.max(np.abs(res)) < 1e-8
    h = 1e-4
    inner = g[1:-1]
    fd = (W(inner + h, 1) - W(inner - h, 1)) / (2 * h)
    assert np.max(np.abs(fd - W(inner, 2)) / (1 + np.abs(W(inner, 2)))) < 1e-6


@given(st.sampled_from([-1, 1]), st.sampled_from([-1, 1]))
def test_kernel_fields_on_drift_equations(e, eb):
    B = drift_from_W(sp.cosh(x), e, eb)
    eq = kolmogorov(B, e) if eb == 1 else fokker_planck(B, e)
    from lieclass.symmetry import is_lie_symmetry
    assert is_lie_symmetry(eq, DT).passed and is_lie_symmetry(eq, UDU).passed
    assert not is_lie_symmetry(eq, DX).passed
    assert Pbar_f is not None
