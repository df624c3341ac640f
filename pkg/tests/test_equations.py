import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from lieclass.equations import (ClassFamily, ClassTag, Form, LinearEvolutionEquation, adjoint_tag,
                                fokker_planck, formal_adjoint, heat, kolmogorov, membership,
                                on_shell, residual)
from lieclass.expr import fn, mu, t, u, u_t, u_tx, u_xx, w_rule, x
from lieclass.jet import JetOrderError

TAGS = [ClassTag(f, e) for f in ClassFamily for e in ((-1, 1) if f.value in
                                                       ("P", "P'", "K", "K'", "F", "F'") else (None,))]


def tag(s):
    return ClassTag.parse(s)


def test_membership_inverse_square_potential():
    eq = heat(mu / x**2, 1).with_domain(heat().domain.with_fixed(mu=1.0))
    assert membership(eq, tag("P^1"))
    assert membership(eq, tag("P'^1"))
    assert not membership(eq, tag("P^-1"))


def test_membership_kolmogorov_drift():
    eq = kolmogorov(2 / x, 1)
    assert membership(eq, tag("K^1")) and membership(eq, tag("K'^1"))
    assert not membership(eq, tag("F^1")) and not membership(eq, tag("F'^1"))


def test_everything_is_in_E():
    eq = LinearEvolutionEquation(1 + x**2, t, sp.sin(x), 3)
    assert membership(eq, tag("E")) and membership(eq, tag("E_breve"))
    assert not membership(eq, tag("E0"))


def test_tag_parsing():
    assert str(tag("K'^-1")) == "K'^-1"
    with pytest.raises(ValueError):
        ClassTag(ClassFamily.K)
    with pytest.raises(ValueError):
        ClassTag(ClassFamily.E, 1)


def test_on_shell_examples():
    eq = heat(0, 1)
    assert on_shell(u_t, eq) == u_xx
    C = fn("C")
    assert on_shell(u_t - u_xx - C * u, heat(C, 1)) == 0


def test_on_shell_refuses_third_order():
    with pytest.raises(JetOrderError):
        on_shell(u_tx, heat(0, 1))


def test_adjoint_examples():
    B = fn("B", x)
    assert formal_adjoint(fokker_planck(B, 1)) == kolmogorov(B, -1)
    back = formal_adjoint(heat(0, 1))
    assert back.in_form(Form.STANDARD).coefficients == (-1, 0, 0, 0)


def test_adjoint_tag_duality():
    assert adjoint_tag(tag("F'^1")) == tag("K'^-1")
    assert adjoint_tag(tag("K^-1")) == tag("F^1")
    with pytest.raises(ValueError):
        adjoint_tag(tag("P^1"))


def test_residual_examples():
    assert residual(kolmogorov(fn("B"), 1), sp.Integer(7)) == 0
    assert residual(heat(0, 1), x) == 0
    W = fn("W", x)
    lam_ = sp.Symbol("lam", real=True)
    # the separated solution decays as e^{-lam t} when eps W'' + (C + lam) W = 0
    r = residual(heat(mu / x**2, 1), sp.exp(-lam_ * t) * W)
    assert sp.simplify(w_rule(mu / x**2, lam_, 1).apply(r)) == 0


def test_json_round_trip():
    eq = kolmogorov(2 / x, -1)
    assert LinearEvolutionEquation.from_json(eq.to_json()) == eq


def test_json_needs_A():
    with pytest.raises(ValueError):
        LinearEvolutionEquation.from_json({"B": "x"})


coeffs = st.sampled_from([0, 1, -1, x, x**2, t * x, sp.sin(x), 1 + x**2, sp.exp(t), 2 / x])


@given(coeffs, coeffs, coeffs, st.sampled_from(list(Form)))
def test_adjoint_is_involution(b, c, a_extra, form):
    eq = LinearEvolutionEquation(1 + a_extra**2, b, c, 0, form)
    assert formal_adjoint(formal_adjoint(eq)) == eq


@given(coeffs, coeffs, coeffs)
def test_form_conversion_is_bijective(a_extra, b, c):
    eq = LinearEvolutionEquation(2 + a_extra**2, b, c, 0, Form.DIVERGENCE)
    there = eq.standard()
    back = there.divergence()
    assert all(sp.simplify(p - q) == 0 for p, q in zip(back.coefficients, eq.coefficients))
    # both forms share one right-hand side
    w = sp.exp(x) * t
    assert sp.simplify(eq.rhs(w) - there.rhs(w)) == 0


@given(st.sampled_from(TAGS))
def test_adjoint_tag_is_involution(tg):
    try:
        once = adjoint_tag(tg)
    except ValueError:
        return
    assert adjoint_tag(once) == tg
