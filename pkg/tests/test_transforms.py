import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from families import random_params
from lieclass.catalog.groupoid import generating_triples, phi0_check, phi2, phi3, phi4
from lieclass.equations import heat, kolmogorov
from lieclass.expr import DomainSampler, evaluate, mu, t, u, x, zero_test
from lieclass.jet import DT, DX, UDU, VectorField
from lieclass.transforms import (CLOSED_FAMILIES, FAMILIES, AdmissibleTransformation,
                                 ConstraintViolation, NoClosedFormInverse, NotComposable,
                                 PointTransformation, compose, compose_admissible,
                                 equations_agree, equivalence_element, identity, invert,
                                 pushforward_equation, pushforward_vectorfield, verify_admissible)

DOM = DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)})


def same_components(p, q, pts=None, tol=1e-10):
    pts = pts or DOM.sample({"t", "x"}, 50, np.random.default_rng(4))
    for a, b in zip(p.components, q.components):
        va = np.asarray(evaluate(a, pts), float) + 0 * pts["x"]
        vb = np.asarray(evaluate(b, pts), float) + 0 * pts["x"]
        if np.max(np.abs(va - vb) / (1 + np.abs(va))) > tol:
            return False
    return True


def test_compose_with_identity():
    phi = PointTransformation(t + 1, 3 * x - t, sp.exp(x), 2)
    assert compose(phi, identity()) == phi
    assert compose(identity(), phi) == phi


def test_compose_P_prime_elements_scales_c1():
    f = FAMILIES["P'"]
    a = f.build({"c1": 2, "c2": 1, "c3": 0, "c4": 1, "c5": 0})
    b = f.build({"c1": 3, "c2": 0, "c3": 1, "c4": 2, "c5": 1})
    ab = compose(a, b)
    assert sp.diff(ab.X, x) == 6
    assert sp.diff(ab.T, t) == 36


def test_invert_examples():
    assert invert(identity()) == identity()
    scaling = PointTransformation(4 * t, 2 * x, 1 / sp.sqrt(2))
    inv = invert(scaling)
    assert (inv.T, inv.X, sp.simplify(inv.U1)) == (t / 4, x / 2, sp.sqrt(2))
    assert invert(phi0_check()).components == (t / 4, x / 2, sp.sqrt(2), 0)


def test_registered_inverse_round_trip():
    p2 = phi2()
    assert invert(p2).T == sp.log(4 * t) / 4
    rep = p2.check(tol=1e-10)
    assert rep.passed, rep.summary()


def test_no_closed_form_inverse():
    phi = PointTransformation(t**3 + t, x * sp.exp(t) + x**3, 1)
    with pytest.raises(NoClosedFormInverse):
        invert(phi)


def test_pushforward_identity():
    eq = heat(mu / x**2, 1)
    assert pushforward_equation(identity(), eq).coefficients == eq.coefficients


def test_pushforward_T3_kills_linear_potential():
    out = pushforward_equation(phi3(), heat(x, 1, phi3().domain))
    assert sp.simplify(out.C) == 0


def test_literal_T3_signs_kill_the_opposite_potential():
    lit = phi3(literal=True)
    assert sp.simplify(pushforward_equation(lit, heat(-x, 1, lit.domain)).C) == 0
    assert sp.simplify(pushforward_equation(lit, heat(x, 1, lit.domain)).C) != 0


def test_pushforward_T1_on_its_domain():
    T = generating_triples(1)["T1"]
    out = pushforward_equation(T.phi, T.source)
    assert equations_agree(out, T.target, 1e-10, sampler=out.domain)


def test_numeric_pushforward_fallback():
    phi = PointTransformation(t**3 + t, x * sp.exp(t) + x**3, 1)
    eq = heat(0, 1)
    with pytest.raises(NoClosedFormInverse):
        pushforward_equation(phi, eq)
    num = pushforward_equation(phi, eq, numeric=True)
    T, X, _ = phi(0.5, 1.0)
    # A~ = X_x^2 / T_t at the preimage (0.5, 1)
    want = (np.exp(0.5) + 3) ** 2 / (3 * 0.25 + 1)
    assert abs(num.A(float(T), float(X)) - want) < 1e-9


def test_pushforward_vectorfield_examples():
    assert pushforward_vectorfield(identity(), DX) == DX
    scale = PointTransformation(t, 2 * x, 1)
    assert pushforward_vectorfield(scale, DX) == VectorField(0, 2, 0)


def test_pushforward_through_mapping_factor():
    lam_ = sp.Rational(1, 3)
    W = sp.cosh(x)
    phi = PointTransformation(t, x, sp.exp(lam_ * t) / W)
    pt = pushforward_vectorfield(phi, DT)
    px = pushforward_vectorfield(phi, DX)
    assert sp.simplify(pt.eta - lam_ * u) == 0
    assert sp.simplify(px.eta + sp.tanh(x) * u) == 0


def test_compose_admissible():
    T = generating_triples(1)["T1"]
    idT = AdmissibleTransformation(T.source, identity(), T.source, name="id")
    both = compose_admissible(idT, T)
    assert same_components(both.phi, T.phi, T.phi.domain.sample({"t", "x"}, 50, np.random.default_rng(1)))
    T1, T3 = generating_triples(1)["T1"], generating_triples(1)["T3"]
    with pytest.raises(NotComposable):
        compose_admissible(T3, T1)


@pytest.mark.parametrize("m", [-1, 1, 3])
@pytest.mark.parametrize("name", ["T1", "T2", "T3", "T4"])
def test_generating_transformations_are_admissible(m, name):
    rep = verify_admissible(generating_triples(m)[name], 1e-10)
    assert rep.passed, rep.summary()


def test_corrupted_target_fails():
    T = generating_triples(1)["T3"]
    bad = AdmissibleTransformation(T.source, T.phi, heat(1, 1, T.target.domain))
    rep = verify_admissible(bad, 1e-8)
    assert not rep.passed
    assert 0.3 < rep.max_residual <= 1.0


def test_equivalence_element_identity():
    phi, g = equivalence_element("P", {"T": t, "X1": 1, "X0": 0, "V": 1, "eps": 1})
    assert phi.components == (t, x, 1, 0)
    assert sp.simplify(g(heat(mu / x**2, 1)).C - mu / x**2) == 0


def test_equivalence_element_scales_inverse_square():
    phi, g = equivalence_element("P'", {"c1": 2, "c2": 0, "c3": 0, "c4": 1, "c5": 0, "eps": 1})
    assert phi.X == 2 * x
    assert sp.simplify(g(heat(mu / x**2, 1)).C - mu / x**2) == 0


def test_equivalence_element_K_drift():
    X1 = sp.exp(2 * t)
    params = {"T": sp.exp(4 * t) / 4, "X1": X1, "X0": 0, "c1": 1, "c2": 0, "eps": 1}
    _, g = equivalence_element("K", params)
    B = sp.Function("B")(t, x)
    pulled = g.pulled_back(kolmogorov(B, 1))
    want = B / X1 - sp.diff(X1, t) * x / X1**2
    assert sp.simplify(pulled[1] - want) == 0


def test_family_constraint_enforced():
    with pytest.raises(ConstraintViolation):
        equivalence_element("P", {"T": 2 * t, "X1": 1, "X0": 0, "V": 1, "eps": 1})


def test_json_round_trip():
    phi = phi2()
    back = PointTransformation.from_json(phi.to_json())
    assert back == phi and back.inverse is not None


def test_json_rejects_missing_components():
    with pytest.raises(ValueError):
        PointTransformation.from_json({"X": "x"})


@given(st.sampled_from(CLOSED_FAMILIES), st.integers(0, 2**32 - 1), st.sampled_from([-1, 1]))
def test_family_closed_under_composition(fid, seed, e):
    rng = np.random.default_rng(seed)
    fam = FAMILIES[fid]
    c = compose(fam.build(random_params(fid, rng, e)), fam.build(random_params(fid, rng, e)),
                check_overlap=False)
    rec = fam.recover(c)
    if fam.eps_dependent:
        rec["eps"] = e
    pts = {"t": rng.uniform(0.1, 0.4, 20), "x": rng.uniform(0.5, 1.0, 20)}
    assert same_components(c, fam.build(rec), pts, 1e-12)


@given(st.integers(0, 2**32 - 1))
def test_inverse_round_trip_property(seed):
    rng = np.random.default_rng(seed)
    phi = FAMILIES["K'"].build(random_params("K'", rng))
    back = compose(phi, invert(phi), check_overlap=False)
    assert same_components(back, identity())


@given(st.integers(0, 2**32 - 1))
def test_jacobian_nonzero_on_domain(seed):
    rng = np.random.default_rng(seed)
    phi = FAMILIES["P"].build(random_params("P", rng))
    pts = DOM.sample({"t", "x"}, 50, rng)
    assert np.min(np.abs(np.asarray(evaluate(phi.jacobian(), pts), float))) > 0
    assert zero_test(sp.diff(phi.T, t) - sp.diff(phi.X, x) ** 2, DOM, 1e-12, 20).passed
