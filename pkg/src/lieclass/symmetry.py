"""Lie symmetry checks: determining residuals, bracket closure, ideals."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
import sympy as sp
from sympy.core.function import AppliedUndef

from .equations import LinearEvolutionEquation, on_shell
from .expr import (DEFAULT_DOMAIN, DomainSampler, Expr, RewriteRule, apply_rules, evaluate,
                   t, u, u_t, x, zero_test)
from .jet import VectorField, lie_bracket, prolong2
from .report import SymmetryReport


class ClosureFailure(ArithmeticError):
    """A bracket of two basis fields is not in their constant span."""

    def __init__(self, pair: tuple[int, int], residual: float):
        super().__init__(f"bracket of basis fields {pair} leaves the span (residual {residual:.3e})")
        self.pair = pair
        self.residual = residual


def determining_residual(eq: LinearEvolutionEquation, v: VectorField,
                         rules: Sequence[RewriteRule] = (), max_order: int = 2) -> Expr:
    """pr^(2) v applied to u_t - RHS and restricted to the solution set."""
    key = tuple((r.func, r.var, r.order, r.replacement) for r in rules)
    return _residual_cached(eq.standard(), v, key, max_order)


@lru_cache(maxsize=2048)
def _residual_cached(eq, v, key, max_order):
    # the key carries everything needed to rebuild the rules
    rules = [RewriteRule(*k) for k in key]
    return _residual_impl(eq, v, rules, max_order)


def _residual_impl(eq: LinearEvolutionEquation, v: VectorField,
                   rules: Sequence[RewriteRule], max_order: int) -> Expr:
    A, B, _, _ = eq.coefficients
    phi_t, phi_x, phi_xx = prolong2(v)
    # v acts on the rhs with jets frozen, which handles C u and D
    out = phi_t - v(eq.jet_rhs()) - A * phi_xx - B * phi_x
    out = on_shell(out, eq, max_order)
    if u_t in out.free_symbols:
        raise AssertionError("u_t survived the on-shell reduction")
    return apply_rules(out, rules) if rules else out


def freeze(e: Expr, rules: Sequence[RewriteRule] = ()) -> Expr:
    """Replace undifferentiated functions governed by ``rules`` with free symbols.

    After the rules removed every derivative of such a function, its value at
    a point is unconstrained, so it can be sampled like a jet coordinate.
    """
    names = {r.name for r in rules}
    if not names:
        return e
    repl = {}
    for f in e.atoms(AppliedUndef):
        if f.func.__name__ in names:
            repl[f] = sp.Symbol(f"{f.func.__name__}_val", real=True)
    for d in e.atoms(sp.Derivative):
        if isinstance(d.expr, AppliedUndef) and d.expr.func.__name__ in names:
            raise ValueError(f"rules left the derivative {d} in place")
    return e.xreplace(repl)


def is_lie_symmetry(eq: LinearEvolutionEquation, v: VectorField, tol: float = 1e-8,
                    trials: int = 200, rng: np.random.Generator | None = None,
                    rules: Sequence[RewriteRule] = (), oracles: Mapping | None = None,
                    sampler: DomainSampler | None = None, field_id: str = "") -> SymmetryReport:
    rng = rng if rng is not None else np.random.default_rng(0)
    sampler = sampler or eq.domain
    res = freeze(determining_residual(eq, v, rules), rules)
    z = zero_test(res, sampler, tol, trials, rng, oracles)
    rep = SymmetryReport(f"symmetry {field_id or v}", z.passed, z.max_residual, z.samples,
                         tol, field_id=field_id)
    if not z.passed:
        rep.details.append(f"determining residual {z.max_residual:.3e} exceeds {tol:g}")
    return rep


# -- structure constants --------------------------------------------------------

@dataclass(frozen=True)
class StructureConstants:
    """c[i, j, k] with [e_i, e_j] = sum_k c[i, j, k] e_k."""

    c: np.ndarray
    max_residual: float
    worst_pair: tuple[int, int]
    points: int

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def ad(self, i: int) -> np.ndarray:
        """Matrix of ad(e_i) acting on coordinate columns."""
        return self.c[i].T

    def killing_form(self) -> np.ndarray:
        n = self.dim
        ads = [self.ad(i) for i in range(n)]
        return np.array([[np.trace(ads[i] @ ads[j]) for j in range(n)] for i in range(n)])

    def derived_dimensions(self, tol: float = 1e-8) -> list[int]:
        """Dimensions along the derived series g, [g, g], ..."""
        n = self.dim
        span = np.eye(n)
        dims = [n]
        while True:
            vecs = [np.einsum("i,j,ijk->k", a, b, self.c) for a in span for b in span]
            nxt = _basis_of(np.array(vecs) if vecs else np.zeros((0, n)), tol)
            dims.append(nxt.shape[0])
            if nxt.shape[0] in (0, span.shape[0]):
                return dims
            span = nxt

    def spectrum(self, tol: float = 1e-8) -> dict:
        """Basis-independent data: derived series, Killing inertia, rank of ad."""
        kf = self.killing_form()
        ev = np.linalg.eigvalsh((kf + kf.T) / 2)
        scale = 1 + np.max(np.abs(ev)) if ev.size else 1
        inertia = (int(np.sum(ev > tol * scale)), int(np.sum(ev < -tol * scale)),
                   int(np.sum(np.abs(ev) <= tol * scale)))
        center = _basis_of(_null_space(self.c.reshape(self.dim, -1).T, tol), tol).shape[0]
        return {"dim": self.dim, "derived": self.derived_dimensions(tol),
                "killing_inertia": inertia, "center": center}


def _basis_of(vecs: np.ndarray, tol: float) -> np.ndarray:
    if vecs.size == 0:
        return vecs.reshape(0, vecs.shape[-1] if vecs.ndim == 2 else 0)
    _, s, vt = np.linalg.svd(vecs, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return vt[:rank]


def _null_space(m: np.ndarray, tol: float) -> np.ndarray:
    _, s, vt = np.linalg.svd(m)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    return vt[rank:]


def _coeff_rows(fields: Sequence[VectorField], pts: Mapping, oracles) -> np.ndarray:
    """Stack (tau, xi, eta) values at the points; one column per field."""
    n = len(next(iter(pts.values())))
    cols = []
    for v in fields:
        parts = [np.broadcast_to(np.asarray(evaluate(c, pts, oracles), dtype=float), (n,))
                 for c in v.as_tuple()]
        cols.append(np.concatenate(parts))
    return np.array(cols).T


def _names(fields: Sequence[VectorField]) -> set[str]:
    names = {"t", "x", "u"}
    for v in fields:
        for c in v.as_tuple():
            names |= {s.name for s in sp.sympify(c).free_symbols}
            for f in sp.sympify(c).atoms(AppliedUndef):
                names |= {s.name for a in f.args for s in sp.sympify(a).free_symbols}
    return names


def _prepare(fields, rules):
    return [v.map(lambda c: freeze(apply_rules(c, rules) if rules else c, rules)) for v in fields]


def _fit(basis_rows: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    coef, *_ = np.linalg.lstsq(basis_rows, target, rcond=None)
    resid = float(np.max(np.abs(basis_rows @ coef - target), initial=0.0))
    return coef, resid / (1.0 + float(np.max(np.abs(target), initial=0.0)))


def algebra_closure(eq: LinearEvolutionEquation, basis: Sequence[VectorField], tol: float = 1e-8,
                    rng: np.random.Generator | None = None, rules: Sequence[RewriteRule] = (),
                    oracles: Mapping | None = None, sampler: DomainSampler | None = None,
                    points: int | None = None) -> StructureConstants:
    """Fit structure constants of ``basis`` by least squares over sampled coefficients."""
    rng = rng if rng is not None else np.random.default_rng(0)
    sampler = sampler or eq.domain or DEFAULT_DOMAIN
    n = len(basis)
    brackets = {(i, j): lie_bracket(basis[i], basis[j]) for i in range(n) for j in range(i + 1, n)}
    fb = _prepare(basis, rules)
    fbr = dict(zip(brackets, _prepare(list(brackets.values()), rules)))
    npts = points or max(3 * n, 24)
    pts = sampler.sample(_names(fb + list(fbr.values())), npts, rng)
    rows = _coeff_rows(fb, pts, oracles)
    c = np.zeros((n, n, n))
    worst, worst_pair = 0.0, (0, 0)
    for (i, j), w in fbr.items():
        target = _coeff_rows([w], pts, oracles)[:, 0]
        coef, resid = _fit(rows, target)
        c[i, j], c[j, i] = coef, -coef
        if resid > worst:
            worst, worst_pair = resid, (i, j)
    if worst > tol:
        raise ClosureFailure(worst_pair, worst)
    # snap round-off so reports stay stable across platforms
    c = np.where(np.abs(c) < 1e-11, 0.0, c)
    return StructureConstants(c, worst, worst_pair, npts)


def ideal_check(sub: Sequence[VectorField], full: Sequence[VectorField],
                eq: LinearEvolutionEquation, tol: float = 1e-8,
                rng: np.random.Generator | None = None, rules: Sequence[RewriteRule] = (),
                oracles: Mapping | None = None, sampler: DomainSampler | None = None) -> bool:
    """True if [full, sub] lies in the constant span of ``sub``."""
    rng = rng if rng is not None else np.random.default_rng(0)
    sampler = sampler or eq.domain or DEFAULT_DOMAIN
    brackets = [lie_bracket(f, s) for f in full for s in sub]
    fs = _prepare(sub, rules)
    fbr = _prepare(brackets, rules)
    npts = max(3 * (len(sub) + 1), 24)
    pts = sampler.sample(_names(fs + fbr), npts, rng)
    rows = _coeff_rows(fs, pts, oracles)
    for w in fbr:
        target = _coeff_rows([w], pts, oracles)[:, 0]
        _, resid = _fit(rows, target)
        if resid > tol:
            return False
    return True


def verify_bracket_symmetries(eq: LinearEvolutionEquation, basis: Sequence[VectorField],
                              tol: float = 1e-8, trials: int = 50, rng=None, rules=(),
                              oracles=None, sampler=None) -> bool:
    """Every pairwise bracket passes the determining-residual test on its own."""
    rng = rng if rng is not None else np.random.default_rng(0)
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            w = lie_bracket(basis[i], basis[j])
            rep = is_lie_symmetry(eq, w, tol, trials, rng, rules, oracles, sampler)
            if not rep.passed:
                return False
    return True


__all__ = ["ClosureFailure", "StructureConstants", "determining_residual", "freeze",
           "is_lie_symmetry", "algebra_closure", "ideal_check", "verify_bracket_symmetries"]
