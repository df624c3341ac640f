"""Symbolic expression kernel.

Expressions are sympy trees.  This module fixes the symbol table (variables,
parameters, jet coordinates, abstract functions), provides a small parser and
renderer for the textual grammar, rewrite rules that reduce derivative order,
vectorised numeric evaluation with pluggable function oracles and a
probabilistic zero test.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import sympy as sp
from sympy.core.function import AppliedUndef
from sympy.printing.str import StrPrinter

Expr = sp.Expr

# -- symbol table -----------------------------------------------------------

t, x, u = sp.symbols("t x u", real=True)
VARIABLES = (t, x)

PARAMETER_NAMES = (
    "eps", "epsb", "mu", "nu", "kappa", "lam", "alpha", "beta", "gamma",
    "delta", "a", "b", "a1", "a2", "c", "c1", "c2", "c3", "c4", "c5",
    "sigma", "Lambda",
)
_params = sp.symbols(" ".join(PARAMETER_NAMES), real=True)
PARAMETERS = dict(zip(PARAMETER_NAMES, _params))
(eps, epsb, mu, nu, kappa, lam, alpha, beta, gamma, delta, a, b, a1, a2,
 c, c1, c2, c3, c4, c5, sigma, Lambda) = _params

# parameters restricted to {-1, +1}
SIGN_PARAMETERS = (eps, epsb)

JET_NAMES = ("u_t", "u_x", "u_tt", "u_tx", "u_xx",
             "u_ttt", "u_ttx", "u_txx", "u_xxx")
JET = {name: sp.Symbol(name, real=True) for name in JET_NAMES}
u_t, u_x, u_tt, u_tx, u_xx = (JET[n] for n in JET_NAMES[:5])
u_ttt, u_ttx, u_txx, u_xxx = (JET[n] for n in JET_NAMES[5:])
JET_SYMBOLS = (u,) + tuple(JET.values())


def jet_order(sym: sp.Symbol) -> int:
    """Differential order of a jet coordinate (0 for u)."""
    if sym == u:
        return 0
    return len(sym.name) - 2


# abstract functions and their default arguments
FUNCTION_SIGNATURES: dict[str, tuple[sp.Symbol, ...]] = {
    "A": (t, x), "B": (t, x), "C": (t, x), "D": (t, x),
    "U0": (t, x), "U1": (t, x), "X": (t, x), "U": (t, x),
    "T": (t,), "X0": (t,), "X1": (t,), "V": (t,), "f": (t,), "F": (t,),
    "W": (x,),
}


def fn(name: str, *args) -> Expr:
    """Apply the abstract function ``name`` (default arguments if none given)."""
    if not args:
        args = FUNCTION_SIGNATURES.get(name, (t, x))
    return sp.Function(name, real=True)(*args)


def abstract_functions(e: Expr) -> set[str]:
    return {f.func.__name__ for f in e.atoms(AppliedUndef)}


def symbol(name: str) -> sp.Symbol:
    """Look up a variable, parameter or jet coordinate by name."""
    if name in ("t", "x", "u"):
        return {"t": t, "x": x, "u": u}[name]
    if name in JET:
        return JET[name]
    return PARAMETERS.get(name) or sp.Symbol(name, real=True)


# -- errors -----------------------------------------------------------------

class ExprSyntaxError(ValueError):
    """Malformed expression source; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class UnknownFunctionError(ExprSyntaxError):
    pass


class DomainError(ArithmeticError):
    """Evaluation produced NaN/Inf or left the real domain."""

    def __init__(self, message: str, mask: np.ndarray | None = None):
        super().__init__(message)
        self.mask = mask


class UnboundSymbolError(KeyError):
    pass


class OracleError(LookupError):
    """A function oracle is missing or cannot supply a derivative order."""


# -- parser -----------------------------------------------------------------

ELEMENTARY: dict[str, Callable[..., Expr]] = {
    "exp": sp.exp, "ln": sp.log, "log": sp.log, "sin": sp.sin, "cos": sp.cos,
    "tan": sp.tan, "sinh": sp.sinh, "cosh": sp.cosh, "tanh": sp.tanh,
    "atan": sp.atan, "sqrt": sp.sqrt, "abs": sp.Abs, "sign": sp.sign,
    "pow": lambda p, q: sp.Pow(p, q),
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),]))"
)


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            m = _TOKEN.match(source, pos)
            if not m or m.end() == pos:
                if source[pos:].strip() == "":
                    break
                raise ExprSyntaxError(f"unexpected character {source[pos]!r}",
                                      self._bytes(pos))
            kind = m.lastgroup
            start = m.start(kind)
            self.toks.append((kind, m.group(kind), start))
            pos = m.end()
        self.toks.append(("end", "", len(source)))
        self.i = 0

    def _bytes(self, pos: int) -> int:
        return len(self.src[:pos].encode("utf-8"))

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            want = value or "token"
            got = tok[1] or "end of input"
            raise ExprSyntaxError(f"expected {want!r}, got {got!r}", self._bytes(tok[2]))
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", self._bytes(tok[2]))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.factor()
            e = e * rhs if op == "*" else e / rhs
        return e

    def factor(self) -> Expr:
        if self.peek()[1] in ("-", "+"):
            op = self.take()[1]
            inner = self.factor()
            return -inner if op == "-" else inner
        base = self.base()
        if self.peek()[1] in ("^", "**"):
            self.take()
            return sp.Pow(base, self.factor())
        return base

    def base(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return sp.Rational(val)
        if val == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind != "id":
            raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", self._bytes(pos))
        self.take()
        if self.peek()[1] != "(":
            if val in FUNCTION_SIGNATURES:
                return fn(val)
            return symbol(val)
        self.take("(")
        if val == "d":
            return self.derivative()
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        self.take(")")
        if val in ELEMENTARY:
            try:
                return ELEMENTARY[val](*args)
            except TypeError:
                raise ExprSyntaxError(f"wrong number of arguments to {val}", self._bytes(pos))
        if val in FUNCTION_SIGNATURES:
            return fn(val, *args)
        raise UnknownFunctionError(f"unknown function {val!r}", self._bytes(pos))

    def derivative(self) -> Expr:
        target = self.expr()
        self.take(",")
        kind, val, pos = self.take()
        if kind != "id":
            raise ExprSyntaxError("expected a variable name", self._bytes(pos))
        order = 1
        if self.peek()[1] == ",":
            self.take()
            kind, num, npos = self.take()
            if kind != "num" or not num.isdigit():
                raise ExprSyntaxError("expected an integer order", self._bytes(npos))
            order = int(num)
        self.take(")")
        return sp.diff(target, symbol(val), order)


def parse(source: str) -> Expr:
    """Parse an expression in the textual grammar.

    >>> parse("mu/x^2 + x^2")
    mu/x**2 + x**2
    """
    return _Parser(source).parse()


def as_expr(value) -> Expr:
    """Coerce strings (parsed), numbers (exact) and sympy objects to Expr."""
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, float):
        return sp.Rational(str(value)) if math.isfinite(value) else sp.sympify(value)
    return sp.sympify(value)


# -- renderer ---------------------------------------------------------------

class _GrammarPrinter(StrPrinter):
    def _print_Pow(self, expr, rational=False):
        out = super()._print_Pow(expr, rational)
        return out.replace("**", "^")

    def _print_Derivative(self, expr):
        inner = self._print(expr.expr)
        parts = []
        for var, n in expr.variable_count:
            parts.append(f"d({inner}, {var})" if n == 1 else f"d({inner}, {var}, {n})")
            inner = parts[-1]
        return inner

    def _print_log(self, expr):
        return f"ln({self._print(expr.args[0])})"

    def _print_Abs(self, expr):
        return f"abs({self._print(expr.args[0])})"

    def _print_Function(self, expr):
        name = expr.func.__name__
        if isinstance(expr, AppliedUndef) and FUNCTION_SIGNATURES.get(name) == expr.args:
            return name
        return super()._print_Function(expr)


def render(e: Expr) -> str:
    """Render in the textual grammar; ``parse(render(e)) == e``."""
    return _GrammarPrinter({"order": "none"}).doprint(e)


# -- calculus ---------------------------------------------------------------

def diff(e: Expr, v: sp.Symbol, n: int = 1, rules: Sequence["RewriteRule"] = ()) -> Expr:
    out = sp.diff(e, v, n)
    return apply_rules(out, rules) if rules else out


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution.

    Keys may be symbols, names, or abstract-function names; a function name
    binds to an Expr in that function's default arguments, and derivatives of
    the function are differentiated through.
    """
    plain: dict = {}
    funcs: dict[str, Expr] = {}
    for key, val in bindings.items():
        val = as_expr(val)
        if isinstance(key, str) and key in FUNCTION_SIGNATURES:
            funcs[key] = val
        elif isinstance(key, str):
            plain[symbol(key)] = val
        else:
            plain[key] = val
    out = e
    if funcs:
        out = substitute_functions(out, funcs)
    if plain:
        out = out.subs(plain, simultaneous=True)
    return out


def substitute_functions(e: Expr, bodies: Mapping[str, Expr],
                         signatures: Mapping[str, Sequence[sp.Symbol]] | None = None) -> Expr:
    """Replace abstract functions by bodies written in their default arguments."""
    sigs = dict(FUNCTION_SIGNATURES)
    if signatures:
        sigs.update(signatures)

    def body_at(node):
        name = node.func.__name__
        body = as_expr(bodies[name])
        vars_ = sigs.get(name, (t, x))
        if len(vars_) != len(node.args):
            vars_ = tuple(vars_)[: len(node.args)]
        return body.subs(dict(zip(vars_, node.args)), simultaneous=True)

    hit = lambda node: isinstance(node, AppliedUndef) and node.func.__name__ in bodies
    if not any(hit(n) for n in e.atoms(AppliedUndef)):
        return e
    out = e.replace(hit, body_at)
    if out.has(sp.Derivative) or out.has(sp.Subs):
        out = out.doit()
    return out


def reduce_signs(e: Expr) -> Expr:
    """Use eps**2 = epsb**2 = 1."""
    def is_sign_pow(p):
        return (p.is_Pow and p.base in SIGN_PARAMETERS and p.exp.is_Integer)
    return e.replace(is_sign_pow, lambda p: p.base ** (int(p.exp) % 2))


def simplify(e: Expr) -> Expr:
    """Normal form on the rational fragment; elementary arguments recursively.

    Rational functions of symbols are brought to a cancelled quotient, so
    ``simplify(e - e) == 0`` for rational ``e``.
    """
    e = reduce_signs(sp.sympify(e))
    elementary = (sp.exp, sp.log, sp.sin, sp.cos, sp.tan, sp.sinh, sp.cosh, sp.Abs)
    e = e.replace(lambda n: isinstance(n, elementary),
                  lambda n: n.func(simplify(n.args[0])))
    out = sp.cancel(sp.together(sp.powsimp(e)))
    return reduce_signs(out)


# -- rewrite rules ----------------------------------------------------------

def _deriv_order(e: Expr, name: str, var: sp.Symbol) -> int:
    best = -1
    for node in e.atoms(AppliedUndef):
        if node.func.__name__ == name:
            best = max(best, 0)
    for d in e.atoms(sp.Derivative):
        if isinstance(d.expr, AppliedUndef) and d.expr.func.__name__ == name:
            best = max(best, sum(n for v, n in d.variable_count if v == var))
    return best


@dataclass(frozen=True)
class RewriteRule:
    """Replace the ``order``-th ``var``-derivative of ``func`` by ``replacement``.

    Higher derivatives are rewritten by differentiating the rule.  The
    replacement must have lower derivative order and may mention no abstract
    function other than ``func``; together this makes application terminate.
    """

    func: Expr
    var: sp.Symbol
    order: int
    replacement: Expr
    guard: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.func, AppliedUndef):
            raise TypeError("rule target must be an abstract function application")
        name = self.func.func.__name__
        extra = abstract_functions(self.replacement) - {name}
        if extra:
            raise ValueError(f"replacement introduces functions {sorted(extra)}")
        if _deriv_order(self.replacement, name, self.var) >= self.order:
            raise ValueError("replacement must have lower derivative order than the pattern")

    @property
    def name(self) -> str:
        return self.func.func.__name__

    @property
    def pattern(self) -> Expr:
        return sp.Derivative(self.func, (self.var, self.order))

    def admits(self, values: Mapping[str, object]) -> bool:
        return all(values.get(k, v[0]) in v for k, v in self.guard.items())

    def _matches(self, d) -> int:
        if not (isinstance(d, sp.Derivative) and d.expr == self.func):
            return -1
        counts = dict(d.variable_count)
        if set(counts) != {self.var}:
            return -1
        n = counts[self.var]
        return n if n >= self.order else -1

    def apply(self, e: Expr, max_steps: int = 64) -> Expr:
        for _ in range(max_steps):
            targets = {d: self._matches(d) for d in e.atoms(sp.Derivative)}
            targets = {d: n for d, n in targets.items() if n >= 0}
            if not targets:
                return e
            e = e.xreplace({d: sp.diff(self.replacement, self.var, n - self.order)
                            for d, n in targets.items()})
        raise RuntimeError("rewrite did not reach a fixed point")


def apply_rules(e: Expr, rules: Iterable[RewriteRule]) -> Expr:
    rules = tuple(rules)
    prev = None
    while prev != e:
        prev = e
        for r in rules:
            e = r.apply(e)
    return e


def w_rule(C: Expr, lam_: Expr, eps_: Expr, W: Expr | None = None) -> RewriteRule:
    """W'' = -eps (C + lam) W, i.e. eps W'' + (C + lam) W = 0 with eps**2 = 1."""
    W = fn("W") if W is None else W
    return RewriteRule(W, x, 2, -eps_ * (as_expr(C) + as_expr(lam_)) * W)


# -- numeric evaluation -----------------------------------------------------

Oracle = Callable[[tuple, tuple], np.ndarray]


def oracle_from_expr(body: Expr, args: Sequence[sp.Symbol]) -> Oracle:
    """Oracle for an abstract function given by a closed-form body."""
    body = as_expr(body)
    args = tuple(args)
    cache: dict[tuple, Callable] = {}

    def oracle(values: tuple, orders: tuple) -> np.ndarray:
        if orders not in cache:
            d = body
            for var, n in zip(args, orders):
                if n:
                    d = sp.diff(d, var, n)
            cache[orders] = sp.lambdify(args, d, "numpy")
        return np.asarray(cache[orders](*values), dtype=float) + 0 * values[0]

    return oracle


@dataclass(frozen=True)
class _Compiled:
    symbols: tuple
    func: Callable
    calls: tuple  # (name, orders, arg_func)


def _split_function_nodes(e: Expr):
    repl: dict = {}
    calls = []
    for d in sorted(e.atoms(sp.Derivative), key=sp.default_sort_key):
        if not isinstance(d.expr, AppliedUndef):
            raise OracleError(f"cannot evaluate derivative {d}")
        f = d.expr
        if not all(a.is_Symbol for a in f.args):
            raise OracleError(f"derivative of composite application {d}")
        counts = dict(d.variable_count)
        orders = tuple(counts.get(a, 0) for a in f.args)
        dummy = sp.Dummy()
        repl[d] = dummy
        calls.append((dummy, f.func.__name__, orders, f.args))
    for s in sorted(e.atoms(sp.Subs), key=sp.default_sort_key):
        inner = s.expr
        if not (isinstance(inner, sp.Derivative) and isinstance(inner.expr, AppliedUndef)):
            raise OracleError(f"cannot evaluate {s}")
        f = inner.expr
        counts = dict(inner.variable_count)
        sub = dict(zip(s.variables, s.point))
        orders = tuple(counts.get(a, 0) for a in f.args)
        dummy = sp.Dummy()
        repl[s] = dummy
        calls.append((dummy, f.func.__name__, orders, tuple(sp.sympify(a).subs(sub) for a in f.args)))
    e2 = e.xreplace(repl) if repl else e
    for f in sorted(e2.atoms(AppliedUndef), key=sp.default_sort_key):
        dummy = sp.Dummy()
        repl[f] = dummy
        calls.append((dummy, f.func.__name__, (0,) * len(f.args), f.args))
    return e.xreplace(repl) if repl else e, calls


@lru_cache(maxsize=4096)
def _compile(e, terms: bool = False) -> _Compiled:
    body, calls = _split_function_nodes(e)
    dummies = {c[0] for c in calls}
    free = sorted((s for s in body.free_symbols if s not in dummies), key=lambda s: s.name)
    arg_syms = sorted({s for c in calls for a in c[3] for s in sp.sympify(a).free_symbols},
                      key=lambda s: s.name)
    all_syms = tuple(sorted(set(free) | set(arg_syms), key=lambda s: s.name))
    if terms:
        parts = list(body.args) if body.is_Add else [body]
        target = parts
    else:
        target = body
    func = sp.lambdify(all_syms + tuple(c[0] for c in calls), target, "numpy")
    call_specs = tuple(
        (c[1], c[2], sp.lambdify(all_syms, list(c[3]), "numpy")) for c in calls
    )
    return _Compiled(all_syms, func, call_specs)


def _point_lookup(point: Mapping) -> dict[str, object]:
    return {(k if isinstance(k, str) else k.name): v for k, v in point.items()}


def _run(e: Expr, point: Mapping, oracles: Mapping | None, terms: bool):
    e = sp.sympify(e)
    comp = _compile(e, terms)
    values = _point_lookup(point)
    args = []
    for s in comp.symbols:
        if s.name not in values:
            raise UnboundSymbolError(s.name)
        args.append(np.asarray(values[s.name], dtype=float))
    shape = np.broadcast_shapes(*(a.shape for a in args)) if args else ()
    extra = []
    oracles = oracles or {}
    with np.errstate(all="ignore"):
        for name, orders, argf in comp.calls:
            if name not in oracles:
                raise OracleError(f"no oracle for function {name}")
            fargs = tuple(np.broadcast_to(np.asarray(v, dtype=float), shape) for v in argf(*args))
            extra.append(np.asarray(oracles[name](fargs, orders), dtype=float))
        out = comp.func(*args, *extra)
    return out, shape


def _check(val, shape) -> np.ndarray:
    arr = np.asarray(val)
    if np.iscomplexobj(arr):
        raise DomainError("complex value in real evaluation")
    arr = np.broadcast_to(arr.astype(float), shape) if shape else arr.astype(float)
    bad = ~np.isfinite(arr)
    if np.any(bad):
        raise DomainError("non-finite value (domain violation)", mask=np.atleast_1d(bad))
    return arr


def evaluate(e: Expr, point: Mapping, oracles: Mapping | None = None):
    """Evaluate at a point (scalars or broadcastable arrays).

    Abstract functions are evaluated through ``oracles[name](args, orders)``.
    NaN or Inf raise :class:`DomainError` instead of being returned.
    """
    val, shape = _run(e, point, oracles, terms=False)
    arr = _check(val, shape)
    return float(arr) if arr.ndim == 0 else arr


def evaluate_terms(e: Expr, point: Mapping, oracles: Mapping | None = None):
    """Values of the top-level summands of ``e`` (one array per summand)."""
    vals, shape = _run(e, point, oracles, terms=True)
    return [_check(v, shape) for v in vals]


# -- sampling and zero testing ----------------------------------------------

JET_RANGE = (-2.0, 2.0)
JET_GAP = 0.1


@dataclass(frozen=True)
class DomainSampler:
    """Random points in a declared real domain.

    ``intervals`` maps symbol names to closed ranges, ``fixed`` pins values,
    ``positive``/``nonzero`` are Exprs that must stay above ``margin``
    (respectively away from zero) at accepted points.  Symbols with no
    declaration draw from [-2, 2] minus (-0.1, 0.1).
    """

    intervals: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    fixed: Mapping[str, float] = field(default_factory=dict)
    positive: tuple = ()
    nonzero: tuple = ()
    margin: float = 1e-3

    def __hash__(self):
        return hash((tuple(sorted(self.intervals.items())), tuple(sorted(self.fixed.items())),
                     self.positive, self.nonzero, self.margin))

    def with_fixed(self, **values) -> "DomainSampler":
        fixed = dict(self.fixed)
        fixed.update({k: float(v) for k, v in values.items()})
        return DomainSampler(dict(self.intervals), fixed, self.positive, self.nonzero, self.margin)

    def with_intervals(self, **ranges) -> "DomainSampler":
        iv = dict(self.intervals)
        iv.update({k: tuple(map(float, v)) for k, v in ranges.items()})
        return DomainSampler(iv, dict(self.fixed), self.positive, self.nonzero, self.margin)

    def constrain(self, positive=(), nonzero=()) -> "DomainSampler":
        return DomainSampler(dict(self.intervals), dict(self.fixed),
                             self.positive + tuple(as_expr(p) for p in positive),
                             self.nonzero + tuple(as_expr(p) for p in nonzero), self.margin)

    def _draw(self, name: str, n: int, rng: np.random.Generator) -> np.ndarray:
        if name in self.fixed:
            return np.full(n, float(self.fixed[name]))
        if name in self.intervals:
            lo, hi = self.intervals[name]
            return rng.uniform(lo, hi, n)
        lo, hi = JET_RANGE
        mag = rng.uniform(JET_GAP, hi, n)
        return np.where(rng.random(n) < 0.5, -mag, mag)

    def _accept(self, pts: dict[str, np.ndarray], n: int) -> np.ndarray:
        ok = np.ones(n, dtype=bool)
        with np.errstate(all="ignore"):
            for cond, test in [(p, "pos") for p in self.positive] + [(q, "nz") for q in self.nonzero]:
                try:
                    raw, shape = _run(cond, pts, None, terms=False)
                    val = np.broadcast_to(np.asarray(raw, dtype=float), (n,))
                except UnboundSymbolError:
                    continue
                good = np.isfinite(val) & ((val > self.margin) if test == "pos"
                                           else (np.abs(val) > self.margin))
                ok &= good
        return ok

    def sample(self, names: Iterable[str], n: int, rng: np.random.Generator,
               max_rounds: int = 50) -> dict[str, np.ndarray]:
        names = sorted(set(names) | self._constraint_names())
        out = {k: np.empty(0) for k in names}
        have = 0
        for _ in range(max_rounds):
            need = n - have
            if need <= 0:
                break
            batch = max(2 * need, 16)
            pts = {k: self._draw(k, batch, rng) for k in names}
            keep = self._accept(pts, batch)
            for k in names:
                out[k] = np.concatenate([out[k], pts[k][keep]])
            have = int(keep.sum()) + have
        if have < n:
            raise DomainError("sampler could not find enough points in the domain")
        return {k: v[:n] for k, v in out.items()}

    def _constraint_names(self) -> set[str]:
        names = set()
        for cond in self.positive + self.nonzero:
            names |= {s.name for s in cond.free_symbols}
        return names

    def contains(self, point: Mapping) -> bool:
        values = _point_lookup(point)
        for k, (lo, hi) in self.intervals.items():
            if k in values and not (lo <= float(values[k]) <= hi):
                return False
        pts = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in values.items()}
        n = max(len(v) for v in pts.values()) if pts else 1
        return bool(np.all(self._accept(pts, n)))

    def to_json(self) -> dict:
        out: dict = {k: list(v) for k, v in self.intervals.items()}
        if self.fixed:
            out["params"] = dict(self.fixed)
        if self.positive:
            out["positive"] = [render(p) for p in self.positive]
        if self.nonzero:
            out["nonzero"] = [render(p) for p in self.nonzero]
        return out

    @classmethod
    def from_json(cls, data: Mapping | None) -> "DomainSampler":
        data = dict(data or {})
        fixed = {k: float(v) for k, v in data.pop("params", {}).items()}
        positive = tuple(parse(p) for p in data.pop("positive", []))
        nonzero = tuple(parse(p) for p in data.pop("nonzero", []))
        margin = float(data.pop("margin", 1e-3))
        intervals = {k: (float(v[0]), float(v[1])) for k, v in data.items()}
        return cls(intervals, fixed, positive, nonzero, margin)


DEFAULT_DOMAIN = DomainSampler({"t": (0.2, 1.5), "x": (0.5, 2.0)})


@dataclass(frozen=True)
class ZeroTest:
    passed: bool
    max_residual: float
    samples: int
    tol: float


def _symbol_names(e: Expr) -> set[str]:
    body, calls = _split_function_nodes(e)
    dummies = {c[0] for c in calls}
    names = {s.name for s in body.free_symbols if s not in dummies}
    for c in calls:
        for arg in c[3]:
            names |= {s.name for s in sp.sympify(arg).free_symbols}
    return names


def zero_test(e: Expr, sampler: DomainSampler = DEFAULT_DOMAIN, tol: float = 1e-8,
              trials: int = 200, rng: np.random.Generator | None = None,
              oracles: Mapping | None = None, max_retries: int = 20) -> ZeroTest:
    """Scale-aware probabilistic zero test.

    The residual at a point is |e| / (1 + s) where s is the largest absolute
    value among the top-level summands of ``e`` (for a product, the summands
    of its sum factors times the remaining factors).  Points where
    evaluation leaves the domain are redrawn up to ``max_retries`` times.
    """
    e = sp.sympify(e)
    if e == 0:
        return ZeroTest(True, 0.0, trials, tol)
    rng = rng if rng is not None else np.random.default_rng(0)
    target = _scaled_form(e)
    names = _symbol_names(target)
    if not names:
        # a constant: one evaluation decides
        r = abs(float(evaluate(e, {}, oracles)))
        r /= 1.0 + max(abs(float(v)) for v in evaluate_terms(target, {}, oracles))
        return ZeroTest(r <= tol, r, trials, tol)
    residuals: list[np.ndarray] = []
    need = trials
    for _ in range(max_retries + 1):
        pts = sampler.sample(names, need, rng)
        try:
            terms = evaluate_terms(target, pts, oracles)
        except DomainError as err:
            if err.mask is None:
                raise
            good = ~np.broadcast_to(err.mask, (need,))
            if not good.any():
                continue
            pts = {k: v[good] for k, v in pts.items()}
            terms = evaluate_terms(target, pts, oracles)
        total = np.zeros(len(next(iter(pts.values())))) if pts else np.zeros(1)
        scale = np.zeros_like(total)
        for term in terms:
            total = total + term
            scale = np.maximum(scale, np.abs(term))
        residuals.append(np.abs(total) / (1.0 + scale))
        need -= len(total)
        if need <= 0:
            break
    got = int(sum(len(r) for r in residuals))
    if got < trials:
        raise DomainError(f"only {got} of {trials} sample points were in the domain")
    worst = float(max(np.max(r) for r in residuals if len(r)))
    return ZeroTest(worst <= tol, worst, got, tol)


def _scaled_form(e: Expr) -> Expr:
    """Distribute a product over its largest sum factor so summands carry scale."""
    if e.is_Mul:
        sums = [f for f in e.args if f.is_Add]
        if sums:
            big = max(sums, key=lambda f: len(f.args))
            rest = sp.Mul(*[f for f in e.args if f is not big])
            return sp.Add(*[rest * term for term in big.args], evaluate=False)
    return e


def is_zero(e: Expr, sampler: DomainSampler = DEFAULT_DOMAIN, tol: float = 1e-8,
            trials: int = 200, rng: np.random.Generator | None = None,
            oracles: Mapping | None = None) -> bool:
    e = sp.sympify(e)
    if e.is_rational_function() and not e.atoms(AppliedUndef) and simplify(e) == 0:
        return True
    return zero_test(e, sampler, tol, trials, rng, oracles).passed
