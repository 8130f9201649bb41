"""Integral Bailey pairs as evaluable expression trees.

A pair (alpha, beta) with respect to a parameter monomial tau satisfies

    beta(w) = kappa * int_T Gamma(tau w^{+-} z^{+-}) alpha(z) dz / (2 pi i z),

and two constructions map pairs to pairs: the chain step trades
tau -> tau*s at the cost of one new contour integral inside beta, and the
dual step trades tau*s -> tau moving the integral into alpha.  Composing
the two letters in any order grows a binary tree of identities; every
node of that tree is representable here and numerically certifiable via
pair_residual.

Expressions are small immutable trees (gamma products, scalar prefactors,
products, contour integrals) rather than closures, so tests can compare
factor multisets structurally and pairs serialize to JSON.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

from .constraints import ConstraintSet, lt_one, pq_lt
from .ellgamma import BaseParams, DEFAULT_TOL, ToleranceSpec, kappa
from .errors import (ConstraintViolation, DomainError, NotConverged, ShapeError)
from .expr import (Assignment, GammaFactor, Integrand, ONE, ParamMonomial,
                   evaluate, expand_pm)
from .quadrature import (IntegrandOnGrid, QuadratureConfig, QuadratureResult,
                         contour_mean)

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class GammaProduct:
    """Leaf: a plain product of gamma factors."""

    factors: tuple[GammaFactor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Scale:
    """Leaf: mono * (q;q)_inf^qq_pow * (p;p)_inf^pp_pow."""

    mono: ParamMonomial = ONE
    qq_pow: int = 0
    pp_pow: int = 0


@dataclass(frozen=True)
class Product:
    terms: tuple["BaileyExpr", ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class Integral:
    """Contour integral int_T body dvar/var over the unit circle, carrying
    kappa_power explicit kappa prefactors."""

    var: str
    body: "BaileyExpr"
    kappa_power: int = 0


BaileyExpr = Union[GammaProduct, Scale, Product, Integral]


def rename_contour_var(expr: BaileyExpr, old: str, new: str) -> BaileyExpr:
    if isinstance(expr, GammaProduct):
        return GammaProduct(tuple(f.rename_var(old, new) for f in expr.factors))
    if isinstance(expr, Scale):
        return expr
    if isinstance(expr, Product):
        return Product(tuple(rename_contour_var(t, old, new) for t in expr.terms))
    if isinstance(expr, Integral):
        if expr.var in (old, new):
            raise DomainError(f"renaming {old!r}->{new!r} collides with bound "
                              f"integration variable {expr.var!r}")
        return Integral(expr.var, rename_contour_var(expr.body, old, new),
                        expr.kappa_power)
    raise DomainError(f"unknown expression node {type(expr).__name__}")


def substitute_param(expr: BaileyExpr, name: str,
                     replacement: ParamMonomial) -> BaileyExpr:
    if isinstance(expr, GammaProduct):
        return GammaProduct(tuple(f.substitute_param(name, replacement)
                                  for f in expr.factors))
    if isinstance(expr, Scale):
        return Scale(expr.mono.substitute(name, replacement),
                     expr.qq_pow, expr.pp_pow)
    if isinstance(expr, Product):
        return Product(tuple(substitute_param(t, name, replacement)
                             for t in expr.terms))
    if isinstance(expr, Integral):
        return Integral(expr.var, substitute_param(expr.body, name, replacement),
                        expr.kappa_power)
    raise DomainError(f"unknown expression node {type(expr).__name__}")


def expr_to_json(expr: BaileyExpr) -> dict:
    if isinstance(expr, GammaProduct):
        return {"gammas": [f.to_json() for f in expr.factors]}
    if isinstance(expr, Scale):
        out = {"scale": expr.mono.to_json()}
        out["scale"]["qq"] = expr.qq_pow
        out["scale"]["pp"] = expr.pp_pow
        return out
    if isinstance(expr, Product):
        return {"product": [expr_to_json(t) for t in expr.terms]}
    if isinstance(expr, Integral):
        return {"int": expr.var, "kappa": expr.kappa_power,
                "body": expr_to_json(expr.body)}
    raise DomainError(f"unknown expression node {type(expr).__name__}")


def expr_from_json(obj: dict) -> BaileyExpr:
    if "gammas" in obj:
        return GammaProduct(tuple(GammaFactor.from_json(f) for f in obj["gammas"]))
    if "scale" in obj:
        s = obj["scale"]
        return Scale(ParamMonomial.from_json(s), s.get("qq", 0), s.get("pp", 0))
    if "product" in obj:
        return Product(tuple(expr_from_json(t) for t in obj["product"]))
    if "int" in obj:
        return Integral(obj["int"], expr_from_json(obj["body"]), obj.get("kappa", 0))
    raise DomainError(f"unrecognized expression JSON {sorted(obj)}")


@dataclass(frozen=True)
class FlatExpr:
    """A tree collapsed to scale * prod factors integrated over int_vars."""

    mono: ParamMonomial
    qq_pow: int
    pp_pow: int
    kappa_pow: int
    int_vars: tuple[str, ...]
    factors: tuple[GammaFactor, ...]

    def factor_multiset(self) -> dict:
        counts: dict[tuple, int] = {}
        for f in self.factors:
            counts[f.key()] = counts.get(f.key(), 0) + 1
        return counts


def flatten(expr: BaileyExpr) -> FlatExpr:
    """Collapse nested products and integrals onto one joint contour grid.

    Valid because every Integral binds a distinct variable and the
    integrand is a plain factor product, so the iterated integrals equal
    the joint mean over the tensor torus (the order of integrations does
    not matter).
    """
    mono = ONE
    pows = [0, 0, 0]
    int_vars: list[str] = []
    factors: list[GammaFactor] = []

    def go(e: BaileyExpr) -> None:
        nonlocal mono
        if isinstance(e, GammaProduct):
            factors.extend(e.factors)
        elif isinstance(e, Scale):
            mono = mono * e.mono
            pows[0] += e.qq_pow
            pows[1] += e.pp_pow
        elif isinstance(e, Product):
            for t in e.terms:
                go(t)
        elif isinstance(e, Integral):
            if e.var in int_vars:
                raise DomainError(f"variable {e.var!r} bound by two integrals")
            int_vars.append(e.var)
            pows[2] += e.kappa_power
            go(e.body)
        else:
            raise DomainError(f"unknown expression node {type(e).__name__}")

    go(expr)
    return FlatExpr(mono, pows[0], pows[1], pows[2], tuple(int_vars),
                    tuple(factors))


def eval_bailey_expr(expr: BaileyExpr, a: Assignment, base: BaseParams,
                     cfg: QuadratureConfig, tol: ToleranceSpec = DEFAULT_TOL,
                     ) -> tuple[complex, list[QuadratureResult]]:
    """Numeric value of an expression tree and its quadrature records.

    Each Integral node contributes int_T dz/z = 2 pi i times a grid mean,
    so with k kappa prefactors the value carries kappa^k (2 pi i)^m times
    the joint mean over the m-torus.
    """
    fl = flatten(expr)
    scale = fl.mono.evaluate(a.params)
    if fl.qq_pow:
        scale *= base.q_poch ** fl.qq_pow
    if fl.pp_pow:
        scale *= base.p_poch ** fl.pp_pow
    if fl.kappa_pow:
        scale *= kappa(base) ** fl.kappa_pow
    m = len(fl.int_vars)
    if m == 0:
        value = scale * evaluate(Integrand(fl.factors, ()), a, base, tol)
        return value, []
    intg = Integrand(fl.factors, fl.int_vars)
    r = contour_mean(IntegrandOnGrid(intg, a, base, tol), m, cfg)
    return scale * _TWO_PI_I ** m * r.value, [r]


def _mono(**exps: int) -> ParamMonomial:
    return ParamMonomial.of(**exps)


@dataclass(frozen=True)
class BaileyPair:
    """An (alpha, beta) pair with respect to the parameter t_expr.

    Both trees share the free contour variable ext_var (the external
    point); constraints accumulate the validity inequalities of every
    construction step; next_index supplies fresh integration-variable
    names so composed trees never collide.
    """

    alpha: BaileyExpr
    beta: BaileyExpr
    t_expr: ParamMonomial
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    family_param: str = "t"
    ext_var: str = "w"
    next_index: int = 1

    def to_json(self) -> dict:
        return {"alpha": expr_to_json(self.alpha),
                "beta": expr_to_json(self.beta),
                "t_expr": self.t_expr.to_json(),
                "constraints": self.constraints.to_json(),
                "family_param": self.family_param,
                "ext_var": self.ext_var,
                "next_index": self.next_index}

    @staticmethod
    def from_json(obj: dict) -> "BaileyPair":
        return BaileyPair(expr_from_json(obj["alpha"]),
                          expr_from_json(obj["beta"]),
                          ParamMonomial.from_json(obj["t_expr"]),
                          ConstraintSet.from_json(obj.get("constraints", [])),
                          obj.get("family_param", "t"),
                          obj.get("ext_var", "w"),
                          obj.get("next_index", 1))


def seed_pair(t0: str = "t0", t1: str = "t1", t2: str = "t2",
              t: str = "t", ext_var: str = "w") -> BaileyPair:
    """The initial pair built from the exactly evaluable contour integral.

    alpha(w) = prod_r Gamma(t_r w^{+-}) / (Gamma(w^{+-2}) Gamma(t^2 t0 t1 t2 w^{+-}))
    beta(w)  = Gamma(t^2) prod_{r<j} Gamma(t_r t_j)/Gamma(t^2 t_r t_j)
               * prod_r Gamma(t t_r w^{+-}) / Gamma(t t0 t1 t2 w^{+-})
    valid for |t|, |t_r| < 1 and |pq| < |t^2 t0 t1 t2|.
    """
    names = (t0, t1, t2, t)
    if len(set(names)) != 4:
        raise DomainError(f"parameter names must be distinct, got {names}")
    w = ext_var
    alpha_factors: tuple[GammaFactor, ...] = ()
    for r in names[:3]:
        alpha_factors += expand_pm(_mono(**{r: 1}), [(w, 1)])
    alpha_factors += expand_pm(ONE, [(w, 2)], loc="den")
    A = _mono(**{t: 2, t0: 1, t1: 1, t2: 1})
    alpha_factors += expand_pm(A, [(w, 1)], loc="den")
    alpha = GammaProduct(alpha_factors)

    beta_factors: tuple[GammaFactor, ...] = (GammaFactor(_mono(**{t: 2}), ()),)
    for i in range(3):
        for j in range(i + 1, 3):
            pair_mono = _mono(**{names[i]: 1, names[j]: 1})
            beta_factors += (GammaFactor(pair_mono, ()),)
            beta_factors += (GammaFactor(_mono(**{t: 2}) * pair_mono, (), "den"),)
    for r in names[:3]:
        beta_factors += expand_pm(_mono(**{t: 1, r: 1}), [(w, 1)])
    beta_factors += expand_pm(_mono(**{t: 1, t0: 1, t1: 1, t2: 1}),
                              [(w, 1)], loc="den")
    beta = GammaProduct(beta_factors)

    constraints = ConstraintSet().extended(
        [lt_one(nm) for nm in names] + [pq_lt(A)])
    return BaileyPair(alpha, beta, _mono(**{t: 1}), constraints,
                      family_param=t, ext_var=w)


def _check_new_names(pair: BaileyPair, s: str, u: str) -> None:
    if s == u:
        raise DomainError(f"step parameter names must differ, got {s!r} twice")
    used = set(pair.constraints.param_names()) | set(pair.t_expr.names)
    for name in (s, u):
        if name in used:
            raise DomainError(f"step parameter {name!r} already in use")


def chain_step(pair: BaileyPair, s: str, u: str) -> BaileyPair:
    """Chain construction: a pair at tau becomes a pair at tau*s.

    alpha'(w) = Gamma(tau u w^{+-}) / Gamma(tau s^2 u w^{+-}) * alpha(w)
    beta'(w)  = Gamma(tau^2 s^2) Gamma(tau^2 s u w^{+-})
                / (Gamma(s^2) Gamma(tau^2) Gamma(s u w^{+-}))
                * kappa int_T Gamma(s w^{+-} x^{+-}) Gamma(u x^{+-})
                  / (Gamma(x^{+-2}) Gamma(tau^2 s^2 u x^{+-})) beta(x) dx/x
    adding constraints |tau|, |s|, |u| < 1 and |pq| < |tau^2 s^2 u|.
    """
    _check_new_names(pair, s, u)
    tau = pair.t_expr
    w = pair.ext_var
    x = f"x{pair.next_index}"
    S, U = _mono(**{s: 1}), _mono(**{u: 1})

    ratio = GammaProduct(expand_pm(tau * U, [(w, 1)])
                         + expand_pm(tau * S * S * U, [(w, 1)], loc="den"))
    alpha = Product((ratio, pair.alpha))

    pref = GammaProduct(
        (GammaFactor(tau * tau * S * S, ()),)
        + expand_pm(tau * tau * S * U, [(w, 1)])
        + (GammaFactor(S * S, (), "den"), GammaFactor(tau * tau, (), "den"))
        + expand_pm(S * U, [(w, 1)], loc="den"))
    kernel = GammaProduct(
        expand_pm(S, [(w, 1), (x, 1)])
        + expand_pm(U, [(x, 1)])
        + expand_pm(ONE, [(x, 2)], loc="den")
        + expand_pm(tau * tau * S * S * U, [(x, 1)], loc="den"))
    body = Product((kernel, rename_contour_var(pair.beta, w, x)))
    beta = Product((pref, Integral(x, body, kappa_power=1)))

    constraints = pair.constraints.extended(
        [lt_one(tau), lt_one(s), lt_one(u),
         pq_lt(tau * tau * S * S * U)])
    return replace(pair, alpha=alpha, beta=beta, t_expr=tau * S,
                   constraints=constraints, next_index=pair.next_index + 1)


def dual_step(pair: BaileyPair, s: str, u: str) -> BaileyPair:
    """Dual construction: a pair at tau = tau'*s becomes a pair at tau'.

    alpha'(w) = Gamma(s^2 tau'^2) Gamma(u w^{+-})
                / (Gamma(s^2) Gamma(tau'^2) Gamma(w^{+-2}) Gamma(tau'^2 s^2 u w^{+-}))
                * kappa int_T Gamma(tau'^2 s u x^{+-}) Gamma(s w^{+-} x^{+-})
                  / Gamma(s u x^{+-}) alpha(x) dx/x
    beta'(w)  = Gamma(tau' u w^{+-}) / Gamma(tau' s^2 u w^{+-}) * beta(w)
    requiring t_expr divisible by s; adds |s|, |u|, |tau'| < 1 and
    |pq| < |tau'^2 s^2 u|.
    """
    tau = pair.t_expr
    if tau.degree(s) < 1:
        raise ShapeError(
            f"dual step needs t_expr divisible by {s!r}, got {tau}")
    if s == u:
        raise DomainError(f"step parameter names must differ, got {s!r} twice")
    used = set(pair.constraints.param_names()) | set(tau.names)
    if u in used:
        raise DomainError(f"step parameter {u!r} already in use")
    w = pair.ext_var
    x = f"x{pair.next_index}"
    S, U = _mono(**{s: 1}), _mono(**{u: 1})
    tau1 = tau * _mono(**{s: -1})

    pref = GammaProduct(
        (GammaFactor(tau1 * tau1 * S * S, ()),)
        + expand_pm(U, [(w, 1)])
        + (GammaFactor(S * S, (), "den"), GammaFactor(tau1 * tau1, (), "den"))
        + expand_pm(ONE, [(w, 2)], loc="den")
        + expand_pm(tau1 * tau1 * S * S * U, [(w, 1)], loc="den"))
    kernel = GammaProduct(
        expand_pm(tau1 * tau1 * S * U, [(x, 1)])
        + expand_pm(S, [(w, 1), (x, 1)])
        + expand_pm(S * U, [(x, 1)], loc="den"))
    body = Product((kernel, rename_contour_var(pair.alpha, w, x)))
    alpha = Product((pref, Integral(x, body, kappa_power=1)))

    ratio = GammaProduct(expand_pm(tau1 * U, [(w, 1)])
                         + expand_pm(tau1 * S * S * U, [(w, 1)], loc="den"))
    beta = Product((ratio, pair.beta))

    constraints = pair.constraints.extended(
        [lt_one(s), lt_one(u), lt_one(tau1),
         pq_lt(tau1 * tau1 * S * S * U)])
    return replace(pair, alpha=alpha, beta=beta, t_expr=tau1,
                   constraints=constraints, next_index=pair.next_index + 1)


def iterate_chain(pair: BaileyPair, steps: Sequence[tuple[str, str]]) -> BaileyPair:
    for s, u in steps:
        pair = chain_step(pair, s, u)
    return pair


def iterate_dual(pair: BaileyPair, steps: Sequence[tuple[str, str]]) -> BaileyPair:
    for s, u in steps:
        pair = dual_step(pair, s, u)
    return pair


def instantiate(pair: BaileyPair, replacement: ParamMonomial) -> BaileyPair:
    """Substitute the family parameter throughout the pair."""
    name = pair.family_param
    new_records = tuple(
        replace(c, monomial=c.monomial.substitute(name, replacement))
        for c in pair.constraints.records)
    return replace(pair,
                   alpha=substitute_param(pair.alpha, name, replacement),
                   beta=substitute_param(pair.beta, name, replacement),
                   t_expr=pair.t_expr.substitute(name, replacement),
                   constraints=ConstraintSet(new_records))


@dataclass(frozen=True)
class TreeWord:
    """A word over the two letters C (chain step) and D (dual step), each
    carrying its own fresh (s, u) parameter names."""

    letters: tuple[tuple[str, str, str], ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for kind, s, u in self.letters:
            if kind not in ("C", "D"):
                raise DomainError(f"letters must be C or D, got {kind!r}")
            for name in (s, u):
                if not name or not re.fullmatch(r"[A-Za-z_]\w*", name):
                    raise DomainError(f"bad parameter name {name!r}")
                if name in seen:
                    raise DomainError(f"parameter name {name!r} reused in word")
                seen.add(name)

    @staticmethod
    def parse(text: str) -> "TreeWord":
        """Parse words like "C(s1,u1);D(s2,u2)"; empty text is the
        identity word."""
        text = text.strip()
        if not text:
            return TreeWord(())
        letters = []
        for part in text.split(";"):
            m = re.fullmatch(r"\s*([CD])\s*\(\s*([A-Za-z_]\w*)\s*,"
                             r"\s*([A-Za-z_]\w*)\s*\)\s*", part)
            if m is None:
                raise DomainError(f"cannot parse tree-word letter {part!r}")
            letters.append((m.group(1), m.group(2), m.group(3)))
        return TreeWord(tuple(letters))

    def __str__(self) -> str:
        return ";".join(f"{k}({s},{u})" for k, s, u in self.letters)


def tree_pair(word: TreeWord, seed: BaileyPair) -> BaileyPair:
    """Apply a word left-to-right, pre-instantiating the seed so every
    dual letter finds its factor to undo.

    A dual step removes one power of its s from t_expr, so the seed's
    family parameter is first replaced by t * prod(s of D letters); chain
    letters then multiply and dual letters divide, and the final t_expr
    is t * prod(C s) as a monomial identity.
    """
    d_product = ONE
    for kind, s, _u in word.letters:
        if kind == "D":
            d_product = d_product * _mono(**{s: 1})
    pair = seed
    if d_product != ONE:
        pair = instantiate(seed, _mono(**{seed.family_param: 1}) * d_product)
    for kind, s, u in word.letters:
        pair = chain_step(pair, s, u) if kind == "C" else dual_step(pair, s, u)
    return pair


def pair_residual(pair: BaileyPair, a: Assignment, base: BaseParams,
                  cfg: QuadratureConfig, tol: ToleranceSpec = DEFAULT_TOL) -> complex:
    """beta(w) minus the kernel integral of alpha: zero for a true pair.

    Checks the attached constraints and that the external point lies on
    the unit circle, then evaluates

        beta(w) - kappa int_T Gamma(t_expr w^{+-} z^{+-}) alpha(z) dz
                  / (2 pi i z).

    Raises NotConverged carrying the best estimate if any quadrature
    fails to converge.
    """
    violations = pair.constraints.violations(a, base)
    w = pair.ext_var
    wval = a.vars.get(w)
    if wval is None:
        violations.append(f"external point {w!r} is unbound")
    elif abs(abs(complex(wval)) - 1.0) > 1e-9:
        violations.append(f"external point {w!r} must lie on the unit circle, "
                          f"got |{w}| = {abs(complex(wval)):.6g}")
    if violations:
        raise ConstraintViolation("; ".join(violations))

    z = f"x{pair.next_index}"
    kernel = GammaProduct(expand_pm(pair.t_expr, [(w, 1), (z, 1)]))
    integral = Integral(
        z, Product((kernel, rename_contour_var(pair.alpha, w, z))),
        kappa_power=1)
    beta_val, beta_results = eval_bailey_expr(pair.beta, a, base, cfg, tol)
    int_val, int_results = eval_bailey_expr(integral, a, base, cfg, tol)
    residual = beta_val - int_val
    bad = [r for r in beta_results + int_results if not r.converged]
    if bad:
        worst = max(r.est_error for r in bad)
        raise NotConverged(
            f"quadrature stalled at {max(r.nodes_used for r in bad)} nodes "
            f"per dimension with estimated error {worst:.3g}",
            best=residual, est_error=worst)
    return residual
