"""Symbolic gamma-factor expressions.

An Integrand is a finite product of factors gamma(c * prod_i v_i^{e_i})
placed in the numerator or denominator, where c is a monomial in named
parameters and the v_i are contour variables.  The +- shorthand of the
identities (gamma(t z^+-) etc.) expands into explicit factor lists here;
nothing downstream ever sees a +- marker.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ellgamma import BaseParams, DEFAULT_TOL, ToleranceSpec, gamma_values, truncation_orders
from .errors import DegenerateError, DomainError, UnknownSymbol

# Poles passing closer to the unit circle than this count as "on" it.
DEGENERATE_EPS = 1e-12


def _clean_exps(exps: Mapping[str, int] | Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    if isinstance(exps, Mapping):
        items = exps.items()
    else:
        items = exps
    merged: dict[str, int] = {}
    for name, e in items:
        if not isinstance(e, int):
            raise DomainError(f"exponent for {name!r} must be an integer, got {e!r}")
        merged[name] = merged.get(name, 0) + e
    return tuple(sorted((n, e) for n, e in merged.items() if e != 0))


@dataclass(frozen=True)
class ParamMonomial:
    """scale * prod params[name]^exp with integer exponents."""

    exps: tuple[tuple[str, int], ...] = ()
    scale: complex = 1.0 + 0.0j

    @staticmethod
    def of(scale: complex = 1.0 + 0.0j, **exps: int) -> "ParamMonomial":
        return ParamMonomial(_clean_exps(exps), complex(scale))

    @staticmethod
    def from_map(exps: Mapping[str, int], scale: complex = 1.0 + 0.0j) -> "ParamMonomial":
        return ParamMonomial(_clean_exps(exps), complex(scale))

    def __mul__(self, other: "ParamMonomial") -> "ParamMonomial":
        return ParamMonomial(_clean_exps(self.exps + other.exps),
                             self.scale * other.scale)

    def __pow__(self, n: int) -> "ParamMonomial":
        if n == 0:
            return ParamMonomial()
        return ParamMonomial(_clean_exps([(name, e * n) for name, e in self.exps]),
                             self.scale ** n)

    def times(self, **exps: int) -> "ParamMonomial":
        return self * ParamMonomial.of(**exps)

    def degree(self, name: str) -> int:
        return dict(self.exps).get(name, 0)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.exps)

    def substitute(self, name: str, replacement: "ParamMonomial") -> "ParamMonomial":
        e = self.degree(name)
        if e == 0:
            return self
        rest = ParamMonomial(tuple((n, k) for n, k in self.exps if n != name), self.scale)
        return rest * (replacement ** e)

    def evaluate(self, params: Mapping[str, complex]) -> complex:
        value = self.scale
        for name, e in self.exps:
            try:
                value *= complex(params[name]) ** e
            except KeyError:
                raise UnknownSymbol(f"parameter {name!r} has no bound value") from None
        return value

    def __str__(self) -> str:
        parts = [f"{n}^{e}" if e != 1 else n for n, e in self.exps]
        body = "*".join(parts) if parts else "1"
        if self.scale == 1:
            return body
        return f"({self.scale:g})*{body}"

    def to_json(self) -> dict:
        return {"coeff": {n: e for n, e in self.exps},
                "scale": [self.scale.real, self.scale.imag]}

    @staticmethod
    def from_json(obj: dict) -> "ParamMonomial":
        return ParamMonomial.from_map(obj.get("coeff", {}),
                                      complex(*obj.get("scale", [1.0, 0.0])))


ONE = ParamMonomial()


@dataclass(frozen=True)
class GammaFactor:
    """One factor gamma(coeff * prod v^e), in the numerator or denominator."""

    coeff: ParamMonomial
    vars: tuple[tuple[str, int], ...] = ()
    loc: str = "num"

    def __post_init__(self):
        if self.loc not in ("num", "den"):
            raise DomainError(f"factor location must be 'num' or 'den', got {self.loc!r}")
        object.__setattr__(self, "vars", _clean_exps(self.vars))

    def argument(self, a: "Assignment") -> complex:
        value = self.coeff.evaluate(a.params)
        for name, e in self.vars:
            try:
                value *= complex(a.vars[name]) ** e
            except KeyError:
                raise UnknownSymbol(f"contour variable {name!r} has no bound value") from None
        return value

    def var_degree(self, name: str) -> int:
        return dict(self.vars).get(name, 0)

    def depends_on(self, names: Iterable[str]) -> bool:
        held = dict(self.vars)
        return any(held.get(n, 0) != 0 for n in names)

    def rename_var(self, old: str, new: str) -> "GammaFactor":
        if self.var_degree(old) == 0:
            return self
        moved = [(new if n == old else n, e) for n, e in self.vars]
        return GammaFactor(self.coeff, _clean_exps(moved), self.loc)

    def substitute_param(self, name: str, replacement: ParamMonomial) -> "GammaFactor":
        return GammaFactor(self.coeff.substitute(name, replacement), self.vars, self.loc)

    def key(self) -> tuple:
        return (self.loc, self.coeff.exps, self.coeff.scale, self.vars)

    def __str__(self) -> str:
        vs = "*".join(f"{n}^{e}" if e != 1 else n for n, e in self.vars)
        arg = str(self.coeff) + ("*" + vs if vs else "")
        return f"G[{arg}]" if self.loc == "num" else f"1/G[{arg}]"

    def to_json(self) -> dict:
        out = self.coeff.to_json()
        out["vars"] = {n: e for n, e in self.vars}
        out["loc"] = self.loc
        return out

    @staticmethod
    def from_json(obj: dict) -> "GammaFactor":
        return GammaFactor(ParamMonomial.from_json(obj),
                           _clean_exps(obj.get("vars", {})), obj["loc"])


@dataclass(frozen=True)
class Integrand:
    """Product of gamma factors over a fixed tuple of contour variables."""

    factors: tuple[GammaFactor, ...]
    contour_vars: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "contour_vars", tuple(self.contour_vars))

    def factor_multiset(self) -> dict:
        counts: dict[tuple, int] = {}
        for f in self.factors:
            counts[f.key()] = counts.get(f.key(), 0) + 1
        return counts

    def to_json(self) -> dict:
        return {"factors": [f.to_json() for f in self.factors],
                "contour_vars": list(self.contour_vars)}

    @staticmethod
    def from_json(obj: dict) -> "Integrand":
        return Integrand(tuple(GammaFactor.from_json(f) for f in obj["factors"]),
                         tuple(obj.get("contour_vars", ())))


@dataclass
class Assignment:
    """Numeric values for parameters and contour variables."""

    params: dict[str, complex] = field(default_factory=dict)
    vars: dict[str, complex] = field(default_factory=dict)

    def merged(self, **extra_vars: complex) -> "Assignment":
        out = dict(self.vars)
        out.update(extra_vars)
        return Assignment(dict(self.params), out)

    def to_json(self) -> dict:
        return {
            "params": {k: [v.real, v.imag] for k, v in
                       ((k, complex(v)) for k, v in sorted(self.params.items()))},
            "vars": {k: [v.real, v.imag] for k, v in
                     ((k, complex(v)) for k, v in sorted(self.vars.items()))},
        }

    @staticmethod
    def from_json(obj: dict) -> "Assignment":
        return Assignment(
            {k: complex(*v) for k, v in obj.get("params", {}).items()},
            {k: complex(*v) for k, v in obj.get("vars", {}).items()},
        )


def expand_pm(coeff: ParamMonomial,
              pm_vars: Sequence[tuple[str, int]] = (),
              fixed_vars: Sequence[tuple[str, int]] = (),
              loc: str = "num",
              known: Iterable[str] | None = None) -> tuple[GammaFactor, ...]:
    """Expand +- shorthand into explicit factors.

    Each (v, e) in pm_vars contributes exponents +e and -e, so the result
    has 2^len(pm_vars) factors; fixed_vars enter every factor unchanged.
    gamma(t z^+-)        -> expand_pm(t, [(z,1)])           (2 factors)
    gamma(z^{+-2})       -> expand_pm(1, [(z,2)])           (2 factors)
    gamma(s w^+- x^+-)   -> expand_pm(s, [(w,1),(x,1)])     (4 factors)
    """
    if known is not None:
        table = set(known)
        for name in coeff.names:
            if name not in table:
                raise UnknownSymbol(f"undeclared parameter {name!r}")
        for name, _ in tuple(pm_vars) + tuple(fixed_vars):
            if name not in table:
                raise UnknownSymbol(f"undeclared variable {name!r}")
    out = []
    for signs in itertools.product((1, -1), repeat=len(pm_vars)):
        exps = list(fixed_vars)
        for s, (name, e) in zip(signs, pm_vars):
            exps.append((name, s * e))
        out.append(GammaFactor(coeff, _clean_exps(exps), loc))
    return tuple(out)


def evaluate(intg: Integrand, a: Assignment, base: BaseParams,
             tol: ToleranceSpec = DEFAULT_TOL) -> complex:
    """Pointwise value of the factor product at a bound assignment.

    Denominator factors go through the reciprocal product, so a point
    sitting on a pole of a denominator gamma gives an exact zero, while a
    point near a pole *of the integrand* raises PoleError.
    """
    args_num = [f.argument(a) for f in intg.factors if f.loc == "num"]
    args_den = [f.argument(a) for f in intg.factors if f.loc == "den"]
    value = 1.0 + 0.0j
    if args_num:
        value *= complex(np.prod(gamma_values(np.asarray(args_num, complex), base, tol)))
    if args_den:
        value *= complex(np.prod(gamma_values(np.asarray(args_den, complex), base, tol,
                                              reciprocal=True)))
    return value


def pole_margin(intg: Integrand, a: Assignment, base: BaseParams,
                var: str | None = None, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Distance from the unit circle to the nearest integrand pole in one
    contour variable, as min(1 - r_inner, r_outer - 1) over pole moduli.

    Other contour variables are taken on the torus (modulus one).  Poles
    come from numerator factors at c v^e = q^{-j} p^{-k} and denominator
    factors at c v^e = q^{j+1} p^{k+1}, enumerated over the truncation
    lattice.  Raises DegenerateError when a pole lands on the circle.
    """
    if var is None:
        if len(intg.contour_vars) != 1:
            raise DomainError("pole_margin needs an explicit variable name when "
                              "the integrand has several contour variables")
        var = intg.contour_vars[0]

    qm, pm = abs(base.q), abs(base.p)
    r_inner = 0.0
    r_outer = math.inf
    for f in intg.factors:
        e = f.var_degree(var)
        if e == 0:
            continue
        c = f.coeff.evaluate(a.params)
        for name, k in f.vars:
            if name == var:
                continue
            v = a.vars.get(name)
            if v is not None:
                c *= complex(v) ** k
            # unbound companion contour variables sit on the torus: |.| = 1
        cm = abs(c)
        if cm == 0:
            raise DomainError(f"factor {f} has zero coefficient")
        J, K = truncation_orders(max(cm, 1.0 / cm), min(cm, 1.0 / cm), base, tol)
        jj = np.arange(J)
        kk = np.arange(K)
        if f.loc == "num":
            # poles of gamma: |c| |v|^e = |q|^{-j} |p|^{-k}
            with np.errstate(divide="ignore"):
                qpart = qm ** -jj if qm > 0 else np.array([1.0] + [math.inf] * (J - 1))
                ppart = pm ** -kk if pm > 0 else np.array([1.0] + [math.inf] * (K - 1))
            lattice = np.outer(qpart, ppart).ravel() / cm
        else:
            # poles of 1/gamma: |c| |v|^e = |q|^{j+1} |p|^{k+1}
            if qm == 0 or pm == 0:
                continue  # the zero lattice is empty with a vanishing base
            lattice = np.outer(qm ** (jj + 1), pm ** (kk + 1)).ravel() / cm
        lattice = lattice[np.isfinite(lattice)]
        radii = lattice ** (1.0 / e)  # |v| solving the pole condition
        radii = radii[np.isfinite(radii) & (radii > 0)]
        if radii.size == 0:
            continue
        on_circle = np.abs(radii - 1.0) <= DEGENERATE_EPS
        if np.any(on_circle):
            raise DegenerateError(
                f"pole of {f} lies on the unit torus (|v| = {radii[on_circle][0]:.12g})")
        inner = radii[radii < 1.0]
        outer = radii[radii > 1.0]
        if inner.size:
            r_inner = max(r_inner, float(inner.max()))
        if outer.size:
            r_outer = min(r_outer, float(outer.min()))
    return min(1.0 - r_inner, r_outer - 1.0)
