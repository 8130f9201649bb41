"""End-to-end certification of the integral identities.

Each identity is held as a pair of expression trees (lhs, rhs) spelled
out factor by factor, independently of the pair-building compositions in
the bailey module.  Agreement of the two numerically
evaluated sides is therefore a genuine cross-check rather than a
tautology: the only shared code downstream is the elliptic gamma
function itself and the grid quadrature.

Identity ids:

  "beta"         exact evaluation of the one-variable contour integral
                 with five parameters against its closed product form
  "transformation"
                 the symmetry transformation between two one-variable
                 integrals (three t-type and three s-type parameters)
  "id-seq:m"     the m-fold chain-iterate identity: an m-dimensional
                 integral equals a one-dimensional one
  "ident1"       the two-integral equality produced by one dual and one
                 chain step (1-dim side vs kappa-weighted 2-dim side)
  "identfin:m"   its m-fold generalization (1-dim side vs (m+1)-dim)

Verification reports carry the assignment, both side values, error
measures, per-integral node counts, a converged flag, and the runtime.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bailey import (BaileyExpr, GammaProduct, Integral, Product, Scale,
                     eval_bailey_expr, flatten)
from .constraints import (Constraint, ConstraintSet, LT_ONE_MARGIN, PQ_MARGIN,
                          lt_one, pq_lt)
from .ellgamma import BaseParams, DEFAULT_TOL, ToleranceSpec
from .errors import (ConstraintViolation, DomainError, EvaluationError,
                     SamplingExhausted)
from .expr import Assignment, GammaFactor, ONE, ParamMonomial, expand_pm
from .quadrature import QuadratureConfig

__all__ = [
    "Constraint", "ConstraintSet", "IdentitySides", "VerificationReport",
    "beta_integral_sides", "transformation_sides", "id_seq_sides",
    "ident1_sides", "identfin_sides", "identity_sides", "sample_params",
    "verify_beta_integral", "verify_transformation", "verify_id_seq",
    "verify_ident1", "verify_identfin", "verify_identity", "default_config",
    "transformation_consistency_gap", "net_factor_counts",
]

_THREE = ("t0", "t1", "t2")


def _m(**exps: int) -> ParamMonomial:
    return ParamMonomial.of(**exps)


def _prod(names: Sequence[str]) -> ParamMonomial:
    out = ONE
    for nm in names:
        out = out * _m(**{nm: 1})
    return out


@dataclass(frozen=True)
class IdentitySides:
    """The two sides of one identity plus its validity region."""

    identity_id: str
    lhs: BaileyExpr
    rhs: BaileyExpr
    constraints: ConstraintSet
    circle_vars: tuple[str, ...] = ()

    def dims(self) -> tuple[int, int]:
        return (len(flatten(self.lhs).int_vars),
                len(flatten(self.rhs).int_vars))


def beta_integral_sides() -> IdentitySides:
    """The exactly evaluable five-parameter contour integral.

    lhs = (1/2 pi i) int_T prod_m Gamma(t_m z^+-)
          / (Gamma(z^+-2) Gamma(A z^+-)) dz/z,   A = t0 t1 t2 t3 t4
    rhs = 2 prod_{m<s} Gamma(t_m t_s)
          / ((q;q)_inf (p;p)_inf prod_m Gamma(A/t_m))
    valid for |t_m| < 1 and |pq| < |A|.
    """
    names = tuple(f"t{m}" for m in range(5))
    A = _prod(names)
    integrand: tuple[GammaFactor, ...] = ()
    for nm in names:
        integrand += expand_pm(_m(**{nm: 1}), [("z", 1)])
    integrand += expand_pm(ONE, [("z", 2)], loc="den")
    integrand += expand_pm(A, [("z", 1)], loc="den")
    lhs = Product((Scale(ParamMonomial((), 1.0 / (2j * math.pi))),
                   Integral("z", GammaProduct(integrand))))

    closed: tuple[GammaFactor, ...] = ()
    for i in range(5):
        for j in range(i + 1, 5):
            closed += (GammaFactor(_m(**{names[i]: 1, names[j]: 1}), ()),)
    for nm in names:
        closed += (GammaFactor(A * _m(**{nm: -1}), (), "den"),)
    rhs = Product((Scale(ParamMonomial((), 2.0), qq_pow=-1, pp_pow=-1),
                   GammaProduct(closed)))

    cs = ConstraintSet().extended([lt_one(nm) for nm in names] + [pq_lt(A)])
    return IdentitySides("beta", lhs, rhs, cs)


def _transformation_side(first: Sequence[str],
                         second: Sequence[str]) -> BaileyExpr:
    # prefactor prod_j Gamma(F/f_j)/Gamma(t^2 F/f_j) with F = prod(first);
    # integrand prod_j Gamma(t f_j z^+-, g_j z^+-)
    #   / Gamma(z^+-2, t^2 G z^+-, t F z^+-) with G = prod(second)
    F, G = _prod(first), _prod(second)
    pref: tuple[GammaFactor, ...] = ()
    for nm in first:
        pref += (GammaFactor(F * _m(**{nm: -1}), ()),)
        pref += (GammaFactor(_m(t=2) * F * _m(**{nm: -1}), (), "den"),)
    integrand: tuple[GammaFactor, ...] = ()
    for nm in first:
        integrand += expand_pm(_m(t=1, **{nm: 1}), [("z", 1)])
    for nm in second:
        integrand += expand_pm(_m(**{nm: 1}), [("z", 1)])
    integrand += expand_pm(ONE, [("z", 2)], loc="den")
    integrand += expand_pm(_m(t=2) * G, [("z", 1)], loc="den")
    integrand += expand_pm(_m(t=1) * F, [("z", 1)], loc="den")
    return Product((GammaProduct(pref),
                    Integral("z", GammaProduct(integrand))))


def transformation_sides() -> IdentitySides:
    """Symmetry between two one-dimensional integrals.

    Parameters: scalar t plus two triples (t1,t2,t3) and (s1,s2,s3); the
    identity is manifestly symmetric under exchanging the triples, which
    is exactly how the rhs is built from the lhs here.  Prefactor and
    integrand products both range over the same three triple members,
    with B = t1 t2 t3 and S = s1 s2 s3.
    """
    ts = ("t1", "t2", "t3")
    ss = ("s1", "s2", "s3")
    lhs = _transformation_side(ts, ss)
    rhs = _transformation_side(ss, ts)
    cs = ConstraintSet().extended(
        [lt_one("t")] + [lt_one(nm) for nm in ts + ss]
        + [pq_lt(_m(t=2) * _prod(ts)), pq_lt(_m(t=2) * _prod(ss))])
    return IdentitySides("transformation", lhs, rhs, cs)


def _s_sq(upto: int) -> ParamMonomial:
    # t^2 prod_{l<=upto} s_l^2
    exps = {"t": 2}
    exps.update({f"s{l}": 2 for l in range(1, upto + 1)})
    return _m(**exps)


def _s_run(lo: int, hi: int) -> ParamMonomial:
    # prod_{l=lo..hi} s_l (empty product for lo > hi)
    return _prod([f"s{l}" for l in range(lo, hi + 1)])


def id_seq_sides(m: int) -> IdentitySides:
    """The m-fold chain-iterate identity.

    lhs: kappa^{m-1} prod_k Gamma(t^2 prod_{l<=k} s_l^2)
         / Gamma(s_k^2, t^2 prod_{l<k} s_l^2) times an m-dimensional
         integral over x_1..x_m whose kernel couples x_k to x_{k+1}
         (x_{m+1} is the external circle point w).
    rhs: Gamma(t^2)^{-1} prod_{r<j} Gamma(t^2 t_r t_j)/Gamma(t_r t_j)
         times a single integral.
    Both sides are plain int dz/z integrals (no 2 pi i normalization).
    """
    if m < 1:
        raise DomainError(f"iteration depth must be >= 1, got {m}")
    B3 = _prod(_THREE)
    w = "w"
    xs = [f"x{k}" for k in range(1, m + 1)]

    pref: tuple[GammaFactor, ...] = ()
    for k in range(1, m + 1):
        pref += (GammaFactor(_s_sq(k), ()),)
        pref += (GammaFactor(_m(**{f"s{k}": 2}), (), "den"),)
        pref += (GammaFactor(_s_sq(k - 1), (), "den"),)

    body: tuple[GammaFactor, ...] = ()
    for r in _THREE:
        body += expand_pm(_m(t=1, **{r: 1}), [(xs[0], 1)])
    body += expand_pm(_m(t=1) * B3, [(xs[0], 1)], loc="den")
    for k in range(1, m + 1):
        xk = xs[k - 1]
        nxt = w if k == m else xs[k]
        sk, uk = _m(**{f"s{k}": 1}), _m(**{f"u{k}": 1})
        body += expand_pm(_s_sq(k - 1) * sk * uk, [(nxt, 1)])
        body += expand_pm(sk, [(nxt, 1), (xk, 1)])
        body += expand_pm(uk, [(xk, 1)])
        body += expand_pm(sk * uk, [(nxt, 1)], loc="den")
        body += expand_pm(ONE, [(xk, 2)], loc="den")
        body += expand_pm(_s_sq(k) * uk, [(xk, 1)], loc="den")
    inner: BaileyExpr = GammaProduct(body)
    for k, xk in enumerate(xs):
        inner = Integral(xk, inner, kappa_power=0 if k == 0 else 1)
    lhs = Product((GammaProduct(pref), inner))

    rpref: tuple[GammaFactor, ...] = (GammaFactor(_m(t=2), (), "den"),)
    for i in range(3):
        for j in range(i + 1, 3):
            pair = _m(**{_THREE[i]: 1, _THREE[j]: 1})
            rpref += (GammaFactor(_m(t=2) * pair, ()),)
            rpref += (GammaFactor(pair, (), "den"),)
    rint: tuple[GammaFactor, ...] = ()
    rint += expand_pm(_m(t=1) * _s_run(1, m), [(w, 1), ("z", 1)])
    for r in _THREE:
        rint += expand_pm(_m(**{r: 1}), [("z", 1)])
    rint += expand_pm(ONE, [("z", 2)], loc="den")
    rint += expand_pm(_m(t=2) * B3, [("z", 1)], loc="den")
    for k in range(1, m + 1):
        run = _m(t=1) * _s_run(1, k - 1)
        rint += expand_pm(run * _m(**{f"u{k}": 1}), [("z", 1)])
        rint += expand_pm(run * _m(**{f"s{k}": 2, f"u{k}": 1}),
                          [("z", 1)], loc="den")
    rhs = Product((GammaProduct(rpref), Integral("z", GammaProduct(rint))))

    records = [lt_one("t")] + [lt_one(r) for r in _THREE]
    for k in range(1, m + 1):
        records += [lt_one(f"s{k}"), lt_one(f"u{k}")]
        records.append(pq_lt(_s_sq(k) * _m(**{f"u{k}": 1})))
    records.append(pq_lt(_m(t=2) * B3))
    cs = ConstraintSet().extended(records)
    return IdentitySides(f"id-seq:{m}", lhs, rhs, cs, circle_vars=(w,))


def ident1_sides() -> IdentitySides:
    """Equality of a one-dimensional and a kappa-weighted two-dimensional
    integral, from one dual step followed by one chain step on the seed.

    Validity: all of t, t_r, s_1, s_2, u_1, u_2 inside the unit disk and
    |pq| below each of |t^2 s1^2 t0 t1 t2|, |t^2 s1^2 u2|, |t^2 s2^2 u2|,
    and |t^2 s1^2 u1| (the last keeps the two-dimensional integrand
    pole-free on the torus; see the denominator factor in x2).
    """
    B3 = _prod(_THREE)
    w = "w"

    lint: tuple[GammaFactor, ...] = ()
    lint += expand_pm(_m(s2=1), [(w, 1), ("x", 1)])
    lint += expand_pm(_m(t=1, u1=1), [("x", 1)])
    lint += expand_pm(_m(u2=1), [("x", 1)])
    for r in _THREE:
        lint += expand_pm(_m(t=1, s1=1, **{r: 1}), [("x", 1)])
    lint += expand_pm(ONE, [("x", 2)], loc="den")
    lint += expand_pm(_m(t=2, s2=2, u2=1), [("x", 1)], loc="den")
    lint += expand_pm(_m(t=1, s1=2, u1=1), [("x", 1)], loc="den")
    lint += expand_pm(_m(t=1, s1=1) * B3, [("x", 1)], loc="den")
    lhs = Integral("x", GammaProduct(lint))

    rpref: tuple[GammaFactor, ...] = ()
    for i in range(3):
        for j in range(i + 1, 3):
            pair = _m(**{_THREE[i]: 1, _THREE[j]: 1})
            rpref += (GammaFactor(_m(t=2, s1=2) * pair, ()),)
            rpref += (GammaFactor(pair, (), "den"),)
    rpref += (GammaFactor(_m(s2=2), ()),)
    rpref += expand_pm(_m(s2=1, u2=1), [(w, 1)])
    rpref += (GammaFactor(_m(s1=2), (), "den"),)
    rpref += (GammaFactor(_m(t=2, s2=2), (), "den"),)
    rpref += expand_pm(_m(t=2, s2=1, u2=1), [(w, 1)], loc="den")

    rint: tuple[GammaFactor, ...] = ()
    rint += expand_pm(_m(s1=1), [("x2", 1), ("x1", 1)])
    rint += expand_pm(_m(t=1, s2=1), [(w, 1), ("x2", 1)])
    rint += expand_pm(_m(t=1, u2=1), [("x2", 1)])
    rint += expand_pm(_m(u1=1), [("x2", 1)])
    rint += expand_pm(ONE, [("x2", 2)], loc="den")
    rint += expand_pm(_m(t=1, s2=2, u2=1), [("x2", 1)], loc="den")
    rint += expand_pm(_m(t=2, s1=2, u1=1), [("x2", 1)], loc="den")
    rint += expand_pm(_m(t=2, s1=1, u1=1), [("x1", 1)])
    for r in _THREE:
        rint += expand_pm(_m(**{r: 1}), [("x1", 1)])
    rint += expand_pm(ONE, [("x1", 2)], loc="den")
    rint += expand_pm(_m(s1=1, u1=1), [("x1", 1)], loc="den")
    rint += expand_pm(_m(t=2, s1=2) * B3, [("x1", 1)], loc="den")
    rhs = Product((GammaProduct(rpref),
                   Integral("x2", Integral("x1", GammaProduct(rint)),
                            kappa_power=1)))

    cs = ConstraintSet().extended(
        [lt_one("t")] + [lt_one(r) for r in _THREE]
        + [lt_one(nm) for nm in ("s1", "s2", "u1", "u2")]
        + [pq_lt(_m(t=2, s1=2) * B3), pq_lt(_m(t=2, s1=2, u1=1)),
           pq_lt(_m(t=2, s1=2, u2=1)), pq_lt(_m(t=2, s2=2, u2=1))])
    return IdentitySides("ident1", lhs, rhs, cs, circle_vars=(w,))


def identfin_sides(m: int) -> IdentitySides:
    """The m-fold dual iterate closed with one chain step: a
    one-dimensional integral equals a kappa^m-weighted (m+1)-dimensional
    one.  For m=1 this reduces, after cancelling matching numerator and
    denominator gamma factors, to the ident1 sides.
    """
    if m < 1:
        raise DomainError(f"iteration depth must be >= 1, got {m}")
    B3 = _prod(_THREE)
    w = "w"
    sm1, um1 = f"s{m + 1}", f"u{m + 1}"
    xs = [f"x{k}" for k in range(1, m + 2)]

    def t2_srun_sq(lo: int, hi: int) -> ParamMonomial:
        # t^2 prod_{l=lo..hi} s_l^2
        exps = {"t": 2}
        exps.update({f"s{l}": 2 for l in range(lo, hi + 1)})
        return _m(**exps)

    lint: tuple[GammaFactor, ...] = ()
    lint += expand_pm(_m(**{sm1: 1}), [(w, 1), ("x", 1)])
    lint += expand_pm(_m(**{um1: 1}), [("x", 1)])
    lint += expand_pm(ONE, [("x", 2)], loc="den")
    lint += expand_pm(_m(t=2, **{sm1: 2, um1: 1}), [("x", 1)], loc="den")
    for k in range(1, m + 1):
        run = _m(t=1) * _s_run(k + 1, m)
        lint += expand_pm(run * _m(**{f"u{k}": 1}), [("x", 1)])
        lint += expand_pm(run * _m(**{f"s{k}": 2, f"u{k}": 1}),
                          [("x", 1)], loc="den")
    front = _m(t=1) * _s_run(1, m)
    for r in _THREE:
        lint += expand_pm(front * _m(**{r: 1}), [("x", 1)])
    lint += expand_pm(front * B3, [("x", 1)], loc="den")
    lhs = Integral("x", GammaProduct(lint))

    rpref: tuple[GammaFactor, ...] = ()
    rpref += (GammaFactor(_m(**{sm1: 2}), ()), GammaFactor(_m(t=2), ()))
    rpref += expand_pm(_m(**{sm1: 1, um1: 1}), [(w, 1)])
    rpref += (GammaFactor(_m(t=2, **{sm1: 2}), (), "den"),)
    rpref += (GammaFactor(t2_srun_sq(1, m), (), "den"),)
    rpref += expand_pm(_m(t=2, **{sm1: 1, um1: 1}), [(w, 1)], loc="den")
    for k in range(1, m + 1):
        rpref += (GammaFactor(t2_srun_sq(k, m), ()),)
        rpref += (GammaFactor(_m(**{f"s{k}": 2}), (), "den"),)
        rpref += (GammaFactor(t2_srun_sq(k + 1, m), (), "den"),)
    for i in range(3):
        for j in range(i + 1, 3):
            pair = _m(**{_THREE[i]: 1, _THREE[j]: 1})
            rpref += (GammaFactor(t2_srun_sq(1, m) * pair, ()),)
            rpref += (GammaFactor(pair, (), "den"),)

    rint: tuple[GammaFactor, ...] = ()
    rint += expand_pm(_m(t=1, **{sm1: 1}), [(w, 1), (xs[m], 1)])
    rint += expand_pm(_m(t=1, **{um1: 1}), [(xs[m], 1)])
    for r in _THREE:
        rint += expand_pm(_m(**{r: 1}), [(xs[0], 1)])
    rint += expand_pm(_m(t=1, **{sm1: 2, um1: 1}), [(xs[m], 1)], loc="den")
    rint += expand_pm(ONE, [(xs[0], 2)], loc="den")
    rint += expand_pm(t2_srun_sq(1, m) * B3, [(xs[0], 1)], loc="den")
    for k in range(1, m + 1):
        xk, xk1 = xs[k - 1], xs[k]
        sk, uk = _m(**{f"s{k}": 1}), _m(**{f"u{k}": 1})
        rint += expand_pm(uk, [(xk1, 1)])
        rint += expand_pm(t2_srun_sq(k + 1, m) * sk * uk, [(xk, 1)])
        rint += expand_pm(sk, [(xk1, 1), (xk, 1)])
        rint += expand_pm(ONE, [(xk1, 2)], loc="den")
        rint += expand_pm(t2_srun_sq(k, m) * uk, [(xk1, 1)], loc="den")
        rint += expand_pm(sk * uk, [(xk, 1)], loc="den")
    inner: BaileyExpr = GammaProduct(rint)
    for k, xk in enumerate(xs):
        inner = Integral(xk, inner, kappa_power=0 if k == 0 else 1)
    rhs = Product((GammaProduct(rpref), inner))

    records = [lt_one("t")] + [lt_one(r) for r in _THREE]
    for k in range(1, m + 2):
        records += [lt_one(f"s{k}"), lt_one(f"u{k}")]
    for k in range(1, m + 1):
        records.append(pq_lt(t2_srun_sq(k, m) * _m(**{f"u{k}": 1})))
    records.append(pq_lt(_m(t=2, **{sm1: 2, um1: 1})))
    records.append(pq_lt(t2_srun_sq(1, m) * B3))
    cs = ConstraintSet().extended(records)
    return IdentitySides(f"identfin:{m}", lhs, rhs, cs, circle_vars=(w,))


def identity_sides(identity_id: str) -> IdentitySides:
    """Resolve an identity id like "beta" or "id-seq:2" to its sides."""
    if identity_id == "beta":
        return beta_integral_sides()
    if identity_id == "transformation":
        return transformation_sides()
    for prefix, builder in (("id-seq", id_seq_sides),
                            ("identfin", identfin_sides)):
        if identity_id == prefix or identity_id.startswith(prefix + ":"):
            _, _, tail = identity_id.partition(":")
            try:
                return builder(int(tail or "1"))
            except ValueError:
                raise DomainError(
                    f"bad iteration depth in identity id {identity_id!r}"
                ) from None
    if identity_id == "ident1":
        return ident1_sides()
    raise DomainError(
        f"unknown identity id {identity_id!r}; expected one of "
        "beta, transformation, id-seq:m, ident1, identfin:m")


# --------------------------------------------------------------------------
# sampling


def sample_params(cs: ConstraintSet, seed: int,
                  moduli_range: Sequence[float] = (0.4, 0.8), *,
                  base: BaseParams, circle_vars: Sequence[str] = (),
                  extra_names: Sequence[str] = (),
                  max_tries: int = 1000) -> Assignment:
    """Seeded random assignment satisfying every constraint with margin.

    Parameter moduli are uniform in moduli_range with uniform phases;
    names listed in circle_vars get unit-modulus values.  Draws are
    rejected until the margined constraints hold (|monomial| stays below
    1 - margin, |pq| below (1 - margin) |monomial|), which keeps pole
    margins comfortable for the default quadrature sizes.  Raises
    SamplingExhausted when max_tries rejections indicate an infeasible
    combination of constraints, margins, and moduli_range.
    """
    lo, hi = float(moduli_range[0]), float(moduli_range[1])
    if not (0.0 < lo <= hi < 1.0):
        raise DomainError(f"moduli_range must sit inside (0, 1), got "
                          f"[{lo}, {hi}]")
    names = sorted(set(cs.param_names()) | set(extra_names))
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        params = {nm: rng.uniform(lo, hi)
                  * np.exp(2j * np.pi * rng.uniform()) for nm in names}
        varmap = {v: complex(np.exp(2j * np.pi * rng.uniform()))
                  for v in circle_vars}
        a = Assignment(params, varmap)
        if cs.satisfied(a, base, with_margin=True):
            return a
    raise SamplingExhausted(
        f"no admissible assignment after {max_tries} draws for moduli in "
        f"[{lo}, {hi}]; constraints or margins are too tight for this range")


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class VerificationReport:
    identity_id: str
    assignment: Assignment
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    nodes_used: tuple[int, ...]
    converged: bool
    runtime_ms: float

    def to_json(self) -> dict:
        return {
            "identity_id": self.identity_id,
            "assignment": self.assignment.to_json(),
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "nodes_used": list(self.nodes_used),
            "converged": self.converged,
            "runtime_ms": self.runtime_ms,
        }

    @staticmethod
    def from_json(obj: dict) -> "VerificationReport":
        return VerificationReport(
            obj["identity_id"], Assignment.from_json(obj["assignment"]),
            complex(*obj["lhs"]), complex(*obj["rhs"]),
            obj["abs_err"], obj["rel_err"], tuple(obj["nodes_used"]),
            obj["converged"], obj["runtime_ms"])


def default_config(dim: int, n_max: int | None = None,
                   target: float | None = None) -> QuadratureConfig:
    """Budget for a dim-dimensional certification: targets and node caps
    both shrink as the grid dimension grows, keeping runtimes at desk
    scale while the margined sampler keeps poles far enough from the
    torus for these caps to reach the targets."""
    if target is None:
        target = 1e-10 if dim <= 1 else (1e-8 if dim == 2 else 1e-3)
    if n_max is None:
        n_max = 1024 if dim <= 1 else (512 if dim == 2 else 256)
    return QuadratureConfig(target=target, n_start=min(16, n_max),
                            n_max=n_max)


def _check_admissible(sides: IdentitySides, a: Assignment,
                      base: BaseParams) -> None:
    violations = sides.constraints.violations(a, base)
    for v in sides.circle_vars:
        val = a.vars.get(v)
        if val is None:
            violations.append(f"external point {v!r} is unbound")
        elif abs(abs(complex(val)) - 1.0) > 1e-9:
            violations.append(f"external point {v!r} must lie on the unit "
                              f"circle, got |{v}| = {abs(complex(val)):.6g}")
    if violations:
        raise ConstraintViolation("; ".join(violations))


def _certify(sides: IdentitySides, a: Assignment, base: BaseParams,
             lhs_cfg: QuadratureConfig, rhs_cfg: QuadratureConfig,
             tol: ToleranceSpec) -> VerificationReport:
    _check_admissible(sides, a, base)
    start = time.perf_counter()
    lhs_val, lhs_res = eval_bailey_expr(sides.lhs, a, base, lhs_cfg, tol)
    rhs_val, rhs_res = eval_bailey_expr(sides.rhs, a, base, rhs_cfg, tol)
    runtime_ms = (time.perf_counter() - start) * 1e3
    abs_err = abs(lhs_val - rhs_val)
    rel_err = abs_err / max(abs(lhs_val), abs(rhs_val), 1e-300)
    results = lhs_res + rhs_res
    return VerificationReport(
        sides.identity_id, a, lhs_val, rhs_val, abs_err, rel_err,
        tuple(r.nodes_used for r in results),
        all(r.converged for r in results), runtime_ms)


def verify_beta_integral(a: Assignment, base: BaseParams,
                         cfg: QuadratureConfig | None = None,
                         tol: ToleranceSpec = DEFAULT_TOL
                         ) -> VerificationReport:
    """Certify the exact evaluation of the five-parameter integral."""
    sides = beta_integral_sides()
    cfg = cfg or default_config(1)
    return _certify(sides, a, base, cfg, cfg, tol)


def verify_transformation(a: Assignment, base: BaseParams,
                          cfg: QuadratureConfig | None = None,
                          tol: ToleranceSpec = DEFAULT_TOL
                          ) -> VerificationReport:
    """Certify the two-integral symmetry transformation."""
    sides = transformation_sides()
    cfg = cfg or default_config(1)
    return _certify(sides, a, base, cfg, cfg, tol)


def verify_id_seq(m: int, a: Assignment, base: BaseParams,
                  cfg: QuadratureConfig | None = None,
                  tol: ToleranceSpec = DEFAULT_TOL) -> VerificationReport:
    """Certify the m-fold chain-iterate identity.

    For m = 1 the report is additionally cross-checked against the
    symmetry transformation on mapped parameters (the two statements are
    the same identity up to regrouped prefactors); disagreement beyond
    1e-8 raises EvaluationError.  Depths m >= 3 are allowed but expected
    to report converged=False under the default node caps.
    """
    sides = id_seq_sides(m)
    lhs_cfg = cfg or default_config(m)
    rhs_cfg = cfg or default_config(1)
    report = _certify(sides, a, base, lhs_cfg, rhs_cfg, tol)
    if m == 1 and report.converged:
        gap = transformation_consistency_gap(a, base, cfg, tol)
        if gap > 1e-8:
            raise EvaluationError(
                f"chain identity at depth 1 disagrees with the symmetry "
                f"transformation on mapped parameters: gap {gap:.3e}")
    return report


def verify_ident1(a: Assignment, base: BaseParams,
                  cfg: QuadratureConfig | None = None,
                  tol: ToleranceSpec = DEFAULT_TOL) -> VerificationReport:
    """Certify the 1-dim vs 2-dim two-integral equality."""
    sides = ident1_sides()
    lhs_cfg = cfg or default_config(1)
    rhs_cfg = cfg or default_config(2)
    return _certify(sides, a, base, lhs_cfg, rhs_cfg, tol)


def verify_identfin(m: int, a: Assignment, base: BaseParams,
                    cfg: QuadratureConfig | None = None,
                    tol: ToleranceSpec = DEFAULT_TOL) -> VerificationReport:
    """Certify the m-fold dual-then-chain identity (1-dim vs (m+1)-dim).

    Depth m >= 2 runs an (m+1)-dimensional grid and is expensive; with a
    small node cap the report honestly carries converged=False.
    """
    sides = identfin_sides(m)
    lhs_cfg = cfg or default_config(1)
    rhs_cfg = cfg or default_config(m + 1)
    return _certify(sides, a, base, lhs_cfg, rhs_cfg, tol)


def verify_identity(identity_id: str, a: Assignment, base: BaseParams,
                    cfg: QuadratureConfig | None = None,
                    tol: ToleranceSpec = DEFAULT_TOL) -> VerificationReport:
    """Dispatch on an identity id string (see module docstring)."""
    if identity_id == "beta":
        return verify_beta_integral(a, base, cfg, tol)
    if identity_id == "transformation":
        return verify_transformation(a, base, cfg, tol)
    sides = identity_sides(identity_id)  # validates the id and depth
    if sides.identity_id.startswith("id-seq"):
        return verify_id_seq(int(sides.identity_id.split(":")[1]),
                             a, base, cfg, tol)
    if sides.identity_id == "ident1":
        return verify_ident1(a, base, cfg, tol)
    return verify_identfin(int(sides.identity_id.split(":")[1]),
                           a, base, cfg, tol)


# --------------------------------------------------------------------------
# consistency between the depth-1 chain identity and the transformation


def _gamma_ratio_value(factors: Sequence[GammaFactor], a: Assignment,
                       base: BaseParams, tol: ToleranceSpec) -> complex:
    value, _ = eval_bailey_expr(GammaProduct(tuple(factors)), a, base,
                                default_config(1), tol)
    return value


def transformation_consistency_gap(a: Assignment, base: BaseParams,
                                   cfg: QuadratureConfig | None = None,
                                   tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Largest relative mismatch between the depth-1 chain identity and
    the symmetry transformation after mapping parameters.

    The mapping sends the transformation's first triple to (t0,t1,t2)
    and its second to (u1, s1 w, s1 / w) with w the external circle
    point; each side of either statement is then the same integral times
    a different prefactor grouping, so dividing the evaluated sides by
    their own prefactors must give matching values.
    """
    cfg = cfg or default_config(1)
    t, w = a.params["t"], complex(a.vars["w"])
    mapped = Assignment({
        "t": t,
        "t1": a.params["t0"], "t2": a.params["t1"], "t3": a.params["t2"],
        "s1": a.params["u1"], "s2": a.params["s1"] * w,
        "s3": a.params["s1"] / w,
    })
    tr = transformation_sides()
    _check_admissible(tr, mapped, base)
    tr_lhs, _ = eval_bailey_expr(tr.lhs, mapped, base, cfg, tol)
    tr_rhs, _ = eval_bailey_expr(tr.rhs, mapped, base, cfg, tol)

    iq = id_seq_sides(1)
    iq_lhs, _ = eval_bailey_expr(iq.lhs, a, base, cfg, tol)
    iq_rhs, _ = eval_bailey_expr(iq.rhs, a, base, cfg, tol)

    # prefactors of the depth-1 chain identity, including the lhs factors
    # that depend only on the external point
    c_iq_lhs = _gamma_ratio_value(
        (GammaFactor(_m(t=2, s1=2), ()),
         GammaFactor(_m(s1=2), (), "den"),
         GammaFactor(_m(t=2), (), "den"))
        + expand_pm(_m(t=2, s1=1, u1=1), [("w", 1)])
        + expand_pm(_m(s1=1, u1=1), [("w", 1)], loc="den"), a, base, tol)
    pairs: tuple[GammaFactor, ...] = (GammaFactor(_m(t=2), (), "den"),)
    for i in range(3):
        for j in range(i + 1, 3):
            pair = _m(**{_THREE[i]: 1, _THREE[j]: 1})
            pairs += (GammaFactor(_m(t=2) * pair, ()),)
            pairs += (GammaFactor(pair, (), "den"),)
    c_iq_rhs = _gamma_ratio_value(pairs, a, base, tol)

    def side_pref(first: Sequence[str]) -> complex:
        F = _prod(first)
        factors: tuple[GammaFactor, ...] = ()
        for nm in first:
            factors += (GammaFactor(F * _m(**{nm: -1}), ()),)
            factors += (GammaFactor(_m(t=2) * F * _m(**{nm: -1}), (), "den"),)
        return _gamma_ratio_value(factors, mapped, base, tol)

    c_tr_lhs = side_pref(("t1", "t2", "t3"))
    c_tr_rhs = side_pref(("s1", "s2", "s3"))

    gaps = []
    for iq_val, c_iq, tr_val, c_tr in ((iq_lhs, c_iq_lhs, tr_lhs, c_tr_lhs),
                                       (iq_rhs, c_iq_rhs, tr_rhs, c_tr_rhs)):
        x, y = iq_val / c_iq, tr_val / c_tr
        gaps.append(abs(x - y) / max(abs(x), abs(y), 1e-300))
    return max(gaps)


# --------------------------------------------------------------------------
# structural reduction helper


def net_factor_counts(expr: BaileyExpr) -> dict:
    """Signed factor counts (numerator minus denominator) keyed by
    (coefficient monomial, variable exponents), with matching num/den
    pairs cancelled.  Two flattened expressions with equal net counts,
    scalar prefactors, kappa powers, and integration variables are the
    same integral up to gamma-factor cancellation.
    """
    fl = flatten(expr)
    net: dict[tuple, int] = {}
    for f in fl.factors:
        key = (f.coeff, f.vars)
        net[key] = net.get(key, 0) + (1 if f.loc == "num" else -1)
    return {k: v for k, v in net.items() if v != 0}
