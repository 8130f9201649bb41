"""Contour quadrature over the unit torus.

The N-point trapezoidal rule on the circle is the mean over N-th roots of
unity, and (1/2pi i) int f(z) dz/z is exactly that mean for Laurent
polynomials of degree below N.  Tensor grids handle several variables,
nodes double adaptively until two grid means agree, and per-factor lookup
tables avoid re-evaluating the same gamma values across the grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .ellgamma import BaseParams, DEFAULT_TOL, ToleranceSpec, gamma_values
from .errors import DomainError, UnknownSymbol
from .expr import Assignment, GammaFactor, Integrand


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive-doubling parameters for one contour integral."""

    target: float
    n_start: int = 16
    n_max: int = 1024

    def __post_init__(self):
        if not (self.target > 0):
            raise DomainError(f"target must be positive, got {self.target}")
        if self.n_start < 8 or not _is_pow2(self.n_start):
            raise DomainError(f"n_start must be a power of two >= 8, got {self.n_start}")
        if not _is_pow2(self.n_max) or self.n_max < self.n_start:
            raise DomainError(
                f"n_max must be a power of two >= n_start, got {self.n_max}")

    @staticmethod
    def default_for_dim(m: int, target: float, n_max: int | None = None) -> "QuadratureConfig":
        """Per-dimension node caps shrink as the grid dimension grows."""
        if n_max is None:
            n_max = 1024 if m <= 1 else (256 if m == 2 else 64)
        return QuadratureConfig(target=target, n_start=min(16, n_max), n_max=n_max)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    nodes_used: int
    est_error: float
    converged: bool


def compensated_mean(values: np.ndarray) -> complex:
    """Mean of a complex array via compensated summation of both parts."""
    flat = np.ravel(np.asarray(values, complex))
    n = flat.size
    if n == 0:
        raise DomainError("mean of an empty grid")
    return complex(math.fsum(flat.real) / n, math.fsum(flat.imag) / n)


def roots_of_unity(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def _grid_values(f, m: int, n: int) -> np.ndarray:
    """Evaluate f over the tensor grid of n-th roots of unity.

    f may expose on_grid(n) returning the full grid (any shape with n^m
    entries), or be a plain callable of m unit-modulus arguments; plain
    callables are tried vectorized first and pointwise as a fallback.
    """
    if hasattr(f, "on_grid"):
        vals = np.asarray(f.on_grid(n), dtype=complex)
        if vals.size != n ** m:
            raise DomainError(f"on_grid({n}) returned {vals.size} values, "
                              f"expected {n ** m}")
        return vals.reshape((n,) * m)
    w = roots_of_unity(n)
    grids = np.meshgrid(*([w] * m), indexing="ij")
    try:
        vals = np.asarray(f(*grids), dtype=complex)
        return np.broadcast_to(vals, (n,) * m)
    except (TypeError, ValueError):
        out = np.empty((n,) * m, dtype=complex)
        for idx in itertools.product(range(n), repeat=m):
            out[idx] = f(*(w[k] for k in idx))
        return out


def grid_mean(f, m: int, n: int) -> complex:
    """Plain n-per-dimension grid mean, no adaptivity."""
    return compensated_mean(_grid_values(f, m, n))


def contour_mean(f, m: int, cfg: QuadratureConfig) -> QuadratureResult:
    """Adaptive mean over the torus T^m.

    Doubles nodes per dimension until successive means agree to
    target * max(1, |I|); with m >= 2 two successive doublings must agree
    before the result counts as converged.  Hitting n_max returns the best
    estimate flagged converged=False rather than raising.
    """
    if m < 1:
        raise DomainError(f"dimension must be >= 1, got {m}")
    needed = 1 if m == 1 else 2
    n = cfg.n_start
    est = grid_mean(f, m, n)
    streak = 0
    diff = math.inf
    while 2 * n <= cfg.n_max:
        n *= 2
        new = grid_mean(f, m, n)
        diff = abs(new - est)
        est = new
        if diff <= cfg.target * max(1.0, abs(new)):
            streak += 1
            if streak >= needed:
                return QuadratureResult(est, n, diff, True)
        else:
            streak = 0
    return QuadratureResult(est, n, diff, False)


def effective_coefficient(factor: GammaFactor, a: Assignment,
                          int_vars: Iterable[str]) -> complex:
    """Factor coefficient with all non-contour variables folded in."""
    torus = set(int_vars)
    c = factor.coeff.evaluate(a.params)
    for name, e in factor.vars:
        if name in torus:
            continue
        try:
            c *= complex(a.vars[name]) ** e
        except KeyError:
            raise UnknownSymbol(f"variable {name!r} has no bound value") from None
    return c


class TableCache:
    """Per-factor gamma tables keyed by effective coefficient.

    A table at 2N keeps its N-point ancestor at the even indices, so
    doubling only evaluates the odd entries; smaller power-of-two requests
    are stride slices of the stored table.
    """

    def __init__(self):
        self._store: dict[tuple[complex, bool], tuple[int, np.ndarray]] = {}

    def table(self, c: complex, reciprocal: bool, n: int,
              base: BaseParams, tol: ToleranceSpec) -> np.ndarray:
        key = (complex(c), bool(reciprocal))
        held = self._store.get(key)
        if held is not None:
            n_held, tab = held
            if n_held == n:
                return tab
            if n_held > n and n_held % n == 0:
                return tab[:: n_held // n]
            if n == 2 * n_held:
                odd_args = c * np.exp(2j * np.pi * np.arange(1, n, 2) / n)
                odds = gamma_values(odd_args, base, tol, reciprocal=reciprocal)
                grown = np.empty(n, dtype=complex)
                grown[0::2] = tab
                grown[1::2] = odds
                self._store[key] = (n, grown)
                return grown
        tab = gamma_values(c * roots_of_unity(n), base, tol, reciprocal=reciprocal)
        if held is None or n > held[0]:
            self._store[key] = (n, tab)
        return tab


def factor_table(factor: GammaFactor, a: Assignment, base: BaseParams, n: int,
                 tol: ToleranceSpec = DEFAULT_TOL,
                 int_vars: Iterable[str] | None = None,
                 cache: TableCache | None = None) -> np.ndarray:
    """Values of one factor over the phase circle, indexed by power of
    the primitive n-th root of unity.

    Entry r holds the factor value when its combined contour phase is
    omega^r, so a grid evaluation looks up index (sum_i e_i k_i) mod n.
    Denominator factors store reciprocal values.  A factor constant in
    the contour variables yields its single value repeated.
    """
    if int_vars is None:
        int_vars = [name for name, _ in factor.vars]
    c = effective_coefficient(factor, a, int_vars)
    reciprocal = factor.loc == "den"
    if all(factor.var_degree(v) == 0 for v in int_vars):
        one = gamma_values(np.array([c]), base, tol, reciprocal=reciprocal)
        return np.full(n, one[0], dtype=complex)
    if cache is None:
        cache = TableCache()
    return cache.table(c, reciprocal, n, base, tol)


def _phase_indices(factor: GammaFactor, int_vars: tuple[str, ...], n: int) -> np.ndarray | None:
    """(sum_i e_i k_i) mod n over the tensor grid, broadcastable to the
    full grid shape; None when the factor has no contour dependence."""
    m = len(int_vars)
    total = None
    for axis, name in enumerate(int_vars):
        e = factor.var_degree(name)
        if e == 0:
            continue
        shape = [1] * m
        shape[axis] = n
        k = (e * np.arange(n, dtype=np.int64)).reshape(shape)
        total = k if total is None else total + k
    if total is None:
        return None
    return np.mod(total, n)


def grid_eval(intg: Integrand, a: Assignment, base: BaseParams, n: int,
              tol: ToleranceSpec = DEFAULT_TOL,
              cache: TableCache | None = None) -> np.ndarray:
    """Integrand values over the full tensor grid via factor tables."""
    int_vars = intg.contour_vars
    m = len(int_vars)
    if m == 0:
        raise DomainError("grid evaluation needs at least one contour variable")
    if cache is None:
        cache = TableCache()
    out = np.ones((n,) * m, dtype=complex)
    constant = 1.0 + 0.0j
    for f in intg.factors:
        idx = _phase_indices(f, int_vars, n)
        c = effective_coefficient(f, a, int_vars)
        reciprocal = f.loc == "den"
        if idx is None:
            constant *= complex(gamma_values(np.array([c]), base, tol,
                                             reciprocal=reciprocal)[0])
            continue
        tab = cache.table(c, reciprocal, n, base, tol)
        # tab[idx] has the (broadcastable) shape of idx, so the in-place
        # product never materializes a second full grid
        out *= tab[idx]
    if constant != 1.0:
        out *= constant
    return out


def grid_eval_naive(intg: Integrand, a: Assignment, base: BaseParams, n: int,
                    tol: ToleranceSpec = DEFAULT_TOL) -> np.ndarray:
    """Reference path: evaluate every grid node independently."""
    from .expr import evaluate

    int_vars = intg.contour_vars
    m = len(int_vars)
    if m == 0:
        raise DomainError("grid evaluation needs at least one contour variable")
    w = roots_of_unity(n)
    out = np.empty((n,) * m, dtype=complex)
    for idx in itertools.product(range(n), repeat=m):
        point = a.merged(**{name: w[k] for name, k in zip(int_vars, idx)})
        out[idx] = evaluate(intg, point, base, tol)
    return out


class IntegrandOnGrid:
    """Adapter giving an Integrand the on_grid protocol, with a shared
    table cache so doubled grids reuse prior gamma evaluations."""

    def __init__(self, intg: Integrand, a: Assignment, base: BaseParams,
                 tol: ToleranceSpec = DEFAULT_TOL, cache: TableCache | None = None):
        self.intg = intg
        self.assignment = a
        self.base = base
        self.tol = tol
        self.cache = cache if cache is not None else TableCache()

    def on_grid(self, n: int) -> np.ndarray:
        return grid_eval(self.intg, self.assignment, self.base, n,
                         self.tol, self.cache)
