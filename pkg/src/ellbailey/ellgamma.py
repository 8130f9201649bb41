"""Elliptic gamma function and q-Pochhammer products.

The elliptic gamma function on two bases q, p with |q|, |p| < 1 is the
double product

    gamma(z; q, p) = prod_{j,k>=0} (1 - q^{j+1} p^{k+1} / z) / (1 - z q^j p^k),

meromorphic in z on the punctured plane, with poles at z = q^{-j} p^{-k}
and zeros at z = q^{j+1} p^{k+1}.  Everything here is computed with plain
double-precision truncated products; no logarithms are taken, so branch
cuts never enter.  Truncation orders come from geometric tail bounds with
a factor-100 safety margin below the requested target.

Key identities (each one is pinned by a test):

    gamma(z) * gamma(pq/z) = 1                 reflection
    gamma(z; q, p) = gamma(z; p, q)            base symmetry
    gamma(qz) = theta(z; p) * gamma(z)         quasi-periodicity
    gamma(z; q, 0) = 1 / (z; q)_inf            one-base collapse
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergent, PoleError

# Absolute distance in argument space below which a point counts as
# sitting on a pole (or, for reciprocal evaluation, on a zero).
POLE_EXCLUSION = 1e-6

_FOUR_PI_I = 4j * math.pi


@dataclass(frozen=True)
class ToleranceSpec:
    """Accuracy knobs for truncated products.

    target: requested relative accuracy of a product value.
    truncation_cap: largest number of factors a single product may use.
    """

    target: float = 1e-12
    truncation_cap: int = 20_000_000

    def __post_init__(self):
        if not (0.0 < self.target < 1.0):
            raise DomainError(f"tolerance target must be in (0,1), got {self.target}")
        if self.truncation_cap < 1:
            raise DomainError("truncation_cap must be positive")


DEFAULT_TOL = ToleranceSpec()


def _poch_order(a_mag: float, q_mag: float, tol: ToleranceSpec) -> int:
    """Smallest J with |a| |q|^J / (1-|q|) below target/100."""
    if a_mag == 0.0 or q_mag == 0.0:
        return 1
    threshold = tol.target / 100.0 * (1.0 - q_mag) / a_mag
    if threshold >= 1.0:
        return 1
    J = int(math.ceil(math.log(threshold) / math.log(q_mag)))
    return max(J, 1)


def qpochhammer_infinite(a: complex, q: complex, tol: ToleranceSpec = DEFAULT_TOL) -> complex:
    """Infinite product (a; q)_inf = prod_{j>=0} (1 - a q^j)."""
    q = complex(q)
    a = complex(a)
    if abs(q) >= 1.0:
        raise DomainError(f"q-Pochhammer base needs |q| < 1, got |q| = {abs(q):.6g}")
    J = _poch_order(abs(a), abs(q), tol)
    if J > tol.truncation_cap:
        raise NonConvergent(
            f"(a;q)_inf needs {J} factors, cap is {tol.truncation_cap}", needed=J)
    factors = 1.0 - a * q ** np.arange(J)
    return complex(np.prod(factors))


def theta_p(z: complex, p: complex, tol: ToleranceSpec = DEFAULT_TOL) -> complex:
    """Theta function theta(z; p) = (z; p)_inf (p/z; p)_inf."""
    z = complex(z)
    if z == 0:
        raise DomainError("theta argument must be nonzero")
    return qpochhammer_infinite(z, p, tol) * qpochhammer_infinite(p / z, p, tol)


@dataclass(frozen=True)
class BaseParams:
    """The two bases plus their cached Pochhammer values.

    q_poch = (q; q)_inf and p_poch = (p; p)_inf appear in every closed
    form, so they are computed once at construction.
    """

    q: complex
    p: complex
    q_poch: complex = field(init=False, repr=False)
    p_poch: complex = field(init=False, repr=False)

    def __post_init__(self):
        q = complex(self.q)
        p = complex(self.p)
        if abs(q) >= 1.0 or abs(p) >= 1.0:
            raise DomainError(
                f"bases must satisfy |q| < 1 and |p| < 1, got |q| = {abs(q):.6g},"
                f" |p| = {abs(p):.6g}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q_poch", qpochhammer_infinite(q, q))
        object.__setattr__(self, "p_poch", qpochhammer_infinite(p, p))

    @property
    def pq(self) -> complex:
        return self.q * self.p


def kappa(base: BaseParams) -> complex:
    """Normalization constant (p;p)_inf (q;q)_inf / (4 pi i)."""
    return base.p_poch * base.q_poch / _FOUR_PI_I


def truncation_orders(z_mag_max: float, z_mag_min: float, base: BaseParams,
                      tol: ToleranceSpec) -> tuple[int, int]:
    """Product orders (J, K) so the dropped double-product tail stays below
    target/100 for every argument with modulus in [z_mag_min, z_mag_max]."""
    if z_mag_min <= 0.0:
        raise DomainError("gamma argument must be nonzero")
    size = z_mag_max + 1.0 / z_mag_min
    qm, pm = abs(base.q), abs(base.p)
    denom = (1.0 - qm) * (1.0 - pm)
    threshold = tol.target / 200.0 * denom / size

    def order(base_mag: float) -> int:
        if base_mag == 0.0:
            return 1
        if threshold >= 1.0:
            return 1
        return max(1, int(math.ceil(math.log(threshold) / math.log(base_mag))))

    J, K = order(qm), order(pm)
    if J * K > tol.truncation_cap:
        raise NonConvergent(
            f"gamma product needs {J}x{K} factors, cap is {tol.truncation_cap}",
            needed=J * K)
    return J, K


def gamma_values(zs: np.ndarray, base: BaseParams, tol: ToleranceSpec = DEFAULT_TOL,
                 reciprocal: bool = False) -> np.ndarray:
    """Vectorized gamma(z; q, p) over an array of arguments.

    With reciprocal=True returns 1/gamma(z) computed directly as a product,
    which is finite at the poles of gamma; that form is what integrand
    denominators use, so grid nodes landing on a gamma pole (an integrand
    zero) evaluate cleanly to 0.

    Proximity checks: the plain form raises PoleError within POLE_EXCLUSION
    of a pole q^{-j} p^{-k}; the reciprocal form raises within the same
    radius of a zero q^{j+1} p^{k+1} (a pole of 1/gamma).
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if np.any(zs == 0):
        raise DomainError("gamma argument must be nonzero")
    mags = np.abs(zs)
    J, K = truncation_orders(float(mags.max()), float(mags.min()), base, tol)

    q, p = base.q, base.p
    jq = q ** np.arange(J)           # q^j
    jq1 = q * jq                     # q^{j+1}
    zinv = 1.0 / zs
    num = np.ones_like(zs)
    den = np.ones_like(zs)
    abs_jq = np.abs(jq)

    for k in range(K):
        pk = p ** k
        pk1 = p * pk
        dfac = 1.0 - np.outer(zs, jq) * pk
        nfac = 1.0 - np.outer(zinv, jq1) * pk1
        if not reciprocal:
            # |z - q^{-j}p^{-k}| < r  <=>  |1 - z q^j p^k| < r |q^j p^k|
            lim = POLE_EXCLUSION * abs_jq * abs(pk)
            if np.any(np.abs(dfac) < lim):
                jj = int(np.argmin(np.min(np.abs(dfac) - lim, axis=0)))
                raise PoleError(
                    f"argument within {POLE_EXCLUSION:g} of gamma pole"
                    f" q^-{jj} p^-{k}")
        elif pk1 != 0:
            # |z - q^{j+1}p^{k+1}| < r  <=>  |1 - q^{j+1}p^{k+1}/z| < r/|z|
            lim2 = POLE_EXCLUSION / mags
            if np.any(np.abs(nfac) < lim2[:, None]):
                jj = int(np.argmin(np.abs(nfac).min(axis=0)))
                raise PoleError(
                    f"argument within {POLE_EXCLUSION:g} of gamma zero"
                    f" q^{jj + 1} p^{k + 1} (pole of 1/gamma)")
        num *= np.prod(nfac, axis=1)
        den *= np.prod(dfac, axis=1)

    return den / num if reciprocal else num / den


def elliptic_gamma(z: complex, base: BaseParams, tol: ToleranceSpec = DEFAULT_TOL,
                   reciprocal: bool = False) -> complex:
    """gamma(z; q, p) at a single point (or its reciprocal)."""
    return complex(gamma_values(np.array([complex(z)]), base, tol, reciprocal)[0])


def gamma_product(args_num, args_den, base: BaseParams,
                  tol: ToleranceSpec = DEFAULT_TOL) -> complex:
    """prod gamma(args_num) / prod gamma(args_den), batched.

    Denominator entries are evaluated in reciprocal form, so a denominator
    argument on a gamma pole yields an exact zero instead of an overflow.
    """
    value = 1.0 + 0.0j
    if len(args_num):
        value *= complex(np.prod(gamma_values(np.asarray(args_num, complex), base, tol)))
    if len(args_den):
        value *= complex(np.prod(gamma_values(np.asarray(args_den, complex), base, tol,
                                              reciprocal=True)))
    return value


