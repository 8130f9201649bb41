"""Numerical toolkit for elliptic hypergeometric integrals on the unit torus.

Core pieces: the elliptic gamma function and q-Pochhammer products
(ellgamma), gamma-factor expression trees (expr), adaptive trapezoidal
quadrature over torus grids (quadrature), integral Bailey-pair
constructions (bailey), and seeded numerical certification of the
integral identities they generate (verify).  A FastAPI service wraps the
same operations; the CLI is a thin client of that service layer.

Importing the package root pulls only the numerical core.  The service
and CLI layers live in ``ellbailey.service`` and ``ellbailey.cli`` and
are imported on demand, so the core stays usable without the web stack.
"""

from .ellgamma import (
    BaseParams,
    DEFAULT_TOL,
    POLE_EXCLUSION,
    ToleranceSpec,
    elliptic_gamma,
    gamma_product,
    gamma_values,
    kappa,
    qpochhammer_infinite,
    theta_p,
    truncation_orders,
)
from .expr import (
    Assignment,
    GammaFactor,
    Integrand,
    ParamMonomial,
    evaluate,
    expand_pm,
    pole_margin,
)
from .quadrature import (
    QuadratureConfig,
    QuadratureResult,
    TableCache,
    contour_mean,
    grid_eval,
    grid_eval_naive,
    roots_of_unity,
)
from .constraints import (
    Constraint,
    ConstraintSet,
    lt_one,
    pq_lt,
)
from .bailey import (
    BaileyPair,
    GammaProduct,
    Integral,
    Product,
    Scale,
    TreeWord,
    chain_step,
    dual_step,
    eval_bailey_expr,
    flatten,
    instantiate,
    iterate_chain,
    iterate_dual,
    pair_residual,
    seed_pair,
    tree_pair,
)
from .verify import (
    IdentitySides,
    VerificationReport,
    default_config,
    identity_sides,
    net_factor_counts,
    sample_params,
    transformation_consistency_gap,
    verify_beta_integral,
    verify_id_seq,
    verify_ident1,
    verify_identfin,
    verify_identity,
    verify_transformation,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "BaseParams",
    "DEFAULT_TOL",
    "POLE_EXCLUSION",
    "ToleranceSpec",
    "elliptic_gamma",
    "gamma_product",
    "gamma_values",
    "kappa",
    "qpochhammer_infinite",
    "theta_p",
    "truncation_orders",
    "Assignment",
    "GammaFactor",
    "Integrand",
    "ParamMonomial",
    "evaluate",
    "expand_pm",
    "pole_margin",
    "QuadratureConfig",
    "QuadratureResult",
    "TableCache",
    "contour_mean",
    "grid_eval",
    "grid_eval_naive",
    "roots_of_unity",
    "Constraint",
    "ConstraintSet",
    "lt_one",
    "pq_lt",
    "BaileyPair",
    "GammaProduct",
    "Integral",
    "Product",
    "Scale",
    "TreeWord",
    "chain_step",
    "dual_step",
    "eval_bailey_expr",
    "flatten",
    "instantiate",
    "iterate_chain",
    "iterate_dual",
    "pair_residual",
    "seed_pair",
    "tree_pair",
    "IdentitySides",
    "VerificationReport",
    "default_config",
    "identity_sides",
    "net_factor_counts",
    "sample_params",
    "transformation_consistency_gap",
    "verify_beta_integral",
    "verify_id_seq",
    "verify_ident1",
    "verify_identfin",
    "verify_identity",
    "verify_transformation",
    "errors",
    "__version__",
]
