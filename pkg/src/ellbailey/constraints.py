"""Symbolic validity constraints for integral identities.

Two record kinds cover every inequality the identities need:
|monomial| < 1 for parameters inside the unit disk, and |pq| < |monomial|
for contour separation.  Each record carries a margin used only by the
parameter sampler; explicit assignments are checked against the raw
inequality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .ellgamma import BaseParams
from .errors import DomainError
from .expr import Assignment, ParamMonomial

LT_ONE_MARGIN = 0.2
PQ_MARGIN = 0.3  # sampler keeps |pq| <= 0.7 |monomial|


@dataclass(frozen=True)
class Constraint:
    kind: str  # "lt_one" or "pq_lt"
    monomial: ParamMonomial
    margin: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lt_one", "pq_lt"):
            raise DomainError(f"unknown constraint kind {self.kind!r}")
        margin = self.margin
        if margin == 0.0:
            margin = LT_ONE_MARGIN if self.kind == "lt_one" else PQ_MARGIN
            object.__setattr__(self, "margin", margin)
        if not (0.0 < self.margin < 1.0):
            raise DomainError(f"margin must lie in (0,1), got {self.margin}")

    def violation(self, a: Assignment, base: BaseParams,
                  with_margin: bool = False) -> str | None:
        """Describe the violated inequality, or None when it holds."""
        value = abs(self.monomial.evaluate(a.params))
        if self.kind == "lt_one":
            limit = 1.0 - self.margin if with_margin else 1.0
            if value >= limit:
                return f"|{self.monomial}| = {value:.6g} >= {limit:.6g}"
            return None
        pq = abs(base.pq)
        limit = (1.0 - self.margin) * value if with_margin else value
        if pq >= limit:
            return (f"|pq| = {pq:.6g} >= {limit:.6g} "
                    f"(|{self.monomial}| = {value:.6g})")
        return None

    def to_json(self) -> dict:
        return {"kind": self.kind, "monomial": self.monomial.to_json(),
                "margin": self.margin}

    @staticmethod
    def from_json(obj: dict) -> "Constraint":
        return Constraint(obj["kind"], ParamMonomial.from_json(obj["monomial"]),
                          obj.get("margin", 0.0))


def lt_one(mono: ParamMonomial | str, margin: float = 0.0) -> Constraint:
    if isinstance(mono, str):
        mono = ParamMonomial.of(**{mono: 1})
    return Constraint("lt_one", mono, margin)


def pq_lt(mono: ParamMonomial, margin: float = 0.0) -> Constraint:
    return Constraint("pq_lt", mono, margin)


@dataclass(frozen=True)
class ConstraintSet:
    records: tuple[Constraint, ...] = ()

    def extended(self, extra: Iterable[Constraint]) -> "ConstraintSet":
        out = list(self.records)
        for c in extra:
            if c not in out:
                out.append(c)
        return ConstraintSet(tuple(out))

    def violations(self, a: Assignment, base: BaseParams,
                   with_margin: bool = False) -> list[str]:
        out = []
        for c in self.records:
            v = c.violation(a, base, with_margin)
            if v is not None:
                out.append(v)
        return out

    def satisfied(self, a: Assignment, base: BaseParams,
                  with_margin: bool = False) -> bool:
        return not self.violations(a, base, with_margin)

    def param_names(self) -> tuple[str, ...]:
        names: set[str] = set()
        for c in self.records:
            names.update(c.monomial.names)
        return tuple(sorted(names))

    def to_json(self) -> list:
        return [c.to_json() for c in self.records]

    @staticmethod
    def from_json(obj: list) -> "ConstraintSet":
        return ConstraintSet(tuple(Constraint.from_json(c) for c in obj))
