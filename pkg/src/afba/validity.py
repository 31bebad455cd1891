"""Named inequalities and validity certificates.

Every parameter rule in the package is expressed as an :class:`Inequality`
with a stable name, its two sides and a margin, so that rejections can say
exactly which condition failed and by how much.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .errors import InvalidParameters

__all__ = ["Inequality", "Certificate", "strict", "nonstrict", "require", "LAMBDA_MARGIN"]

#: margin used for every open-interval condition on relaxation parameters
LAMBDA_MARGIN = 1e-6


@dataclass(frozen=True)
class Inequality:
    """``lhs > rhs`` (``strict``) or ``lhs >= rhs``."""

    name: str
    lhs: float
    rhs: float
    strict: bool = True
    description: str = ""

    @property
    def margin(self) -> float:
        return float(self.lhs - self.rhs)

    @property
    def holds(self) -> bool:
        if not (math.isfinite(self.lhs) or math.isfinite(self.rhs)):
            return False
        return self.lhs > self.rhs if self.strict else self.lhs >= self.rhs

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "relation": ">" if self.strict else ">=",
            "margin": _jsonable(self.margin),
            "holds": self.holds,
            "description": self.description,
        }


def _jsonable(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def strict(name, lhs, rhs, description=""):
    return Inequality(name, float(lhs), float(rhs), True, description)


def nonstrict(name, lhs, rhs, description=""):
    return Inequality(name, float(lhs), float(rhs), False, description)


def require(checks, what: str):
    """Raise :class:`InvalidParameters` unless every inequality holds."""
    checks = list(checks)
    bad = [q for q in checks if not q.holds]
    if bad:
        names = ", ".join(f"{q.name} (margin {q.margin:.3g})" for q in bad)
        raise InvalidParameters(f"{what}: failed {names}", checks)
    return checks


@dataclass
class Certificate:
    """Outcome of a successful validation.

    Attributes
    ----------
    variant : str
    case : str
        Which sufficient condition was used, e.g. ``"iii"``.
    tau : float or None
        Strong positivity constant of ``P`` (``0`` on the positive-P path).
    beta_P : float or None
        Cocoercivity constant of the forward term in the ``P`` metric;
        ``None`` when the forward term is absent.
    delta : float
        Upper bound for the relaxation parameter.
    lam_range : tuple of float
        Admitted interval for constant relaxation, margins applied.
    inequalities : list of Inequality
        Every checked condition, including those of cases not selected.
    positive_p : bool
        True when the iteration must use the semidefinite-``P`` path.
    rate_eligible : bool
        True when the monotone ``D``-norm and ``O(1/n)`` statements apply.
    c1, c2 : float or None
        Sandwich constants ``c1 P <= D <= c2 P`` when computed.
    extras : dict
        Variant-specific numbers, e.g. the ``o(1/n)`` flag.
    """

    variant: str
    case: str
    tau: float | None
    beta_P: float | None
    delta: float
    lam_range: tuple[float, float]
    inequalities: list[Inequality] = field(default_factory=list)
    positive_p: bool = False
    rate_eligible: bool = False
    c1: float | None = None
    c2: float | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def selected(self) -> list[Inequality]:
        return [q for q in self.inequalities if q.name in self.extras.get("case_inequalities", ())]

    def to_dict(self) -> dict:
        out = {
            "valid": True,
            "variant": self.variant,
            "case": self.case,
            "tau": None if self.tau is None else _jsonable(self.tau),
            "beta_P": None if self.beta_P is None else _jsonable(self.beta_P),
            "delta": _jsonable(self.delta),
            "lambda_range": [_jsonable(self.lam_range[0]), _jsonable(self.lam_range[1])],
            "positive_p": self.positive_p,
            "rate_eligible": self.rate_eligible,
            "c1": None if self.c1 is None else _jsonable(self.c1),
            "c2": None if self.c2 is None else _jsonable(self.c2),
            "inequalities": [q.to_dict() for q in self.inequalities],
        }
        for k, v in self.extras.items():
            if isinstance(v, float):
                v = _jsonable(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[k] = v
        return out
