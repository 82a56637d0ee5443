"""Closed-form tail bounds driven by a bounded zero-bias coupling.

Every evaluator takes the variance ``sigma2`` of the centered variable,
the coupling bound ``c`` (``Y* - Y <= c`` or ``|Y* - Y| <= c``) and the
deviation ``t``, and returns a :class:`BoundValue` carrying the raw
formula value and its clamp to ``[0, 1]``.

Exponents are formed before exponentiation. Very small bounds underflow
to ``0.0`` and are reported as is; vacuous bounds whose exponent would
overflow report ``raw = inf`` (clamped to 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .errors import DomainError


class BoundKind(str, Enum):
    ONE_SIDED = "one-sided"
    TWO_SIDED = "two-sided"
    TLOGT_TIGHT = "tlogt-tight"
    TLOGT_LOOSE = "tlogt-loose"
    BERNSTEIN = "bernstein"
    BENNETT = "bennett"
    CHATTERJEE = "chatterjee"
    HOEFFDING_ZB = "hoeffding-zb"


# tie-break order for best_bound
KIND_ORDER = (
    BoundKind.ONE_SIDED,
    BoundKind.TWO_SIDED,
    BoundKind.TLOGT_TIGHT,
    BoundKind.TLOGT_LOOSE,
    BoundKind.BERNSTEIN,
    BoundKind.BENNETT,
)

# bounds valid under any zero-bias coupling, not only for independent sums
COUPLING_KINDS = (
    BoundKind.ONE_SIDED,
    BoundKind.TWO_SIDED,
    BoundKind.TLOGT_TIGHT,
    BoundKind.TLOGT_LOOSE,
    BoundKind.BERNSTEIN,
)

ZERO_BIAS_BERNSTEIN_A = 4.0
CLASSICAL_BERNSTEIN_A = 2.0 / 3.0


@dataclass(frozen=True)
class BoundInput:
    sigma2: float
    c: float
    t: float

    def __post_init__(self):
        for name in ("sigma2", "c", "t"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.sigma2 <= 0:
            raise DomainError(f"sigma2 must be > 0, got {self.sigma2!r}")
        if self.c < 0:
            raise DomainError(f"c must be >= 0, got {self.c!r}")
        if self.t < 0:
            raise DomainError(f"t must be >= 0, got {self.t!r}")


@dataclass(frozen=True)
class BoundValue:
    """A bound evaluation.

    ``raw`` is the formula value and may exceed one; ``clamped`` is
    ``min(raw, 1)``. When a precondition on ``t`` fails (the t log t
    bound below ``t = e``) ``applicable`` is False and both values are
    None.
    """

    kind: BoundKind
    raw: Optional[float]
    clamped: Optional[float]
    applicable: bool = True

    @classmethod
    def from_raw(cls, kind: BoundKind, raw: float) -> "BoundValue":
        return cls(kind, raw, min(raw, 1.0), True)

    @classmethod
    def not_applicable(cls, kind: BoundKind) -> "BoundValue":
        return cls(kind, None, None, False)

    @property
    def exceeds_one(self) -> bool:
        return self.applicable and self.raw > 1.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "raw": self.raw,
            "clamped": self.clamped,
            "applicable": self.applicable,
        }


def _exp(exponent: float) -> float:
    # vacuous bounds with huge positive exponents become inf rather than raising
    return math.inf if exponent > 709.0 else math.exp(exponent)


def _check_scalar(name: str, value: float, *, positive: bool = False) -> None:
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if positive and value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    if not positive and value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")


def zb_one_sided(sigma2: float, c: float, t: float) -> BoundValue:
    """exp(-t^2 / (2(sigma2 + c t))), for ``Y* - Y <= c``."""
    BoundInput(sigma2, c, t)
    exponent = -(t * t) / (2.0 * (sigma2 + c * t))
    return BoundValue.from_raw(BoundKind.ONE_SIDED, _exp(exponent))


def zb_two_sided(sigma2: float, c: float, t: float) -> BoundValue:
    """exp(-t^2 / (10 sigma2 / 3 + c t)), for ``|Y* - Y| <= c``."""
    BoundInput(sigma2, c, t)
    exponent = -(t * t) / (10.0 * sigma2 / 3.0 + c * t)
    return BoundValue.from_raw(BoundKind.TWO_SIDED, _exp(exponent))


def zb_tlogt(sigma2: float, c: float, t: float, form: str = "tight") -> BoundValue:
    """The t log t rate bound, valid only for t > e.

    ``form="tight"`` gives exp(-(t/c)(log t - log log t - sigma2/c));
    ``form="loose"`` gives exp(-(t/2c)(log t - 2 sigma2/c)), which is
    never smaller.
    """
    BoundInput(sigma2, c, t)
    if form == "tight":
        kind = BoundKind.TLOGT_TIGHT
    elif form == "loose":
        kind = BoundKind.TLOGT_LOOSE
    else:
        raise DomainError(f"form must be 'tight' or 'loose', got {form!r}")
    if c == 0:
        raise DomainError("the t log t bound is singular at c = 0")
    if t <= math.e:
        return BoundValue.not_applicable(kind)
    log_t = math.log(t)
    if form == "tight":
        exponent = -(t / c) * (log_t - math.log(log_t) - sigma2 / c)
    else:
        exponent = -(t / (2.0 * c)) * (log_t - 2.0 * sigma2 / c)
    return BoundValue.from_raw(kind, _exp(exponent))


def bernstein_family(sigma2: float, c: float, t: float, a: float = ZERO_BIAS_BERNSTEIN_A) -> BoundValue:
    """exp(-t^2 / (2 sigma2 + a c t)) with ``c`` bounding each summand.

    ``a = 4`` is what the zero-bias coupling gives for independent sums
    (it coincides with the one-sided bound at coupling constant ``2c``);
    ``a = 2/3`` is the classical Bernstein inequality.
    """
    BoundInput(sigma2, c, t)
    _check_scalar("a", a, positive=True)
    exponent = -(t * t) / (2.0 * sigma2 + a * c * t)
    return BoundValue.from_raw(BoundKind.BERNSTEIN, _exp(exponent))


def bennett(sigma2: float, c: float, t: float) -> BoundValue:
    """Bennett's inequality for independent summands bounded by ``c``."""
    BoundInput(sigma2, c, t)
    if c == 0:
        raise DomainError("Bennett's bound is singular at c = 0")
    u = c * t / sigma2
    exponent = t / c - (sigma2 / (c * c)) * (1.0 + u) * math.log1p(u)
    return BoundValue.from_raw(BoundKind.BENNETT, _exp(exponent))


def chatterjee(mu: float, t: float) -> BoundValue:
    """2 exp(-t^2 / (4 mu + 2 t)) for P(|Y - mu| >= t), entries in [0, 1].

    Checking the entry range is left to the caller.
    """
    _check_scalar("mu", mu, positive=True)
    _check_scalar("t", t)
    exponent = -(t * t) / (4.0 * mu + 2.0 * t)
    return BoundValue.from_raw(BoundKind.CHATTERJEE, 2.0 * _exp(exponent))


def zb_hoeffding_two_sided(sigma_A2: float, t: float) -> BoundValue:
    """2 exp(-t^2 / (2 sigma_A2 + 16 t)): the one-sided bound at c = 8, doubled."""
    _check_scalar("sigma_A2", sigma_A2, positive=True)
    _check_scalar("t", t)
    exponent = -(t * t) / (2.0 * sigma_A2 + 16.0 * t)
    return BoundValue.from_raw(BoundKind.HOEFFDING_ZB, 2.0 * _exp(exponent))


def regime_threshold(sigma2: float, c: float) -> float:
    """Deviation 4 sigma2 / (3c) below which the one-sided bound is smaller."""
    _check_scalar("sigma2", sigma2, positive=True)
    _check_scalar("c", c, positive=True)
    return 4.0 * sigma2 / (3.0 * c)


def chatterjee_crossover(mu_A: float, sigma_A2: float) -> float:
    """(2 mu_A - sigma_A2) / 7; negative means the zero-bias bound never wins."""
    if not math.isfinite(mu_A):
        raise DomainError(f"mu_A must be finite, got {mu_A!r}")
    _check_scalar("sigma_A2", sigma_A2, positive=True)
    return (2.0 * mu_A - sigma_A2) / 7.0


def evaluate(kind: BoundKind | str, sigma2: float, c: float, t: float,
             a: float = ZERO_BIAS_BERNSTEIN_A) -> BoundValue:
    """Dispatch one of the (sigma2, c, t) bounds by kind."""
    kind = BoundKind(kind)
    if kind is BoundKind.ONE_SIDED:
        return zb_one_sided(sigma2, c, t)
    if kind is BoundKind.TWO_SIDED:
        return zb_two_sided(sigma2, c, t)
    if kind is BoundKind.TLOGT_TIGHT:
        return zb_tlogt(sigma2, c, t, "tight")
    if kind is BoundKind.TLOGT_LOOSE:
        return zb_tlogt(sigma2, c, t, "loose")
    if kind is BoundKind.BERNSTEIN:
        return bernstein_family(sigma2, c, t, a)
    if kind is BoundKind.BENNETT:
        return bennett(sigma2, c, t)
    raise DomainError(f"{kind.value} is not a (sigma2, c, t) bound")


def best_bound(inp: BoundInput, available: Iterable[BoundKind | str],
               a: float = ZERO_BIAS_BERNSTEIN_A) -> tuple[Optional[BoundKind], Optional[BoundValue]]:
    """Smallest applicable bound among ``available``.

    Returns ``(None, None)`` when none applies. Ties go to the kind that
    comes first in :data:`KIND_ORDER`.
    """
    kinds = {BoundKind(k) for k in available}
    if not kinds:
        raise DomainError("at least one bound kind is required")
    best = None
    for kind in KIND_ORDER:
        if kind not in kinds:
            continue
        try:
            value = evaluate(kind, inp.sigma2, inp.c, inp.t, a)
        except DomainError:
            continue
        if not value.applicable:
            continue
        if best is None or value.clamped < best[1].clamped:
            best = (kind, value)
    return best if best is not None else (None, None)
