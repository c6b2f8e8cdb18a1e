"""Construction parameters (a, b, lambda), their feasibility, and the alpha-equation.

The three feasibility conditions are

    (1)  0 < b < a < 1
    (2)  a + 2 b lambda <= lambda      (equivalently b < 1/2 and lambda >= a / (1 - 2b))
    (3)  a + b > 1

and the growth exponent ``alpha`` is the unique root of
``a**(1/(1-alpha)) + b**(1/(1-alpha)) = 1``, found here through ``p = 1/(1-alpha)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real

from .errors import DomainError, InvalidInputError

__all__ = [
    "Mode",
    "Convention",
    "Params",
    "ConditionResult",
    "ValidationReport",
    "AlphaResult",
    "as_rational",
    "validate",
    "min_lambda",
    "solve_alpha",
    "cubic_residual",
    "default_params",
    "DEFAULT_A",
    "DEFAULT_LAMBDA",
]

DEFAULT_A = 0.97
DEFAULT_LAMBDA = 8.61


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


class Convention(str, enum.Enum):
    """Range of the coordinate index ``i`` in a gamma tuple.

    ``INCLUSIVE`` uses ``1 <= i <= d_m``.  ``PAPER_STRICT`` uses ``1 <= i < d_m``,
    which leaves every extension set empty because ``d_1 = 1``.
    """

    INCLUSIVE = "inclusive"
    PAPER_STRICT = "paper-strict"


def as_rational(x) -> Fraction:
    """Convert ``x`` to an exact :class:`~fractions.Fraction`.

    Strings may be integers, decimals or ``"p/q"``.  Floats are read through their
    shortest repr, so ``0.97`` becomes ``97/100`` rather than its binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidInputError(f"not a number: {x!r}")
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidInputError(f"non-finite value: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"cannot parse {x!r} as a rational") from exc
    if isinstance(x, Real):
        return as_rational(float(x))
    raise InvalidInputError(f"not a number: {x!r}")


def _as_scalar(x):
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return as_rational(x)
    try:
        return float(x)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"not a number: {x!r}") from exc


def _check_positive_finite(**values):
    for name, v in values.items():
        if not math.isfinite(float(v)):
            raise InvalidInputError(f"{name} must be finite, got {v!r}")
        if v <= 0:
            raise InvalidInputError(f"{name} must be positive, got {v!r}")


@dataclass(frozen=True)
class ConditionResult:
    name: str
    statement: str
    holds: bool


@dataclass(frozen=True)
class ValidationReport:
    a: object
    b: object
    lam: object
    conditions: tuple[ConditionResult, ...]
    one_minus_2b: object
    min_lambda: object  # None when 1 - 2b <= 0
    cubic_residual: object

    @property
    def verdict(self) -> bool:
        return all(c.holds for c in self.conditions)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "conditions": [
                {"name": c.name, "statement": c.statement, "holds": c.holds}
                for c in self.conditions
            ],
            "a": self.a,
            "b": self.b,
            "lambda": self.lam,
            "one_minus_2b": self.one_minus_2b,
            "min_lambda": self.min_lambda,
            "cubic_residual": self.cubic_residual,
        }


def cubic_residual(a, b):
    """``|a**3 + b**3 - 1|``; never zero for positive rationals, so exact mode reports it."""
    a, b = _as_scalar(a), _as_scalar(b)
    return abs(a**3 + b**3 - 1)


def min_lambda(a, b):
    """Smallest ``lambda`` satisfying ``a + 2 b lambda <= lambda``.

    Returns ``a / (1 - 2b)`` when ``b < 1/2`` and ``None`` (infeasible) otherwise.
    Exact when ``a`` and ``b`` are rationals.
    """
    a, b = _as_scalar(a), _as_scalar(b)
    if not (0 < a < 1 and 0 < b < 1):
        raise InvalidInputError(f"need 0 < a < 1 and 0 < b < 1, got a={a!r}, b={b!r}")
    denom = 1 - 2 * b
    if denom <= 0:
        return None
    return a / denom


def validate(a, b, lam) -> ValidationReport:
    """Check conditions (1), (2), (3); a failing condition is reported, not raised.

    Comparisons are exact when all three inputs are rationals (``Fraction``, ``int``
    or ``"p/q"`` strings) and plain float comparisons otherwise.
    """
    a, b, lam = _as_scalar(a), _as_scalar(b), _as_scalar(lam)
    _check_positive_finite(a=a, b=b, **{"lambda": lam})
    one_minus_2b = 1 - 2 * b
    conditions = (
        ConditionResult("1", "0 < b < a < 1", bool(0 < b < a < 1)),
        ConditionResult("2", "a + 2*b*lambda <= lambda", bool(a + 2 * b * lam <= lam)),
        ConditionResult("3", "a + b > 1", bool(a + b > 1)),
    )
    ml = a / one_minus_2b if one_minus_2b > 0 else None
    return ValidationReport(
        a=a,
        b=b,
        lam=lam,
        conditions=conditions,
        one_minus_2b=one_minus_2b,
        min_lambda=ml,
        cubic_residual=abs(a**3 + b**3 - 1),
    )


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    p: float
    residual: float
    iterations: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "p": self.p, "residual": self.residual}


def solve_alpha(a, b, tol: float = 1e-12) -> AlphaResult:
    """Solve ``a**p + b**p = 1`` for ``p > 1`` by bisection and return ``alpha = 1 - 1/p``.

    ``g(p) = a**p + b**p`` is strictly decreasing with ``g(1) = a + b > 1``, so the root
    is bracketed by ``[1, P]`` where ``P`` is doubled until ``g(P) < 1``.  The bracket is
    halved until it can no longer be split in double precision, which makes the result
    independent of ``tol``; ``tol`` is the acceptance bound on the residual.
    """
    a, b = float(a), float(b)
    _check_positive_finite(a=a, b=b, tol=tol)
    if not (0 < b < a < 1):
        raise DomainError(f"need 0 < b < a < 1, got a={a!r}, b={b!r}")
    if a + b <= 1:
        raise DomainError(f"need a + b > 1 for a root p > 1, got a + b = {a + b!r}")

    def g(p):
        return a**p + b**p

    lo, hi = 1.0, 2.0
    while g(hi) >= 1:
        lo, hi = hi, 2 * hi
        if hi > 1e300:
            raise DomainError("failed to bracket the root")

    iterations = 0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        if g(mid) > 1:
            lo = mid
        else:
            hi = mid
    # pick the endpoint with the smaller residual
    p = lo if abs(g(lo) - 1) <= abs(g(hi) - 1) else hi
    residual = abs(g(p) - 1)
    if residual > tol:
        raise DomainError(f"residual {residual:.3e} exceeds tol {tol:.3e} at p={p!r}")
    return AlphaResult(alpha=1 - 1 / p, p=p, residual=residual, iterations=iterations)


@dataclass(frozen=True)
class Params:
    """Validated triple ``(a, b, lam)`` plus arithmetic mode and index convention.

    In exact mode the scalars are stored as ``Fraction``; in float mode as ``float``.
    Raises :class:`DomainError` when any of conditions (1)-(3) fails.
    """

    a: object
    b: object
    lam: object
    mode: Mode = Mode.FLOAT
    convention: Convention = Convention.INCLUSIVE

    def __post_init__(self):
        mode = Mode(self.mode)
        convention = Convention(self.convention)
        if mode is Mode.EXACT:
            a, b, lam = (as_rational(v) for v in (self.a, self.b, self.lam))
        else:
            a, b, lam = (float(_as_scalar(v)) for v in (self.a, self.b, self.lam))
        report = validate(a, b, lam)
        if not report.verdict:
            failed = ", ".join(f"({c.name}) {c.statement}" for c in report.conditions if not c.holds)
            raise DomainError(f"infeasible parameters a={a}, b={b}, lambda={lam}: {failed}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "convention", convention)

    @property
    def exact(self) -> bool:
        return self.mode is Mode.EXACT

    def scalar(self, x):
        """Coerce ``x`` into this parameter set's arithmetic."""
        return as_rational(x) if self.exact else float(x)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "lambda": self.lam,
            "mode": self.mode.value,
            "convention": self.convention.value,
        }


def default_params(mode=Mode.FLOAT, convention=Convention.INCLUSIVE) -> Params:
    """``a = 0.97``, ``b = (1 - a**3)**(1/3)`` (float), ``lambda = 8.61``.

    In exact mode ``b`` is the rational read off the float's repr, so ``a**3 + b**3``
    misses 1 by about 1e-17; see :func:`cubic_residual`.
    """
    b = (1 - DEFAULT_A**3) ** (1 / 3)
    return Params(DEFAULT_A, b, DEFAULT_LAMBDA, mode=mode, convention=convention)
