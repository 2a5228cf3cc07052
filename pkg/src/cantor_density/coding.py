"""Geometry of the Cantor set ``C_rho`` in exact rational arithmetic.

Points of ``C`` are coded by binary sequences through

    pi(d) = (1 - rho) * sum_i d_i rho^(i-1),

and the expanding map ``T`` acts on codings as the left shift. Everything
here is exact: ``rho`` is a ``Fraction`` and eventually periodic codings map
to rationals by summing two geometric series.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import mpmath

from .errors import (
    InvalidInput,
    NotInCantorSet,
    OutsideDomain,
    ResourceLimit,
)
from .words import EpSeq, canonicalize, compare_lex, lyndon_words, reflect

Rational = Union[Fraction, int, str]

MAX_ENUM_PERIOD = 24
MAX_DIGIT_STEPS = 100_000


def as_fraction(x: Rational) -> Fraction:
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InvalidInput(f"not a rational number: {x!r}") from exc


@dataclass(frozen=True)
class RhoParams:
    rho: Fraction = Fraction(1, 3)
    precision: int = 50

    def __post_init__(self):
        object.__setattr__(self, "rho", as_fraction(self.rho))
        if not (0 < self.rho <= Fraction(1, 3)):
            raise InvalidInput(f"rho must lie in (0, 1/3], got {self.rho}")
        if self.precision < 20:
            raise InvalidInput("precision must be at least 20 digits")

    def mp(self, x) -> mpmath.mpf:
        with mpmath.workdps(self.precision + 10):
            if isinstance(x, Fraction):
                return mpmath.mpf(x.numerator) / x.denominator
            return mpmath.mpf(x)

    @property
    def neg_log_rho(self) -> mpmath.mpf:
        with mpmath.workdps(self.precision + 10):
            return -mpmath.log(self.mp(self.rho))

    @property
    def s(self) -> mpmath.mpf:
        """Hausdorff dimension of ``C``: ``log 2 / -log rho``."""
        with mpmath.workdps(self.precision + 10):
            return mpmath.log(2) / self.neg_log_rho

    @property
    def t_G(self) -> Fraction:
        """Largest element ``rho / (1 + rho)`` of the spectrum."""
        return self.rho / (1 + self.rho)


DEFAULT = RhoParams()


def pi(coding: EpSeq, p: RhoParams = DEFAULT) -> Fraction:
    rho = p.rho
    total = Fraction(0)
    w = Fraction(1)
    for ch in coding.pre:
        if ch == "1":
            total += w
        w *= rho
    cyc = Fraction(0)
    w2 = Fraction(1)
    for ch in coding.per:
        if ch == "1":
            cyc += w2
        w2 *= rho
    total += w * cyc / (1 - w2)
    return (1 - rho) * total


def _digits(x: Fraction, p: RhoParams, fill_gaps: bool, max_steps: int) -> EpSeq:
    rho = p.rho
    seen: dict[Fraction, int] = {}
    out: list[str] = []
    level = 0
    while x not in seen:
        if len(out) >= max_steps:
            raise ResourceLimit(f"no period detected within {max_steps} digits")
        seen[x] = len(out)
        if x <= rho:
            out.append("0")
            x = x / rho
        elif x >= 1 - rho:
            out.append("1")
            x = (x - (1 - rho)) / rho
        elif fill_gaps:
            # smallest point of C to the right of the gap
            return canonicalize("".join(out) + "1", "0")
        else:
            raise NotInCantorSet(x, level)
        level += 1
    start = seen[x]
    word = "".join(out)
    return canonicalize(word[:start], word[start:])


def pi_inverse(x: Rational, p: RhoParams = DEFAULT, max_steps: int = MAX_DIGIT_STEPS) -> EpSeq:
    """Coding of a rational point of ``C``; raises :class:`NotInCantorSet`."""
    x = as_fraction(x)
    if not 0 <= x <= 1:
        raise NotInCantorSet(x, 0)
    return _digits(x, p, fill_gaps=False, max_steps=max_steps)


def delta(t: Rational, p: RhoParams = DEFAULT, max_steps: int = MAX_DIGIT_STEPS) -> EpSeq:
    """Coding of ``t_+ = min { c in C : c >= t }``."""
    t = as_fraction(t)
    if not 0 <= t <= 1:
        raise InvalidInput(f"t must lie in [0, 1], got {t}")
    return _digits(t, p, fill_gaps=True, max_steps=max_steps)


def T_map(x: Rational, p: RhoParams = DEFAULT) -> Fraction:
    x = as_fraction(x)
    rho = p.rho
    if 0 <= x <= rho:
        return x / rho
    if 1 - rho <= x <= 1:
        return (x - (1 - rho)) / rho
    raise OutsideDomain(f"T is undefined at {x}")


@dataclass(frozen=True)
class CantorPoint:
    coding: EpSeq
    value: Fraction
    params: RhoParams = field(default=DEFAULT, compare=False)

    def __post_init__(self):
        if pi(self.coding, self.params) != self.value:
            raise InvalidInput(f"value {self.value} does not match coding {self.coding}")

    @classmethod
    def from_coding(cls, coding: EpSeq, p: RhoParams = DEFAULT) -> "CantorPoint":
        return cls(coding, pi(coding, p), p)

    @classmethod
    def from_value(cls, x: Rational, p: RhoParams = DEFAULT) -> "CantorPoint":
        return cls(pi_inverse(x, p), as_fraction(x), p)


def tau_exact(coding: EpSeq, p: RhoParams = DEFAULT) -> Fraction:
    """``tau(x) = min(liminf T^n x, liminf T^n (1 - x))`` for an eventually periodic coding.

    The orbit is eventually a cycle of length ``|per|``, so each liminf is a
    minimum over one period of shifts.
    """
    r, k = len(coding.pre), len(coding.per)
    best = None
    for seq in (coding, reflect(coding)):
        for n in range(r, r + k):
            v = pi(seq.shift(n), p)
            if best is None or v < best:
                best = v
    return best


@dataclass(frozen=True)
class TauEstimate:
    value: Fraction
    iterations: int
    certified: bool = False
    note: str = "estimate only - liminf not certified"


def tau_numeric(x: Rational, p: RhoParams = DEFAULT, n_iters: int = 200,
                burn_in: Optional[int] = None) -> TauEstimate:
    """Running minimum of ``min(T^n x, T^n(1-x))`` after a burn-in window."""
    x = as_fraction(x)
    if n_iters < 1:
        raise InvalidInput("n_iters must be >= 1")
    if burn_in is None:
        burn_in = n_iters // 2
    a, b = x, 1 - x
    best = None
    for n in range(n_iters):
        if n >= burn_in:
            m = min(a, b)
            best = m if best is None or m < best else best
        a, b = T_map(a, p), T_map(b, p)
    if best is None:
        best = min(a, b)
    return TauEstimate(best, n_iters)


def in_gamma(coding: EpSeq, p: RhoParams = DEFAULT) -> bool:
    """``delta(t) <= sigma^n delta(t) <= reflect(delta(t))`` for all ``n``."""
    upper = reflect(coding)
    for y in coding.distinct_shifts():
        if compare_lex(y, coding) < 0 or compare_lex(y, upper) > 0:
            return False
    return True


class GammaKind(enum.Enum):
    NOT_IN_GAMMA = "NotInGamma"
    ISOLATED = "IsolatedInGamma"
    ACCUMULATION = "AccumulationInGamma"


@dataclass(frozen=True)
class GammaClassification:
    kind: GammaKind
    witness: Optional[int] = None

    def __post_init__(self):
        if self.kind is GammaKind.ISOLATED and (self.witness is None or self.witness < 1):
            raise InvalidInput("isolated classification needs a witness n >= 1")


def isolation_witness(coding: EpSeq) -> Optional[int]:
    """Smallest ``n >= 1`` with ``sigma^n(d) = reflect(d)``, if any."""
    target = reflect(coding)
    for n in range(1, len(coding.pre) + len(coding.per) + 1):
        if coding.shift(n) == target:
            return n
    return None


def classify_gamma(coding: EpSeq, p: RhoParams = DEFAULT) -> GammaClassification:
    if not in_gamma(coding, p):
        return GammaClassification(GammaKind.NOT_IN_GAMMA)
    n = isolation_witness(coding)
    if n is not None:
        return GammaClassification(GammaKind.ISOLATED, n)
    return GammaClassification(GammaKind.ACCUMULATION)


def enumerate_gamma_periodic(max_period: int, p: RhoParams = DEFAULT):
    """Purely periodic members of the spectrum with primitive period <= max_period.

    A purely periodic ``w^inf`` can satisfy the lower half of the sandwich
    only if ``w`` is the least of its rotations, so it suffices to scan
    Lyndon words.
    """
    if max_period > MAX_ENUM_PERIOD:
        raise ResourceLimit(f"max_period {max_period} exceeds guard {MAX_ENUM_PERIOD}")
    out = []
    for w in lyndon_words(max_period):
        seq = EpSeq("", w)
        cls = classify_gamma(seq, p)
        if cls.kind is not GammaKind.NOT_IN_GAMMA:
            out.append((seq, cls))
    out.sort(key=lambda item: pi(item[0], p))
    return out
