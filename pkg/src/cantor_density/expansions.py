"""Quasi-greedy expansions of 1 and the passage between the spectrum and bases q.

For ``t`` in the spectrum, ``reflect(delta(t))`` is the quasi-greedy
expansion ``alpha(q)`` of 1 in a unique base ``q(t)`` in (1, 2]; the map
``t -> q(t)`` is strictly decreasing. Bases are mpmath reals carried at a
fixed decimal precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .coding import DEFAULT, RhoParams, in_gamma, pi
from .errors import InvalidInput, NotInGamma, NotQuasiGreedy, Undecided
from .words import EpSeq, canonicalize, compare_lex, reflect, reflect_word, thue_morse_prefix, word_minus

DEFAULT_PRECISION = 50
VERIFY_DIGITS = 64


@dataclass(frozen=True)
class BaseQ:
    q: mpmath.mpf
    alpha_prefix: str
    alpha_ep: Optional[EpSeq] = None

    def __post_init__(self):
        if not 1 < self.q <= 2:
            raise InvalidInput(f"base must lie in (1, 2], got {self.q}")


def _mpf(q, dps):
    with mpmath.workdps(dps):
        if isinstance(q, Fraction):
            return mpmath.mpf(q.numerator) / q.denominator
        return mpmath.mpf(q)


def _greedy(q, n: int, precision: int) -> tuple[str, Optional[EpSeq]]:
    """Greedy digits of 1; detects a finite greedy expansion.

    A remainder below ``10^-(precision - 10)`` is taken as exact zero, in
    which case the quasi-greedy expansion is ``(a_1 .. a_m^-)^inf``.
    """
    dps = precision + 10
    with mpmath.workdps(dps):
        q = _mpf(q, dps)
        eps = mpmath.mpf(10) ** (-(precision - 10))
        x = mpmath.mpf(1)
        digits = []
        for _ in range(n):
            x *= q
            if x >= 1 - eps:
                digits.append("1")
                x -= 1
                if abs(x) < eps:
                    block = word_minus("".join(digits))
                    return block, canonicalize("", block)
            else:
                digits.append("0")
        return "".join(digits), None


def quasi_greedy_alpha(q, n: int, precision: int = DEFAULT_PRECISION) -> str:
    """First ``n`` digits of ``alpha(q)``."""
    qq = _mpf(q, precision + 10)
    if not 1 < qq <= 2:
        raise InvalidInput(f"base must lie in (1, 2], got {q}")
    if n < 1:
        raise InvalidInput("n must be >= 1")
    digits, ep = _greedy(qq, n, precision)
    if ep is not None:
        return ep.prefix(n)
    return digits


def quasi_greedy_base(q, precision: int = DEFAULT_PRECISION, n: int = VERIFY_DIGITS) -> BaseQ:
    qq = _mpf(q, precision + 10)
    digits, ep = _greedy(qq, n, precision)
    prefix = ep.prefix(n) if ep is not None else digits
    return BaseQ(qq, prefix, ep)


def _value_exact(alpha: EpSeq, q: Fraction) -> Fraction:
    """``sum alpha_i q^-i`` for rational q."""
    total = Fraction(0)
    w = Fraction(1)
    for ch in alpha.pre:
        w /= q
        if ch == "1":
            total += w
    cyc = Fraction(0)
    w2 = Fraction(1)
    for ch in alpha.per:
        w2 /= q
        if ch == "1":
            cyc += w2
    return total + w * cyc / (1 - w2)


def _value(alpha: EpSeq, q):
    inv = 1 / q
    total = mpmath.mpf(0)
    w = mpmath.mpf(1)
    for ch in alpha.pre:
        w *= inv
        if ch == "1":
            total += w
    cyc = mpmath.mpf(0)
    w2 = mpmath.mpf(1)
    for ch in alpha.per:
        w2 *= inv
        if ch == "1":
            cyc += w2
    return total + w * cyc / (1 - w2)


def _bisect_decreasing(f, lo, hi, dps):
    """Root of a decreasing ``f`` with ``f(lo) > 1 >= f(hi)``."""
    tol = mpmath.mpf(10) ** (-(dps - 5))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) > 1:
            lo = mid
        else:
            hi = mid
    return lo, hi


def solve_base_for_alpha(alpha: EpSeq, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """The base ``q`` with ``sum alpha_i q^-i = 1``, checked to be quasi-greedy."""
    if alpha.per == "0":
        raise NotQuasiGreedy(f"{alpha} ends in 0^inf")
    at_two = _value_exact(alpha, Fraction(2))
    if at_two > 1:
        raise NotQuasiGreedy(f"{alpha} exceeds 1^inf")
    dps = precision + 10
    with mpmath.workdps(dps):
        if at_two == 1:
            q = mpmath.mpf(2)
        else:
            lo, hi = _bisect_decreasing(lambda q: _value(alpha, q), mpmath.mpf(1), mpmath.mpf(2), dps)
            q = (lo + hi) / 2
    got = quasi_greedy_alpha(q, VERIFY_DIGITS, precision)
    if got != alpha.prefix(VERIFY_DIGITS):
        raise NotQuasiGreedy(f"{alpha} is not the quasi-greedy expansion of its base (got {got})")
    return q


def solve_base_for_prefix(prefix: str, precision: int = DEFAULT_PRECISION):
    """Bracket ``[lo, hi]`` for the base whose expansion of 1 starts with ``prefix``.

    The tail is replaced by ``0^inf`` (giving ``lo``) and by ``1^inf``
    (giving ``hi``).
    """
    if "1" not in prefix:
        raise InvalidInput("prefix must contain a 1")
    dps = precision + 10
    with mpmath.workdps(dps):
        def f0(q):
            total = mpmath.mpf(0)
            w = mpmath.mpf(1)
            for ch in prefix:
                w /= q
                if ch == "1":
                    total += w
            return total

        def f1(q):
            return f0(q) + q ** (-len(prefix)) / (q - 1)

        one = mpmath.mpf(1)
        two = mpmath.mpf(2)
        if f0(two) >= 1:
            lo = two
        else:
            lo = _bisect_decreasing(f0, one, two, dps)[0]
        hi = _bisect_decreasing(f1, one, two, dps)[1]
    return lo, hi


def golden_ratio(precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    return solve_base_for_alpha(EpSeq("", "10"), precision)


def komornik_loreti(n_digits: int = 256, precision: int = DEFAULT_PRECISION):
    """``q_KL`` as ``(midpoint, lo, hi)`` from Thue-Morse prefix bounds."""
    tail = thue_morse_prefix(n_digits + 1)[1:]
    lo, hi = solve_base_for_prefix(tail, precision)
    with mpmath.workdps(precision + 10):
        return (lo + hi) / 2, lo, hi


def t_kl_bracket(p: RhoParams = DEFAULT, n_digits: int = 64) -> tuple[Fraction, Fraction]:
    """Exact rational bracket for ``t_KL = pi(reflected Thue-Morse tail)``.

    The first ``n_digits`` digits are followed by ``0^inf`` and by ``1^inf``.
    """
    if n_digits < 1:
        raise InvalidInput("n_digits must be >= 1")
    head = reflect_word(thue_morse_prefix(n_digits + 1)[1:])
    return pi(canonicalize(head, "0"), p), pi(canonicalize(head, "1"), p)


def t_kl(p: RhoParams = DEFAULT, n_digits: int = 128) -> mpmath.mpf:
    lo, hi = t_kl_bracket(p, n_digits)
    return p.mp((lo + hi) / 2)


def phi_map(t_coding: EpSeq, p: RhoParams = DEFAULT, precision: int = DEFAULT_PRECISION) -> BaseQ:
    """``q(t)`` with ``alpha(q(t)) = reflect(delta(t))``."""
    if not in_gamma(t_coding, p):
        raise NotInGamma(f"{t_coding} is not in the density spectrum")
    alpha = reflect(t_coding)
    q = solve_base_for_alpha(alpha, precision)
    return BaseQ(q, alpha.prefix(VERIFY_DIGITS), alpha)


def in_Vq(d: EpSeq, q: BaseQ, check_depth: int = VERIFY_DIGITS) -> bool:
    """``reflect(alpha) <= sigma^n(d) <= alpha`` for all ``n``.

    Exact when ``alpha(q)`` is known as an eventually periodic sequence;
    otherwise compares windows of ``check_depth`` digits and raises
    :class:`Undecided` when some window ties.
    """
    shifts = d.distinct_shifts()
    if q.alpha_ep is not None:
        top = q.alpha_ep
        bottom = reflect(top)
        return all(compare_lex(bottom, y) <= 0 and compare_lex(y, top) <= 0 for y in shifts)
    n = min(check_depth, len(q.alpha_prefix))
    top_w = q.alpha_prefix[:n]
    bottom_w = top_w.translate(str.maketrans("01", "10"))
    tied = False
    for y in shifts:
        w = y.prefix(n)
        if w > top_w or w < bottom_w:
            return False
        if w == top_w or w == bottom_w:
            tied = True
    if tied:
        raise Undecided(f"window of {n} digits cannot separate {d} from alpha(q)")
    return True
