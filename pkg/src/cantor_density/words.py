"""Binary words and eventually periodic binary sequences.

Finite words are plain ``str`` objects over ``"01"``; that keeps slicing,
concatenation and equal-length lexicographic comparison at C speed.
Infinite sequences are restricted to the eventually periodic ones and are
carried by :class:`EpSeq`, which is always kept in canonical form so that
``==`` and ``hash`` agree with equality of the infinite sequences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from math import lcm
from typing import Iterator

from .errors import InvalidInput

BinaryWord = str

_FLIP = str.maketrans("01", "10")
_WORD_RE = re.compile(r"[01]*")
_EPSEQ_RE = re.compile(r"\s*([01]*)\(([01]+)\)\s*")


def check_word(w: str) -> BinaryWord:
    if not isinstance(w, str) or _WORD_RE.fullmatch(w) is None:
        raise InvalidInput(f"not a binary word: {w!r}")
    return w


def reflect_word(w: BinaryWord) -> BinaryWord:
    """Digitwise ``1 - d``."""
    return w.translate(_FLIP)


def word_plus(w: BinaryWord) -> BinaryWord:
    """``w^+``: the last digit, which must be 0, raised to 1."""
    if not w or w[-1] != "0":
        raise InvalidInput(f"w^+ needs a word ending in 0, got {w!r}")
    return w[:-1] + "1"


def word_minus(w: BinaryWord) -> BinaryWord:
    if not w or w[-1] != "1":
        raise InvalidInput(f"w^- needs a word ending in 1, got {w!r}")
    return w[:-1] + "0"


def compare_words(c: BinaryWord, d: BinaryWord) -> int:
    """Compare finite words by padding both with ``0^inf``.

    Returns -1, 0 or 1. Note that ``"1"`` and ``"10"`` compare equal.
    """
    n = max(len(c), len(d))
    c, d = c.ljust(n, "0"), d.ljust(n, "0")
    return (c > d) - (c < d)


def thue_morse_bit(k: int) -> int:
    return bin(k).count("1") & 1


def thue_morse_prefix(n: int) -> BinaryWord:
    """First ``n`` Thue-Morse digits ``tau_0 ... tau_{n-1}`` (doubling recursion)."""
    if n < 1:
        raise InvalidInput("thue_morse_prefix needs n >= 1")
    w = "0"
    while len(w) < n:
        w += reflect_word(w)
    return w[:n]


def is_admissible(a: BinaryWord) -> bool:
    """Two-sided self-comparison test for a generator word.

    ``a = a_1...a_m`` (m >= 2) is admissible iff for every ``1 <= i < m``::

        reflect(a_1..a_{m-i}) <= a_{i+1}..a_m < a_1..a_{m-i}

    All comparisons are between words of equal length.
    """
    check_word(a)
    m = len(a)
    if m < 2:
        raise InvalidInput("admissibility is defined for words of length >= 2")
    for i in range(1, m):
        head = a[: m - i]
        tail = a[i:]
        if not (reflect_word(head) <= tail < head):
            return False
    return True


def is_self_reflection_form(a: BinaryWord) -> bool:
    """True iff ``a = b reflect(b)`` for some word ``b``."""
    m = len(a)
    if m == 0 or m % 2:
        return False
    return a[m // 2:] == reflect_word(a[: m // 2])


def is_primitive(w: BinaryWord) -> bool:
    return len(w) > 0 and _primitive_root(w) == w


def _primitive_root(w: BinaryWord) -> BinaryWord:
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d]
    return w


def lyndon_words(max_len: int) -> Iterator[BinaryWord]:
    """All binary Lyndon words of length 1..max_len (Duval's generator)."""
    if max_len < 1:
        return
    w = [-1]
    while w:
        w[-1] += 1
        yield "".join(map(str, w))
        m = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == 1:
            w.pop()


@total_ordering
@dataclass(frozen=True)
class EpSeq:
    """The infinite sequence ``pre · per · per · ...``.

    Build instances with :meth:`make` (or :func:`canonicalize`); the raw
    constructor trusts its arguments to be canonical already.
    """

    pre: BinaryWord
    per: BinaryWord

    @classmethod
    def make(cls, pre: BinaryWord = "", per: BinaryWord = "0") -> "EpSeq":
        return canonicalize(pre, per)

    @classmethod
    def parse(cls, text: str) -> "EpSeq":
        """Parse ``"PRE(PER)"``, e.g. ``"000(110)"`` or ``"(01)"``."""
        m = _EPSEQ_RE.fullmatch(text)
        if m is None:
            raise InvalidInput(f"cannot parse eventually periodic sequence {text!r}")
        return canonicalize(m.group(1), m.group(2))

    def __str__(self) -> str:
        return f"{self.pre}({self.per})"

    def digit(self, i: int) -> int:
        """0-based digit access."""
        if i < len(self.pre):
            return int(self.pre[i])
        return int(self.per[(i - len(self.pre)) % len(self.per)])

    def prefix(self, n: int) -> BinaryWord:
        r = len(self.pre)
        if n <= r:
            return self.pre[:n]
        k = n - r
        reps = -(-k // len(self.per))
        return self.pre + (self.per * reps)[:k]

    def __lt__(self, other: "EpSeq") -> bool:
        return compare_lex(self, other) < 0

    def shift(self, n: int = 1) -> "EpSeq":
        return shift(self, n)

    def reflect(self) -> "EpSeq":
        return reflect(self)

    def distinct_shifts(self) -> list["EpSeq"]:
        """``sigma^n(x)`` for ``n = 0 .. |pre| + |per| - 1``; later shifts repeat."""
        return [shift(self, n) for n in range(len(self.pre) + len(self.per))]

    @property
    def eventually_constant(self) -> bool:
        return len(self.per) == 1


def canonicalize(pre: BinaryWord, per: BinaryWord) -> EpSeq:
    """Primitive period, minimal preperiod."""
    check_word(pre)
    check_word(per)
    if not per:
        raise InvalidInput("period must be nonempty")
    per = _primitive_root(per)
    while pre and pre[-1] == per[-1]:
        per = per[-1] + per[:-1]
        pre = pre[:-1]
    return EpSeq(pre, per)


def compare_lex(x: EpSeq, y: EpSeq) -> int:
    """Lexicographic order of the infinite sequences: -1, 0 or 1.

    Past ``|pre_x| + |pre_y| + lcm(|per_x|, |per_y|) + max(|per_x|, |per_y|)``
    digits both sequences are jointly periodic, so agreement up to there is
    equality.
    """
    px, py = len(x.per), len(y.per)
    n = len(x.pre) + len(y.pre) + lcm(px, py) + max(px, py)
    a, b = x.prefix(n), y.prefix(n)
    return (a > b) - (a < b)


def shift(x: EpSeq, n: int) -> EpSeq:
    if n < 0:
        raise InvalidInput("shift count must be >= 0")
    r = len(x.pre)
    if n <= r:
        return canonicalize(x.pre[n:], x.per)
    k = (n - r) % len(x.per)
    return EpSeq("", x.per[k:] + x.per[:k])


def reflect(x: EpSeq) -> EpSeq:
    # reflection preserves canonical form
    return EpSeq(reflect_word(x.pre), reflect_word(x.per))


ZERO = EpSeq("", "0")
ONE = EpSeq("", "1")
