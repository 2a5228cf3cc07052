"""Fundamental intervals, the renormalization substitution and level-set dimensions.

A fundamental interval ``J(a) = [t_L, t_R)`` is attached to an admissible
word ``a`` not of the form ``b reflect(b)``; its endpoints have codings
``reflect(a^+) a^inf`` and ``reflect(a)^inf``. The substitution ``Psi_J``
replaces each digit pair ``(d_i, d_{i+1})`` of a sequence starting with 0 by
one of the blocks ``a, a^+, reflect(a^+), reflect(a)``; it maps the spectrum
onto the part of the spectrum inside ``J`` and divides dimensions by ``|a|``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Union

from .coding import DEFAULT, CantorPoint, GammaKind, RhoParams, classify_gamma, in_gamma
from .entropy import (
    SandwichSystem,
    dim_from_coding,
    graph_entropy,
    sandwich_automaton,
    TransferGraph,
)
from .errors import CantorDensityError, InvalidInput, NotInImage, ResourceLimit
from .words import (
    EpSeq,
    canonicalize,
    compare_lex,
    is_admissible,
    is_self_reflection_form,
    reflect_word,
    word_plus,
)

MAX_ATLAS_LEN = 16
MAX_RENORM_DEPTH = 64


class AtlasInvariantError(CantorDensityError):
    """Two enumerated intervals overlap without nesting."""


@dataclass(frozen=True)
class FundamentalInterval:
    generator: str
    t_left: CantorPoint
    t_right: CantorPoint
    q_left: Optional[object] = None
    q_right: Optional[object] = None

    def __post_init__(self):
        if not self.t_left.value < self.t_right.value:
            raise InvalidInput("fundamental interval must have t_left < t_right")

    @property
    def length(self) -> int:
        return len(self.generator)

    def contains_strictly(self, coding: EpSeq) -> bool:
        return compare_lex(self.t_left.coding, coding) < 0 < compare_lex(self.t_right.coding, coding)

    def contains_closed(self, coding: EpSeq) -> bool:
        return compare_lex(self.t_left.coding, coding) <= 0 <= compare_lex(self.t_right.coding, coding)

    def psi(self, p: Optional[RhoParams] = None) -> float:
        """Dimension value on the plateau, from the right-endpoint system."""
        p = p or self.t_right.params
        return dim_from_coding(self.t_right.coding, p)


def _check_generator(a: str) -> None:
    if a == "0":
        return
    if len(a) < 2 or not is_admissible(a):
        raise InvalidInput(f"{a!r} is not an admissible word")
    if is_self_reflection_form(a):
        raise InvalidInput(f"{a!r} has the form b reflect(b)")


def left_coding(a: str) -> EpSeq:
    if a == "0":
        return EpSeq("", "0")
    return canonicalize(reflect_word(word_plus(a)), a)


def right_coding(a: str) -> EpSeq:
    if a == "0":
        return EpSeq("", "1")
    return canonicalize("", reflect_word(a))


def fundamental_interval(a: str, p: RhoParams = DEFAULT) -> FundamentalInterval:
    _check_generator(a)
    return FundamentalInterval(
        a,
        CantorPoint.from_coding(left_coding(a), p),
        CantorPoint.from_coding(right_coding(a), p),
    )


def admissible_generators(max_len: int):
    """Admissible words of length 2..max_len not of the form ``b reflect(b)``.

    Admissibility forces ``a_1 = 1`` and ``a_m = 0``, so only those words
    are tested.
    """
    if max_len > MAX_ATLAS_LEN:
        raise ResourceLimit(f"max_len {max_len} exceeds guard {MAX_ATLAS_LEN}")
    for m in range(2, max_len + 1):
        for k in range(1 << max(m - 2, 0)):
            mid = format(k, f"0{m - 2}b") if m > 2 else ""
            a = "1" + mid + "0"
            if is_admissible(a) and not is_self_reflection_form(a):
                yield a


@dataclass(frozen=True)
class AtlasEntry:
    interval: FundamentalInterval
    depth: int


def check_laminar(intervals: list[FundamentalInterval]) -> list[tuple[str, str]]:
    """Pairs whose closures overlap without nesting. Empty on success."""
    items = sorted(intervals, key=lambda J: (J.t_left.value, -J.t_right.value, J.generator))
    bad = []
    stack: list[FundamentalInterval] = []
    for J in items:
        while stack and stack[-1].t_right.value < J.t_left.value:
            stack.pop()
        if stack and J.t_right.value > stack[-1].t_right.value:
            bad.append((stack[-1].generator, J.generator))
        stack.append(J)
    return bad


def enumerate_fundamental_intervals(max_len: int, p: RhoParams = DEFAULT,
                                    include_root: bool = False) -> list[AtlasEntry]:
    """All fundamental intervals with ``|a| <= max_len``, sorted by left endpoint.

    Raises :class:`AtlasInvariantError` if two closures overlap without
    nesting.
    """
    intervals = [fundamental_interval(a, p) for a in admissible_generators(max_len)]
    bad = check_laminar(intervals)
    if bad:
        raise AtlasInvariantError(f"closures overlap without nesting: {bad[:5]}")
    items = sorted(intervals, key=lambda J: (J.t_left.value, -J.t_right.value, J.generator))
    out = []
    stack: list[FundamentalInterval] = []
    base = 1 if include_root else 0
    for J in items:
        while stack and stack[-1].t_right.value < J.t_left.value:
            stack.pop()
        out.append(AtlasEntry(J, base + len(stack)))
        stack.append(J)
    if include_root:
        out.insert(0, AtlasEntry(fundamental_interval("0", p), 0))
    return out


# -- containment ----------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeReport:
    """Nesting still growing when the search budget ran out."""

    chain: tuple
    max_len: int
    note: str = "possible point of infinite nesting; only finite-depth evidence"


def containing_generators(coding: EpSeq, max_len: int) -> list[str]:
    """Generators ``a`` (|a| <= max_len) with the point strictly inside ``J(a)``, outermost first.

    Strict containment forces ``a_1 .. a_{m-1} = reflect(d_1 .. d_{m-1})``
    and ``a_m = 0``, so there is one candidate per length.
    """
    out = []
    head = reflect_word(coding.prefix(max(max_len - 1, 0)))
    for m in range(2, max_len + 1):
        a = head[: m - 1] + "0"
        if not is_admissible(a) or is_self_reflection_form(a):
            continue
        if compare_lex(left_coding(a), coding) < 0 < compare_lex(right_coding(a), coding):
            out.append(a)
    return out


def smallest_containing_interval(t: CantorPoint, max_len: int,
                                 p: Optional[RhoParams] = None) -> Union[FundamentalInterval, CascadeReport]:
    """Innermost ``J(a)`` with ``|a| <= max_len`` and ``t`` strictly inside.

    Falls back to ``J(0)`` when no proper interval contains ``t``. A chain of
    two or more nested intervals whose innermost generator is too long for
    a further level (at least three times longer) to fit in the budget is
    reported as a :class:`CascadeReport`.
    """
    p = p or t.params
    if not in_gamma(t.coding, p):
        raise InvalidInput(f"{t.coding} is not in the density spectrum")
    chain = containing_generators(t.coding, max_len)
    if not chain:
        return fundamental_interval("0", p)
    if len(chain) >= 2 and 3 * len(chain[-1]) > max_len:
        return CascadeReport(tuple(chain), max_len)
    return fundamental_interval(chain[-1], p)


# -- renormalization -------------------------------------------------------------------


def _blocks(a: str) -> dict:
    ap = word_plus(a)
    return {
        (0, 0): a,
        (0, 1): ap,
        (1, 0): reflect_word(ap),
        (1, 1): reflect_word(a),
    }


def renormalize_seq(d: EpSeq, a: str) -> EpSeq:
    """``Psi_J(d)`` for ``J = J(a)``; ``d`` must start with 0."""
    _check_generator(a)
    if d.digit(0) != 0:
        raise InvalidInput("renormalization is defined on sequences starting with 0")
    if a == "0":
        return d
    blocks = _blocks(a)
    r, k = len(d.pre), len(d.per)
    pre = [reflect_word(word_plus(a))]
    for i in range(r):
        pre.append(blocks[(d.digit(i), d.digit(i + 1))])
    per = [blocks[(d.digit(i), d.digit(i + 1))] for i in range(r, r + k)]
    return canonicalize("".join(pre), "".join(per))


def renormalize_seq_inverse(y: EpSeq, a: str) -> EpSeq:
    """Inverse of :func:`renormalize_seq`; raises :class:`NotInImage`."""
    _check_generator(a)
    if a == "0":
        if y.digit(0) != 0:
            raise NotInImage("sequence does not start with 0")
        return y
    m = len(a)
    blocks = _blocks(a)
    decode = {w: pair for pair, w in blocks.items()}
    if y.prefix(m) != reflect_word(word_plus(a)):
        raise NotInImage(f"{y} does not start with the block reflect(a^+)")
    r, k = len(y.pre), len(y.per)
    start = max(1, -(-r // m))
    span = lcm(k, m) // m
    total = start + span + 1
    word = y.prefix(m * total)
    digits = [0]
    for b in range(1, total):
        pair = decode.get(word[b * m:(b + 1) * m])
        if pair is None or pair[0] != digits[-1]:
            raise NotInImage(f"{y} is not a concatenation of renormalization blocks")
        digits.append(pair[1])
    # digits[b] is d_{b+1}; blocks from ``start`` repeat with period ``span``
    if digits[start + span] != digits[start]:
        raise NotInImage(f"{y} is not in the image")
    out = "".join(map(str, digits))
    return canonicalize(out[:start], out[start:start + span])


def renormalize_point(x: CantorPoint, a: str, p: Optional[RhoParams] = None) -> CantorPoint:
    p = p or x.params
    if not 0 <= x.value <= p.rho:
        raise InvalidInput(f"point {x.value} is outside [0, rho]")
    return CantorPoint.from_coding(renormalize_seq(x.coding, a), p)


def renormalize_point_inverse(t: CantorPoint, a: str, p: Optional[RhoParams] = None) -> CantorPoint:
    p = p or t.params
    return CantorPoint.from_coding(renormalize_seq_inverse(t.coding, a), p)


def compose_generators(a: str, b: str) -> str:
    """Generator of ``Psi_{J(a)}(J(b))``: reflect the first ``|a||b|`` digits of ``Psi(reflect(b)^inf)``."""
    if a == "0":
        return b
    if b == "0":
        return a
    image = renormalize_seq(right_coding(b), a)
    c = reflect_word(image.prefix(len(a) * len(b)))
    if renormalize_seq(left_coding(b), a) != left_coding(c) or image != right_coding(c):
        raise AtlasInvariantError(f"composite of {a} and {b} is not a fundamental interval")
    return c


# -- level sets ------------------------------------------------------------------------


class LevelSetKind(enum.Enum):
    COUNTABLY_INFINITE = "CountablyInfinite"
    FROM_RENORMALIZATION = "FromRenormalization"
    E_BRANCH = "EBranch"
    ZERO_BY_CASCADE = "ZeroByCascade"
    FULL_AT_ZERO = "FullAtZero"


@dataclass(frozen=True)
class LevelSetResult:
    dimension: float
    kind: LevelSetKind
    depth_certified: int
    word: Optional[str] = None
    t_hat: Optional[CantorPoint] = None
    chain: tuple = ()

    def __post_init__(self):
        if self.kind in (LevelSetKind.COUNTABLY_INFINITE, LevelSetKind.ZERO_BY_CASCADE) and self.dimension != 0:
            raise InvalidInput(f"{self.kind.value} forces dimension 0")
        if self.kind is LevelSetKind.FROM_RENORMALIZATION and (self.word is None or self.t_hat is None):
            raise InvalidInput("renormalization result needs word and t_hat")


def _search_len(coding: EpSeq, max_len: int) -> int:
    # a proper generator containing an eventually periodic point is no longer than its period
    return max(max_len, len(coding.pre) + 2 * len(coding.per) + 2)


def level_set_dimension(t: CantorPoint, p: Optional[RhoParams] = None, max_len: int = 12,
                        max_depth: int = MAX_RENORM_DEPTH) -> LevelSetResult:
    """Hausdorff dimension of ``{x : tau(x) = t}``.

    Isolated points of the spectrum give countable level sets. Otherwise the
    innermost fundamental interval containing ``t`` is found by peeling one
    renormalization at a time: ``t`` is pulled back to ``t_hat`` and the
    search is repeated on ``t_hat`` until no proper interval contains it.
    """
    p = p or t.params
    cls = classify_gamma(t.coding, p)
    if cls.kind is GammaKind.NOT_IN_GAMMA:
        raise InvalidInput(f"{t.coding} is not in the density spectrum")
    if cls.kind is GammaKind.ISOLATED:
        return LevelSetResult(0.0, LevelSetKind.COUNTABLY_INFINITE, 0)
    if t.value == 0:
        return LevelSetResult(dim_from_coding(t.coding, p), LevelSetKind.FULL_AT_ZERO, 0, "0", t)
    chain: list[str] = []
    current = t.coding
    for depth in range(max_depth):
        gens = containing_generators(current, _search_len(current, max_len))
        if not gens:
            break
        a = gens[-1]
        chain.append(a)
        current = renormalize_seq_inverse(current, a)
        if classify_gamma(current, p).kind is GammaKind.NOT_IN_GAMMA:
            raise AtlasInvariantError(f"pull-back {current} left the spectrum")
    else:
        return LevelSetResult(0.0, LevelSetKind.ZERO_BY_CASCADE, max_depth, chain=tuple(chain))
    if not chain:
        return LevelSetResult(dim_from_coding(t.coding, p), LevelSetKind.E_BRANCH, 0, "0", t)
    word = chain[0]
    for b in chain[1:]:
        word = compose_generators(word, b)
    t_hat = CantorPoint.from_coding(current, p)
    dim = dim_from_coding(current, p) / len(word)
    return LevelSetResult(dim, LevelSetKind.FROM_RENORMALIZATION, len(chain), word, t_hat, tuple(chain))


def follower_entropy(sys: SandwichSystem, prefix: str) -> float:
    """Entropy of the sequences in the system that begin with ``prefix``."""
    g = sandwich_automaton(sys)
    succ: dict[int, dict[str, int]] = {}
    for (i, j), c in zip(g.edges, g.labels):
        succ.setdefault(i, {})[c] = j
    state = g.start
    for c in prefix:
        state = succ.get(state, {}).get(c)
        if state is None:
            return 0.0
    # restrict to the part reachable from ``state``
    seen = {state}
    todo = [state]
    while todo:
        v = todo.pop()
        for w in succ.get(v, {}).values():
            if w not in seen:
                seen.add(w)
                todo.append(w)
    order = sorted(seen)
    index = {v: k for k, v in enumerate(order)}
    edges = [(index[i], index[j]) for i, j in g.edges if i in seen and j in seen]
    return graph_entropy(TransferGraph(0, [g.vertices[v] for v in order], edges))


def relative_dimension(t: CantorPoint, a: str, p: Optional[RhoParams] = None) -> float:
    """Dimension of the part of the survivor set of ``t`` that begins with ``reflect(a^+)``."""
    p = p or t.params
    prefix = reflect_word(word_plus(a)) if a != "0" else "0"
    return follower_entropy(SandwichSystem(t.coding), prefix) / float(p.neg_log_rho)


# -- bifurcation probe -----------------------------------------------------------------


class ProbeVerdict(enum.Enum):
    IN_PLATEAU_INTERIOR = "InPlateauInterior"
    BOUNDARY_OR_E = "BoundaryOrE"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class ProbeResult:
    verdict: ProbeVerdict
    generator: Optional[str] = None
    note: str = ""


def t_kl_rational_upper(p: RhoParams = DEFAULT, n_digits: int = 64) -> Fraction:
    """A rational strictly above ``t_KL``."""
    from .expansions import t_kl_bracket

    return t_kl_bracket(p, n_digits)[1]


def bifurcation_E_probe(t: CantorPoint, max_len: int = 12, p: Optional[RhoParams] = None) -> ProbeResult:
    """Depth-bounded test of whether ``psi`` is locally constant at ``t``.

    Never claims exact membership in the bifurcation set.
    """
    p = p or t.params
    if t.value > t_kl_rational_upper(p):
        return ProbeResult(ProbeVerdict.IN_PLATEAU_INTERIOR, None, "terminal zero region beyond t_KL")
    for a in reversed(containing_generators(t.coding, max_len)):
        return ProbeResult(ProbeVerdict.IN_PLATEAU_INTERIOR, a)
    # endpoints of enumerated intervals and points in no interval
    return ProbeResult(ProbeVerdict.BOUNDARY_OR_E, None, f"no plateau with |a| <= {max_len} contains t")


@dataclass(frozen=True)
class AtlasRow:
    word: str
    t_left: Fraction
    t_right: Fraction
    psi: float
    nesting_depth: int


def atlas_rows(max_len: int, p: RhoParams = DEFAULT) -> list[AtlasRow]:
    return [
        AtlasRow(e.interval.generator, e.interval.t_left.value, e.interval.t_right.value,
                 e.interval.psi(p), e.depth)
        for e in enumerate_fundamental_intervals(max_len, p)
    ]
