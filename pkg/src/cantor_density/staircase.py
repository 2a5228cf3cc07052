"""The devil's staircase ``psi(t) = dim_H(Gamma cap [t, 1])`` as plateau segments."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .atlas import AtlasInvariantError, admissible_generators, fundamental_interval, t_kl_rational_upper
from .coding import DEFAULT, RhoParams
from .entropy import MAX_STAIRCASE_LEN, dim_from_coding, thread_cap
from .errors import ResourceLimit

CSV_COLUMNS = ["t_left_num", "t_left_den", "t_right_num", "t_right_den", "psi", "word", "converged"]
PSI_AGREEMENT = 1e-9


@dataclass(frozen=True)
class Segment:
    t_left: Fraction
    t_right: Fraction
    psi: float
    word: str
    converged: bool = True


def _psi_job(args):
    word, rho, precision = args
    p = RhoParams(Fraction(rho), precision)
    J = fundamental_interval(word, p)
    return word, J.t_left.value, J.t_right.value, dim_from_coding(J.t_right.coding, p)


def _maximal(items):
    """Keep intervals not contained in an earlier one; report the nested ones."""
    items = sorted(items, key=lambda it: (it[1], -it[2], it[0]))
    top, nested = [], []
    for it in items:
        if top and it[2] <= top[-1][2]:
            nested.append((top[-1], it))
        else:
            top.append(it)
    return top, nested


def staircase(p: RhoParams = DEFAULT, max_word_len: int = 10, workers: Optional[int] = None,
              check_nested: bool = True) -> list[Segment]:
    """Plateau segments sorted by left endpoint, ending with the zero region.

    Plateaus come from maximal fundamental intervals with generators of
    length at most ``max_word_len``. ``psi`` is evaluated at the right
    endpoint system. With ``check_nested`` the value on every nested
    interval is computed too and must agree with its enclosing plateau.
    """
    if max_word_len > MAX_STAIRCASE_LEN:
        raise ResourceLimit(f"max_word_len {max_word_len} exceeds guard {MAX_STAIRCASE_LEN}")
    words = list(admissible_generators(max_word_len))
    ends = []
    for w in words:
        J = fundamental_interval(w, p)
        ends.append((w, J.t_left.value, J.t_right.value))
    top, nested = _maximal(ends)
    todo = [w for w, _, _ in top]
    if check_nested:
        todo += [inner[0] for _, inner in nested]
    psi = _evaluate(todo, p, workers)
    if check_nested:
        for outer, inner in nested:
            if abs(psi[outer[0]] - psi[inner[0]]) > PSI_AGREEMENT:
                raise AtlasInvariantError(
                    f"plateau value mismatch between {outer[0]} and nested {inner[0]}"
                )
    segs = [Segment(l, r, psi[w], w) for w, l, r in top]
    kl = t_kl_rational_upper(p)
    segs.append(Segment(kl, p.t_G, 0.0, "KL"))
    segs.append(Segment(p.t_G, Fraction(1), 0.0, "G"))
    return segs


def _evaluate(words: list[str], p: RhoParams, workers: Optional[int]) -> dict:
    workers = thread_cap() if workers is None else max(1, workers)
    jobs = [(w, str(p.rho), p.precision) for w in words]
    if workers > 1 and len(jobs) > 256:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_psi_job, jobs, chunksize=32))
    else:
        results = [_psi_job(j) for j in jobs]
    return {w: v for w, _, _, v in results}


def monotone_violations(segs: Iterable[Segment]) -> list[tuple[Segment, Segment]]:
    segs = sorted(segs, key=lambda s: s.t_left)
    return [(a, b) for a, b in zip(segs, segs[1:]) if b.psi > a.psi + 1e-12]


def filter_range(segs: Iterable[Segment], t_min=None, t_max=None) -> list[Segment]:
    if t_min is not None and t_max is not None and t_min > t_max:
        return []
    out = []
    for s in segs:
        if t_min is not None and s.t_right < t_min:
            continue
        if t_max is not None and s.t_left > t_max:
            continue
        out.append(s)
    return out


def format_psi(x: float) -> str:
    return format(x, ".15g")


def to_csv(segs: Iterable[Segment]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in segs:
        w.writerow([s.t_left.numerator, s.t_left.denominator, s.t_right.numerator,
                    s.t_right.denominator, format_psi(s.psi), s.word, str(s.converged).lower()])
    return buf.getvalue()


def read_csv(text: str) -> list[Segment]:
    rows = csv.DictReader(io.StringIO(text))
    return [
        Segment(Fraction(int(r["t_left_num"]), int(r["t_left_den"])),
                Fraction(int(r["t_right_num"]), int(r["t_right_den"])),
                float(r["psi"]), r["word"], r["converged"] == "true")
        for r in rows
    ]


def to_svg(segs: Iterable[Segment], p: RhoParams = DEFAULT, width: int = 800, height: int = 500) -> str:
    """Fixed-viewBox SVG of the staircase with a marker at ``t_KL``; no text nodes."""
    segs = list(segs)
    margin = 40
    t_max = float(p.t_G) * 1.1
    s_max = float(p.s)
    pw, ph = width - 2 * margin, height - 2 * margin

    def X(t):
        return margin + pw * min(float(t), t_max) / t_max

    def Y(v):
        return height - margin - ph * v / s_max

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{margin}" y2="{margin}" stroke="black"/>',
    ]
    kl = X(t_kl_rational_upper(p))
    out.append(f'<line x1="{kl:.3f}" y1="{height - margin}" x2="{kl:.3f}" y2="{margin}" '
               f'stroke="gray" stroke-dasharray="4,4"><title>t_KL</title></line>')
    for s in segs:
        if s.t_left > t_max:
            continue
        out.append(f'<line x1="{X(s.t_left):.3f}" y1="{Y(s.psi):.3f}" x2="{X(s.t_right):.3f}" '
                   f'y2="{Y(s.psi):.3f}" stroke="blue" stroke-width="1.5">'
                   f'<title>{s.word}</title></line>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
