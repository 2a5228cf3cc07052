import math
import time
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from cantor_density.atlas import AtlasInvariantError
from cantor_density.coding import RhoParams
from cantor_density.entropy import dim_survivor
from cantor_density.expansions import t_kl_bracket
from cantor_density.staircase import (
    CSV_COLUMNS,
    Segment,
    filter_range,
    format_psi,
    monotone_violations,
    read_csv,
    staircase,
    to_csv,
    to_svg,
)

GOLDEN_PSI = math.log((1 + math.sqrt(5)) / 2) / math.log(3)


@pytest.fixture(scope="module")
def segs10():
    return staircase(max_word_len=10, workers=1)


def test_plateau_segment(segs10):
    hit = [s for s in segs10 if (s.t_left, s.t_right) == (Fraction(4, 117), Fraction(1, 13))]
    assert len(hit) == 1
    assert abs(hit[0].psi - GOLDEN_PSI) < 1e-6
    assert hit[0].word == "110"


def test_sorted_disjoint_monotone(segs10):
    assert all(a.t_right <= b.t_left for a, b in zip(segs10, segs10[1:]))
    assert monotone_violations(segs10) == []
    assert segs10[-1].word == "G" and segs10[-1].t_right == 1
    kl = [s for s in segs10 if s.word == "KL"][0]
    assert kl.psi == 0 and kl.t_right == Fraction(1, 4)
    assert kl.t_left == t_kl_bracket(n_digits=64)[1]


def test_plateau_values_agree_with_survivor_dimension(segs10):
    for s in [s for s in segs10 if s.word not in ("KL", "G")][:20]:
        assert abs(dim_survivor((s.t_left + s.t_right) / 2).value - s.psi) < 1e-9


def test_runtime_budget():
    start = time.perf_counter()
    staircase(max_word_len=10, workers=1)
    assert time.perf_counter() - start < 30


def test_parallel_matches_serial():
    # enough jobs at length 12 to take the process-pool path
    assert staircase(max_word_len=12, workers=2) == staircase(max_word_len=12, workers=1)


def test_other_rho():
    p = RhoParams(Fraction(1, 4))
    segs = staircase(p, max_word_len=8, workers=1)
    assert monotone_violations(segs) == []
    assert segs[-1].t_left == p.t_G


def test_monotone_violation_detected():
    a = Segment(Fraction(0), Fraction(1, 10), 0.1, "a", True)
    b = Segment(Fraction(1, 5), Fraction(1, 4), 0.3, "b", True)
    assert monotone_violations([a, b]) == [(a, b)]


def test_filter_range(segs10):
    assert filter_range(segs10, Fraction(1, 2), Fraction(1, 3)) == []
    part = filter_range(segs10, Fraction(1, 20), Fraction(1, 10))
    assert part and all(s.t_right >= Fraction(1, 20) and s.t_left <= Fraction(1, 10) for s in part)
    assert filter_range(segs10) == segs10


def test_csv_roundtrip(segs10):
    text = to_csv(segs10)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    back = read_csv(text)
    assert [(s.t_left, s.t_right, s.word) for s in back] == [(s.t_left, s.t_right, s.word) for s in segs10]
    assert all(format_psi(a.psi) == format_psi(b.psi) for a, b in zip(back, segs10))
    assert to_csv([]) == ",".join(CSV_COLUMNS) + "\n"
    assert "4,117,1,13,0.438017879485942,110" in text


def test_svg(segs10):
    svg = to_svg(segs10)
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert root.get("viewBox")
    assert "<text" not in svg
    assert "stroke-dasharray" in svg
    assert to_svg(segs10) == svg


def test_nested_mismatch_raises(monkeypatch):
    import cantor_density.staircase as st

    real = st._evaluate

    def skewed(words, p, workers):
        # nested generators are longer than their hosts
        return {w: v + 0.01 * len(w) for w, v in real(words, p, workers).items()}

    monkeypatch.setattr(st, "_evaluate", skewed)
    with pytest.raises(AtlasInvariantError):
        st.staircase(max_word_len=9, workers=1)
