import math
import random
from fractions import Fraction

import mpmath
import pytest

from cantor_density.coding import CantorPoint, RhoParams
from cantor_density.density import (
    DensityValue,
    almost_sure_densities,
    ball_measure,
    density_pair,
    endpoint_upper_density,
    lower_density_from_tau,
    upper_density_from_coding,
    upper_density_from_tau,
)
from cantor_density.errors import InvalidInput
from cantor_density.words import EpSeq, canonicalize

THIRD = RhoParams()
RHOS = [Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), Fraction(3, 10)]


def s_of(rho: Fraction) -> float:
    return math.log(2) / -math.log(rho)


def endpoints_near(x, rho, rmax, kmax):
    out = set()
    stack = [(Fraction(0), Fraction(1), 0)]
    while stack:
        a, length, k = stack.pop()
        b = a + length
        if b < x - rmax or a > x + rmax:
            continue
        out.update((a, b))
        if k < kmax:
            c = length * rho
            stack.append((a, c, k + 1))
            stack.append((b - c, c, k + 1))
    return out


def empirical_ratios(x, p, kmin=4, kmax=12):
    """Enclosed ratios mu(B(x,r))/(2r)^s at radii where the ratio has local extrema."""
    s = float(p.s)
    rmin, rmax = p.rho ** kmax, p.rho ** kmin
    rs = sorted(r for r in {abs(x - e) for e in endpoints_near(x, p.rho, rmax, kmax + 2)}
                if rmin <= r <= rmax)
    lows, highs = [], []
    for r in rs:
        lo, hi = ball_measure(x, r, p, depth=kmax + 12)
        scale = (2 * float(r)) ** s
        lows.append(float(lo) / scale)
        highs.append(float(hi) / scale)
    return min(lows), max(highs)


def test_almost_sure_values():
    lo, up = almost_sure_densities(THIRD)
    assert abs(float(lo) - 0.41699) < 0.02 * 0.41699
    s = math.log(2) / math.log(3)
    assert abs(float(lo) - 1 / (2 ** (1 + s) * (2 / 3) ** s)) < 1e-14


@pytest.mark.parametrize("rho", RHOS)
def test_factor_two(rho):
    p = RhoParams(rho)
    lo, up = almost_sure_densities(p)
    assert abs(up / lo - 2) < 1e-12


def test_factor_law_general_tau():
    p = THIRD
    for tau in [Fraction(k, 40) for k in range(0, 11)]:
        with mpmath.workdps(60):
            ratio = upper_density_from_tau(tau, p) / lower_density_from_tau(tau, p)
            b = (1 - p.rho - tau) / (1 - p.rho + p.rho * tau)
            base = mpmath.mpf(b.numerator) / b.denominator
            expected = 2 * mpmath.power(base, mpmath.log(2) / mpmath.log(3))
            assert abs(ratio - expected) < mpmath.mpf(10) ** -25


def test_monotone_maps():
    grid = [THIRD.t_G * Fraction(k, 50) for k in range(51)]
    lows = [lower_density_from_tau(t) for t in grid]
    ups = [upper_density_from_tau(t) for t in grid]
    assert all(a < b for a, b in zip(lows, lows[1:]))
    assert all(a > b for a, b in zip(ups, ups[1:]))


def test_tau_range_checked():
    assert lower_density_from_tau(THIRD.t_G) > 0
    with pytest.raises(InvalidInput):
        lower_density_from_tau(Fraction(1, 3))
    with pytest.raises(InvalidInput):
        upper_density_from_tau(-1)


def test_upper_from_coding():
    two_s = endpoint_upper_density()
    assert upper_density_from_coding(EpSeq.parse("(0)")) == (two_s, True)
    assert upper_density_from_coding(EpSeq.parse("1(0)"))[1]
    val, flag = upper_density_from_coding(EpSeq.parse("(01)"))
    s = math.log(2) / math.log(3)
    assert not flag
    assert abs(float(val) - 1 / (2 ** s * (2 / 3 + 1 / 12) ** s)) < 1e-14


def test_density_pair():
    dv = density_pair(CantorPoint.from_value(0))
    lo, _ = almost_sure_densities()
    assert dv.endpoint_case and dv.lower == lo and dv.upper == endpoint_upper_density()
    dv = density_pair(CantorPoint.from_value(Fraction(1, 4)))
    assert dv.tau == Fraction(1, 4) and not dv.endpoint_case
    # a coding whose orbit visits long runs of zeros has tau = 0
    dv = density_pair(CantorPoint.from_coding(EpSeq.parse("(00000001101)")))
    assert dv.tau > 0
    rich = EpSeq.parse("(" + "0" * 12 + "1" + "0" * 3 + "1011" + ")")
    assert density_pair(CantorPoint.from_coding(rich)).tau < Fraction(1, 10 ** 4)
    with pytest.raises(InvalidInput):
        DensityValue(mpmath.mpf(1), mpmath.mpf(0.5), False, Fraction(0))


def test_ball_measure_examples():
    rho = THIRD.rho
    assert ball_measure(0, rho) == (Fraction(1, 2), Fraction(1, 2))
    assert ball_measure(Fraction(1, 2), Fraction(1, 2)) == (1, 1)
    assert ball_measure(0, rho ** 2) == (Fraction(1, 4), Fraction(1, 4))
    lo, hi = ball_measure(Fraction(1, 5), Fraction(1, 10), depth=20)
    assert 0 <= hi - lo <= Fraction(2, 2 ** 19)
    with pytest.raises(InvalidInput):
        ball_measure(0, 0)


@pytest.mark.parametrize("rho", RHOS)
def test_ball_measure_at_zero_brackets(rho):
    p = RhoParams(rho)
    lo_d, _ = almost_sure_densities(p)
    top = float(endpoint_upper_density(p))
    s = float(p.s)
    for k in range(4, 15):
        r = rho ** k
        lo, hi = ball_measure(0, r, p)
        assert lo == hi == Fraction(1, 2 ** k)
        assert abs(float(lo) / (2 * float(r)) ** s - top) < 1e-12
        lo2, _ = ball_measure(0, (1 - rho) * r, p)
        assert abs(float(lo2) / (2 * float((1 - rho) * r)) ** s - float(lo_d)) < 1e-12


def test_empirical_sandwich_random_points():
    rng = random.Random(11)
    p = THIRD
    for _ in range(5):
        pre = "".join(rng.choice("01") for _ in range(rng.randint(0, 3)))
        per = "".join(rng.choice("01") for _ in range(rng.randint(2, 5)))
        x = CantorPoint.from_coding(canonicalize(pre, per), p)
        dv = density_pair(x)
        lo, hi = empirical_ratios(x.value, p)
        assert abs(lo - float(dv.lower)) <= 0.05 * float(dv.lower)
        assert abs(hi - float(dv.upper)) <= 0.05 * float(dv.upper)
        # uniform bounds a r^s <= mu <= b r^s on the grid
        assert 0 < lo <= hi < 1
