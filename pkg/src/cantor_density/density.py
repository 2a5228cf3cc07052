"""Pointwise lower and upper s-densities of the Cantor measure.

Both densities depend on a point only through ``tau``; the upper density
has a separate value ``2^-s`` at points whose orbit hits an endpoint of
``[0, 1]``, which on codings means the coding is eventually constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .coding import DEFAULT, CantorPoint, RhoParams, as_fraction, tau_exact
from .errors import InvalidInput
from .words import EpSeq


@dataclass(frozen=True)
class DensityValue:
    lower: mpmath.mpf
    upper: mpmath.mpf
    endpoint_case: bool
    tau: Fraction

    def __post_init__(self):
        if not 0 < self.lower <= self.upper:
            raise InvalidInput("densities must satisfy 0 < lower <= upper")


def _check_tau(tau: Fraction, p: RhoParams) -> Fraction:
    tau = as_fraction(tau)
    if not 0 <= tau <= p.t_G:
        raise InvalidInput(f"tau must lie in [0, {p.t_G}], got {tau}")
    return tau


def lower_density_from_tau(tau, p: RhoParams = DEFAULT) -> mpmath.mpf:
    """``1 / (2^(1+s) (1 - rho - tau)^s)``."""
    tau = _check_tau(tau, p)
    with mpmath.workdps(p.precision + 10):
        s = p.s
        return 1 / (mpmath.power(2, 1 + s) * mpmath.power(p.mp(1 - p.rho - tau), s))


def upper_density_from_tau(tau, p: RhoParams = DEFAULT) -> mpmath.mpf:
    """Generic branch ``1 / (2^s (1 - rho + rho tau)^s)``."""
    tau = _check_tau(tau, p)
    with mpmath.workdps(p.precision + 10):
        s = p.s
        return 1 / (mpmath.power(2, s) * mpmath.power(p.mp(1 - p.rho + p.rho * tau), s))


def endpoint_upper_density(p: RhoParams = DEFAULT) -> mpmath.mpf:
    with mpmath.workdps(p.precision + 10):
        return mpmath.power(2, -p.s)


def upper_density_from_coding(coding: EpSeq, p: RhoParams = DEFAULT) -> tuple[mpmath.mpf, bool]:
    """Upper density and whether the endpoint branch applied."""
    if coding.eventually_constant:
        return endpoint_upper_density(p), True
    return upper_density_from_tau(tau_exact(coding, p), p), False


def density_pair(x: CantorPoint, p: RhoParams | None = None) -> DensityValue:
    p = p or x.params
    tau = tau_exact(x.coding, p)
    upper, endpoint = upper_density_from_coding(x.coding, p)
    return DensityValue(lower_density_from_tau(tau, p), upper, endpoint, tau)


def almost_sure_densities(p: RhoParams = DEFAULT) -> tuple[mpmath.mpf, mpmath.mpf]:
    """``(d_*, d^*)``, the values at ``tau = 0``."""
    return lower_density_from_tau(0, p), upper_density_from_tau(0, p)


def ball_measure(x, r, p: RhoParams = DEFAULT, depth: int = 30) -> tuple[Fraction, Fraction]:
    """Rigorous enclosure ``[lo, hi]`` of ``mu((x - r, x + r))``.

    Level-k cylinders carry mass ``2^-k``. A cylinder inside the closed ball
    counts fully (the measure has no atoms), one disjoint from the open ball
    counts zero, and only the at most two cylinders straddling a boundary
    point are split further. Straddlers left at ``depth`` go to ``hi`` only.
    """
    x, r = as_fraction(x), as_fraction(r)
    if r <= 0:
        raise InvalidInput("radius must be positive")
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    rho = p.rho
    left, right = x - r, x + r
    lo = Fraction(0)
    undecided = Fraction(0)
    stack = [(Fraction(0), Fraction(1), Fraction(1))]
    while stack:
        a, length, mass = stack.pop()
        b = a + length
        if b <= left or a >= right:
            continue
        if a >= left and b <= right:
            lo += mass
            continue
        # mass / 2 halves the denominator depth: 2^-k = mass
        if mass.denominator > (1 << (depth - 1)):
            undecided += mass
            continue
        child = length * rho
        half = mass / 2
        stack.append((a, child, half))
        stack.append((b - child, child, half))
    return lo, lo + undecided
