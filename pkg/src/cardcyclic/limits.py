"""Closed-form large-n limits of the shuffle.

Coordinates are rescaled to ``[0, 1]``: ``b = j/n`` for a card number,
``x = k/n`` for a final position, ``d`` for the position a card is reinserted
at. ``G(b, .)`` maps the insertion fraction to the limiting final position
and its inverse ``F(b, .)`` is the limiting distribution function of the
final position of card ``bn``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import erfc

E = math.e
ROOT_TOL = 1e-13
QUAD_TOL = 1e-11
RTOL = 4 * 2.23e-16


def _unit(name: str, v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name}={v} outside [0, 1]")
    return v


def y_break(b: float) -> float:
    """``1 - (1-b) e^b``: where ``G(b, .)`` switches branch."""
    # b e^b - (e^b - 1), about b^2/2 near 0
    return b * math.exp(b) - math.expm1(b)


def G(b: float, y: float) -> float:
    b, y = _unit("b", b), _unit("y", y)
    if y <= y_break(b):
        return y * math.exp(1.0 - b)
    x = math.exp((1.0 - y) * math.exp(-b)) - (1.0 - y) * math.exp(1.0 - b)
    return min(max(x, 0.0), 1.0)


def dG_dy(b: float, y: float) -> float:
    """Right derivative of ``G(b, .)`` at ``y``."""
    if y < y_break(b):
        return math.exp(1.0 - b)
    return _upper_slope(b, y)


def _upper_slope(b: float, y: float) -> float:
    return math.exp(1.0 - b) - math.exp(-b) * math.exp((1.0 - y) * math.exp(-b))


def x_break(b: float) -> float:
    """``e^(1-b) - (1-b) e``, the image of the branch point under ``G``."""
    b = _unit("b", b)
    # e (e^-b - 1 + b), free of cancellation near b = 0
    return E * (math.expm1(-b) + b)


def b_of_x(x: float) -> float:
    """Inverse of :func:`x_break` on ``[0, 1)``."""
    x = _unit("x", x)
    if x == 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return brentq(lambda b: x_break(b) - x, 0.0, 1.0, xtol=ROOT_TOL, rtol=RTOL)


def F(b: float, x: float) -> float:
    """Limiting CDF of the rescaled final position of card ``bn``."""
    b, x = _unit("b", b), _unit("x", x)
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    xb = x_break(b)
    if x <= xb:
        return x * math.exp(b - 1.0)
    lo = max(y_break(b), 0.0)
    if G(b, lo) >= x:  # x within rounding of the break
        return lo
    return brentq(lambda y: G(b, y) - x, lo, 1.0, xtol=ROOT_TOL, rtol=RTOL)


def f_density(b: float, x: float) -> float:
    """Right-continuous density of ``F(b, .)``; ``inf`` at ``b = x = 0``."""
    b, x = _unit("b", b), _unit("x", x)
    if b == 1.0:
        return 1.0
    if x < x_break(b):
        return math.exp(b - 1.0)
    slope = _upper_slope(b, F(b, x))
    if slope <= 0.0:
        return math.inf
    return 1.0 / slope


def expected_pos(b: float) -> float:
    """Limiting mean of the rescaled final position of card ``bn``."""
    b = _unit("b", b)
    return E * b + 0.5 * math.exp(1.0 - b) - math.exp(b)


# --- the three-stage composition behind G ------------------------------------


def gamma_limit(b: float, d: float) -> float:
    """Share of lower cards left of card ``bn`` right after it lands at ``dn``."""
    b, d = _unit("b", b), _unit("d", d)
    if d >= y_break(b):
        return b - (1.0 - d) * (1.0 - math.exp(-b))
    return d


def t_limit(gamma: float, d: float) -> float:
    """Share of the cards initially between that stay left of it."""
    return 1.0 - gamma - (1.0 - d) * math.exp(d - gamma)


def v_limit(gamma: float, t: float, b: float, d: float) -> float:
    """Share of the later cards that land left of it."""
    return (gamma + t) * (math.exp(1.0 - b - d + gamma) - 1.0)


def final_pos_map(b: float, d: float) -> float:
    g = gamma_limit(b, d)
    t = t_limit(g, d)
    return g + t + v_limit(g, t, b, d)


# --- densities and laws ------------------------------------------------------


@dataclass(frozen=True)
class LimitDensity:
    """A point mass plus a density on an interval."""

    density: Callable[[float], float]
    support: tuple[float, float] = (0.0, 1.0)
    atom_location: float | None = None
    atom_mass: float = 0.0
    total_mass: float = 1.0
    breakpoints: tuple[float, ...] = ()

    def __call__(self, x: float) -> float:
        return self.density(x)

    def integral(self) -> float:
        return integrate(self.density, *self.support, points=self.breakpoints)


def integrate(fn: Callable[[float], float], a: float, b: float, points=()) -> float:
    """Adaptive quadrature split at the given interior points."""
    if math.isinf(b):
        return quad(fn, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)[0]
    cuts = sorted({a, b, *(p for p in points if a < p < b)})
    return sum(
        quad(fn, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)[0]
        for lo, hi in zip(cuts, cuts[1:])
    )


def h_density(x: float, b: float) -> float:
    """Limiting density of the rescaled number of the card at position ``xn``."""
    x, b = _unit("x", x), _unit("b", b)
    if x == 1.0:
        return math.exp(b) / (E - 1.0)
    return f_density(b, x)


def h_law(x: float) -> LimitDensity:
    x = _unit("x", x)
    if x == 0.0:
        return LimitDensity(
            lambda b: math.exp(b - 1.0),
            atom_location=0.0,
            atom_mass=math.exp(-1.0),
        )
    return LimitDensity(lambda b: h_density(x, b), breakpoints=(b_of_x(x),))


def f_law(b: float) -> LimitDensity:
    return LimitDensity(lambda x: f_density(b, x), breakpoints=(x_break(b),))


def gaussian_tail(d: float) -> float:
    """``int_d^inf exp(-y^2/2) dy``."""
    return math.sqrt(math.pi / 2.0) * erfc(d / math.sqrt(2.0))


@dataclass(frozen=True)
class FirstPositionLimits:
    macroscopic: LimitDensity  # number/n of the first card
    mesoscopic: LimitDensity  # number/sqrt(n) of the first card, mass e^-1
    intermediate: float  # limit of n p for numbers between sqrt(n log n) and o(n)
    sup_sqrt_n: float  # best limsup of sqrt(n) p over sequences of numbers
    inf_n: float  # worst liminf of n p


def first_pos_limit(kind: str | None = None) -> FirstPositionLimits | LimitDensity:
    """All first-position limits, or just the ``"macroscopic"``/``"mesoscopic"`` law."""
    limits = FirstPositionLimits(
        macroscopic=LimitDensity(
            lambda x: math.exp(x - 1.0), atom_location=0.0, atom_mass=math.exp(-1.0)
        ),
        mesoscopic=LimitDensity(
            lambda x: math.exp(-1.0) * gaussian_tail(x),
            support=(0.0, math.inf),
            total_mass=math.exp(-1.0),
        ),
        intermediate=math.exp(-1.0),
        sup_sqrt_n=math.sqrt(2.0 * math.pi) / (2.0 * E),
        inf_n=math.exp(-1.0),
    )
    if kind is None:
        return limits
    if kind not in ("macroscopic", "mesoscopic"):
        raise ValueError(f"unknown kind {kind!r}")
    return getattr(limits, kind)


@dataclass(frozen=True)
class LastPositionLimits:
    density: LimitDensity  # number/n of the last card
    right_edge: float  # limit of n p for numbers n - o(n) with n - j -> inf

    @staticmethod
    def lattice(l: int) -> float:
        """Limit of ``n p(card n - l is last)``."""
        if l < 0:
            raise ValueError("l must be nonnegative")
        return (E - math.exp(-l)) / (E - 1.0)


def last_pos_limit() -> LastPositionLimits:
    return LastPositionLimits(
        density=LimitDensity(lambda x: math.exp(x) / (E - 1.0)),
        right_edge=E / (E - 1.0),
    )


# --- constants and pairs -----------------------------------------------------


@dataclass(frozen=True)
class NamedConstants:
    b_star: float  # argmax of expected_pos
    b_bar: float  # expected_pos(b) = b
    b_hat: float  # (1-b) e^b = 1/2, sign change of nearby pair inversions
    b_tilde: float  # expected_pos(b) = 1/2
    x_hat: float  # e/2 - (1 - ln 2) e

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def _root(fn: Callable[[float], float], lo: float, hi: float) -> float:
    return brentq(fn, lo, hi, xtol=ROOT_TOL, rtol=RTOL)


def named_constants() -> NamedConstants:
    return NamedConstants(
        b_star=_root(lambda b: E - math.exp(b) - 0.5 * math.exp(1.0 - b), 0.0, 1.0),
        b_bar=_root(lambda b: expected_pos(b) - b, 0.0, 1.0),
        b_hat=_root(lambda b: (1.0 - b) * math.exp(b) - 0.5, 0.0, 1.0),
        b_tilde=_root(lambda b: expected_pos(b) - 0.5, 0.0, 0.7),
        x_hat=0.5 * E - (1.0 - math.log(2.0)) * E,
    )


def pair_inversion_prob(b1: float, b2: float) -> float:
    """Limit chance that card ``b1 n`` ends left of (or level with) card ``b2 n``.

    This is ``int f(b1, x) (1 - F(b2, x)) dx``. Substituting ``x = G(b1, y)``
    turns ``f(b1, x) dx`` into ``dy``, which removes the density spike that
    ``f(b1, .)`` has just right of its jump when ``b1`` is small.
    """
    b1, b2 = _unit("b1", b1), _unit("b2", b2)
    # the integrand is bounded by 1, so slivers between cuts can be merged away
    cuts = [0.0]
    for c in sorted((y_break(b1), F(b1, x_break(b2)))):
        if c - cuts[-1] > 1e-12 and c < 1.0 - 1e-12:
            cuts.append(c)
    return integrate(lambda y: 1.0 - F(b2, G(b1, y)), 0.0, 1.0, points=cuts)
