"""Mean differences ``D_tp = t - p`` and their convexity certificates.

A :class:`DifferencePair` names an upper mean ``t`` and a lower mean ``p``.
Its generator ``g_tp(x) = f_t(x) - f_p(x)`` is convex for the 27 pairs in
:data:`CERTIFIED_PAIRS`; for those a closed-form ``g_tp''`` is tabulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Callable

import numpy as np

from . import means as _m
from .errors import InputError, ParseError, UnsupportedPairError
from .means import MeanKind, PositivePair

__all__ = [
    "DifferencePair",
    "VkKind",
    "CERTIFIED_PAIRS",
    "difference",
    "difference_array",
    "generator_difference",
    "second_derivative_closed",
    "second_derivative",
    "second_derivative_fd",
    "phi_transform",
    "vk_measure",
]


@dataclass(frozen=True)
class DifferencePair:
    """Ordered pair ``(upper, lower)`` with ``upper >= lower`` pointwise."""

    upper: MeanKind
    lower: MeanKind

    def __post_init__(self) -> None:
        for side in ("upper", "lower"):
            value = getattr(self, side)
            if isinstance(value, str):
                value = MeanKind.parse(value)
            if not isinstance(value, MeanKind):
                raise InputError(f"{side} must be a MeanKind, got {value!r}")
            object.__setattr__(self, side, value.canonical())
        if not _m.is_below(self.lower, self.upper):
            raise InputError(f"{self.lower.label} is not below {self.upper.label} for all pairs")

    @classmethod
    def parse(cls, text: str) -> "DifferencePair":
        """Accept ``"D(A,G)"``, ``"A,G"`` or ``"A-G"``."""
        body = text.strip()
        if body[:2].upper() == "D(" and body.endswith(")"):
            body = body[2:-1]
        for sep in (",", "-"):
            if sep in body:
                left, right = body.split(sep, 1)
                break
        else:
            raise ParseError(f"cannot read a difference pair from {text!r}")
        try:
            return cls(MeanKind.parse(left), MeanKind.parse(right))
        except ParseError:
            raise
        except InputError as exc:
            raise ParseError(str(exc)) from None

    @property
    def key(self) -> tuple[str, str]:
        return (self.upper.label, self.lower.label)

    @property
    def label(self) -> str:
        return f"D({self.upper.label},{self.lower.label})"

    @property
    def has_certificate(self) -> bool:
        return self.key in _CLOSED_FORMS

    def __str__(self) -> str:
        return self.label


# ---------------------------------------------------------------------------
# closed-form g''_tp, one entry per certified pair


def _cf_P6S(x, r, x32):
    q = np.sqrt(2 * x * x + 2) ** 3
    return 2 * (2 * q - (x + 1) ** 3) / ((x + 1) ** 3 * q)


def _cf_P6N2(x, r, x32):
    q = np.sqrt(2 * x + 2) ** 3
    return ((x + 1) ** 3 * (x32 + 1) + 16 * x32 * q) / (4 * x32 * (x + 1) ** 3 * q)


def _cf_P6N3(x, r, x32):
    return (48 * x32 + (x + 1) ** 3) / (12 * x32 * (x + 1) ** 3)


def _cf_P6N1(x, r, x32):
    return (32 * x32 + (x + 1) ** 3) / (8 * x32 * (x + 1) ** 3)


def _cf_P6G(x, r, x32):
    return (16 * x32 + (x + 1) ** 3) / (4 * x32 * (x + 1) ** 3)


def _cf_P6P4(x, r, x32):
    num = 3 * (x**3 + 1) + 17 * x * (x + 1) + 2 * r * (x * x + 6 * x + 1)
    return 2 * num / (r * (r + 1) ** 4 * (x + 1) ** 3)


def _cf_P6P2(x, r, x32):
    return 2 * (x**6 + 15 * x**4 + 16 * x**3 + 15 * x**2 + 1) / ((x + 1) ** 3 * (x * x + 1) ** 3)


def _cf_P6P1(x, r, x32):
    inner = ((x - 1) ** 2 - x) ** 2 + x * x + (x - 1) ** 4 + x * (x - 1) ** 2
    return (2 * (x * x + 1) * inner + 8 * x**3) / (x**3 + 1) ** 3


def _p5a_numerator(x, r):
    return 4 * r * ((r - 1) ** 2 + r) + (x - 1) ** 2


def _cf_P5A(x, r, x32):
    return _p5a_numerator(x, r) / (2 * x32 * (r + 1) ** 4)


def _cf_P5N2(x, r, x32):
    s2 = np.sqrt(2 * x + 2)
    num = (r + 1) ** 4 * (x32 + 1) + 4 * s2 * (x + 1) * _p5a_numerator(x, r)
    return num / (8 * (r + 1) ** 4 * x32 * (x + 1) * s2)


def _cf_P5N3(x, r, x32):
    return (7 * (r - 1) ** 2 * (x + 6 * r + 1) + 40 * x) / (12 * x32 * (r + 1) ** 4)


def _cf_P5N1(x, r, x32):
    return (5 * (r - 1) ** 2 * (x + 6 * r + 1) + 32 * x) / (8 * x32 * (r + 1) ** 4)


def _cf_P5G(x, r, x32):
    return 3 * (4 * r * (x + 1) + (x - 1) ** 2) / (4 * x32 * (r + 1) ** 4)


def _cf_P5H(x, r, x32):
    num = (x + 1) * ((x - 1) ** 4 + 16 * x * x) + 4 * r * ((x + 1) ** 4 + 2 * x * (x * x + 6 * x + 1))
    return num / (2 * x32 * (x + 1) ** 3 * (r + 1) ** 4)


def _half_power_poly(coeffs, r):
    """Evaluate sum c_k x^(k/2) by Horner in sqrt(x); coeffs run from the top power down."""
    acc = np.zeros_like(r)
    for c in coeffs:
        acc = acc * r + c
    return acc


_S1 = (2, 2, -27, 75, -123, 198, -123, 75, -27, 2, 2)
_S2 = (1, 4, -6, 0, -12, 0, 14, 92, 102, 92, 14, 0, -12, 0, -6, 4, 1)
_S3 = (1, 4, -6, 4, 1, -12, -45, -36, 30, 144, 99, 48, 99, 144, 30, -36, -45, -12, 1, 4, -6, 4, 1)


def _cf_P5P3(x, r, x32):
    return _half_power_poly(_S1, r) / (4 * x32 * (x32 + 1) ** 3 * (r + 1))


def _cf_P5P2(x, r, x32):
    return _half_power_poly(_S2, r) / (2 * x32 * (x * x + 1) ** 3 * (r + 1) ** 4)


def _cf_P5P1(x, r, x32):
    return _half_power_poly(_S3, r) / (2 * x32 * (x**3 + 1) ** 3 * (r + 1) ** 4)


def _cf_SP4(x, r, x32):
    q = np.sqrt(2 * x * x + 2) ** 3
    return 2 * (r * (r + 1) ** 4 + 3 * q) / (r * (r + 1) ** 4 * q)


def _cf_AP4(x, r, x32):
    return 6 / (r * (r + 1) ** 4)


def _cf_SA(x, r, x32):
    return 1 / ((x * x + 1) * np.sqrt(2 * x * x + 2))


def _cf_SN2(x, r, x32):
    s22, s2 = np.sqrt(2 * x * x + 2), np.sqrt(2 * x + 2)
    num = s22 * (x32 + 1) * (x * x + 1) + 8 * x32 * (x + 1) * s2
    return num / (8 * x32 * (x * x + 1) * (x + 1) * s22 * s2)


def _cf_SN1(x, r, x32):
    s22 = np.sqrt(2 * x * x + 2)
    return (8 * x32 + (x * x + 1) * s22) / (8 * x32 * (x * x + 1) * s22)


def _cf_AN2(x, r, x32):
    return (x32 + 1) / (8 * x32 * (x + 1) * np.sqrt(2 * x + 2))


def _cf_AG(x, r, x32):
    return 1 / (4 * x32)


def _cf_AH(x, r, x32):
    return 4 / (x + 1) ** 3


def _cf_N2N1(x, r, x32):
    s2 = np.sqrt(2 * x + 2)
    return ((x + 1) * s2 - (x32 + 1)) / (8 * x32 * (x + 1) * s2)


def _cf_SG(x, r, x32):
    s22 = np.sqrt(2 * x * x + 2)
    return (4 * x32 + s22 * (x * x + 1)) / (4 * x32 * s22 * (x * x + 1))


# Order follows the item numbering 1..27.
_CLOSED_FORMS: dict[tuple[str, str], Callable] = {
    ("P6", "S"): _cf_P6S,
    ("P6", "N2"): _cf_P6N2,
    ("P6", "N3"): _cf_P6N3,
    ("P6", "N1"): _cf_P6N1,
    ("P6", "G"): _cf_P6G,
    ("P6", "P4"): _cf_P6P4,
    ("P6", "P2"): _cf_P6P2,
    ("P6", "P1"): _cf_P6P1,
    ("P5", "A"): _cf_P5A,
    ("P5", "N2"): _cf_P5N2,
    ("P5", "N3"): _cf_P5N3,
    ("P5", "N1"): _cf_P5N1,
    ("P5", "G"): _cf_P5G,
    ("P5", "H"): _cf_P5H,
    ("P5", "P3"): _cf_P5P3,
    ("P5", "P2"): _cf_P5P2,
    ("P5", "P1"): _cf_P5P1,
    ("S", "P4"): _cf_SP4,
    ("A", "P4"): _cf_AP4,
    ("S", "A"): _cf_SA,
    ("S", "N2"): _cf_SN2,
    ("S", "N1"): _cf_SN1,
    ("A", "N2"): _cf_AN2,
    ("A", "G"): _cf_AG,
    ("A", "H"): _cf_AH,
    ("N2", "N1"): _cf_N2N1,
    ("S", "G"): _cf_SG,
}

CERTIFIED_PAIRS: tuple[DifferencePair, ...] = tuple(
    DifferencePair(MeanKind(u), MeanKind(l)) for u, l in _CLOSED_FORMS
)


# ---------------------------------------------------------------------------
# evaluation


def _check_x(x) -> float:
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise InputError(f"x must be a real number, got {x!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise InputError(f"x must be positive and finite, got {x!r}")
    return value


# Consecutive links of the joint chain; A branches to P5 and S, which rejoin at P6.
_TRUNK = ("P1", "P2", "P3", "H", "P4", "G", "N1", "N3", "N2", "A")


def _link(lo: str, hi: str, a, b):
    """``hi(a, b) - lo(a, b)`` for one link of the chain, as a product of nonnegative factors."""
    d = a - b
    u, v = np.sqrt(a), np.sqrt(b)
    g, w, s = u * v, u + v, a + b
    e2 = (d / w) ** 2  # (sqrt a - sqrt b)^2
    cube = a * u + b * v  # u^3 + v^3
    key = (lo, hi)
    if key == ("P1", "P2"):
        return (a * b * d) ** 2 / ((a * a + b * b) * (a**3 + b**3))
    if key == ("P2", "P3"):
        return a * b * g * w * e2 / (cube * (a * a + b * b))
    if key == ("P3", "H"):
        return a * b * w * e2 / (s * cube)
    if key == ("H", "P4"):
        return 2.0 * a * b * e2 / (w * w * s)
    if key == ("P4", "G"):
        return g * e2 / (w * w)
    if key == ("G", "N1"):
        return e2 / 4.0
    if key == ("N1", "N3"):
        return e2 / 12.0
    q, m = np.sqrt(s / 2.0), w / 2.0
    if key == ("N3", "N2"):
        return e2 * (w - q) / (12.0 * (q + m))
    if key == ("N2", "A"):
        return q * e2 / (4.0 * (q + m))
    if key == ("A", "P5"):
        return s * e2 / (2.0 * w * w)
    if key == ("A", "S"):
        return d * d / (2.0 * (2.0 * _rms(a, b) + s))
    if key == ("P5", "P6"):
        return 2.0 * g * e2 * (s + g) / (s * w * w)
    if key == ("S", "P6"):
        r = _rms(a, b)
        return d * d * r / (s * (2.0 * r + s))
    raise UnsupportedPairError(f"no chain link {lo} -> {hi}")


def _rms(a, b):
    return np.sqrt((a * a + b * b) / 2.0)


def _path(lo: str, hi: str) -> list[tuple[str, str]]:
    nodes: list[str]
    if hi in _TRUNK:
        nodes = list(_TRUNK[_TRUNK.index(lo) : _TRUNK.index(hi) + 1])
    elif hi in ("P5", "S"):
        nodes = [*_TRUNK[_TRUNK.index(lo) :], hi]
    elif lo in ("P5", "S"):
        nodes = [lo, hi]
    else:
        nodes = [*_TRUNK[_TRUNK.index(lo) :], "P5", hi]
    return list(zip(nodes, nodes[1:]))


def difference_array(pair: DifferencePair, a, b):
    """Vectorised ``t(a, b) - p(a, b)`` with full relative accuracy.

    Named pairs are summed link by link along the chain; every link is a
    product of nonnegative factors built from ``a - b``, so the sum never
    cancels, neither near ``a = b`` nor in the tails.  Parametric kinds are
    measured from the arithmetic mean instead.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (pair.upper.is_named and pair.lower.is_named):
        return _m.arithmetic_gap_array(pair.upper, a, b) - _m.arithmetic_gap_array(pair.lower, a, b)
    total = np.zeros(np.broadcast(a, b).shape)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo, hi in _path(pair.lower.tag, pair.upper.tag):
            total = total + _link(lo, hi, a, b)
    return total


def difference(pair: DifferencePair, p: PositivePair | tuple[float, float]) -> float:
    """``D_tp(a, b)``; exactly zero when ``a == b``.

    >>> difference(DifferencePair(MeanKind("A"), MeanKind("G")), (1, 4))
    0.5
    """
    pp = PositivePair.coerce(p)
    return float(difference_array(pair, pp.a, pp.b))


def generator_difference(pair: DifferencePair, x):
    """``g_tp(x) = f_t(x) - f_p(x)``; accepts a scalar or an array."""
    if np.ndim(x) == 0:
        return float(difference_array(pair, _check_x(x), 1.0))
    return difference_array(pair, np.asarray(x, dtype=float), 1.0)


def second_derivative_closed(pair: DifferencePair, x):
    """Tabulated ``g_tp''(x)`` for one of the 27 certified pairs."""
    form = _CLOSED_FORMS.get(pair.key)
    if form is None:
        raise UnsupportedPairError(f"no closed-form certificate for {pair.label}")
    scalar = np.ndim(x) == 0
    xs = np.asarray(_check_x(x) if scalar else x, dtype=float)
    if not scalar and (not np.all(np.isfinite(xs)) or np.any(xs <= 0)):
        raise InputError("x must be positive and finite")
    r = np.sqrt(xs)
    out = form(xs, r, xs * r)
    return float(out) if scalar else out


def second_derivative(pair: DifferencePair, x):
    """``g_tp''(x)`` from the certificate table, else from the two generators' closed forms."""
    if pair.has_certificate:
        return second_derivative_closed(pair, x)
    upper = _m.generator_second_derivative(pair.upper, x)
    lower = _m.generator_second_derivative(pair.lower, x)
    return upper - lower


# ---------------------------------------------------------------------------
# finite-difference oracle, evaluated in 50-digit decimal arithmetic

_FD_DIGITS = 50


def _dec_pow(x: Decimal, e: float) -> Decimal:
    e_dec = Decimal(e)
    if e_dec == e_dec.to_integral_value():
        return x ** int(e_dec)
    return x**e_dec


def _generator_decimal(kind: MeanKind, x: Decimal) -> Decimal:
    one, two = Decimal(1), Decimal(2)
    rx = x.sqrt()
    tag = kind.tag
    if tag == "P1":
        return x * (x * x + 1) / (x**3 + 1)
    if tag == "P2":
        return x * (x + 1) / (x * x + 1)
    if tag == "P3":
        return x * (rx + 1) / (x * rx + 1)
    if tag == "H":
        return two * x / (one + x)
    if tag == "P4":
        return 4 * x / (rx + 1) ** 2
    if tag == "G":
        return rx
    if tag == "N1":
        return ((rx + 1) / two) ** 2
    if tag == "N3":
        return (x + rx + 1) / 3
    if tag == "N2":
        return (rx + 1) / two * ((x + 1) / two).sqrt()
    if tag == "A":
        return (x + 1) / two
    if tag == "P5":
        return ((x + 1) / (rx + 1)) ** 2
    if tag == "S":
        return ((x * x + 1) / two).sqrt()
    if tag == "P6":
        return (x * x + 1) / (x + 1)
    r, s = kind.gini_params()
    if abs(r - s) < _m.DIAGONAL_TOL:
        if abs(r) < _m.DIAGONAL_TOL:
            return rx
        xq = _dec_pow(x, 0.5 * (r + s))
        return (xq * x.ln() / (xq + 1)).exp()
    ratio = (_dec_pow(x, r) + 1) / (_dec_pow(x, s) + 1)
    return _dec_pow(ratio, 1.0 / (r - s)) if (1.0 / (r - s)) != 0.5 else ratio.sqrt()


def second_derivative_fd(pair: DifferencePair, x: float, h: float | None = None) -> float:
    """Central second difference ``(g(x+h) - 2g(x) + g(x-h)) / h^2``.

    Truncation error is ``O(h^2)``; the three samples are taken in 50-digit
    decimal arithmetic so rounding does not swamp the quotient.  The default
    step is ``h = 1e-4 * x`` and it must satisfy ``0 < h < x/2``.
    """
    x = _check_x(x)
    if h is None:
        h = 1e-4 * x
    h = float(h)
    if not (0.0 < h < x / 2.0):
        raise InputError(f"step h must satisfy 0 < h < x/2, got h={h!r} at x={x!r}")
    with localcontext() as ctx:
        ctx.prec = _FD_DIGITS
        xd, hd = Decimal(x), Decimal(h)

        def g(v: Decimal) -> Decimal:
            return _generator_decimal(pair.upper, v) - _generator_decimal(pair.lower, v)

        value = (g(xd + hd) - 2 * g(xd) + g(xd - hd)) / (hd * hd)
    return float(value)


# ---------------------------------------------------------------------------


def phi_transform(f: Callable[[float], float] | DifferencePair, p: PositivePair | tuple[float, float]) -> float:
    """Homogeneous lift ``a * f(b / a)`` of a convex ``f`` with ``f(1) = 0``.

    ``f`` may be any callable or a :class:`DifferencePair`, in which case its
    generator difference is used.
    """
    pp = PositivePair.coerce(p)
    func = (lambda v: generator_difference(f, v)) if isinstance(f, DifferencePair) else f
    return pp.a * float(func(pp.b / pp.a))


@dataclass(frozen=True)
class VkKind:
    index: int

    def __post_init__(self) -> None:
        if isinstance(self.index, bool) or not isinstance(self.index, (int, np.integer)) or not 1 <= self.index <= 4:
            raise InputError(f"V_k index must be 1, 2, 3 or 4, got {self.index!r}")


def _vk_array(k: int, a, b):
    d = a - b
    sa, sb = np.sqrt(a), np.sqrt(b)
    e2 = (d / (sa + sb)) ** 2  # (sqrt a - sqrt b)^2
    s = a + b
    if k == 1:
        return s * s * d**4 / ((a**3 + b**3) * (a * a + b * b))
    if k == 2:
        return b * e2 / s
    if k == 3:
        return sa * sb * e2 * e2 / (s * (sa + sb) ** 2)
    return e2 * e2 * (e2 + sa * sb) / (12 * s * b)


def vk_measure(k: VkKind | int, p: PositivePair | tuple[float, float]) -> float:
    """``b * f_k(a / b)`` for the four auxiliary measures ``V_1 .. V_4``.

    >>> vk_measure(2, (4, 1))
    0.2
    """
    kind = k if isinstance(k, VkKind) else VkKind(k)
    pp = PositivePair.coerce(p)
    return float(_vk_array(kind.index, pp.a, pp.b))
