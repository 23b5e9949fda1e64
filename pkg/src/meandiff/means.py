"""Bivariate means: the Gini two-parameter family and its named members.

Every mean here is symmetric and positively homogeneous of degree one, so
``M(a, b) = b * f_M(a / b)`` where ``f_M`` is the normalised *generator*.
The named constants follow the chain

    P1 <= P2 <= P3 <= H <= P4 <= G <= N1 <= N3 <= N2 <= A <= (P5 or S) <= P6

with P5 and S incomparable.

Scalar entry points (:func:`gini_mean`, :func:`mean_value`, ...) validate
their inputs and return ``float``.  The ``*_array`` helpers accept numpy
arrays and skip validation; the audit engines use those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError, ParseError, UnsupportedPairError

__all__ = [
    "PositivePair",
    "MeanKind",
    "NAMED_KINDS",
    "H", "G", "A", "S", "N1", "N2", "N3", "P1", "P2", "P3", "P4", "P5", "P6",
    "gini_mean",
    "power_mean",
    "lehmer_mean",
    "mean_value",
    "mean_array",
    "generator",
    "generator_array",
    "generator_second_derivative",
    "arithmetic_gap_array",
    "chain_rank",
    "is_below",
]

# |r - s| below this is treated as the diagonal branch of the Gini mean.
DIAGONAL_TOL = 1e-12
# Switch to log-space once max(|r|, |s|) * |ln(a/b)| exceeds this.
LOG_SPACE_THRESHOLD = 500.0


@dataclass(frozen=True)
class PositivePair:
    """An ordered pair of strictly positive, finite reals."""

    a: float
    b: float

    def __post_init__(self) -> None:
        for name in ("a", "b"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InputError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value) or value <= 0.0:
                raise InputError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def coerce(cls, pair: "PositivePair | tuple[float, float]") -> "PositivePair":
        if isinstance(pair, cls):
            return pair
        try:
            a, b = pair
        except (TypeError, ValueError):
            raise InputError(f"expected a pair (a, b), got {pair!r}") from None
        return cls(a, b)

    def swapped(self) -> "PositivePair":
        return PositivePair(self.b, self.a)

    def scaled(self, factor: float) -> "PositivePair":
        return PositivePair(self.a * factor, self.b * factor)


# Gini parameters (r, s) with r >= s of every named mean that has one.
_GINI_FORMS: dict[str, tuple[Fraction, Fraction]] = {
    "P1": (Fraction(-2), Fraction(-3)),
    "P2": (Fraction(-1), Fraction(-2)),
    "P3": (Fraction(-1, 2), Fraction(-3, 2)),
    "H": (Fraction(0), Fraction(-1)),
    "P4": (Fraction(0), Fraction(-1, 2)),
    "G": (Fraction(0), Fraction(0)),
    "N1": (Fraction(1, 2), Fraction(0)),
    "A": (Fraction(1), Fraction(0)),
    "P5": (Fraction(1), Fraction(1, 2)),
    "S": (Fraction(2), Fraction(0)),
    "P6": (Fraction(2), Fraction(1)),
}

_RANK = {
    "P1": 0, "P2": 1, "P3": 2, "H": 3, "P4": 4, "G": 5, "N1": 6,
    "N3": 7, "N2": 8, "A": 9, "P5": 10, "S": 10, "P6": 11,
}

_PARAMETRIC = ("gini", "power", "lehmer")


@dataclass(frozen=True)
class MeanKind:
    """Names one bivariate mean.

    ``tag`` is either a named constant (``"A"``, ``"P5"``, ...) or one of the
    parametric families ``"gini"``, ``"power"``, ``"lehmer"`` with ``params``
    holding the exponents.
    """

    tag: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.tag in _PARAMETRIC:
            want = 2 if self.tag == "gini" else 1
            if len(self.params) != want:
                raise InputError(f"{self.tag} mean takes {want} parameter(s), got {self.params!r}")
            params = tuple(float(p) for p in self.params)
            if not all(math.isfinite(p) for p in params):
                raise InputError(f"mean parameters must be finite, got {self.params!r}")
            object.__setattr__(self, "params", params)
        elif self.tag in _RANK:
            if self.params:
                raise InputError(f"named mean {self.tag} takes no parameters")
        else:
            raise InputError(f"unknown mean {self.tag!r}")

    @classmethod
    def gini(cls, r: float, s: float) -> "MeanKind":
        return cls("gini", (r, s))

    @classmethod
    def power(cls, r: float) -> "MeanKind":
        return cls("power", (r,))

    @classmethod
    def lehmer(cls, r: float) -> "MeanKind":
        return cls("lehmer", (r,))

    @classmethod
    def parse(cls, text: str) -> "MeanKind":
        """Parse ``"A"``, ``"gini:0.5:1"``, ``"power:2"``, ``"lehmer:-1"`` and friends.

        Exponents may be written as decimals or ``p/q`` fractions.
        """
        raw = text.strip()
        head, *rest = raw.split(":")
        name = head.strip()
        if not rest:
            upper = name.upper()
            if upper in _RANK:
                return cls(upper)
            raise ParseError(f"unknown mean {text!r}")
        family = name.lower()
        if family not in _PARAMETRIC:
            raise ParseError(f"unknown mean family {name!r} in {text!r}")
        try:
            params = tuple(float(Fraction(p.strip())) for p in rest)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad exponent in {text!r}") from None
        try:
            return cls(family, params)
        except InputError as exc:
            raise ParseError(str(exc)) from None

    @property
    def is_named(self) -> bool:
        return self.tag in _RANK

    @property
    def label(self) -> str:
        if self.is_named:
            return self.tag
        return ":".join([self.tag, *(_fmt_param(p) for p in self.params)])

    def gini_params(self) -> tuple[float, float] | None:
        """Return ``(r, s)`` with ``r >= s`` or ``None`` for N2 and N3."""
        if self.tag == "gini":
            r, s = self.params
        elif self.tag == "power":
            r, s = self.params[0], 0.0
        elif self.tag == "lehmer":
            r, s = self.params[0], self.params[0] - 1.0
        elif self.tag in _GINI_FORMS:
            r, s = (float(v) for v in _GINI_FORMS[self.tag])
        else:
            return None
        return (r, s) if r >= s else (s, r)

    def canonical(self) -> "MeanKind":
        """Map a parametric kind onto the named constant it coincides with, if any."""
        if self.is_named:
            return self
        r, s = self.gini_params()
        if abs(r + s) < DIAGONAL_TOL:
            return MeanKind("G")  # E_{r,-r} is the geometric mean for every r
        for name, (gr, gs) in _GINI_FORMS.items():
            if abs(r - float(gr)) < DIAGONAL_TOL and abs(s - float(gs)) < DIAGONAL_TOL:
                return MeanKind(name)
        return self

    def __str__(self) -> str:
        return self.label


def _fmt_param(p: float) -> str:
    frac = Fraction(p).limit_denominator(1000)
    if float(frac) == p:
        return str(frac)
    return repr(p)


H = MeanKind("H")
G = MeanKind("G")
A = MeanKind("A")
S = MeanKind("S")
N1 = MeanKind("N1")
N2 = MeanKind("N2")
N3 = MeanKind("N3")
P1 = MeanKind("P1")
P2 = MeanKind("P2")
P3 = MeanKind("P3")
P4 = MeanKind("P4")
P5 = MeanKind("P5")
P6 = MeanKind("P6")

NAMED_KINDS = (P1, P2, P3, H, P4, G, N1, N3, N2, A, P5, S, P6)


def chain_rank(kind: MeanKind) -> int | None:
    return _RANK.get(kind.canonical().tag)


def is_below(lower: MeanKind, upper: MeanKind) -> bool:
    """True when ``lower <= upper`` holds for every positive pair and the two differ.

    Named means use the chain order (P5 and S are incomparable).  Other
    Gini means are compared through the monotonicity of ``E_{r,s}`` in
    each parameter.
    """
    lo, up = lower.canonical(), upper.canonical()
    if lo == up:
        return False
    if lo.is_named and up.is_named:
        return _RANK[lo.tag] < _RANK[up.tag]
    lo_rs, up_rs = lo.gini_params(), up.gini_params()
    if lo_rs is None or up_rs is None:
        return False
    return lo_rs[0] <= up_rs[0] and lo_rs[1] <= up_rs[1]


# ---------------------------------------------------------------------------
# parametric families


def _check_exponent(*values: float) -> None:
    for v in values:
        if not isinstance(v, (int, float, Fraction)) or not math.isfinite(float(v)):
            raise InputError(f"exponent must be a finite real, got {v!r}")


def _gini_array(r: float, s: float, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    la, lb = np.log(a), np.log(b)
    if abs(r - s) < DIAGONAL_TOL:
        if abs(r) < DIAGONAL_TOL and abs(s) < DIAGONAL_TOL:
            return np.sqrt(a) * np.sqrt(b)
        q = 0.5 * (r + s)
        # weights a^q / (a^q + b^q) computed as a logistic to stay finite
        wa = 0.5 * (1.0 + np.tanh(0.5 * q * (la - lb)))
        return np.exp(wa * la + (1.0 - wa) * lb)
    with np.errstate(over="ignore", invalid="ignore"):
        x = a / b
        direct = b * ((x**r + 1.0) / (x**s + 1.0)) ** (1.0 / (r - s))
    logged = np.exp((np.logaddexp(r * la, r * lb) - np.logaddexp(s * la, s * lb)) / (r - s))
    big = max(abs(r), abs(s)) * np.abs(la - lb) > LOG_SPACE_THRESHOLD
    # near the diagonal the ratio is 1 + O(r - s); expand it with expm1/log1p
    d, lx = r - s, la - lb
    near = np.abs(d * lx) <= 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        wx = 0.5 * (1.0 + np.tanh(0.5 * s * lx))
        close = b * np.exp(np.log1p(wx * np.expm1(np.where(near, d * lx, 0.0))) / d)
    return np.where(near, close, np.where(big, logged, direct))


def _power_array(r: float, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if abs(r) < DIAGONAL_TOL:
        return np.sqrt(a) * np.sqrt(b)
    la, lb = np.log(a), np.log(b)
    with np.errstate(over="ignore", invalid="ignore"):
        x = a / b
        direct = b * ((x**r + 1.0) / 2.0) ** (1.0 / r)
    logged = np.exp((np.logaddexp(r * la, r * lb) - math.log(2.0)) / r)
    big = abs(r) * np.abs(la - lb) > LOG_SPACE_THRESHOLD
    lx = la - lb
    near = np.abs(r * lx) <= 1.0
    close = b * np.exp(np.log1p(0.5 * np.expm1(np.where(near, r * lx, 0.0))) / r)
    return np.where(near, close, np.where(big, logged, direct))


def _lehmer_array(r: float, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    la, lb = np.log(a), np.log(b)
    with np.errstate(over="ignore", invalid="ignore"):
        x = a / b
        direct = b * (x**r + 1.0) / (x ** (r - 1.0) + 1.0)
    logged = np.exp(np.logaddexp(r * la, r * lb) - np.logaddexp((r - 1) * la, (r - 1) * lb))
    big = max(abs(r), abs(r - 1.0)) * np.abs(la - lb) > LOG_SPACE_THRESHOLD
    return np.where(big, logged, direct)


def gini_mean(r: float, s: float, pair: PositivePair | tuple[float, float]) -> float:
    """Gini mean of order ``r`` and ``s``.

    >>> gini_mean(0, 0, (4, 9))
    6.0
    >>> round(gini_mean(2, 1, (1, 2)), 12)
    1.666666666667
    """
    _check_exponent(r, s)
    p = PositivePair.coerce(pair)
    return float(_gini_array(float(r), float(s), p.a, p.b))


def power_mean(r: float, pair: PositivePair | tuple[float, float]) -> float:
    """Power mean ``((a^r + b^r)/2)^(1/r)``, geometric at ``r = 0``."""
    _check_exponent(r)
    p = PositivePair.coerce(pair)
    return float(_power_array(float(r), p.a, p.b))


def lehmer_mean(r: float, pair: PositivePair | tuple[float, float]) -> float:
    """Lehmer mean ``(a^r + b^r) / (a^(r-1) + b^(r-1))``."""
    _check_exponent(r)
    p = PositivePair.coerce(pair)
    return float(_lehmer_array(float(r), p.a, p.b))


# ---------------------------------------------------------------------------
# named means, evaluated on (a, b) scaled into (0, 1]


def _named_unit(tag: str, u, v):
    su, sv = np.sqrt(u), np.sqrt(v)
    if tag == "A":
        return (u + v) / 2.0
    if tag == "G":
        return su * sv
    if tag == "H":
        return 2.0 * u * v / (u + v)
    if tag == "S":
        return np.sqrt((u * u + v * v) / 2.0)
    if tag == "N1":
        return ((su + sv) / 2.0) ** 2
    if tag == "N2":
        return (su + sv) / 2.0 * np.sqrt((u + v) / 2.0)
    if tag == "N3":
        return (u + su * sv + v) / 3.0
    if tag == "P1":
        return u * v * (u * u + v * v) / (u**3 + v**3)
    if tag == "P2":
        return u * v * (u + v) / (u * u + v * v)
    if tag == "P3":
        return u * v * (su + sv) / (u * su + v * sv)
    if tag == "P4":
        return 4.0 * u * v / (su + sv) ** 2
    if tag == "P5":
        return ((u + v) / (su + sv)) ** 2
    if tag == "P6":
        return (u * u + v * v) / (u + v)
    raise InputError(f"unknown named mean {tag!r}")


def mean_array(kind: MeanKind, a, b):
    """Vectorised :func:`mean_value` without input validation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if kind.tag == "gini":
        return _gini_array(*kind.params, a, b)
    if kind.tag == "power":
        return _power_array(kind.params[0], a, b)
    if kind.tag == "lehmer":
        return _lehmer_array(kind.params[0], a, b)
    if kind.tag == "G":
        return np.sqrt(a) * np.sqrt(b)
    m = np.maximum(a, b)
    return m * _named_unit(kind.tag, a / m, b / m)


def mean_value(kind: MeanKind, pair: PositivePair | tuple[float, float]) -> float:
    """Evaluate any mean on a validated pair.

    >>> mean_value(N3, (1, 4))
    2.3333333333333335
    """
    p = PositivePair.coerce(pair)
    return float(mean_array(kind, p.a, p.b))


# ---------------------------------------------------------------------------
# generators f_M(x) = M(x, 1); written out independently of mean_value


def generator_array(kind: MeanKind, x):
    x = np.asarray(x, dtype=float)
    tag = kind.tag
    if tag in _PARAMETRIC:
        r, s = kind.gini_params()
        if abs(r - s) < DIAGONAL_TOL:
            if abs(r) < DIAGONAL_TOL:
                return np.sqrt(x)
            q = 0.5 * (r + s)
            xq = x**q
            return np.exp(xq * np.log(x) / (xq + 1.0))
        return ((x**r + 1.0) / (x**s + 1.0)) ** (1.0 / (r - s))
    rx = np.sqrt(x)
    if tag == "P1":
        return x * (x * x + 1.0) / (x**3 + 1.0)
    if tag == "P2":
        return x * (x + 1.0) / (x * x + 1.0)
    if tag == "P3":
        return x * (rx + 1.0) / (x * rx + 1.0)
    if tag == "H":
        return 2.0 * x / (1.0 + x)
    if tag == "P4":
        return 4.0 * x / (rx + 1.0) ** 2
    if tag == "G":
        return rx
    if tag == "N1":
        return ((rx + 1.0) / 2.0) ** 2
    if tag == "N3":
        return (x + rx + 1.0) / 3.0
    if tag == "N2":
        return (rx + 1.0) / 2.0 * np.sqrt((x + 1.0) / 2.0)
    if tag == "A":
        return (x + 1.0) / 2.0
    if tag == "P5":
        return ((x + 1.0) / (rx + 1.0)) ** 2
    if tag == "S":
        return np.sqrt((x * x + 1.0) / 2.0)
    if tag == "P6":
        return (x * x + 1.0) / (x + 1.0)
    raise InputError(f"unknown mean {kind!r}")


def _check_x(x: float) -> float:
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise InputError(f"x must be a real number, got {x!r}") from None
    if not math.isfinite(x) or x <= 0.0:
        raise InputError(f"x must be positive and finite, got {x!r}")
    return x


def generator(kind: MeanKind, x: float) -> float:
    """Normalised generator ``f_M`` with ``M(a, b) = b * f_M(a / b)``."""
    return float(generator_array(kind, _check_x(x)))


def _second_derivative_array(tag: str, x):
    rx = np.sqrt(x)
    x32 = x * rx
    if tag == "A":
        return np.zeros_like(x)
    if tag == "G":
        return -0.25 / x32
    if tag == "N1":
        return -0.125 / x32
    if tag == "N3":
        return -1.0 / (12.0 * x32)
    if tag == "H":
        return -4.0 / (x + 1.0) ** 3
    if tag == "P6":
        return 4.0 / (x + 1.0) ** 3
    if tag == "N2":
        return -(x32 + 1.0) / (8.0 * x32 * (x + 1.0) * np.sqrt(2.0 * x + 2.0))
    if tag == "S":
        return 1.0 / ((x * x + 1.0) * np.sqrt(2.0 * x * x + 2.0))
    if tag == "P5":
        return (4.0 * rx * ((rx - 1.0) ** 2 + rx) + (x - 1.0) ** 2) / (2.0 * x32 * (rx + 1.0) ** 4)
    if tag == "P4":
        return -6.0 / (rx * (rx + 1.0) ** 4)
    if tag == "P3":
        return 3.0 * (x - 3.0 * rx + 1.0) / (4.0 * rx * (x - rx + 1.0) ** 3)
    if tag == "P2":
        return 2.0 * (x + 1.0) * (x * x - 4.0 * x + 1.0) / (x * x + 1.0) ** 3
    if tag == "P1":
        return 6.0 * x * (x**4 - 2.0 * x**3 - 2.0 * x + 1.0) / (x**3 + 1.0) ** 3
    raise UnsupportedPairError(f"no closed-form second derivative for {tag}")


def generator_second_derivative(kind: MeanKind, x):
    """Closed-form ``f_M''(x)`` for the thirteen named means.

    Parametric kinds that do not coincide with a named mean raise
    :class:`UnsupportedPairError`; use a finite-difference estimate instead.
    """
    canon = kind.canonical()
    if not canon.is_named:
        raise UnsupportedPairError(f"no closed-form second derivative for {kind.label}")
    if np.ndim(x) == 0:
        return float(_second_derivative_array(canon.tag, np.asarray(_check_x(x))))
    return _second_derivative_array(canon.tag, np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# M - A without cancellation near a = b


def arithmetic_gap_array(kind: MeanKind, a, b):
    """Return ``M(a, b) - A(a, b)`` with full relative accuracy as ``a -> b``.

    Each named mean's gap to the arithmetic mean factors through
    ``(a - b)^2`` or ``(sqrt a - sqrt b)^2``; those factors are formed from
    the exactly-rounded ``a - b`` so nothing cancels.  Parametric kinds
    without a named counterpart fall back to plain subtraction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    canon = kind.canonical()
    tag = canon.tag
    if not canon.is_named:
        return mean_array(canon, a, b) - (a + b) / 2.0
    d = a - b
    sa, sb = np.sqrt(a), np.sqrt(b)
    ssum = sa + sb
    e2 = (d / ssum) ** 2  # (sqrt a - sqrt b)^2
    s = a + b
    if tag == "A":
        return np.zeros_like(d)
    if tag == "G":
        return -e2 / 2.0
    if tag == "N1":
        return -e2 / 4.0
    if tag == "N3":
        return -e2 / 6.0
    if tag == "H":
        return -(d * d) / (2.0 * s)
    if tag == "N2":
        q = np.sqrt(s / 2.0)
        return -q * e2 / (4.0 * (q + ssum / 2.0))
    if tag == "P4":
        return -e2 * (s + 4.0 * sa * sb) / (2.0 * ssum * ssum)
    if tag == "P3":
        g = sa * sb
        return -e2 * (s + g) / (2.0 * (s - g))
    if tag == "P2":
        return -s * d * d / (2.0 * (a * a + b * b))
    if tag == "P1":
        return -d * d * (a * a + a * b + b * b) / (2.0 * (a**3 + b**3))
    if tag == "P5":
        return s * e2 / (2.0 * ssum * ssum)
    if tag == "S":
        root_mean_square = np.sqrt((a * a + b * b) / 2.0)
        return d * d / (4.0 * (root_mean_square + s / 2.0))
    if tag == "P6":
        return d * d / (2.0 * s)
    raise InputError(f"unknown mean {kind!r}")
