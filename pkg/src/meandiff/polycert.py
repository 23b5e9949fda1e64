"""Exact positivity certificates for polynomials on the positive axis.

Expressions in ``sqrt(x)`` become ordinary polynomials after ``x = t^2``.
Positivity on ``t > 0`` is then decided by counting real roots with Sturm
sequences over the rationals, after a square-free split (Yun's algorithm)
that also recovers multiplicities.  No floating point enters until the
isolating intervals are reported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InputError, ParseError

__all__ = [
    "HalfPowerPoly",
    "Polynomial",
    "RootInterval",
    "PositivityCertificate",
    "STRICT",
    "ZEROS_AT_ONE",
    "INDEFINITE",
    "substitute_t_squared",
    "real_roots",
    "certify_positive",
    "square_difference_gate",
    "parse_polynomial",
    "builtin_polynomial",
    "BUILTIN_NAMES",
]

STRICT = "strictly-positive-on-positive-axis"
ZEROS_AT_ONE = "nonnegative-with-zeros-only-at-one"
INDEFINITE = "indefinite"

ROOT_WIDTH = Fraction(1, 10**9)


class Polynomial:
    """Univariate polynomial with exact rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def from_descending(cls, coeffs: Iterable) -> "Polynomial":
        return cls(list(coeffs)[::-1])

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "Polynomial":
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, t):
        acc = Fraction(0) if isinstance(t, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + (c if isinstance(acc, Fraction) else float(c))
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial([other])
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return Polynomial(c * other for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial([1])
        for _ in range(n):
            out = out * self
        return out

    def __divmod__(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.leading
        for k in range(len(quot) - 1, -1, -1):
            q = rem[k + other.degree] / lead
            quot[k] = q
            if q:
                for j, c in enumerate(other.coeffs):
                    rem[k + j] -= q * c
        return Polynomial(quot), Polynomial(rem[: other.degree] if other.degree > 0 else [])

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return divmod(self, other)[1]

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return divmod(self, other)[0]

    def derivative(self) -> "Polynomial":
        return Polynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def monic(self) -> "Polynomial":
        return self * (1 / self.leading) if self.coeffs else self

    def gcd(self, other: "Polynomial") -> "Polynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def __repr__(self) -> str:
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            mag = abs(c)
            body = str(mag) if (mag != 1 or not mono) else ""
            body = f"{body}*{mono}" if body and mono else body or mono
            terms.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


@dataclass(frozen=True)
class HalfPowerPoly:
    """Finite sum ``sum c_e x^e`` with ``e`` a nonnegative multiple of 1/2."""

    terms: Mapping[Fraction, Fraction]

    def __post_init__(self) -> None:
        clean: dict[Fraction, Fraction] = {}
        for e, c in dict(self.terms).items():
            e, c = Fraction(e), Fraction(c)
            if e < 0 or (2 * e).denominator != 1:
                raise InputError(f"exponent {e} is not a nonnegative multiple of 1/2")
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
        object.__setattr__(self, "terms", {e: c for e, c in sorted(clean.items()) if c})

    @classmethod
    def from_descending(cls, coeffs: Iterable, step=Fraction(1, 2)) -> "HalfPowerPoly":
        cs = list(coeffs)
        top = (len(cs) - 1) * Fraction(step)
        return cls({top - i * Fraction(step): c for i, c in enumerate(cs)})

    @classmethod
    def of_t(cls, p: Polynomial) -> "HalfPowerPoly":
        return cls({Fraction(k, 2): c for k, c in enumerate(p.coeffs)})

    @property
    def max_exponent(self) -> Fraction:
        return max(self.terms, default=Fraction(0))

    def __call__(self, x: float) -> float:
        return sum(float(c) * x ** float(e) for e, c in self.terms.items())

    def __mul__(self, other: "HalfPowerPoly") -> "HalfPowerPoly":
        out: dict[Fraction, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out[e1 + e2] = out.get(e1 + e2, Fraction(0)) + c1 * c2
        return HalfPowerPoly(out)

    def __pow__(self, n: int) -> "HalfPowerPoly":
        out = HalfPowerPoly({0: 1})
        for _ in range(n):
            out = out * self
        return out


def substitute_t_squared(p: HalfPowerPoly) -> Polynomial:
    """Rewrite ``p(x)`` as a polynomial in ``t = sqrt(x)``: exponent ``e`` maps to degree ``2e``."""
    if not isinstance(p, HalfPowerPoly):
        p = HalfPowerPoly(p)
    if not p.terms:
        return Polynomial()
    out = [Fraction(0)] * (int(2 * p.max_exponent) + 1)
    for e, c in p.terms.items():
        if (2 * e).denominator != 1:
            raise InputError(f"exponent {e} is not a multiple of 1/2")
        out[int(2 * e)] = c
    return Polynomial(out)


# ---------------------------------------------------------------------------
# real roots


@dataclass(frozen=True)
class RootInterval:
    lo: Fraction
    hi: Fraction
    multiplicity: int

    @property
    def midpoint(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi

    def to_dict(self) -> dict:
        return {"lo": float(self.lo), "hi": float(self.hi), "approx": self.midpoint, "multiplicity": self.multiplicity}


def _square_free_parts(p: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun's algorithm: ``p = c * prod a_i^i`` with each ``a_i`` square-free and coprime."""
    out = []
    dp = p.derivative()
    a = p.gcd(dp)
    b = p // a
    d = dp // a - b.derivative()
    i = 1
    while b.degree > 0:
        ai = b.gcd(d)
        if ai.degree > 0:
            out.append((ai, i))
        b = b // ai
        d = d // ai - b.derivative()
        i += 1
    return out


def _sturm_chain(p: Polynomial) -> list[Polynomial]:
    chain = [p, p.derivative()]
    while chain[-1].degree > 0:
        r = -(chain[-2] % chain[-1])
        if r.is_zero():
            break
        chain.append(r)
    return chain


def _variations(chain: list[Polynomial], t: Fraction) -> int:
    signs = [v for v in (q(t) for q in chain) if v != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if (u < 0) != (v < 0))


def _cauchy_bound(p: Polynomial) -> Fraction:
    lead = abs(p.leading)
    return 1 + max((abs(c) / lead for c in p.coeffs[:-1]), default=Fraction(0))


def _isolate(chain, lo: Fraction, hi: Fraction, multiplicity: int, out: list) -> None:
    """Roots of the square-free ``chain[0]`` in ``(lo, hi]``."""
    n = _variations(chain, lo) - _variations(chain, hi)
    if n == 0:
        return
    p = chain[0]
    if n == 1:
        if p(hi) == 0:
            out.append(RootInterval(hi, hi, multiplicity))
            return
        while hi - lo > ROOT_WIDTH:
            mid = (lo + hi) / 2
            if p(mid) == 0:
                lo = hi = mid
                break
            if _variations(chain, lo) - _variations(chain, mid) == 1:
                hi = mid
            else:
                lo = mid
        out.append(RootInterval(lo, hi, multiplicity))
        return
    mid = (lo + hi) / 2
    _isolate(chain, lo, mid, multiplicity, out)
    _isolate(chain, mid, hi, multiplicity, out)


def real_roots(p: Polynomial) -> list[RootInterval]:
    """Isolate every real root in a rational interval of width at most ``1e-9``.

    Positive and nonpositive roots are isolated separately, so no interval
    straddles zero.
    """
    if not isinstance(p, Polynomial):
        raise InputError("real_roots expects a Polynomial")
    if p.is_zero():
        raise InputError("the zero polynomial has no isolated roots")
    roots: list[RootInterval] = []
    for factor, mult in _square_free_parts(p):
        chain = _sturm_chain(factor)
        bound = _cauchy_bound(factor)
        _isolate(chain, -bound, Fraction(0), mult, roots)
        _isolate(chain, Fraction(0), bound, mult, roots)
    return sorted(roots, key=lambda r: r.lo)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class PositivityCertificate:
    polynomial: Polynomial
    roots: tuple[RootInterval, ...]
    value_at_one: Fraction
    verdict: str

    @property
    def positive_roots(self) -> tuple[RootInterval, ...]:
        return tuple(r for r in self.roots if r.lo > 0 or (r.lo == 0 and r.hi > 0))

    @property
    def real_root_count(self) -> int:
        return len(self.roots)

    def to_dict(self) -> dict:
        return {
            "degree": self.polynomial.degree,
            "coefficients": [str(c) for c in self.polynomial.coeffs],
            "value_at_one": str(self.value_at_one),
            "real_roots": [r.to_dict() for r in self.roots],
            "positive_roots": len(self.positive_roots),
            "verdict": self.verdict,
        }


def certify_positive(p: Polynomial) -> PositivityCertificate:
    """Classify ``p`` on ``t > 0``.

    Strict positivity needs no positive root and ``p(1) > 0``.  The weaker
    verdict allows a single positive root, located exactly at ``t = 1``, of
    even multiplicity, with ``p(2) > 0``.  Anything else is indefinite.
    """
    roots = tuple(real_roots(p))
    at_one = p(Fraction(1))
    positive = [r for r in roots if r.hi > 0]
    if not positive and at_one > 0:
        verdict = STRICT
    elif (
        len(positive) == 1
        and at_one == 0
        and positive[0].contains(1)
        and positive[0].multiplicity % 2 == 0
        and p(Fraction(2)) > 0
    ):
        verdict = ZEROS_AT_ONE
    else:
        verdict = INDEFINITE
    return PositivityCertificate(p, roots, at_one, verdict)


def square_difference_gate(a_value: float, b_value: float, squared_difference_sign: int | None = None) -> str:
    """Order two positive numbers through the sign of ``a^2 - b^2``.

    Returns ``">"``, ``"<"`` or ``"="``.  When ``squared_difference_sign`` is
    given it is trusted (that is the point of the reduction); otherwise the
    sign is computed.
    """
    for name, v in (("a", a_value), ("b", b_value)):
        if not v > 0:
            raise InputError(f"{name} must be positive, got {v!r}")
    if squared_difference_sign is None:
        diff = a_value * a_value - b_value * b_value
        squared_difference_sign = (diff > 0) - (diff < 0)
    if squared_difference_sign > 0:
        return ">"
    if squared_difference_sign < 0:
        return "<"
    return "="


# ---------------------------------------------------------------------------
# literal parser

_TERM = re.compile(
    r"""^(?P<coef>\d+(?:/\d+)?|\d*\.\d+(?:[eE][-+]?\d+)?|\d+\.\d*(?:[eE][-+]?\d+)?)?
        \s*\*?\s*
        (?:(?P<var>[tx])
           (?:\s*(?:\^|\*\*)\s*(?P<exp>\d+|\(\s*\d+\s*/\s*\d+\s*\)|\d+/\d+))?)?$""",
    re.VERBOSE,
)


def parse_polynomial(text: str) -> Polynomial:
    """Parse ``"c0 + c1*t + c2*t^2 ..."`` or the half-power form with ``x^(k/2)``.

    Coefficients are integers, decimals or ``p/q`` rationals.  An expression
    in ``x`` is substituted ``x = t^2`` before it is returned.
    """
    src = text.strip()
    if not src:
        raise ParseError("empty polynomial")
    pieces = re.split(r"(?<![eE\^*(/])\s*([+-])\s*", src)
    if pieces[0] == "":
        pieces = pieces[1:]
    else:
        pieces = ["+"] + pieces
    if len(pieces) % 2:
        raise ParseError(f"dangling operator in {text!r}")
    terms: dict[Fraction, Fraction] = {}
    var_seen: set[str] = set()
    for sign, body in zip(pieces[::2], pieces[1::2]):
        m = _TERM.match(body.strip())
        if not m or not (m.group("coef") or m.group("var")):
            raise ParseError(f"cannot read term {body!r} in {text!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if sign == "-":
            coef = -coef
        var = m.group("var")
        if var is None:
            exp = Fraction(0)
        else:
            var_seen.add(var)
            raw = (m.group("exp") or "1").strip("() ").replace(" ", "")
            exp = Fraction(raw)
        if var == "t":
            if exp.denominator != 1:
                raise ParseError(f"t exponents must be integers in {text!r}")
            exp = exp / 2  # store in x-exponents, t = sqrt(x)
        elif var == "x" and (2 * exp).denominator != 1:
            raise ParseError(f"x exponents must be multiples of 1/2 in {text!r}")
        terms[exp] = terms.get(exp, Fraction(0)) + coef
    if len(var_seen) > 1:
        raise ParseError(f"mixes t and x in {text!r}")
    return substitute_t_squared(HalfPowerPoly(terms))


# ---------------------------------------------------------------------------
# built-in polynomials


def _hp(*coeffs_desc, step=Fraction(1, 2)) -> HalfPowerPoly:
    return HalfPowerPoly.from_descending(coeffs_desc, step)


_SQRT_X_MINUS_1 = _hp(1, -1)
_X_MINUS_1 = _hp(1, -1, step=1)
_SQRT_X_PLUS_1 = _hp(1, 1)

_S1 = _hp(2, 2, -27, 75, -123, 198, -123, 75, -27, 2, 2)
_S2 = _hp(1, 4, -6, 0, -12, 0, 14, 92, 102, 92, 14, 0, -12, 0, -6, 4, 1)
_S3 = _hp(1, 4, -6, 4, 1, -12, -45, -36, 30, 144, 99, 48, 99, 144, 30, -36, -45, -12, 1, 4, -6, 4, 1)


def _part10_factor() -> HalfPowerPoly:
    rest = HalfPowerPoly({3: 4, Fraction(5, 2): 20, 2: 78, Fraction(3, 2): 20, 1: 4})
    return _sum(HalfPowerPoly({3: 1}) * _hp(1, -2) ** 2, rest, _hp(2, -1) ** 2)


def _sum(*polys: HalfPowerPoly) -> HalfPowerPoly:
    out: dict[Fraction, Fraction] = {}
    for p in polys:
        for e, c in p.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
    return HalfPowerPoly(out)


def _scaled(p: HalfPowerPoly, k) -> HalfPowerPoly:
    return HalfPowerPoly({e: c * k for e, c in p.terms.items()})


# Reduced numerators h_i of the numbered parts, as (√x − 1)^(2k) or (x − 1)^(2k)
# times a factor with positive coefficients.
_PART_FACTORS: dict[str, HalfPowerPoly] = {
    "part2": _X_MINUS_1 ** 4 * _hp(2, 4, 3, 4, 2, step=1),
    "part5": _SQRT_X_MINUS_1 ** 4 * _hp(17, 4, 38, 4, 17),
    "part7": _SQRT_X_MINUS_1 ** 6 * _hp(7, 70, 201, 340, 201, 70, 7),
    "part10": _SQRT_X_MINUS_1 ** 4 * _part10_factor(),
    "part11": _scaled(_SQRT_X_MINUS_1 ** 4 * _hp(1, 8, 94, 264, 386, 264, 94, 8, 1), 2),
    "part12": _SQRT_X_MINUS_1 ** 4 * _hp(1, 2, 1, 2, 1),
    "part17": _SQRT_X_MINUS_1 ** 4 * _hp(1, 24, 72, 120, 126, 120, 72, 24, 1),
    "part18": _scaled(_SQRT_X_MINUS_1 ** 4 * _hp(1, 2, 0, 2, 1), 2),
    "part25": _scaled(_SQRT_X_MINUS_1 ** 4 * _hp(7, 22, 32, 22, 7), 2),
    "part26": _SQRT_X_MINUS_1 ** 4 * _hp(1, 1, step=1) * _hp(1, 4, 1),
    "part29": _SQRT_X_MINUS_1 ** 4 * _hp(721, 3116, 4806, 3116, 721),
    "part31": _X_MINUS_1 ** 4,
    "part33": _scaled(_SQRT_X_MINUS_1 ** 4 * _hp(7, 8, 64, 120, 242, 120, 64, 8, 7), 2),
    "part40": _scaled(
        _SQRT_X_MINUS_1 ** 4 * _hp(71, 2316, 4090, 11960, 12021, 11180, 6004, 11180, 12021, 11960, 4090, 2316, 71),
        4,
    ),
    "part41": _SQRT_X_PLUS_1 ** 2 * _SQRT_X_MINUS_1 ** 6,
}

_HALF_POWER: dict[str, HalfPowerPoly] = {"s1": _S1, "s2": _S2, "s3": _S3, **_PART_FACTORS}

BUILTIN_NAMES: tuple[str, ...] = ("s1", "s2", "s3", "h1", "h2", "h3", *_PART_FACTORS)


def builtin_half_power(name: str) -> HalfPowerPoly:
    key = name.removeprefix("builtin:")
    if key in ("h1", "h2", "h3"):
        key = "s" + key[1]
    try:
        return _HALF_POWER[key]
    except KeyError:
        raise KeyError(f"unknown builtin polynomial {name!r}; known: {', '.join(BUILTIN_NAMES)}") from None


def builtin_polynomial(name: str) -> Polynomial:
    """``h1``/``h2``/``h3`` and ``partN`` in ``t``; ``s1``/``s2``/``s3`` map to the same polynomials."""
    return substitute_t_squared(builtin_half_power(name))
