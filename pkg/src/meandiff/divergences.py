"""Symmetric divergences between discrete distributions.

Every measure here is a coordinate-wise sum ``sum_i b_i f(a_i / b_i)`` of a
convex generator, so each one is evaluated per coordinate in a form that
stays accurate when ``p_i`` and ``q_i`` nearly agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .differences import DifferencePair, difference_array, second_derivative
from .errors import DomainError, InputError, ParseError, RationalizationError
from .inequalities import rationalize
from .means import MeanKind

__all__ = [
    "Distribution",
    "DivergenceKind",
    "JENSEN_SHANNON",
    "J_DIVERGENCE",
    "AG_MEAN",
    "SYM_CHI_SQUARE",
    "TRIANGULAR",
    "HELLINGER",
    "divergence",
    "ChainTerm",
    "Comparison",
    "DivergenceChainReport",
    "verify_divergence_chain",
    "RatioReport",
    "ratio_monotonicity_check",
    "RATIO_CHECKS",
    "random_distribution",
    "MonteCarloReport",
    "monte_carlo_audit",
]

SMOOTH_EPS = 1e-12
CLIP = 1e-9


@dataclass(frozen=True, eq=False)
class Distribution:
    """Strictly positive probability vector.

    Use :meth:`from_values` for raw data; it can renormalise or smooth
    zeros, and records which of those it did.
    """

    probabilities: np.ndarray
    tolerance: float = 1e-9
    smoothed: bool = False
    normalized: bool = False

    def __post_init__(self) -> None:
        p = np.array(self.probabilities, dtype=float).ravel()
        if p.size == 0:
            raise InputError("a distribution needs at least one entry")
        if not np.all(np.isfinite(p)):
            raise InputError("probabilities must be finite")
        if self.tolerance < 0:
            raise InputError("tolerance must be nonnegative")
        if np.any(p <= 0):
            i = int(np.argmin(p))
            raise DomainError(f"probabilities must be strictly positive; entry {i} is {float(p[i])!r}")
        total = float(p.sum())
        if abs(total - 1.0) > self.tolerance:
            raise DomainError(f"probabilities sum to {total!r}, not 1 within {self.tolerance}")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_values(
        cls,
        values: Sequence[float],
        *,
        normalize: bool = False,
        smooth: bool = False,
        tolerance: float = 1e-9,
    ) -> "Distribution":
        p = np.array(values, dtype=float).ravel()
        if p.size == 0:
            raise InputError("a distribution needs at least one entry")
        if not np.all(np.isfinite(p)):
            raise InputError("probabilities must be finite")
        if np.any(p < 0):
            raise DomainError("probabilities must be nonnegative")
        if normalize:
            total = p.sum()
            if total <= 0:
                raise DomainError("cannot normalise a vector with zero sum")
            p = p / total
        if smooth:
            p = (p + SMOOTH_EPS) / (1.0 + p.size * SMOOTH_EPS)
        return cls(p, tolerance, smoothed=smooth, normalized=normalize)

    def __len__(self) -> int:
        return int(self.probabilities.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, Distribution) and np.array_equal(self.probabilities, other.probabilities)

    __hash__ = None


_TAGS = ("I", "J", "T", "Psi", "Delta", "h", "D")


@dataclass(frozen=True)
class DivergenceKind:
    tag: str
    pair: DifferencePair | None = None

    def __post_init__(self) -> None:
        if self.tag not in _TAGS:
            raise InputError(f"unknown divergence {self.tag!r}")
        if (self.tag == "D") != (self.pair is not None):
            raise InputError("a pair is required exactly for mean-difference divergences")

    @classmethod
    def mean_difference(cls, pair: DifferencePair) -> "DivergenceKind":
        return cls("D", pair)

    @property
    def label(self) -> str:
        return self.pair.label if self.tag == "D" else self.tag

    _ALIASES = {
        "i": "I", "js": "I", "jensen-shannon": "I", "jensenshannon": "I",
        "j": "J", "jeffreys": "J", "j-divergence": "J",
        "t": "T", "ag": "T", "ag-mean": "T",
        "psi": "Psi", "chi2": "Psi", "symmetric-chi-square": "Psi",
        "delta": "Delta", "triangular": "Delta",
        "h": "h", "hellinger": "h",
    }

    @classmethod
    def parse(cls, text: str) -> "DivergenceKind":
        """Names such as ``psi``, ``J``, ``hellinger``, or a pair ``D(A,G)``."""
        key = text.strip()
        tag = cls._ALIASES.get(key.lower())
        if tag is not None:
            return cls(tag)
        try:
            return cls.mean_difference(DifferencePair.parse(key))
        except InputError:
            raise ParseError(f"unknown divergence {text!r}") from None


JENSEN_SHANNON = DivergenceKind("I")
J_DIVERGENCE = DivergenceKind("J")
AG_MEAN = DivergenceKind("T")
SYM_CHI_SQUARE = DivergenceKind("Psi")
TRIANGULAR = DivergenceKind("Delta")
HELLINGER = DivergenceKind("h")


def _coordinates(kind: DivergenceKind, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    d = p - q
    s = p + q
    if kind.tag == "I":
        t = d / s
        return 0.25 * s * (np.log1p(-t * t) + 2.0 * t * np.arctanh(t))
    if kind.tag == "J":
        return d * np.log1p(d / q)
    if kind.tag == "T":
        a = 0.5 * s
        g = np.sqrt(p) * np.sqrt(q)
        gap = 0.5 * (d / (np.sqrt(p) + np.sqrt(q))) ** 2
        return a * np.log1p(gap / g)
    if kind.tag == "Psi":
        return d * d * s / (p * q)
    if kind.tag == "Delta":
        return d * d / s
    if kind.tag == "h":
        return 0.5 * (d / (np.sqrt(p) + np.sqrt(q))) ** 2
    return difference_array(kind.pair, p, q)


def _check_pair(P: Distribution, Q: Distribution) -> None:
    if not isinstance(P, Distribution) or not isinstance(Q, Distribution):
        raise InputError("divergences take two Distribution objects")
    if len(P) != len(Q):
        raise InputError(f"length mismatch: {len(P)} vs {len(Q)}")


def divergence(kind: DivergenceKind, P: Distribution, Q: Distribution) -> float:
    """Sum the per-coordinate contributions of ``kind`` over ``(p_i, q_i)``.

    >>> P = Distribution([0.5, 0.5]); Q = Distribution([0.25, 0.75])
    >>> round(divergence(SYM_CHI_SQUARE, P, Q), 12)
    0.583333333333
    """
    _check_pair(P, Q)
    return float(np.sum(_coordinates(kind, P.probabilities, Q.probabilities)))


# ---------------------------------------------------------------------------
# sandwich chain


@dataclass(frozen=True)
class ChainTerm:
    coeff: Fraction
    kind: DivergenceKind

    @property
    def label(self) -> str:
        c = "" if self.coeff == 1 else f"{self.coeff} "
        return f"{c}{self.kind.label}"


def _d(u: str, l: str) -> DivergenceKind:
    return DivergenceKind.mean_difference(DifferencePair(MeanKind(u), MeanKind(l)))


def _term(coeff: str, kind: DivergenceKind) -> ChainTerm:
    return ChainTerm(Fraction(coeff), kind)


_AH = _term("1/2", _d("A", "H"))
_I = _term("1", JENSEN_SHANNON)
_N2N1 = _term("4", _d("N2", "N1"))
_N2G = _term("4/3", _d("N2", "G"))
_AG = _term("1", _d("A", "G"))
_AN2 = _term("4", _d("A", "N2"))
_J = _term("1/8", J_DIVERGENCE)
_T = _term("1", AG_MEAN)
_PSI = _term("1/16", SYM_CHI_SQUARE)
_P5H = _term("2/5", _d("P5", "H"))
_AP4 = _term("2/3", _d("A", "P4"))
_P5G = _term("2/3", _d("P5", "G"))
_P5N1 = _term("1", _d("P5", "N1"))
_P5N3 = _term("6/5", _d("P5", "N3"))
_P5N2 = _term("4/3", _d("P5", "N2"))
_P5A = _term("2", _d("P5", "A"))

CLASSIC_TERMS: tuple[ChainTerm, ...] = (_AH, _I, _N2N1, _N2G, _AG, _AN2, _J, _T, _PSI)
EXTENSION_TERMS: tuple[ChainTerm, ...] = (_P5H, _AP4, _P5G, _P5N1, _P5N3, _P5N2, _P5A)

CLASSIC_EDGES: tuple[tuple[ChainTerm, ChainTerm], ...] = tuple(zip(CLASSIC_TERMS, CLASSIC_TERMS[1:]))
EXTENSION_EDGES: tuple[tuple[ChainTerm, ChainTerm], ...] = (
    (_P5H, _N2N1),
    (_AP4, _I),
    (_AP4, _N2N1),
    (_AN2, _P5G),
    (_P5G, _P5N1),
    (_P5N1, _P5N3),
    (_P5N3, _P5N2),
    (_P5N2, _P5A),
    (_P5A, _T),
    (_P5G, _J),
)

ALL_TERMS = CLASSIC_TERMS + EXTENSION_TERMS
ALL_EDGES = CLASSIC_EDGES + EXTENSION_EDGES


@dataclass
class Comparison:
    lhs: str
    rhs: str
    lhs_value: float
    rhs_value: float
    violation: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.rhs_value - self.lhs_value

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "lhs_value": self.lhs_value,
            "rhs_value": self.rhs_value,
            "slack": self.slack,
            "violation": self.violation,
            "verdict": "pass" if self.passed else "fail",
        }


@dataclass
class DivergenceChainReport:
    terms: list[tuple[str, float]]
    comparisons: list[Comparison]
    tolerance: float
    smoothed: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    def to_dict(self) -> dict:
        return {
            "terms": [{"term": name, "value": v} for name, v in self.terms],
            "comparisons": [c.to_dict() for c in self.comparisons],
            "tolerance": self.tolerance,
            "smoothed": self.smoothed,
            "verdict": "pass" if self.passed else "fail",
        }


def _relative_violation(lhs, rhs):
    return (lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)


def verify_divergence_chain(P: Distribution, Q: Distribution, tolerance: float = 1e-10) -> DivergenceChainReport:
    """Evaluate every sandwich term on ``(P, Q)`` and test each comparison."""
    _check_pair(P, Q)
    values = {t: float(t.coeff) * divergence(t.kind, P, Q) for t in ALL_TERMS}
    comps = []
    for lo, hi in ALL_EDGES:
        v = float(_relative_violation(values[lo], values[hi]))
        comps.append(Comparison(lo.label, hi.label, values[lo], values[hi], v, v <= tolerance))
    return DivergenceChainReport(
        [(t.label, values[t]) for t in ALL_TERMS], comps, tolerance, P.smoothed or Q.smoothed
    )


# ---------------------------------------------------------------------------
# ratio of second derivatives against I, J, T


def _fI2(x):
    return 1.0 / (2.0 * x * (x + 1.0))


def _fJ2(x):
    return (x + 1.0) / (x * x)


def _fT2(x):
    return (x * x + 1.0) / (4.0 * x * x * (x + 1.0))


def _d_ap4_i(x):
    r = np.sqrt(x)
    return -6.0 * (r - 1.0) ** 3 / (r * (r + 1.0) ** 5)


def _d_p5g_j(x):
    r = np.sqrt(x)
    poly = x * x + 8.0 * x * r + 6.0 * x + 8.0 * r + 1.0
    return -3.0 * (r - 1.0) ** 3 * poly / (8.0 * r * (r + 1.0) ** 5 * (x + 1.0) ** 2)


def _d_p5a_t(x):
    r = np.sqrt(x)
    poly = 8.0 * r * (x * x + 1.0) * (r - 1.0) ** 2 + x**4 + 14.0 * x**3 + 10.0 * x * x + 14.0 * x + 1.0
    return -((r - 1.0) ** 3) * poly / (r * (r + 1.0) ** 5 * (x * x + 1.0) ** 2)


RATIO_CHECKS = {
    "AP4_vs_I": (DifferencePair(MeanKind("A"), MeanKind("P4")), _fI2, _d_ap4_i),
    "P5G_vs_J": (DifferencePair(MeanKind("P5"), MeanKind("G")), _fJ2, _d_p5g_j),
    "P5A_vs_T": (DifferencePair(MeanKind("P5"), MeanKind("A")), _fT2, _d_p5a_t),
}


@dataclass
class RatioReport:
    which: str
    limit_at_one: float
    limit_rational: Fraction | None
    sign_pattern_ok: bool
    derivative_agrees: bool
    max_ratio: float
    argmax: float

    @property
    def passed(self) -> bool:
        return self.sign_pattern_ok and self.derivative_agrees and self.max_ratio <= self.limit_at_one * (1 + 1e-9)

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "limit_at_one": self.limit_at_one,
            "limit_rational": None if self.limit_rational is None else str(self.limit_rational),
            "sign_pattern_ok": self.sign_pattern_ok,
            "derivative_agrees": self.derivative_agrees,
            "max_ratio": self.max_ratio,
            "argmax": self.argmax,
            "verdict": "pass" if self.passed else "fail",
        }


def ratio_monotonicity_check(which: str, grid: Sequence[float] | None = None) -> RatioReport:
    """Check that ``g''_pair / f''_div`` rises up to ``x = 1`` and falls after it.

    The closed-form derivative of the ratio must be positive below 1 and
    negative above 1 on ``grid``, and it must agree in sign with a centred
    difference of the ratio itself.  The limit at 1 is taken from
    ``x = 1 +- 1e-5``.
    """
    if which not in RATIO_CHECKS:
        raise InputError(f"unknown ratio check {which!r}; choose from {', '.join(RATIO_CHECKS)}")
    pair, f2, dratio = RATIO_CHECKS[which]
    xs = np.geomspace(1e-4, 1e4, 60) if grid is None else np.asarray(grid, dtype=float).ravel()
    if xs.size == 0 or not np.all(np.isfinite(xs)) or np.any(xs <= 0):
        raise InputError("grid points must be positive and finite")
    xs = xs[xs != 1.0]

    def ratio(x):
        return second_derivative(pair, x) / f2(x)

    d = dratio(xs)
    sign_ok = bool(np.all(d[xs < 1] > 0) and np.all(d[xs > 1] < 0))
    h = 1e-6 * xs
    numeric = (ratio(xs + h) - ratio(xs - h)) / (2 * h)
    # compare signs only where the derivative is clearly away from zero
    clear = np.abs(d) > 1e-6 * np.maximum(np.abs(ratio(xs)), 1.0) / xs
    agree = bool(np.all(np.sign(numeric[clear]) == np.sign(d[clear])))
    limit = 0.5 * (float(ratio(np.float64(1 - 1e-5))) + float(ratio(np.float64(1 + 1e-5))))
    try:
        frac = rationalize(float(ratio(np.float64(1.0))))
    except RationalizationError:
        frac = None
    values = ratio(xs)
    i = int(np.argmax(values))
    return RatioReport(which, limit, frac, sign_ok, agree, float(values[i]), float(xs[i]))


# ---------------------------------------------------------------------------
# Monte Carlo


def random_distribution(rng: np.random.Generator, n: int) -> Distribution:
    """Flat Dirichlet draw, clipped to at least 1e-9 and renormalised."""
    if n < 1:
        raise InputError("n must be at least 1")
    p = np.clip(rng.dirichlet(np.ones(n)), CLIP, None)
    return Distribution(p / p.sum())


@dataclass
class MonteCarloReport:
    pairs: int
    seed: int
    n_range: tuple[int, int]
    tolerance: float
    max_violation: dict[str, float] = field(default_factory=dict)
    violations: dict[str, int] = field(default_factory=dict)
    witness: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v == 0 for v in self.violations.values())

    def to_dict(self) -> dict:
        return {
            "pairs": self.pairs,
            "seed": self.seed,
            "n_range": list(self.n_range),
            "tolerance": self.tolerance,
            "comparisons": [
                {
                    "edge": k,
                    "max_violation": self.max_violation[k],
                    "violations": self.violations[k],
                    "worst_pair_index": self.witness[k],
                }
                for k in self.max_violation
            ],
            "verdict": "pass" if self.passed else "fail",
        }


def monte_carlo_audit(
    pairs: int = 10_000,
    seed: int = 0,
    n_range: tuple[int, int] = (2, 64),
    tolerance: float = 1e-10,
) -> MonteCarloReport:
    """Run the sandwich chain on random distribution pairs.

    Pair ``k`` has length drawn uniformly from ``n_range`` (inclusive).  All
    pairs are stacked into one array and reduced per pair, which gives the
    same sums as calling :func:`verify_divergence_chain` one pair at a time.
    """
    lo, hi = n_range
    if pairs < 1 or lo < 1 or hi < lo:
        raise InputError("need pairs >= 1 and 1 <= n_lo <= n_hi")
    rng = np.random.default_rng(seed)
    sizes = rng.integers(lo, hi + 1, size=pairs)
    ps, qs = [], []
    for n in sizes:
        ps.append(random_distribution(rng, int(n)).probabilities)
        qs.append(random_distribution(rng, int(n)).probabilities)
    p = np.concatenate(ps)
    q = np.concatenate(qs)
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    sums = {t: float(t.coeff) * np.add.reduceat(_coordinates(t.kind, p, q), starts) for t in ALL_TERMS}
    report = MonteCarloReport(pairs, seed, (lo, hi), tolerance)
    for a, b in ALL_EDGES:
        key = f"{a.label} <= {b.label}"
        v = _relative_violation(sums[a], sums[b])
        i = int(np.argmax(v))
        report.max_violation[key] = float(v[i])
        report.violations[key] = int(np.count_nonzero(v > tolerance))
        report.witness[key] = i
    return report
