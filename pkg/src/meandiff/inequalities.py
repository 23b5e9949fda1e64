"""Inequality chains between weighted mean differences.

A chain is a small DAG of edges ``c_l * X <= c_r * Y`` where ``X`` and ``Y``
are mean differences (or single means).  Chains are plain data: the
built-ins ship as ``data/builtin.chain`` in the same text format that
:func:`parse_chains` accepts for user files.

The sharp constant for an edge between two convex generator differences is
the ratio of their second derivatives at ``x = 1``; :func:`beta_constant`
recovers it as an exact rational.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from graphlib import CycleError, TopologicalSorter
from importlib import resources
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .differences import DifferencePair, difference_array, second_derivative, second_derivative_fd
from .errors import (
    DegenerateRatioError,
    InputError,
    ParseError,
    RationalizationError,
    UnsupportedPairError,
)
from .means import MeanKind, mean_array

__all__ = [
    "Target",
    "ChainEdge",
    "InequalityChain",
    "BetaRecord",
    "EdgeAudit",
    "AuditReport",
    "TightnessReport",
    "PUBLISHED_BETAS",
    "parse_chains",
    "load_chain_file",
    "builtin_chains",
    "get_builtin_chain",
    "rationalize",
    "beta_constant",
    "beta_table",
    "audit_chain",
    "tightness_check",
    "default_grid",
]

Target = Union[DifferencePair, MeanKind]

MAX_DENOMINATOR = 1000
RATIONAL_RESIDUAL = 1e-9
TINY = 1e-300


def _target_label(t: Target) -> str:
    return t.label if isinstance(t, DifferencePair) else f"M({t.label})"


def _fmt_coeff(c: Fraction) -> str:
    return "" if c == 1 else f"{c} "


@dataclass(frozen=True)
class ChainEdge:
    """Asserts ``lhs_coeff * lhs <= rhs_coeff * rhs`` for every positive pair."""

    lhs_coeff: Fraction
    lhs: Target
    rhs_coeff: Fraction
    rhs: Target
    part: int | None = None

    def __post_init__(self) -> None:
        for name in ("lhs_coeff", "rhs_coeff"):
            value = getattr(self, name)
            try:
                value = Fraction(value)
            except (TypeError, ValueError):
                raise InputError(f"{name} must be rational, got {value!r}") from None
            if value <= 0:
                raise InputError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)
        if isinstance(self.lhs, DifferencePair) != isinstance(self.rhs, DifferencePair):
            raise InputError("an edge must compare two differences or two means")
        for side in (self.lhs, self.rhs):
            if not isinstance(side, (DifferencePair, MeanKind)):
                raise InputError(f"edge term must be a DifferencePair or MeanKind, got {side!r}")

    @property
    def beta(self) -> Fraction:
        """The multiplier ``b`` in the normalised form ``lhs <= b * rhs``."""
        return self.rhs_coeff / self.lhs_coeff

    @property
    def is_difference_edge(self) -> bool:
        return isinstance(self.lhs, DifferencePair)

    @property
    def label(self) -> str:
        text = f"{_fmt_coeff(self.lhs_coeff)}{_target_label(self.lhs)} <= {_fmt_coeff(self.rhs_coeff)}{_target_label(self.rhs)}"
        return text if self.part is None else f"{text} @{self.part}"

    def reversed(self) -> "ChainEdge":
        return ChainEdge(self.rhs_coeff, self.rhs, self.lhs_coeff, self.lhs, self.part)

    def sides(self, x, b=1.0) -> tuple[np.ndarray, np.ndarray]:
        """Weighted left and right values at ``(x, b)``."""
        return (float(self.lhs_coeff) * _evaluate(self.lhs, x, b), float(self.rhs_coeff) * _evaluate(self.rhs, x, b))


def _evaluate(t: Target, a, b):
    if isinstance(t, DifferencePair):
        return difference_array(t, a, b)
    return mean_array(t, a, b)


@dataclass(frozen=True)
class InequalityChain:
    name: str
    edges: tuple[ChainEdge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        graph: dict[tuple, set] = {}
        for e in self.edges:
            lo = (e.lhs_coeff, _target_label(e.lhs))
            hi = (e.rhs_coeff, _target_label(e.rhs))
            graph.setdefault(hi, set()).add(lo)
            graph.setdefault(lo, set())
        try:
            tuple(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise InputError(f"chain {self.name!r} contains a cycle: {exc.args[1]}") from None

    def __len__(self) -> int:
        return len(self.edges)


# ---------------------------------------------------------------------------
# chain text format

_TERM = re.compile(
    r"""^\s*(?:(?P<coef>[+]?\d+(?:/\d+)?)\s*\*?\s*)?
        (?P<kind>[DM])\s*\(\s*(?P<body>[^()]*)\)\s*$""",
    re.VERBOSE | re.IGNORECASE,
)


def _parse_term(text: str, where: str) -> tuple[Fraction, Target]:
    m = _TERM.match(text)
    if not m:
        raise ParseError(f"{where}: cannot read term {text.strip()!r}")
    try:
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: bad coefficient in {text.strip()!r}") from None
    body = m.group("body")
    try:
        if m.group("kind").upper() == "D":
            return coef, DifferencePair.parse(body)
        return coef, MeanKind.parse(body)
    except InputError as exc:
        raise ParseError(f"{where}: {exc}") from None


def parse_chains(text: str, source: str = "<string>") -> list[InequalityChain]:
    """Read every chain in a chain document.

    A document with edges but no ``chain`` header yields one chain named
    after ``source``.
    """
    chains: list[tuple[str, list[ChainEdge]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.lower().startswith("chain"):
            parts = line.split()
            if len(parts) != 2 or parts[0].lower() != "chain":
                raise ParseError(f"{where}: expected 'chain NAME'")
            chains.append((parts[1], []))
            continue
        if not chains:
            chains.append((Path(source).stem or "custom", []))
        part = None
        if "@" in line:
            line, tag = line.rsplit("@", 1)
            try:
                part = int(tag)
            except ValueError:
                raise ParseError(f"{where}: bad part tag {tag!r}") from None
        pieces = line.split("<=")
        if len(pieces) < 2:
            raise ParseError(f"{where}: an edge needs '<='")
        terms = [_parse_term(p, where) for p in pieces]
        for (cl, tl), (cr, tr) in zip(terms, terms[1:]):
            try:
                chains[-1][1].append(ChainEdge(cl, tl, cr, tr, part if len(terms) == 2 else None))
            except InputError as exc:
                raise ParseError(f"{where}: {exc}") from None
    out = []
    for name, edges in chains:
        if not edges:
            raise ParseError(f"{source}: chain {name!r} has no edges")
        try:
            out.append(InequalityChain(name, tuple(edges)))
        except InputError as exc:
            raise ParseError(f"{source}: {exc}") from None
    if not out:
        raise ParseError(f"{source}: no edges found")
    return out


def load_chain_file(path: str | Path) -> list[InequalityChain]:
    p = Path(path)
    return parse_chains(p.read_text(encoding="utf-8"), source=str(p))


@lru_cache(maxsize=1)
def _builtin() -> tuple[InequalityChain, ...]:
    text = resources.files("meandiff").joinpath("data/builtin.chain").read_text(encoding="utf-8")
    return tuple(parse_chains(text, source="builtin.chain"))


def builtin_chains() -> list[InequalityChain]:
    """The shipped chains: ``mean-order``, ``classic``, ``thm31-43``, ``thm31-44``, ``thm31-45``, ``improvement``."""
    return list(_builtin())


def get_builtin_chain(name: str) -> InequalityChain:
    for chain in _builtin():
        if chain.name == name:
            return chain
    known = ", ".join(c.name for c in _builtin())
    raise KeyError(f"unknown chain {name!r}; known chains: {known}")


# ---------------------------------------------------------------------------
# beta constants


def rationalize(value: float, max_denominator: int = MAX_DENOMINATOR, tol: float = RATIONAL_RESIDUAL) -> Fraction:
    """Best continued-fraction approximation with denominator ``<= max_denominator``.

    Raises :class:`RationalizationError` unless the residual is below ``tol``
    (relative to ``max(1, |value|)``).
    """
    if not math.isfinite(value):
        raise RationalizationError(f"cannot rationalize {value!r}")
    frac = Fraction(value).limit_denominator(max_denominator)
    if abs(float(frac) - value) >= tol * max(1.0, abs(value)):
        raise RationalizationError(f"{value!r} has no rational form with denominator <= {max_denominator}")
    return frac


def _g2(pair: DifferencePair, x):
    try:
        return second_derivative(pair, x)
    except UnsupportedPairError:
        return second_derivative_fd(pair, x)


def beta_constant(lhs: DifferencePair, rhs: DifferencePair) -> Fraction:
    """Exact ratio ``g''_lhs(1) / g''_rhs(1)``.

    >>> from meandiff.means import A, H, P6, N2
    >>> beta_constant(DifferencePair(A, H), DifferencePair(P6, N2))
    Fraction(8, 9)
    """
    num = float(_g2(lhs, 1.0))
    den = float(_g2(rhs, 1.0))
    if abs(den) < 1e-14:
        raise DegenerateRatioError(f"{rhs.label} has zero curvature at x = 1")
    return rationalize(num / den)


def _pair(text: str) -> DifferencePair:
    u, l = text.split(",")
    return DifferencePair(MeanKind(u), MeanKind(l))


# Published constants: part -> (lhs, rhs, beta) for "lhs <= beta * rhs".
PUBLISHED_BETAS: dict[int, tuple[DifferencePair, DifferencePair, Fraction]] = {
    part: (_pair(lhs), _pair(rhs), Fraction(beta))
    for part, lhs, rhs, beta in [
        (1, "P6,P1", "P6,P2", "4/3"),
        (2, "P6,P2", "S,A", "6"),
        (3, "S,A", "S,H", "1/3"),
        (4, "S,H", "A,H", "3/2"),
        (5, "A,H", "P6,N2", "8/9"),
        (6, "A,H", "P6,N3", "6/7"),
        (7, "A,H", "S,P4", "2/3"),
        (8, "P6,N3", "P6,N1", "14/15"),
        (9, "P6,N3", "P6,P4", "2/3"),
        (10, "S,P4", "P6,N1", "4/5"),
        (11, "S,P4", "P6,P4", "5/7"),
        (12, "P6,N2", "P6,G", "3/4"),
        (13, "P6,N1", "P6,G", "5/6"),
        (14, "P6,P4", "P6,G", "7/6"),
        (15, "P6,G", "P5,H", "6/5"),
        (16, "P6,G", "A,P4", "2"),
        (17, "P5,H", "N2,N1", "10"),
        (18, "A,P4", "N2,N1", "6"),
        (19, "N2,N1", "N2,G", "1/3"),
        (20, "N2,G", "A,G", "3/4"),
        (21, "A,G", "A,N2", "4"),
        (22, "A,N2", "P5,G", "1/6"),
        (23, "P5,G", "P5,N1", "3/2"),
        (24, "P5,N1", "P5,N3", "6/5"),
        (25, "P5,N3", "P5,N2", "10/9"),
        (26, "P5,N2", "P5,A", "3/2"),
        (27, "S,A", "S,N2", "4/5"),
        (28, "S,A", "S,N3", "3/4"),
        (29, "S,N2", "S,N1", "5/6"),
        (30, "S,N3", "S,N1", "8/9"),
        (31, "S,N1", "P6,G", "1/2"),
        (32, "S,N1", "S,G", "3/4"),
        (33, "S,G", "P5,H", "4/5"),
        (34, "P6,P1", "P5,P2", "16/9"),
        (35, "P5,P1", "P6,P2", "13/12"),
        (36, "P5,P1", "P5,P2", "13/9"),
        (37, "P6,P2", "P5,P3", "12/7"),
        (38, "P5,P2", "P5,P3", "9/7"),
        (39, "P5,P3", "P6,N2", "14/9"),
        (40, "P6,N2", "P6,S", "9/4"),
        (41, "P6,S", "A,G", "1"),
    ]
}


@dataclass(frozen=True)
class BetaRecord:
    edge: ChainEdge
    beta: Fraction
    part: int
    published: Fraction

    @property
    def matches(self) -> bool:
        return self.beta == self.published


def beta_table() -> list[BetaRecord]:
    """Recompute the sharp constant of every numbered part."""
    rows = []
    for part, (lhs, rhs, published) in PUBLISHED_BETAS.items():
        beta = beta_constant(lhs, rhs)
        rows.append(BetaRecord(ChainEdge(1, lhs, beta, rhs, part), beta, part, published))
    return rows


# ---------------------------------------------------------------------------
# audits


@dataclass
class EdgeAudit:
    edge: str
    max_violation: float
    witness: tuple[float, float]
    passed: bool
    tightness: "TightnessReport | None" = None

    def to_dict(self) -> dict:
        out = {
            "edge": self.edge,
            "max_violation": self.max_violation,
            "witness": list(self.witness),
            "verdict": "pass" if self.passed else "fail",
        }
        if self.tightness is not None:
            out["tightness"] = self.tightness.to_dict()
        return out


@dataclass
class AuditReport:
    chain: str
    samples: int
    seed: int | None
    range: tuple[float, float]
    tolerance: float
    edges: list[EdgeAudit] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.edges)

    @property
    def max_violation(self) -> float:
        return max(e.max_violation for e in self.edges)

    def failures(self) -> list[EdgeAudit]:
        return [e for e in self.edges if not e.passed]

    def to_dict(self) -> dict:
        return {
            "chain": self.chain,
            "samples": self.samples,
            "sampler": {"range": list(self.range), "seed": self.seed, "distribution": "log-uniform", "b": 1.0},
            "tolerance": self.tolerance,
            "max_violation": self.max_violation,
            "verdict": "pass" if self.passed else "fail",
            "edges": [e.to_dict() for e in self.edges],
        }


def _violation(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return (lhs - rhs) / np.maximum(np.abs(rhs), TINY)


def sample_ratios(samples: int, seed: int, lo: float = 1e-6, hi: float = 1e6) -> np.ndarray:
    """Log-uniform draws of ``x = a/b`` on ``[lo, hi]``."""
    if samples < 1:
        raise InputError(f"samples must be >= 1, got {samples}")
    if not (0.0 < lo < hi) or not math.isfinite(hi):
        raise InputError(f"range must satisfy 0 < lo < hi < inf, got [{lo}, {hi}]")
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=samples))


def audit_edge(edge: ChainEdge, xs: np.ndarray, tolerance: float = 1e-10) -> EdgeAudit:
    lhs, rhs = edge.sides(xs)
    v = _violation(lhs, rhs)
    i = int(np.argmax(v))
    worst = float(v[i])
    return EdgeAudit(edge.label, worst, (float(xs[i]), 1.0), worst <= tolerance)


def audit_chain(
    chain: InequalityChain,
    samples: int = 100_000,
    seed: int = 0,
    range: tuple[float, float] = (1e-6, 1e6),
    tolerance: float = 1e-10,
    xs: Sequence[float] | None = None,
    tightness: bool = False,
) -> AuditReport:
    """Evaluate every edge on sampled ``(x, 1)`` pairs and report the worst slack.

    The violation of an edge at one sample is ``(lhs - rhs) / max(|rhs|, 1e-300)``
    with both sides already weighted; an edge passes when its maximum is at
    most ``tolerance``.  Supplying ``xs`` bypasses the sampler.
    """
    if not chain.edges:
        raise InputError(f"chain {chain.name!r} has no edges")
    if tolerance < 0:
        raise InputError("tolerance must be nonnegative")
    if xs is None:
        points = sample_ratios(samples, seed, *range)
    else:
        points = np.asarray(xs, dtype=float).ravel()
        if points.size == 0 or not np.all(np.isfinite(points)) or np.any(points <= 0):
            raise InputError("explicit sample points must be positive and finite")
        seed = None
        samples = int(points.size)
    report = AuditReport(chain.name, samples, seed, (float(range[0]), float(range[1])), tolerance)
    for edge in chain.edges:
        row = audit_edge(edge, points, tolerance)
        if tightness and edge.is_difference_edge:
            row.tightness = tightness_check(edge)
            row.passed = row.passed and row.tightness.passed
        report.edges.append(row)
    return report


@dataclass
class TightnessReport:
    edge: str
    beta: Fraction
    ratio_at_one: float
    ratio_near_one: tuple[float, float]
    sharp_at_one: bool
    max_ratio: float
    argmax: float
    bounded_on_grid: bool

    @property
    def passed(self) -> bool:
        # Only local sharpness decides; a global bound on the ratio is
        # sufficient for the inequality but not necessary.
        return self.sharp_at_one

    def to_dict(self) -> dict:
        return {
            "beta": str(self.beta),
            "ratio_at_one": self.ratio_at_one,
            "ratio_near_one": list(self.ratio_near_one),
            "sharp_at_one": self.sharp_at_one,
            "max_ratio_on_grid": self.max_ratio,
            "argmax": self.argmax,
            "bounded_on_grid": self.bounded_on_grid,
        }


def default_grid(points: int = 61, lo: float = 1e-4, hi: float = 1e4) -> np.ndarray:
    return np.geomspace(lo, hi, points)


def tightness_check(edge: ChainEdge, grid: Sequence[float] | None = None) -> TightnessReport:
    """Compare ``g''_lhs / g''_rhs`` against the edge's multiplier.

    ``sharp_at_one`` requires the ratio at ``1 +- 1e-4`` to lie within
    ``1e-3`` of the multiplier.  ``bounded_on_grid`` additionally reports
    whether the ratio stays below it (with ``1e-9`` slack) across ``grid``.
    """
    if not edge.is_difference_edge:
        raise InputError("tightness is defined for difference edges only")
    xs = default_grid() if grid is None else np.asarray(grid, dtype=float).ravel()
    if xs.size == 0 or not np.all(np.isfinite(xs)) or np.any(xs <= 0):
        raise InputError("grid points must be positive and finite")
    beta = edge.beta

    def ratio(x: float) -> float:
        return float(_g2(edge.lhs, x)) / float(_g2(edge.rhs, x))

    ratios = np.array([ratio(float(x)) for x in xs])
    near = (ratio(1.0 - 1e-4), ratio(1.0 + 1e-4))
    b = float(beta)
    i = int(np.argmax(ratios))
    return TightnessReport(
        edge=edge.label,
        beta=beta,
        ratio_at_one=ratio(1.0),
        ratio_near_one=near,
        sharp_at_one=all(abs(r - b) <= 1e-3 for r in near),
        max_ratio=float(ratios[i]),
        argmax=float(xs[i]),
        bounded_on_grid=bool(np.all(ratios <= b * (1 + 1e-9))),
    )
