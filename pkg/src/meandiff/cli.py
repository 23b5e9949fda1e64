"""Command-line front end.

Exit codes: 0 every check passed, 1 a check failed or an input was outside
its domain, 2 usage, parse or file-access errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .divergences import Distribution, DivergenceKind, divergence, verify_divergence_chain
from .errors import InputError, MeanDiffError, ParseError
from .inequalities import InequalityChain, audit_chain, beta_table, builtin_chains, get_builtin_chain, load_chain_file
from .means import MeanKind, mean_value
from .polycert import BUILTIN_NAMES, certify_positive, builtin_polynomial, parse_polynomial

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

FORMATS = ("json", "csv", "text")


class UsageError(Exception):
    """Bad command line or unreadable input; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    samples: int = 100_000
    range: tuple[float, float] = (1e-6, 1e6)
    tolerance: float = 1e-10
    format: str = "text"
    smooth: bool = False
    normalize: bool = False
    inputs: list[str] = field(default_factory=list)
    output: str | None = None

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise UsageError(f"--samples must be >= 1, got {self.samples}")
        lo, hi = self.range
        if not (0 < lo < hi) or not math.isfinite(hi):
            raise UsageError(f"--range needs 0 < LO < HI, got {lo}:{hi}")
        if not self.tolerance >= 0:
            raise UsageError(f"--tolerance must be >= 0, got {self.tolerance}")
        if self.format not in FORMATS:
            raise UsageError(f"--format must be one of {', '.join(FORMATS)}")
        self.range = (float(lo), float(hi))

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["range"] = list(self.range)
        return out


@dataclass
class CheckResult:
    name: str
    verdict: str
    max_violation: float | None = None
    witness: list[float] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.verdict not in ("pass", "fail", "error"):
            raise ValueError(f"bad verdict {self.verdict!r}")


@dataclass
class ReportDocument:
    tool: str
    version: str
    config: dict[str, Any]
    results: list[CheckResult]
    verdict: str
    timing: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ReportDocument":
        results = [CheckResult(**r) for r in data["results"]]
        return cls(data["tool"], data["version"], data["config"], results, data["verdict"], data.get("timing", {}))

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))

    def deterministic_json(self) -> str:
        """JSON without the wall-clock block, for byte comparison across runs."""
        data = self.to_dict()
        data.pop("timing", None)
        return json.dumps(data, indent=2) + "\n"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return "%.15g" % value
    return str(value)


# ---------------------------------------------------------------------------
# rendering


def render(doc: ReportDocument, fmt: str) -> str:
    if fmt == "json":
        return doc.to_json()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "verdict", "max_violation", "witness"])
        for r in doc.results:
            witness = "" if r.witness is None else ";".join(repr(float(v)) for v in r.witness)
            viol = "" if r.max_violation is None else repr(float(r.max_violation))
            w.writerow([r.name, r.verdict, viol, witness])
        return buf.getvalue()
    lines = []
    for r in doc.results:
        parts = [r.name, r.verdict]
        if r.max_violation is not None:
            parts.append(f"max_violation={_fmt(float(r.max_violation))}")
        if r.witness is not None:
            parts.append("witness=(" + ", ".join(_fmt(float(v)) for v in r.witness) + ")")
        if "summary" in r.details:
            parts.append(str(r.details["summary"]))
        lines.append("  ".join(parts))
    lines.append(f"verdict: {doc.verdict}")
    return "\n".join(lines) + "\n"


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        try:
            Path(cfg.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.output}: {exc}") from None
    else:
        sys.stdout.write(text)


def _document(cfg: RunConfig, results: list[CheckResult], started: float) -> ReportDocument:
    verdict = "pass" if all(r.verdict == "pass" for r in results) else "fail"
    timing = {"wall_seconds": time.perf_counter() - started, "finished_at": time.time()}
    return ReportDocument("meandiff", __version__, cfg.to_dict(), results, verdict, timing)


def _finish(doc: ReportDocument, cfg: RunConfig) -> int:
    _emit(render(doc, cfg.format), cfg)
    return EXIT_OK if doc.verdict == "pass" else EXIT_FAIL


# ---------------------------------------------------------------------------
# commands


def cmd_mean(args: argparse.Namespace, cfg: RunConfig) -> int:
    started = time.perf_counter()
    kind = MeanKind.parse(args.kind)
    try:
        a, b = float(args.a), float(args.b)
    except ValueError:
        raise ParseError(f"a and b must be decimal numbers, got {args.a!r}, {args.b!r}") from None
    value = mean_value(kind, (a, b))
    if cfg.format == "text":
        _emit(_fmt(value) + "\n", cfg)
        return EXIT_OK
    result = CheckResult(f"mean {kind.label}", "pass", details={"a": a, "b": b, "value": value})
    return _finish(_document(cfg, [result], started), cfg)


def _resolve_chains(spec: str) -> list[InequalityChain]:
    if spec == "all":
        return builtin_chains()
    try:
        return [get_builtin_chain(spec)]
    except KeyError:
        pass
    path = Path(spec)
    if not path.exists():
        known = ", ".join(c.name for c in builtin_chains())
        raise UsageError(f"unknown chain {spec!r} (builtin chains: {known}, or give a file)")
    try:
        return load_chain_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read {spec}: {exc}") from None


def cmd_audit(args: argparse.Namespace, cfg: RunConfig) -> int:
    started = time.perf_counter()
    results = []
    for chain in _resolve_chains(args.chain):
        report = audit_chain(chain, cfg.samples, cfg.seed, cfg.range, cfg.tolerance, tightness=True)
        for row in report.edges:
            details = {"chain": chain.name}
            if row.tightness is not None:
                details["tightness"] = row.tightness.to_dict()
            results.append(
                CheckResult(
                    f"{chain.name}: {row.edge}",
                    "pass" if row.passed else "fail",
                    row.max_violation,
                    list(row.witness),
                    details,
                )
            )
    return _finish(_document(cfg, results, started), cfg)


def cmd_betas(args: argparse.Namespace, cfg: RunConfig) -> int:
    started = time.perf_counter()
    results = []
    for rec in beta_table():
        note = "matches published" if rec.matches else f"published {rec.published}"
        results.append(
            CheckResult(
                f"part {rec.part}",
                "pass" if rec.matches else "fail",
                details={
                    "lhs": rec.edge.lhs.label,
                    "rhs": rec.edge.rhs.label,
                    "beta": str(rec.beta),
                    "published": str(rec.published),
                    "matches": rec.matches,
                    "summary": f"{rec.edge.lhs.label} <= {rec.beta} {rec.edge.rhs.label}: {rec.beta}, {note}",
                },
            )
        )
    return _finish(_document(cfg, results, started), cfg)


def _load_polynomial(spec: str):
    if spec.startswith("builtin:"):
        try:
            return builtin_polynomial(spec)
        except KeyError:
            raise UsageError(f"unknown builtin {spec!r}; known: {', '.join(BUILTIN_NAMES)}") from None
    path = Path(spec)
    if path.is_file():
        try:
            spec = path.read_text(encoding="utf-8").strip()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from None
    return parse_polynomial(spec)


def cmd_certify(args: argparse.Namespace, cfg: RunConfig) -> int:
    started = time.perf_counter()
    poly = _load_polynomial(args.poly)
    cert = certify_positive(poly)
    details = cert.to_dict()
    details["summary"] = (
        f"{cert.verdict}; p(1)={cert.value_at_one}; {cert.real_root_count} real roots"
        + "".join(f" {_fmt(r.midpoint)}(x{r.multiplicity})" for r in cert.roots)
    )
    verdict = "fail" if cert.verdict == "indefinite" else "pass"
    return _finish(_document(cfg, [CheckResult(f"certify {args.poly}", verdict, details=details)], started), cfg)


def read_distribution_values(path: str) -> list[float]:
    """CSV (one value per line, '#' comments and blanks skipped) or a JSON array."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in data):
            raise ParseError(f"{path}: expected a JSON array of numbers")
        return [float(v) for v in data]
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            values.append(float(s.rstrip(",")))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: not a number: {s!r}") from None
    return values


def _load_distribution(path: str, cfg: RunConfig) -> Distribution:
    return Distribution.from_values(read_distribution_values(path), normalize=cfg.normalize, smooth=cfg.smooth)


def cmd_divergence(args: argparse.Namespace, cfg: RunConfig) -> int:
    started = time.perf_counter()
    operands = list(args.operands)
    if args.chain:
        if len(operands) != 2:
            raise UsageError("divergence --chain takes two distribution files")
        kind = None
        p_path, q_path = operands
    else:
        if len(operands) != 3:
            raise UsageError("divergence takes KIND P Q")
        kind = DivergenceKind.parse(operands[0])
        p_path, q_path = operands[1:]
    P = _load_distribution(p_path, cfg)
    Q = _load_distribution(q_path, cfg)
    if kind is not None:
        value = divergence(kind, P, Q)
        if cfg.format == "text":
            _emit(_fmt(value) + "\n", cfg)
            return EXIT_OK
        result = CheckResult(f"divergence {kind.label}", "pass", details={"value": value, "n": len(P)})
        return _finish(_document(cfg, [result], started), cfg)
    report = verify_divergence_chain(P, Q, cfg.tolerance)
    results = [
        CheckResult(
            f"{c.lhs} <= {c.rhs}",
            "pass" if c.passed else "fail",
            c.violation,
            None,
            {"lhs_value": c.lhs_value, "rhs_value": c.rhs_value, "slack": c.slack},
        )
        for c in report.comparisons
    ]
    doc = _document(cfg, results, started)
    doc.config["terms"] = [{"term": name, "value": v} for name, v in report.terms]
    return _finish(doc, cfg)


# ---------------------------------------------------------------------------
# argument parsing


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def d(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--samples", type=int, default=d(100_000), help="sample count for audits")
    parser.add_argument("--seed", type=int, default=d(0), help="random seed")
    parser.add_argument("--range", type=_parse_range, default=d((1e-6, 1e6)), metavar="LO:HI", help="sampling range for x = a/b")
    parser.add_argument("--tolerance", type=float, default=d(1e-10), help="relative violation tolerance")
    parser.add_argument("--format", choices=FORMATS, default=d("text"))
    parser.add_argument("--smooth", action="store_true", default=d(False), help="replace zero probabilities by smoothing")
    parser.add_argument("--normalize", action="store_true", default=d(False), help="divide distributions by their sum")
    parser.add_argument("--output", metavar="PATH", default=d(None), help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meandiff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    p = sub.add_parser("mean", parents=[common], help="evaluate a mean")
    p.add_argument("kind", help='A, G, P5, ... or "gini:R:S", "power:R", "lehmer:R"')
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("audit", parents=[common], help="audit an inequality chain")
    p.add_argument("chain", help="builtin chain name, 'all', or a chain file")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("betas", parents=[common], help="print the beta-constant table")
    p.set_defaults(func=cmd_betas)

    p = sub.add_parser("certify", parents=[common], help="positivity certificate for a polynomial")
    p.add_argument("poly", help='builtin:h1, a literal like "t^2 - 4", or a file')
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("divergence", parents=[common], help="divergence between two distributions")
    p.add_argument("--chain", action="store_true", help="report the whole sandwich chain instead")
    p.add_argument("operands", nargs="+", metavar="ARG", help="KIND P Q, or P Q with --chain")
    p.set_defaults(func=cmd_divergence)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = RunConfig(
            command=args.command,
            seed=args.seed,
            samples=args.samples,
            range=args.range,
            tolerance=args.tolerance,
            format=args.format,
            smooth=args.smooth,
            normalize=args.normalize,
            inputs=[str(v) for k in ("chain", "poly", "operands") for v in _as_list(getattr(args, k, None))],
            output=args.output,
        )
        return args.func(args, cfg)
    except (UsageError, ParseError) as exc:
        print(f"meandiff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, MeanDiffError) as exc:
        print(f"meandiff: {exc}", file=sys.stderr)
        return EXIT_FAIL


def _as_list(value) -> list:
    if value is None or isinstance(value, bool):
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


if __name__ == "__main__":
    raise SystemExit(main())
