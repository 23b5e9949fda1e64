"""Exact positivity certificates for polynomials in half-integer powers."""

from fractions import Fraction

from meandiff.polycert import builtin_half_power, builtin_polynomial, certify_positive, parse_polynomial


def show(name, p) -> None:
    cert = certify_positive(p)
    roots = ", ".join(f"{r.midpoint:.10f}" + (f" (x{r.multiplicity})" if r.multiplicity > 1 else "") for r in cert.roots)
    print(f"{name:>8}  deg {p.degree:2d}  p(1) = {cert.value_at_one}  roots [{roots}]  {cert.verdict}")


def main() -> None:
    # x -> t^2 turns a polynomial in sqrt(x) into an ordinary one in t.
    half = builtin_half_power("h1")
    print(f"h1 as a half-power polynomial, max exponent {half.max_exponent}")
    print(f"h1 in t: {builtin_polynomial('h1')}\n")

    for name in ("h1", "h2", "h3", "part7", "part31", "part41"):
        show(name, builtin_polynomial(name))

    # Sturm sequences in exact rationals: no rounding enters the verdict.
    print()
    show("custom", parse_polynomial("x^2 - 2*x^(3/2) + x"))
    show("custom", parse_polynomial("t^2 - 4"))
    p = parse_polynomial("t^4 - 4*t^3 + 6*t^2 - 4*t + 1")
    print(f"\n(t - 1)^4 at t = 3/2: {p(Fraction(3, 2))}")


if __name__ == "__main__":
    main()
