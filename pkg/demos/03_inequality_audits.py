"""Sharp constants between mean differences, and randomized audits of the chains."""

from meandiff import DifferencePair, audit_chain, beta_constant, builtin_chains, tightness_check
from meandiff.inequalities import beta_table


def main() -> None:
    lhs, rhs = DifferencePair.parse("A,H"), DifferencePair.parse("P6,N2")
    print(f"best beta with {lhs.label} <= beta {rhs.label}: {beta_constant(lhs, rhs)}")

    # Recompute the whole table; two published constants do not survive.
    for rec in beta_table():
        if not rec.matches:
            print(f"  part {rec.part}: computed {rec.beta}, published {rec.published}")

    # The computed constants are sharp: the ratio tends to beta at x = 1.
    rec = beta_table()[6]
    t = tightness_check(rec.edge)
    print(f"\npart {rec.part}: ratio near one {t.ratio_near_one}, sharp={t.sharp_at_one}")

    print()
    for chain in builtin_chains():
        report = audit_chain(chain, samples=20_000, seed=0)
        verdict = "pass" if report.passed else "fail"
        print(f"{chain.name:>12}  {len(chain.edges):2d} edges  max violation {report.max_violation:.1e}  {verdict}")


if __name__ == "__main__":
    main()
