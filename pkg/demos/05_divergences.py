"""Classical divergences as sums of mean differences, and the chain that orders them."""

import numpy as np

from meandiff import Distribution, DivergenceKind, divergence, verify_divergence_chain
from meandiff.divergences import monte_carlo_audit, random_distribution, ratio_monotonicity_check


def main() -> None:
    P = Distribution([0.5, 0.5])
    Q = Distribution([0.25, 0.75])
    for tag in ("I", "J", "T", "psi", "Delta", "h", "D(P6,N2)"):
        kind = DivergenceKind.parse(tag)
        print(f"{kind.label:>9}(P, Q) = {divergence(kind, P, Q):.12f}")

    # A zero probability needs smoothing before any logarithmic measure.
    R = Distribution.from_values([0.0, 3.0, 1.0], smooth=True, normalize=True)
    print(f"\nsmoothed: {np.array2string(R.probabilities, precision=6)}")

    report = verify_divergence_chain(P, Q)
    print(f"\nchain for (P, Q): {'pass' if report.passed else 'fail'}")
    for c in report.comparisons[:5]:
        print(f"  {c.lhs:>14} <= {c.rhs:<14} slack {c.slack:.3e}")

    rng = np.random.default_rng(1)
    big = random_distribution(rng, 50), random_distribution(rng, 50)
    print(f"\n50-point random pair: chain {'pass' if verify_divergence_chain(*big).passed else 'fail'}")

    mc = monte_carlo_audit(pairs=2000, seed=0)
    print(f"Monte Carlo over 2000 pairs: {'pass' if mc.passed else 'fail'}, "
          f"worst violation {max(mc.max_violation.values()):.1e}")

    for which in ("AP4_vs_I", "P5G_vs_J", "P5A_vs_T"):
        r = ratio_monotonicity_check(which)
        print(f"{which:>9}: limit {r.limit_rational}, max on grid {r.max_ratio:.6f}")


if __name__ == "__main__":
    main()
