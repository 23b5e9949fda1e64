"""Tour of the bivariate means: values, ordering, and where the order breaks down."""

import numpy as np

from meandiff import MeanKind, gini_mean, lehmer_mean, mean_value, power_mean
from meandiff import means as m


def main() -> None:
    pair = (1.0, 4.0)
    print(f"Named means of {pair}:")
    for kind in m.NAMED_KINDS:
        print(f"  {kind.label:>3}  {mean_value(kind, pair):.12f}")

    # Gini means cover the power and Lehmer families as one-parameter slices.
    print("\nThree routes to the same number:")
    print(f"  gini(2, 0)   = {gini_mean(2, 0, pair):.15f}")
    print(f"  power(2)     = {power_mean(2, pair):.15f}")
    print(f"  gini(2, 1)   = {gini_mean(2, 1, pair):.15f}")
    print(f"  lehmer(1)    = {lehmer_mean(1, pair):.15f}")

    # The named means form a chain, except that S and P5 cross each other.
    xs = np.geomspace(1e-3, 1e3, 7)
    s, p5 = m.mean_array(m.S, xs, 1.0), m.mean_array(m.P5, xs, 1.0)
    print("\nS versus P5 on (x, 1):")
    for x, a, b in zip(xs, s, p5):
        print(f"  x={x:9.3g}  S={a:12.6g}  P5={b:12.6g}  {'S > P5' if a > b else 'S < P5' if a < b else 'equal'}")

    # Parsing gives the CLI and chain files a compact syntax.
    for text in ("gini:0.5:-0.5", "power:3", "lehmer:-1", "N3"):
        kind = MeanKind.parse(text)
        print(f"\n{text!r:>16} -> {kind.label}, value at {pair}: {mean_value(kind, pair):.10f}")


if __name__ == "__main__":
    main()
