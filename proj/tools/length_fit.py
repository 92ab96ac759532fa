#!/usr/bin/env python3
"""Check which log base the frozen length scores were computed with.

The length score is 0.5 * (log(1 + words/1000) + min(1, chapters/10)).
This script recomputes it under ln, log2, and log10 for the frozen
fixture rows and prints the residuals; the natural log is the only base
whose worst residual stays inside the 0.01 regression tolerance.
"""

import math

# (words, chapters, frozen length score)
ROWS = [
    (650, 8, 0.65),
    (2396, 8, 1.01),
    (7391, 4, 1.26),
    (653, 8, 0.65),
    (3614, 5, 1.01),
    (4337, 2770, 1.34),
    (5158, 105, 1.41),
]

BASES = {"ln": math.log, "log2": math.log2, "log10": math.log10}


def score(words, chapters, log):
    return 0.5 * (log(1 + words / 1000.0) + min(1.0, chapters / 10.0))


def main():
    print(f"{'words':>6} {'chapters':>8} {'frozen':>7}", end="")
    for name in BASES:
        print(f" {name:>8}", end="")
    print()
    worst = {name: 0.0 for name in BASES}
    for words, chapters, frozen in ROWS:
        print(f"{words:>6} {chapters:>8} {frozen:>7.2f}", end="")
        for name, log in BASES.items():
            got = score(words, chapters, log)
            worst[name] = max(worst[name], abs(got - frozen))
            print(f" {got:>8.3f}", end="")
        print()
    print("\nworst residual per base:")
    for name, residual in worst.items():
        verdict = "fits" if residual <= 0.01 else "does not fit"
        print(f"  {name:>5}: {residual:.4f}  ({verdict} the 0.01 tolerance)")


if __name__ == "__main__":
    main()
