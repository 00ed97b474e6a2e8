"""Integer lattice against its closed forms.

Prints the Bragg peaks found among the quarter-integer candidates and the
largest deviation of gamma_n from (2n + 1 - |z|) / (2n).
"""

import argparse
from fractions import Fraction

from bragg.autocorr import autocorrelation
from bragg.comb import VanHoveSpec
from bragg.exactnum import QuadValue
from bragg.spectrum import bragg_scan
from bragg.verify import lattice_comb


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--radius", type=int, default=10)
    args = ap.parse_args()
    spec = VanHoveSpec(1.0, tuple(args.sizes))
    c = lattice_comb(1, spec.largest)

    se = bragg_scan(c, [Fraction(p, 4) for p in range(-40, 41)], spec)
    print("k      " + "  ".join(f"I_n{n:<6d}" for n in spec.sizes) + "  class")
    for e in se.entries:
        if e.k_float >= 0:
            print(f"{e.k_float:<6.2f} " + "  ".join(f"{v:<9.6f}" for v in e.intensities) + f"  {e.label}")

    for n in spec.sizes:
        a = autocorrelation(c, spec, n, args.radius)
        err = max(abs(a.value_at(QuadValue(z)) - (2 * n + 1 - abs(z)) / (2 * n))
                  for z in range(-args.radius, args.radius + 1))
        print(f"n={n}: max |gamma_n - closed form| = {err:.2e}")


if __name__ == "__main__":
    main()
