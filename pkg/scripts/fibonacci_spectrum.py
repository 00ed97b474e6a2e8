"""Fibonacci model comb: Bragg spectrum, decomposition residual, and how the
residual shrinks as the dual window widens.
"""

import argparse

from bragg.autocorr import autocorrelation
from bragg.comb import VanHoveSpec
from bragg.cps import dual_window, generate_model_comb, preset
from bragg.exactnum import QuadValue, format_quad
from bragg.spectrum import bragg_scan, decompose
from bragg.verify import default_weight


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=float, default=10.0)
    ap.add_argument("--internal", type=float, nargs="+", default=[5.0, 10.0, 20.0, 40.0])
    ap.add_argument("--top", type=int, default=12)
    args = ap.parse_args()
    spec = VanHoveSpec()
    s = preset("fibonacci")
    c = generate_model_comb(s, default_weight(s), spec.largest)
    a = autocorrelation(c, spec, spec.sizes[-1], 20)
    g0 = a.value_at(QuadValue(0)).real
    print(f"{len(c)} points, gamma_n(0) = {g0:.6f}")

    se = None
    for imax in args.internal:
        cands = dual_window(s, args.kmax, imax, kmin=0)
        se = bragg_scan(c, cands, spec, freq_window=(0.0, args.kmax), meta={"internal_max": imax})
        d = decompose(a, se)
        print(f"|k*| <= {imax:5.1f}: {len(cands):5d} candidates, {len(se.bragg()):4d} bragg, "
              f"residual {100 * d.residual() / g0:.3f}% of gamma(0)")

    print("\nstrongest peaks (widest window):")
    for e in sorted(se.bragg(), key=lambda e: -e.i_inf)[:args.top]:
        print(f"  k = {format_quad(e.k):<20s} {e.k_float:9.5f}  I = {e.i_inf:.6f}")


if __name__ == "__main__":
    main()
