"""Run every verification suite for each preset and print a verdict table."""

import argparse
import time

from bragg.comb import VanHoveSpec
from bragg.verify import THEOREMS, run_suite


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--presets", nargs="+", default=["integer", "zroot2", "fibonacci"])
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    spec = VanHoveSpec()
    for name in args.presets:
        for theorem in THEOREMS:
            t0 = time.perf_counter()
            reports = run_suite(theorem, name, args.seed, spec, threads=args.threads)
            dt = time.perf_counter() - t0
            for r in reports:
                failed = [c.name for c in r.checks if not c.passed]
                status = "pass" if r.passed else "FAIL " + ",".join(failed)
                print(f"{name:<10s} {theorem:<9s} {r.scenario:<36s} {status}")
            print(f"{'':<10s} {theorem:<9s} {'':<36s} {dt:.2f}s")


if __name__ == "__main__":
    main()
